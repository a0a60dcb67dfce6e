"""Hypersurface germs: Jacobian criterion, singular-locus certification,
multiplicity, coordinate changes, and jet arithmetic."""

from __future__ import annotations

from dataclasses import dataclass, field as dfield

from .fields import FieldError
from .poly import Polynomial
from .groebner import (GroebnerBasis, buchberger, grlex, power_member)


@dataclass(frozen=True)
class HypersurfaceGerm:
    """A defining polynomial with distinguished origin in its ambient space."""

    f: Polynomial
    label: str | None = None

    def __post_init__(self):
        if self.f.is_zero():
            raise FieldError("germ polynomial must be nonzero")
        if not self.f.field.is_zero(self.f.constant_term()):
            raise FieldError("origin does not lie on the hypersurface")

    @property
    def variables(self):
        return self.f.variables

    @property
    def field(self):
        return self.f.field


@dataclass(frozen=True)
class CoordinateChange:
    """A coordinate change new = phi(old), applied to germs via phi^-1.

    kinds: 'relabel' (a permutation of variable names), 'shear'
    (v := v + h with h free of v), 'linear' (invertible linear change).
    """

    kind: str
    assignment: dict

    def __post_init__(self):
        if self.kind not in ("relabel", "shear", "linear"):
            raise FieldError(f"unknown change kind {self.kind!r}")


def jacobian_ideal(germ: HypersurfaceGerm, order=None) -> GroebnerBasis:
    """Reduced basis of (all partials of f, and f itself)."""
    f = germ.f
    gens = [f.derivative(v) for v in f.variables]
    gens = [g for g in gens if not g.is_zero()]
    gens.append(f)
    if order is None:
        order = grlex(*f.variables)
    return buchberger(gens, order)


@dataclass
class LocusReport:
    line: tuple
    vanishes_on_line: bool
    offending_generator: str | None
    radical_exponents: dict
    bound: int
    passed: bool = dfield(init=False)

    def __post_init__(self):
        self.passed = self.vanishes_on_line and all(
            e is not None for e in self.radical_exponents.values())


def singular_locus_is_line(germ: HypersurfaceGerm, line_vars, bound: int = 8,
                           jacobian: GroebnerBasis | None = None) -> LocusReport:
    """Certify that the singular locus equals the coordinate line cut by the
    three given variables, set-theoretically.

    (a) every Jacobian generator must vanish identically on the line;
    (b) each line variable must enter the radical of the Jacobian ideal
        within the exponent bound.
    """
    line_vars = tuple(line_vars)
    if len(line_vars) != 3:
        raise FieldError("a line center is cut by exactly 3 variables")
    f = germ.f
    zero = Polynomial.zero(f.variables, f.field)
    assignment = {v: zero for v in line_vars}
    partials = [f.derivative(v) for v in f.variables]
    offending = None
    for name, g in [("f", f)] + list(zip([f"d/d{v}" for v in f.variables], partials)):
        if g.is_zero():
            continue
        if not g.substitute(assignment).is_zero():
            offending = name
            break
    gb = jacobian if jacobian is not None else jacobian_ideal(germ)
    exps = {}
    for v in line_vars:
        xv = Polynomial.variable(v, f.variables, f.field)
        exps[v] = power_member(xv, gb, bound)
    return LocusReport(line=line_vars, vanishes_on_line=offending is None,
                       offending_generator=offending,
                       radical_exponents=exps, bound=bound)


def multiplicity_along(f: Polynomial, line_vars) -> int:
    """Minimum over terms of the total degree in the given variables."""
    idx = [f.variables.index(v) for v in line_vars]
    if f.is_zero():
        raise FieldError("zero polynomial has no multiplicity")
    return min(sum(m[i] for i in idx) for m in f.terms)


def _inverse_assignment(change: CoordinateChange, variables, field):
    if change.kind == "relabel":
        mapping = dict(change.assignment)
        if sorted(mapping) != sorted(mapping.values()):
            raise FieldError("relabel must permute variable names")
        return {"__relabel__": mapping}
    if change.kind == "shear":
        if len(change.assignment) != 1:
            raise FieldError("a shear assigns exactly one variable")
        (v, h), = change.assignment.items()
        if not isinstance(h, Polynomial):
            raise FieldError("shear image must be a Polynomial")
        if h.involves(v):
            raise FieldError(f"shear term may not involve {v!r}")
        xv = Polynomial.variable(v, variables, field)
        return {v: xv - h}
    if change.kind == "linear":
        names = list(change.assignment)
        n = len(names)
        matrix = []
        for v in names:
            img = change.assignment[v]
            if img.total_degree() > 1 or not img.field.is_zero(img.constant_term()):
                raise FieldError("linear change images must be homogeneous linear")
            row = []
            for w in names:
                i = img.variables.index(w)
                unit = tuple(1 if k == i else 0 for k in range(len(img.variables)))
                row.append(img.terms.get(unit, field.zero))
            for w in img.variables:
                if w not in names and img.involves(w):
                    raise FieldError("linear change mixes unassigned variables")
            matrix.append(row)
        inv = _invert_matrix(matrix, field)
        out = {}
        for j, v in enumerate(names):
            img = Polynomial.zero(variables, field)
            for i, w in enumerate(names):
                img = img + Polynomial.variable(w, variables, field) * inv[j][i]
            out[v] = img
        return out
    raise FieldError(f"unknown change kind {change.kind!r}")


def _invert_matrix(matrix, field):
    n = len(matrix)
    aug = [[matrix[i][j] for j in range(n)] +
           [field.one if i == j else field.zero for j in range(n)]
           for i in range(n)]
    for col in range(n):
        pivot = next((r for r in range(col, n)
                      if not field.is_zero(aug[r][col])), None)
        if pivot is None:
            raise FieldError("linear change is not invertible")
        aug[col], aug[pivot] = aug[pivot], aug[col]
        inv = field.inv(aug[col][col])
        aug[col] = [field.mul(x, inv) for x in aug[col]]
        for r in range(n):
            if r != col and not field.is_zero(aug[r][col]):
                factor = aug[r][col]
                aug[r] = [field.sub(x, field.mul(factor, y))
                          for x, y in zip(aug[r], aug[col])]
    return [row[n:] for row in aug]


def apply_change(germ: HypersurfaceGerm, change: CoordinateChange) -> HypersurfaceGerm:
    """Rewrite the germ in the new coordinates (origin preserved)."""
    f = germ.f
    inv = _inverse_assignment(change, f.variables, f.field)
    if "__relabel__" in inv:
        g = f.permute_variables(inv["__relabel__"])
    else:
        g = f.substitute(inv)
    return HypersurfaceGerm(f=g, label=germ.label)


# ---------------------------------------------------------------------------
# jets

def jet_equal(f: Polynomial, g: Polynomial, N: int) -> bool:
    return f.truncate(N) == g.truncate(N)


def jet_inverse(u: Polynomial, N: int) -> Polynomial:
    """Inverse of a local unit as a truncated geometric series."""
    c = u.constant_term()
    if u.field.is_zero(c):
        raise FieldError("not a unit: zero constant term")
    cinv = u.field.inv(c)
    one = Polynomial.constant(u.variables, u.field, 1)
    m = one - (u * cinv)        # m has positive order
    m = m.truncate(N)
    acc = one
    power = one
    for _ in range(1, N):
        power = (power * m).truncate(N)
        if power.is_zero():
            break
        acc = acc + power
    return (acc * cinv).truncate(N)


def unit_replace_check(f: Polynomial, u: Polynomial, g: Polynomial, N: int) -> bool:
    """Verify f = u * g modulo terms of total degree >= N, u a local unit."""
    if u.field.is_zero(u.constant_term()):
        raise FieldError("not a unit: zero constant term")
    uinv = jet_inverse(u, N)
    return jet_equal((f * uinv).truncate(N), g, N)


def default_jet_order(target: Polynomial, extra: int = 4) -> int:
    return target.total_degree() + extra

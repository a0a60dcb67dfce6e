"""Buchberger engine, normal forms, and quotient-dimension computations.

Works over any coefficient field from :mod:`sing2lab.fields`.  The pair
selection is the normal strategy (minimal lcm total degree, ties broken by
the monomial order on the lcm, then by pair index), which together with
full tail reduction makes the reduced basis output deterministic.

When ``record_coeffs=True`` the engine collects every coefficient it
inverts (numerators and denominators over a function field).  A
specialization of the parameters that avoids the zero sets of these
polynomials replays the same division steps, so the recorded list is a
certificate for lead-term-ideal stability under specialization.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product

from .fields import FFrac, FieldError
from .poly import Polynomial


# ---------------------------------------------------------------------------
# monomial orders

@dataclass(frozen=True)
class MonomialOrder:
    """A lex or graded-lex order given by its variable permutation.

    ``vars_desc`` lists the active variables from most to least significant,
    e.g. ``("y", "z", "x")`` for lex y > z > x.
    """

    kind: str
    vars_desc: tuple

    def __post_init__(self):
        if self.kind not in ("lex", "grlex"):
            raise FieldError(f"unknown order kind {self.kind!r}")

    def key_for(self, variables):
        variables = tuple(variables)
        if set(self.vars_desc) != set(variables):
            raise FieldError(
                f"order variables {self.vars_desc} do not cover {variables}")
        idx = [variables.index(v) for v in self.vars_desc]
        if self.kind == "lex":
            def key(m):
                return tuple(m[i] for i in idx)
        else:
            def key(m):
                return (sum(m),) + tuple(m[i] for i in idx)
        return key

    def describe(self):
        return f"{self.kind} " + ">".join(self.vars_desc)


def lex(*vars_desc):
    return MonomialOrder("lex", tuple(vars_desc))


def grlex(*vars_desc):
    return MonomialOrder("grlex", tuple(vars_desc))


# ---------------------------------------------------------------------------

def _monomial_divides(a, b):
    return all(x <= y for x, y in zip(a, b))


def _monomial_lcm(a, b):
    return tuple(max(x, y) for x, y in zip(a, b))


def _monomial_sub(a, b):
    return tuple(x - y for x, y in zip(a, b))


class _Recorder:
    def __init__(self):
        self.polys = []
        self._seen = set()

    def coefficient(self, c):
        if isinstance(c, FFrac):
            for part in (c.num, c.den):
                if part and not _pp_is_constant(part):
                    key = tuple(sorted(part.items()))
                    if key not in self._seen:
                        self._seen.add(key)
                        self.polys.append(dict(part))


def _pp_is_constant(a):
    return all(all(e == 0 for e in m) for m in a)


@dataclass(frozen=True)
class GroebnerBasis:
    """A reduced Groebner basis with its order and lead-term data."""

    order: MonomialOrder
    variables: tuple
    field: object
    generators: tuple
    reduced: bool = True
    bad_set: tuple = ()

    @property
    def lead_terms(self):
        key = self.order.key_for(self.variables)
        return tuple(max(g.terms, key=key) for g in self.generators)

    def contains_one(self):
        return any(not any(m) for m in self.lead_terms)


def lead_term(f: Polynomial, key):
    m = max(f.terms, key=key)
    return m, f.terms[m]


def _reduce_full(f, basis, key, recorder=None):
    """Full normal form: no term of the result is divisible by a basis lead."""
    F = f.field
    if not basis:
        return f
    leads = [(max(g.terms, key=key), g) for g in basis]
    work = dict(f.terms)
    out = {}
    while work:
        m = max(work, key=key)
        c = work.pop(m)
        hit = None
        for lm, g in leads:
            if _monomial_divides(lm, m):
                hit = (lm, g)
                break
        if hit is None:
            out[m] = c
            continue
        lm, g = hit
        lc = g.terms[lm]
        if recorder is not None:
            recorder.coefficient(lc)
        factor = F.div(c, lc)
        shift = _monomial_sub(m, lm)
        for gm, gc in g.terms.items():
            if gm == lm:
                continue
            mm = tuple(a + b for a, b in zip(gm, shift))
            v = F.mul(gc, factor)
            prev = work.get(mm)
            nv = F.sub(prev, v) if prev is not None else F.neg(v)
            if F.is_zero(nv):
                work.pop(mm, None)
            else:
                work[mm] = nv
    return Polynomial(f.variables, F, out)


def _monic(f, key, recorder=None):
    m, c = lead_term(f, key)
    if f.field.eq(c, f.field.one):
        return f
    if recorder is not None:
        recorder.coefficient(c)
    return f * f.field.inv(c)


def _spoly(f, g, key):
    F = f.field
    mf, cf = lead_term(f, key)
    mg, cg = lead_term(g, key)
    l = _monomial_lcm(mf, mg)
    a = f.monomial_multiple(_monomial_sub(l, mf), F.inv(cf))
    b = g.monomial_multiple(_monomial_sub(l, mg), F.inv(cg))
    return a - b


def spoly(f: Polynomial, g: Polynomial, order: MonomialOrder) -> Polynomial:
    return _spoly(f, g, order.key_for(f.variables))


def buchberger(generators, order: MonomialOrder, *, record_coeffs=False) -> GroebnerBasis:
    """Reduced Groebner basis of the given generators under the given order.

    Deterministic for a fixed input list: pairs are processed by minimal
    lcm total degree with ties broken by the order on the lcm.
    """
    gens = [g for g in generators if not g.is_zero()]
    if not gens:
        raise FieldError("empty generator list")
    variables = gens[0].variables
    F = gens[0].field
    for g in gens:
        if g.variables != variables or g.field != F:
            raise FieldError("generators live in different rings")
    key = order.key_for(variables)
    recorder = _Recorder() if record_coeffs else None

    G = []
    for g in gens:
        r = _reduce_full(g, G, key, recorder)
        if not r.is_zero():
            G.append(_monic(r, key, recorder))
    pairs = {(i, j) for i in range(len(G)) for j in range(i + 1, len(G))}

    def pair_rank(ij):
        i, j = ij
        l = _monomial_lcm(max(G[i].terms, key=key), max(G[j].terms, key=key))
        return (sum(l), key(l), i, j)

    while pairs:
        i, j = min(pairs, key=pair_rank)
        pairs.discard((i, j))
        mi = max(G[i].terms, key=key)
        mj = max(G[j].terms, key=key)
        lcm = _monomial_lcm(mi, mj)
        if lcm == tuple(a + b for a, b in zip(mi, mj)):
            continue  # coprime leads: S-polynomial reduces to zero
        s = _spoly(G[i], G[j], key)
        if s.is_zero():
            continue
        r = _reduce_full(s, G, key, recorder)
        if r.is_zero():
            continue
        r = _monic(r, key, recorder)
        G.append(r)
        new = len(G) - 1
        pairs.update((k, new) for k in range(new))

    # inter-reduce to the unique reduced basis
    leads = [max(g.terms, key=key) for g in G]
    keep = []
    for i, m in enumerate(leads):
        if not any(j != i and _monomial_divides(leads[j], m)
                   and (leads[j] != m or j < i) for j in range(len(G))):
            keep.append(i)
    reduced = []
    kept = [G[i] for i in keep]
    for i, g in enumerate(kept):
        others = kept[:i] + kept[i + 1:]
        r = _reduce_full(g, others, key, recorder)
        reduced.append(_monic(r, key, recorder))
    reduced.sort(key=lambda g: key(max(g.terms, key=key)), reverse=True)
    bad = ()
    if recorder is not None:
        bad = tuple(recorder.polys)
    return GroebnerBasis(order=order, variables=variables, field=F,
                         generators=tuple(reduced), reduced=True, bad_set=bad)


def normal_form(f: Polynomial, gb: GroebnerBasis) -> Polynomial:
    if f.is_zero():
        return f
    key = gb.order.key_for(gb.variables)
    return _reduce_full(f, list(gb.generators), key)


def ideal_member(f: Polynomial, gb: GroebnerBasis) -> bool:
    return normal_form(f, gb).is_zero()


def power_member(f: Polynomial, gb: GroebnerBasis, e_max: int = 8):
    """Least e <= e_max with f^e in the ideal, else None."""
    if e_max < 1:
        raise FieldError("e_max must be at least 1")
    g = Polynomial.constant(f.variables, f.field, 1)
    for e in range(1, e_max + 1):
        g = g * f
        if ideal_member(g, gb):
            return e
    return None


def quotient_dimension(gb: GroebnerBasis):
    """Count standard monomials of the lead-term ideal.

    Returns ``(dimension, hilbert)`` where hilbert lists the number of
    standard monomials in each total degree; ``dimension`` is None when the
    staircase is unbounded (some variable has no pure power among the lead
    terms).
    """
    leads = gb.lead_terms
    if any(not any(m) for m in leads):
        return 0, []
    nv = len(gb.variables)
    bounds = []
    for i in range(nv):
        pure = [m[i] for m in leads if sum(m) == m[i]]
        if not pure:
            return None, []
        bounds.append(min(pure))
    standard = []
    for m in product(*[range(b) for b in bounds]):
        if not any(_monomial_divides(lm, m) for lm in leads):
            standard.append(m)
    if not standard:
        return 0, []
    maxdeg = max(sum(m) for m in standard)
    hilbert = [0] * (maxdeg + 1)
    for m in standard:
        hilbert[sum(m)] += 1
    return len(standard), hilbert


def ideal_compare(a: GroebnerBasis, b: GroebnerBasis) -> str:
    """'literal' if the reduced bases coincide, 'ideal' if the ideals agree
    by mutual membership, else 'different'."""
    same_frame = (a.variables == b.variables and a.field == b.field)
    if not same_frame:
        raise FieldError("bases live in different rings")
    if a.order == b.order and a.generators == b.generators:
        return "literal"
    if all(ideal_member(g, b) for g in a.generators) and \
       all(ideal_member(g, a) for g in b.generators):
        return "ideal"
    return "different"


def ideal_equal(a: GroebnerBasis, b: GroebnerBasis) -> bool:
    return ideal_compare(a, b) != "different"


def specialize_basis_input(polys, values, target_field, param_field):
    """Specialize parameter coefficients at the given values (one per field
    parameter) and return polynomials over target_field."""

    def eval_pp(pp):
        total = target_field.zero
        for m, c in pp.items():
            v = target_field.coerce(int(c))
            for e, x in zip(m, values):
                if isinstance(e, int):
                    for _ in range(e):
                        v = target_field.mul(v, x)
                else:
                    raise FieldError("cannot specialize dyadic exponents")
            total = target_field.add(total, v)
        return total

    def coeff_map(c):
        num = eval_pp(c.num)
        den = eval_pp(c.den)
        return target_field.div(num, den)

    return [f.specialize_coeffs(coeff_map, target_field) for f in polys]


def bad_set_avoids(bad_set, values, target_field):
    """True when no recorded bad-set polynomial vanishes at the values."""
    for pp in bad_set:
        total = target_field.zero
        for m, c in pp.items():
            v = target_field.coerce(int(c))
            for e, x in zip(m, values):
                for _ in range(int(e)):
                    v = target_field.mul(v, x)
            total = target_field.add(total, v)
        if target_field.is_zero(total):
            return False
    return True

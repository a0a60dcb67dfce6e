"""Generic hyperplane sections and the classification of their rational
double points over the function field GF(2)(xi, eta, theta, iota).

The section of a catalog germ substitutes w by xi*x + eta*y + theta*z +
iota.  Classification follows the case split used for these families:

* tau >= 2 for the quadratic part -> type B;
* tau = 1 -> look at the binary cubic left after killing the tau variable:
  a linear times an irreducible quadratic gives C_3, a repeated line times
  an independent line gives C_n (n >= 4), a perfect cube gives F_4.

tau is operationalized as the minimal number of variables presenting the
quadratic part over the working field: with a nonzero polar form it is
2 plus (0 or 1) for the residual value on the radical; for a diagonal form
it is the dimension over K^2 of the span of the coefficients, computed in
the 16-dimensional module basis of squarefree parameter monomials.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dfield

from .fields import (FFrac, FieldError, FunctionField, GaloisField2,
                     PerfectClosure, pp_add, pp_mul, pp_sqrt)
from .poly import Polynomial
from .groebner import (GroebnerBasis, MonomialOrder, lex, buchberger,
                       quotient_dimension, specialize_basis_input,
                       bad_set_avoids)

SECTION_VARS = ("x", "y", "z")

K_FIELD = FunctionField(2)
K_CLOSURE = PerfectClosure(K_FIELD)

_ORDERS = {
    "B": lex("y", "z", "x"),
    "C": lex("x", "z", "y"),
    "F": lex("x", "y", "z"),
}


def section_order(lipman_letter: str) -> MonomialOrder:
    try:
        return _ORDERS[lipman_letter]
    except KeyError:
        raise FieldError(f"no section order for letter {lipman_letter!r}")


def generic_section(f: Polynomial) -> Polynomial:
    """Substitute w by xi*x + eta*y + theta*z + iota and view the result
    in K[x, y, z]."""
    lifted = f.change_field(K_FIELD)
    images = {
        "w": (Polynomial.variable("x", f.variables, K_FIELD) * K_FIELD.param("xi")
              + Polynomial.variable("y", f.variables, K_FIELD) * K_FIELD.param("eta")
              + Polynomial.variable("z", f.variables, K_FIELD) * K_FIELD.param("theta")
              + Polynomial.constant(f.variables, K_FIELD, K_FIELD.param("iota")))
    }
    out = lifted.substitute(images)
    return out.drop_variable("w")


def tjurina_generators(F: Polynomial):
    gens = [F.derivative(v) for v in F.variables]
    gens = [g for g in gens if not g.is_zero()]
    gens.append(F)
    return gens


def tjurina_basis(F: Polynomial, order: MonomialOrder,
                  record_coeffs: bool = False) -> GroebnerBasis:
    return buchberger(tjurina_generators(F), order,
                      record_coeffs=record_coeffs)


# ---------------------------------------------------------------------------
# tau of the quadratic part

def _coeff(Q, exps):
    return Q.terms.get(tuple(exps), Q.field.zero)


def _rank_over_squares(field, elements):
    """dim over K^2 of the span of the given field elements."""
    if field.is_perfect:
        return 1 if any(not field.is_zero(c) for c in elements) else 0
    vectors = []
    keys = set()
    for c in elements:
        if field.is_zero(c):
            continue
        coords = field.frobenius_coords(c)
        keys.update(coords)
        vectors.append(coords)
    keys = sorted(keys)
    rank = 0
    for key in keys:
        pivot = next((v for v in vectors if key in v), None)
        if pivot is None:
            continue
        rank += 1
        inv = field.inv(pivot[key])
        rest = []
        for v in vectors:
            if v is pivot or key not in v:
                if v is not pivot:
                    rest.append(v)
                continue
            factor = field.mul(v[key], inv)
            merged = dict(v)
            for k2, c2 in pivot.items():
                val = field.sub(merged.get(k2, field.zero),
                                field.mul(factor, c2))
                if field.is_zero(val):
                    merged.pop(k2, None)
                else:
                    merged[k2] = val
            if merged:
                rest.append(merged)
        vectors = rest
    return rank


@dataclass
class TauData:
    tau: int
    pivot: str | None = None
    pivot_images: dict = dfield(default_factory=dict)


def _tau_data(Q: Polynomial, field) -> TauData:
    """tau plus, in the diagonal tau = 1 case, the linear change data
    normalizing the quadratic part to a single square."""
    if Q.is_zero():
        return TauData(0)
    x, y, z = SECTION_VARS
    a = _coeff(Q, (2, 0, 0))
    b = _coeff(Q, (0, 2, 0))
    c = _coeff(Q, (0, 0, 2))
    d = _coeff(Q, (1, 1, 0))
    e = _coeff(Q, (1, 0, 1))
    g = _coeff(Q, (0, 1, 1))
    F = field
    if not (F.is_zero(d) and F.is_zero(e) and F.is_zero(g)):
        # polar form nonzero: radical spanned by (g, e, d)
        residual = Q.eval_coeffs({x: g, y: e, z: d})
        return TauData(2 if F.is_zero(residual) else 3)
    diag = [a, b, c]
    tau = _rank_over_squares(F, diag)
    data = TauData(tau)
    if tau == 1:
        idx = next(i for i, ci in enumerate(diag) if not F.is_zero(ci))
        d0 = diag[idx]
        data.pivot = SECTION_VARS[idx]
        for i, ci in enumerate(diag):
            if i == idx or F.is_zero(ci):
                continue
            root = F.sqrt(F.div(ci, d0))
            if root is None:
                raise FieldError("tau = 1 but a diagonal ratio is not a square")
            data.pivot_images[SECTION_VARS[i]] = root
    return data


def tau_invariant(Q: Polynomial, mode: str = "base") -> int:
    """Minimal number of variables presenting Q after a linear change."""
    field = Q.field
    if mode == "perfect-closure" and not field.is_perfect:
        Q = _to_closure(Q)
        field = Q.field
    return _tau_data(Q, field).tau


def _to_closure(Q: Polynomial) -> Polynomial:
    return Polynomial(Q.variables, K_CLOSURE, dict(Q.terms))


# ---------------------------------------------------------------------------
# binary cubic analysis

def _binary_cubic(F: Polynomial, data: TauData):
    """Cubic part of F with the normalized tau variable set to zero, as a
    form in the two remaining variables (returned with their names)."""
    G3 = F.graded_part(3)
    pivot = data.pivot
    others = [v for v in SECTION_VARS if v != pivot]
    image = Polynomial.zero(F.variables, F.field)
    for v, coeff in data.pivot_images.items():
        image = image + Polynomial.variable(v, F.variables, F.field) * coeff
    G = G3.substitute({pivot: image})
    return G, others[0], others[1]


def _cubic_coeffs(G, u, v):
    iu = G.variables.index(u)
    iv = G.variables.index(v)
    F = G.field
    out = []
    for k in (3, 2, 1, 0):
        m = [0, 0, 0]
        m[iu] = k
        m[iv] = 3 - k
        out.append(G.terms.get(tuple(m), F.zero))
    return out  # coefficients of u^3, u^2 v, u v^2, v^3


def _is_cube(c3, c2, c1, c0, F):
    return (F.eq(F.mul(c2, c2), F.mul(c3, c1))
            and F.eq(F.mul(c1, c1), F.mul(c2, c0))
            and F.eq(F.mul(c3, c0), F.mul(c2, c1)))


def _partials_gcd(c3, c2, c1, c0, F):
    """gcd of the two partials of the cubic, as a pair (alpha, gamma)
    meaning alpha*u^2 + gamma*v^2, or None for a constant gcd."""
    p = (c3, c1)
    q = (c2, c0)
    pz = F.is_zero(p[0]) and F.is_zero(p[1])
    qz = F.is_zero(q[0]) and F.is_zero(q[1])
    if pz and qz:
        return None
    if pz:
        pair = q
    elif qz:
        pair = p
    elif F.eq(F.mul(c3, c0), F.mul(c2, c1)):
        pair = p
    else:
        return None
    alpha, gamma = pair
    if not F.is_zero(alpha):
        inv = F.inv(alpha)
        return (F.one, F.mul(gamma, inv))
    return (F.zero, F.one)


def artin_schreier_solvable(delta: FFrac, field: FunctionField,
                            bound: int | None = None) -> bool:
    """Decide whether s^2 + s = delta has a solution in the function field.

    In lowest terms delta = N / D the denominator must be a perfect square
    B^2, and then A^2 + B A = N must be solvable for a polynomial A; the
    map A -> A^2 + B A is GF(2)-linear, so a degree-bounded ansatz becomes
    a linear system over GF(2).
    """
    if field.is_zero(delta):
        return True
    N, D = delta.num, delta.den
    B = pp_sqrt(D, 2)
    if B is None:
        return False
    degN = max(sum(m) for m in N)
    degD = max(sum(m) for m in D) if D else 0
    if bound is None:
        bound = max(degN, degD) + 2
    nparams = field.nparams
    monomials = []

    def gen(prefix, remaining, left):
        if remaining == 0:
            monomials.append(tuple(prefix))
            return
        for e in range(left + 1):
            gen(prefix + [e], remaining - 1, left - e)

    gen([], nparams, bound)
    monomials = [m for m in monomials if sum(m) <= bound]
    # column for monomial m is the polynomial m^2 + B*m
    columns = []
    row_index = {}

    def poly_to_bits(pp):
        bits = 0
        for m, cc in pp.items():
            if cc % 2 == 0:
                continue
            if m not in row_index:
                row_index[m] = len(row_index)
            bits |= 1 << row_index[m]
        return bits

    for m in monomials:
        sq = {tuple(2 * e for e in m): 1}
        bm = pp_mul(B, {m: 1}, 2)
        columns.append(pp_add(sq, bm, 2))
    target = dict(N)
    col_bits = [poly_to_bits(c) for c in columns]
    t_bits = poly_to_bits(target)
    # Gaussian elimination over GF(2)
    pivots = {}
    for bits in col_bits:
        cur = bits
        while cur:
            low = cur & (-cur)
            if low in pivots:
                cur ^= pivots[low]
            else:
                pivots[low] = cur
                break
    cur = t_bits
    while cur:
        low = cur & (-cur)
        if low not in pivots:
            return False
        cur ^= pivots[low]
    return True


CASE_LIN_IRRED_QUAD = "lin-irred-quad"
CASE_UV2 = "UV2"
CASE_AV3 = "aV3"
CASE_OTHER = "other"


def cubic_case(F: Polynomial, mode: str = "base") -> str:
    """Factorization shape of the residual binary cubic (requires tau = 1)."""
    field = F.field
    if mode == "perfect-closure" and not field.is_perfect:
        F = _to_closure(F)
        field = F.field
    data = _tau_data(F.graded_part(2), field)
    if data.tau != 1:
        raise FieldError(f"cubic_case requires tau = 1, got {data.tau}")
    G, u, v = _binary_cubic(F, data)
    if G.is_zero():
        return CASE_OTHER
    c3, c2, c1, c0 = _cubic_coeffs(G, u, v)
    if _is_cube(c3, c2, c1, c0, field):
        return CASE_AV3
    H = _partials_gcd(c3, c2, c1, c0, field)
    if H is not None:
        alpha, gamma = H
        if field.is_zero(alpha):
            square = True          # v^2
        else:
            square = field.sqrt(gamma) is not None
        return CASE_UV2 if square else CASE_LIN_IRRED_QUAD
    # separable cubic: split off visible monomial factors
    iu = G.variables.index(u)
    iv = G.variables.index(v)
    a = min(m[iu] for m in G.terms)
    b = min(m[iv] for m in G.terms)
    if a + b >= 2:
        return CASE_OTHER          # u * v * (third line): three distinct lines
    if a + b == 1:
        # core = alpha u^2 + beta u v + gamma v^2 with beta nonzero
        if a == 1:
            alpha = c3
            beta = c2
            gamma = c1
        else:
            alpha = c2
            beta = c1
            gamma = c0
        delta = field.div(field.mul(alpha, gamma), field.mul(beta, beta))
        if field.is_perfect or not isinstance(field, FunctionField):
            return CASE_OTHER if _quad_splits_generic(field, delta) else \
                CASE_LIN_IRRED_QUAD
        return CASE_OTHER if artin_schreier_solvable(delta, field) else \
            CASE_LIN_IRRED_QUAD
    return CASE_OTHER              # irreducible-or-undecided separable cubic


def _quad_splits_generic(field, delta):
    if isinstance(field, GaloisField2):
        # s^2+s = delta solvable iff the absolute trace vanishes
        s = delta
        tr = delta
        for _ in range(field.k - 1):
            s = field.mul(s, s)
            tr = field.add(tr, s)
        return field.is_zero(tr)
    if isinstance(field, PerfectClosure):
        return artin_schreier_solvable(delta, field)
    return False


# ---------------------------------------------------------------------------
# classification

LETTER_B = "B"
LETTER_C3 = "C3"
LETTER_C4PLUS = "C>=4"
LETTER_F4 = "F4"
LETTER_UNSUPPORTED = "unsupported"

_CASE_TO_LETTER = {
    CASE_LIN_IRRED_QUAD: LETTER_C3,
    CASE_UV2: LETTER_C4PLUS,
    CASE_AV3: LETTER_F4,
    CASE_OTHER: LETTER_UNSUPPORTED,
}


@dataclass
class ClassificationReport:
    entry_id: str
    tau: int
    case: str | None
    letter: str
    closure_tau: int
    closure_side: str
    tjurina: int | None
    hilbert: list
    label_letter: str
    label_index: int | None
    consistent: bool


def expected_letter(lipman: str) -> str:
    letter, _, index = lipman.partition("_")
    if letter == "B":
        return LETTER_B
    if letter == "C":
        return LETTER_C3 if index == "3" else LETTER_C4PLUS
    if letter == "F":
        return LETTER_F4
    return LETTER_UNSUPPORTED


def classify_section(F: Polynomial, lipman: str, entry_id: str = "?",
                     tjurina_gb: GroebnerBasis | None = None) -> ClassificationReport:
    """Decision tree on the section: tau >= 2 -> B, tau = 1 -> cubic case."""
    Q = F.graded_part(2)
    data = _tau_data(Q, F.field)
    case = None
    if data.tau >= 2:
        letter = LETTER_B
    elif data.tau == 1:
        case = cubic_case(F)
        letter = _CASE_TO_LETTER[case]
    else:
        letter = LETTER_UNSUPPORTED
    closure_tau = tau_invariant(Q, "perfect-closure")
    closure_side = "other"
    if closure_tau == 1:
        ccase = cubic_case(F, "perfect-closure")
        if ccase == CASE_AV3:
            closure_side = "triple-root/E-side"
        elif ccase in (CASE_UV2, CASE_LIN_IRRED_QUAD):
            closure_side = "repeated-root/D-side"
    tj, hilbert = (None, [])
    if tjurina_gb is not None:
        tj, hilbert = quotient_dimension(tjurina_gb)
    want = expected_letter(lipman)
    return ClassificationReport(
        entry_id=entry_id, tau=data.tau, case=case, letter=letter,
        closure_tau=closure_tau, closure_side=closure_side,
        tjurina=tj, hilbert=hilbert,
        label_letter=want,
        label_index=int(lipman.split("_")[1]) if "_" in lipman else None,
        consistent=(letter == want))


# ---------------------------------------------------------------------------
# closed fibers and the gr comparison

def _gf_points(k: int):
    """Deterministic sweep of GF(2^k)^4, all-nonzero points first."""
    size = 1 << k
    nonzero = list(range(1, size))
    for a in nonzero:
        for b in nonzero:
            for c in nonzero:
                for d in nonzero:
                    yield (a, b, c, d)
    for a in range(size):
        for b in range(size):
            for c in range(size):
                for d in range(size):
                    if 0 in (a, b, c, d):
                        yield (a, b, c, d)


def specialize_section(f4: Polynomial, values, gf) -> Polynomial:
    """Closed fiber of the section family: substitute w by the linear form
    with the given GF(2^k) coefficients."""
    lifted = Polynomial(f4.variables, gf,
                        {m: gf.coerce(int(c)) for m, c in f4.terms.items()})
    a, b, c, d = values
    img = (Polynomial.variable("x", f4.variables, gf) * a
           + Polynomial.variable("y", f4.variables, gf) * b
           + Polynomial.variable("z", f4.variables, gf) * c
           + Polynomial.constant(f4.variables, gf, d))
    return lifted.substitute({"w": img}).drop_variable("w")


def closed_fiber_basis(f4: Polynomial, order: MonomialOrder, bad_set,
                       max_k: int = 4):
    """Tjurina basis of the first closed fiber avoiding the recorded bad set
    (and with a finite Tjurina quotient).  Returns (gb, point, k) or None."""
    for k in (2, 3, max_k):
        gf = GaloisField2(k)
        for values in _gf_points(k):
            vals = [gf.coerce(v) if v < gf.size else v for v in values]
            if not bad_set_avoids(bad_set, vals, gf):
                continue
            g = specialize_section(f4, vals, gf)
            if g.is_zero():
                continue
            gb = buchberger(tjurina_generators(g), order)
            dim, _ = quotient_dimension(gb)
            if dim is None:
                continue
            return gb, values, k
    return None


def gr_hilbert_compare(section_gb: GroebnerBasis,
                       fiber_gb: GroebnerBasis):
    """Hilbert-function equality of the two Tjurina quotients (the
    computable shadow of the graded-ring isomorphism)."""
    dim_a, h_a = quotient_dimension(section_gb)
    dim_b, h_b = quotient_dimension(fiber_gb)
    if dim_a is None or dim_b is None:
        return None, (dim_a, h_a), (dim_b, h_b)
    return (h_a == h_b), (dim_a, h_a), (dim_b, h_b)


def specialization_stable(section_gb: GroebnerBasis, f4: Polynomial,
                          values, gf) -> bool:
    """Lead-term ideal stability at one specialization point."""
    g = specialize_section(f4, values, gf)
    if g.is_zero():
        return False
    gb = buchberger(tjurina_generators(g), section_gb.order)
    return set(gb.lead_terms) == set(section_gb.lead_terms)


# ---------------------------------------------------------------------------
# coindex table

def coindex_table(results) -> dict:
    """Empirical (Artin letter, N, r) -> tau map across classified entries.

    results: iterable of (entry, ClassificationReport).  Returns the table,
    whether it is a well-defined function, and the fitted D-type rule.
    """
    table = {}
    for entry, rep in results:
        key = (entry.artin_letter, entry.artin_N, entry.artin_coindex)
        table.setdefault(key, set()).add(rep.tjurina)
    well_defined = all(len(v) == 1 for v in table.values())
    fit = []
    for (letter, N, r), taus in sorted(table.items()):
        tau = next(iter(taus))
        if letter == "D" and tau is not None:
            fit.append(tau == 2 * N - 2 * r)
    return {
        "table": {f"{k[0]}_{k[1]}^{k[2]}": sorted(v) for k, v in sorted(table.items())},
        "well_defined": well_defined,
        "d_rule_2N_minus_2r": all(fit) if fit else None,
    }

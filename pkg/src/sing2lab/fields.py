"""Exact coefficient fields in small positive characteristic.

Four field flavours share one small protocol (``zero``, ``one``, ``add``,
``mul``, ``inv``, ...):

* :class:`PrimeField` -- GF(p), elements are plain ints in ``[0, p)``.
* :class:`GaloisField2` -- GF(2^k) for small k, elements are int bitmasks.
* :class:`FunctionField` -- GF(p)(t1, .., tm), elements are GCD-reduced
  fractions of multivariate polynomials in the parameters.
* :class:`PerfectClosure` -- the perfection of a characteristic-2 function
  field, realized by dyadic rational parameter exponents with a bounded
  denominator.

Parameter polynomials are bare dicts mapping exponent tuples to nonzero
ints mod p; the ``pp_*`` helpers implement their arithmetic, including a
primitive-PRS multivariate GCD used to keep fractions canonical.
"""

from __future__ import annotations

from fractions import Fraction


class FieldError(Exception):
    pass


class DepthCapError(FieldError):
    """A perfect-closure computation exceeded the dyadic denominator cap."""


# ---------------------------------------------------------------------------
# parameter polynomials: dict[exponent tuple] -> int in (0, p)

def pp_zero():
    return {}


def pp_const(c, p, nparams):
    c %= p
    return {} if c == 0 else {(0,) * nparams: c}


def pp_is_const(a):
    return not a or all(all(e == 0 for e in m) for m in a)


def pp_add(a, b, p):
    out = dict(a)
    for m, c in b.items():
        v = (out.get(m, 0) + c) % p
        if v:
            out[m] = v
        else:
            out.pop(m, None)
    return out


def pp_neg(a, p):
    return {m: (-c) % p for m, c in a.items()}


def pp_mul(a, b, p):
    if not a or not b:
        return {}
    out = {}
    for m1, c1 in a.items():
        for m2, c2 in b.items():
            m = tuple(e1 + e2 for e1, e2 in zip(m1, m2))
            v = (out.get(m, 0) + c1 * c2) % p
            if v:
                out[m] = v
            else:
                out.pop(m, None)
    return out


def pp_scale(a, c, p):
    c %= p
    if c == 0:
        return {}
    return {m: (v * c) % p for m, v in a.items()}


def _deg(m):
    return sum(m)


def pp_lead(a):
    """Leading monomial under graded lex (largest total degree, then lex)."""
    return max(a, key=lambda m: (_deg(m), m))


def pp_monic(a, p):
    if not a:
        return a
    lc = a[pp_lead(a)]
    if lc == 1:
        return a
    return pp_scale(a, pow(lc, -1, p), p)


def pp_divexact(a, b, p):
    """Exact division a / b; raises FieldError if b does not divide a."""
    if not b:
        raise FieldError("division by zero parameter polynomial")
    if not a:
        return {}
    out = {}
    rem = dict(a)
    lb = pp_lead(b)
    cb = b[lb]
    cb_inv = pow(cb, -1, p)
    while rem:
        la = pp_lead(rem)
        q = tuple(e1 - e2 for e1, e2 in zip(la, lb))
        if any(e < 0 for e in q):
            raise FieldError("non-exact parameter polynomial division")
        cq = (rem[la] * cb_inv) % p
        out[q] = cq
        piece = pp_mul({q: cq}, b, p)
        rem = pp_add(rem, pp_neg(piece, p), p)
    return out


def _as_univ(a, v):
    """View a as a univariate polynomial in variable index v: deg -> coeff poly."""
    out = {}
    for m, c in a.items():
        d = m[v]
        rest = m[:v] + (0,) + m[v + 1:]
        coeff = out.setdefault(d, {})
        coeff[rest] = c
    return out


def _from_univ(u, v, p):
    out = {}
    for d, coeff in u.items():
        for m, c in coeff.items():
            mm = m[:v] + (d,) + m[v + 1:]
            out[mm] = c % p
    return {m: c for m, c in out.items() if c}


def _univ_content(u, p):
    g = {}
    for coeff in u.values():
        g = pp_gcd(g, coeff, p)
    return g


def _univ_scale(u, g, p, divide):
    if divide:
        return {d: pp_divexact(c, g, p) for d, c in u.items()}
    return {d: pp_mul(c, g, p) for d, c in u.items()}


def _univ_prem(A, B, p):
    """Pseudo-remainder of A by B (univariate over parameter polynomials)."""
    dB = max(B)
    lB = B[dB]
    R = dict(A)
    while R and max(R) >= dB:
        dR = max(R)
        lR = R[dR]
        shift = dR - dB
        newR = {}
        for d, c in R.items():
            newR[d] = pp_mul(c, lB, p)
        for d, c in B.items():
            dd = d + shift
            term = pp_mul(c, lR, p)
            newR[dd] = pp_add(newR.get(dd, {}), pp_neg(term, p), p)
        R = {d: c for d, c in newR.items() if c}
    return R


def _mono_content(a, nv):
    return tuple(min(m[i] for m in a) for i in range(nv))


def _mono_strip(a, mono):
    if not any(mono):
        return a
    return {tuple(e - s for e, s in zip(m, mono)): c for m, c in a.items()}


_GCD_EVAL_FIELD = None


def _gcd_eval_field():
    global _GCD_EVAL_FIELD
    if _GCD_EVAL_FIELD is None:
        _GCD_EVAL_FIELD = GaloisField2(8)
    return _GCD_EVAL_FIELD


def _eval_univariate(a, v, values, gf):
    """Evaluate all variables but v at GF(2^8) points: coeff list in v."""
    out = {}
    for m, c in a.items():
        acc = gf.one if c % 2 else gf.zero
        if acc == gf.zero:
            continue
        for i, e in enumerate(m):
            if i == v or e == 0:
                continue
            acc = gf.mul(acc, gf.pow(values[i], e))
        if acc:
            out[m[v]] = out.get(m[v], 0) ^ acc
    return {d: c for d, c in out.items() if c}


def _univ_gcd_degree(fa, fb, gf):
    """Degree of gcd of two univariate coefficient dicts over GF(2^8)."""
    def norm(f):
        return {d: c for d, c in f.items() if c}

    A, B = norm(fa), norm(fb)
    while B:
        dB = max(B)
        lB = B[dB]
        inv = gf.inv(lB)
        while A and max(A) >= dB:
            dA = max(A)
            factor = gf.mul(A[dA], inv)
            shift = dA - dB
            for d, c in B.items():
                A[d + shift] = A.get(d + shift, 0) ^ gf.mul(factor, c)
            A = norm(A)
        A, B = B, A
    return max(A) if A else 0


def _gcd_trivial_proof(a, b, nv, attempts=4):
    """Try to prove gcd(a, b) = 1 by specialization into GF(2^8).

    For each variable present in both, a specialization of the remaining
    variables that keeps both leading coefficients nonzero and yields a
    degree-0 univariate gcd proves the variable does not divide the gcd.
    Returns True only on a full proof (sound; may give up).
    """
    import random
    gf = _gcd_eval_field()
    rng = random.Random(0xC0FFEE)
    shared = [i for i in range(nv)
              if any(m[i] for m in a) and any(m[i] for m in b)]
    # variables in only one operand can never divide the gcd
    for v in shared:
        proven = False
        for _ in range(attempts):
            values = [rng.randrange(1, gf.size) for _ in range(nv)]
            fa = _eval_univariate(a, v, values, gf)
            fb = _eval_univariate(b, v, values, gf)
            if not fa or not fb:
                continue
            if max(fa) != max(m[v] for m in a) or \
               max(fb) != max(m[v] for m in b):
                continue  # leading coefficient vanished; point unusable
            if _univ_gcd_degree(fa, fb, gf) == 0:
                proven = True
                break
        if not proven:
            return False
    return True


def pp_gcd(a, b, p):
    """GCD of parameter polynomials, normalized monic under graded lex."""
    if not a:
        return pp_monic(b, p)
    if not b:
        return pp_monic(a, p)
    nv = len(next(iter(a)))
    one = {(0,) * nv: 1}
    # split off the monomial contents; the remainders have trivial content
    ma = _mono_content(a, nv)
    mb = _mono_content(b, nv)
    common = tuple(min(x, y) for x, y in zip(ma, mb))
    A = _mono_strip(a, ma)
    B = _mono_strip(b, mb)

    def with_common(g):
        return pp_monic(pp_mul(g, {common: 1}, p), p) if any(common) else \
            pp_monic(g, p)

    if len(A) == 1 or len(B) == 1:
        return with_common(one)
    if A == B:
        return with_common(A)
    if p == 2 and all(isinstance(e, int) for m in A for e in m) and \
            all(isinstance(e, int) for m in B for e in m):
        if _gcd_trivial_proof(A, B, nv):
            return with_common(one)
    g = _pp_gcd_prs(A, B, p)
    return with_common(g)


def _pp_gcd_prs(a, b, p):
    """Primitive pseudo-remainder sequence fallback."""
    if not a:
        return pp_monic(b, p)
    if not b:
        return pp_monic(a, p)
    nv = len(next(iter(a)))
    v = None
    for i in range(nv):
        if any(m[i] for m in a) or any(m[i] for m in b):
            v = i
            break
    if v is None:
        return {(0,) * nv: 1}
    A = _as_univ(a, v)
    B = _as_univ(b, v)
    if max(A) < max(B):
        A, B = B, A
    ca = _univ_content(A, p)
    cb = _univ_content(B, p)
    d = pp_gcd(ca, cb, p)
    A = _univ_scale(A, ca, p, divide=True)
    B = _univ_scale(B, cb, p, divide=True)
    while B:
        R = _univ_prem(A, B, p)
        if R:
            cR = _univ_content(R, p)
            R = _univ_scale(R, cR, p, divide=True)
        A, B = B, R
    g = pp_mul(d, _from_univ(A, v, p), p)
    return pp_monic(g, p)


def pp_sqrt(a, p):
    """Frobenius-halving square root for p = 2; None when a is not a square."""
    if p != 2:
        raise FieldError("pp_sqrt requires characteristic 2")
    out = {}
    for m, c in a.items():
        half = []
        for e in m:
            h = e / 2 if isinstance(e, Fraction) else Fraction(e, 2)
            if h.denominator == 1:
                h = int(h)
            half.append(h)
        if any(isinstance(e, Fraction) for e in half):
            return None
        out[tuple(half)] = c
    return out


def pp_sqrt_dyadic(a, cap_log):
    """Square root in the perfect closure: halve all exponents (p = 2)."""
    out = {}
    for m, c in a.items():
        half = []
        for e in m:
            h = Fraction(e) / 2
            if h.denominator > (1 << cap_log):
                raise DepthCapError(
                    f"dyadic exponent denominator exceeds 2^{cap_log}")
            if h.denominator == 1:
                h = int(h)
            half.append(h)
        out[tuple(half)] = c
    return out


def _scale_exponents(a, factor):
    out = {}
    for m, c in a.items():
        mm = []
        for e in m:
            v = Fraction(e) * factor
            if v.denominator != 1:
                raise FieldError("exponent scaling did not clear denominators")
            mm.append(int(v))
        out[tuple(mm)] = c
    return out


def _exponent_lcm_denominator(*polys):
    lcm = 1
    for a in polys:
        for m in a:
            for e in m:
                if isinstance(e, Fraction):
                    d = e.denominator
                    lcm = lcm * d // _gcd_int(lcm, d)
    return lcm


def _gcd_int(a, b):
    while b:
        a, b = b, a % b
    return a


def pp_format(a, params):
    if not a:
        return "0"
    bits = []
    for m in sorted(a, key=lambda m: (-_deg(m), tuple(-Fraction(e) for e in m))):
        c = a[m]
        factors = []
        if c != 1 or all(e == 0 for e in m):
            if c != 1 or not any(m):
                factors.append(str(c))
        for name, e in zip(params, m):
            if e == 0:
                continue
            if e == 1:
                factors.append(name)
            else:
                factors.append(f"{name}^{e}")
        bits.append("*".join(factors) if factors else "1")
    return "+".join(bits)


# ---------------------------------------------------------------------------
# prime fields

class PrimeField:
    """GF(p) with int elements; p is expected to be 2 or 3 here."""

    kind = "prime"
    is_perfect = True

    def __init__(self, p: int):
        if p < 2 or any(p % q == 0 for q in range(2, p)):
            raise FieldError(f"{p} is not prime")
        self.p = p
        self.zero = 0
        self.one = 1

    def coerce(self, x):
        if isinstance(x, int):
            return x % self.p
        raise FieldError(f"cannot coerce {x!r} into GF({self.p})")

    def add(self, a, b):
        return (a + b) % self.p

    def sub(self, a, b):
        return (a - b) % self.p

    def neg(self, a):
        return (-a) % self.p

    def mul(self, a, b):
        return (a * b) % self.p

    def inv(self, a):
        if a % self.p == 0:
            raise ZeroDivisionError("inverse of zero")
        return pow(a, -1, self.p)

    def div(self, a, b):
        return self.mul(a, self.inv(b))

    def is_zero(self, a) -> bool:
        return a % self.p == 0

    def eq(self, a, b) -> bool:
        return (a - b) % self.p == 0

    def sqrt(self, a):
        a %= self.p
        if self.p == 2:
            return a
        for s in range(self.p):
            if (s * s) % self.p == a:
                return s
        return None

    def fmt(self, a) -> str:
        return str(a % self.p)

    def __repr__(self):
        return f"GF({self.p})"

    def __eq__(self, other):
        return isinstance(other, PrimeField) and other.p == self.p

    def __hash__(self):
        return hash(("prime", self.p))


_GF2_MODULI = {
    2: 0b111,
    3: 0b1011,
    4: 0b10011,
    5: 0b100101,
    6: 0b1000011,
    7: 0b10000011,
    8: 0b100011011,
}


class GaloisField2:
    """GF(2^k) for 2 <= k <= 8; elements are ints below 2^k."""

    kind = "galois2"
    is_perfect = True
    p = 2

    def __init__(self, k: int):
        if k not in _GF2_MODULI:
            raise FieldError(f"GF(2^{k}) not supported")
        self.k = k
        self.modulus = _GF2_MODULI[k]
        self.size = 1 << k
        self.zero = 0
        self.one = 1

    def coerce(self, x):
        if isinstance(x, int):
            return x % 2 if x in (0, 1) or x < 0 or x >= self.size else x
        raise FieldError(f"cannot coerce {x!r} into GF(2^{self.k})")

    def add(self, a, b):
        return a ^ b

    sub = add

    def neg(self, a):
        return a

    def mul(self, a, b):
        r = 0
        m = self.modulus
        k = self.k
        while b:
            if b & 1:
                r ^= a
            b >>= 1
            a <<= 1
            if a >> k:
                a ^= m
        return r

    def pow(self, a, e):
        r = 1
        while e:
            if e & 1:
                r = self.mul(r, a)
            a = self.mul(a, a)
            e >>= 1
        return r

    def inv(self, a):
        if a == 0:
            raise ZeroDivisionError("inverse of zero")
        return self.pow(a, self.size - 2)

    def div(self, a, b):
        return self.mul(a, self.inv(b))

    def is_zero(self, a) -> bool:
        return a == 0

    def eq(self, a, b) -> bool:
        return a == b

    def sqrt(self, a):
        return self.pow(a, 1 << (self.k - 1))

    def fmt(self, a) -> str:
        return f"g{a}"

    def __repr__(self):
        return f"GF(2^{self.k})"

    def __eq__(self, other):
        return isinstance(other, GaloisField2) and other.k == self.k

    def __hash__(self):
        return hash(("galois2", self.k))


# ---------------------------------------------------------------------------
# function fields

class FFrac:
    """A reduced fraction num/den of parameter polynomials."""

    __slots__ = ("num", "den")

    def __init__(self, num, den):
        self.num = num
        self.den = den

    def __eq__(self, other):
        return (isinstance(other, FFrac) and self.num == other.num
                and self.den == other.den)

    def __hash__(self):
        return hash((tuple(sorted(self.num.items())),
                     tuple(sorted(self.den.items()))))

    def __repr__(self):
        return f"FFrac({self.num!r}, {self.den!r})"


DEFAULT_PARAMS = ("xi", "eta", "theta", "iota")


class FunctionField:
    """GF(p)(params) with eager GCD reduction to a canonical form.

    Over GF(2) the only unit is 1, so GCD reduction alone is canonical;
    for odd p the denominator is additionally normalized monic under
    graded lex.
    """

    kind = "function"
    is_perfect = False

    def __init__(self, p: int = 2, params=DEFAULT_PARAMS):
        self.p = p
        self.params = tuple(params)
        self.nparams = len(self.params)
        one = {(0,) * self.nparams: 1}
        self._one_pp = one
        self.zero = FFrac({}, dict(one))
        self.one = FFrac(dict(one), dict(one))

    # construction ---------------------------------------------------------
    def make(self, num, den):
        if not den:
            raise ZeroDivisionError("zero denominator")
        if not num:
            return FFrac({}, dict(self._one_pp))
        g = self._gcd(num, den)
        if not pp_is_const(g) or g.get((0,) * self.nparams, 0) != 1:
            num = self._divexact(num, g)
            den = self._divexact(den, g)
        lead = pp_lead(den)
        lc = den[lead]
        if lc != 1:
            inv = pow(lc, -1, self.p)
            num = pp_scale(num, inv, self.p)
            den = pp_scale(den, inv, self.p)
        return FFrac(num, den)

    def _gcd(self, a, b):
        return pp_gcd(a, b, self.p)

    def _divexact(self, a, b):
        return pp_divexact(a, b, self.p)

    def coerce(self, x):
        if isinstance(x, FFrac):
            return x
        if isinstance(x, int):
            c = x % self.p
            if c == 0:
                return self.zero
            return FFrac({(0,) * self.nparams: c}, dict(self._one_pp))
        raise FieldError(f"cannot coerce {x!r} into {self!r}")

    def param(self, name: str):
        i = self.params.index(name)
        m = [0] * self.nparams
        m[i] = 1
        return FFrac({tuple(m): 1}, dict(self._one_pp))

    # arithmetic ------------------------------------------------------------
    def add(self, a, b):
        if not a.num:
            return b
        if not b.num:
            return a
        if a.den == b.den:
            num = pp_add(a.num, b.num, self.p)
            return self.make(num, a.den)
        num = pp_add(pp_mul(a.num, b.den, self.p),
                     pp_mul(b.num, a.den, self.p), self.p)
        den = pp_mul(a.den, b.den, self.p)
        return self.make(num, den)

    def neg(self, a):
        return FFrac(pp_neg(a.num, self.p), a.den)

    def sub(self, a, b):
        return self.add(a, self.neg(b))

    def mul(self, a, b):
        if not a.num or not b.num:
            return self.zero
        return self.make(pp_mul(a.num, b.num, self.p),
                         pp_mul(a.den, b.den, self.p))

    def inv(self, a):
        if not a.num:
            raise ZeroDivisionError("inverse of zero")
        return self.make(dict(a.den), dict(a.num))

    def div(self, a, b):
        return self.mul(a, self.inv(b))

    def is_zero(self, a) -> bool:
        return not a.num

    def eq(self, a, b) -> bool:
        return a.num == b.num and a.den == b.den

    def pow(self, a, e: int):
        r = self.one
        for _ in range(e):
            r = self.mul(r, a)
        return r

    # square roots ----------------------------------------------------------
    def sqrt(self, a):
        """Root for p = 2: in lowest terms both parts need all-even exponents."""
        if self.p != 2:
            raise FieldError("sqrt implemented for characteristic 2 only")
        if not a.num:
            return self.zero
        num = pp_sqrt(a.num, 2)
        den = pp_sqrt(a.den, 2)
        if num is None or den is None:
            return None
        return FFrac(num, den)

    def is_square(self, a) -> bool:
        return self.sqrt(a) is not None

    # Frobenius-module coordinates -------------------------------------------
    def frobenius_coords(self, a):
        """Coordinates of a over K^2 in the basis of squarefree parameter
        monomials: returns {epsilon tuple: element s with coordinate s^2}."""
        if self.p != 2:
            raise FieldError("frobenius_coords requires characteristic 2")
        if not a.num:
            return {}
        u = pp_mul(a.num, a.den, 2)
        buckets = {}
        for m, c in u.items():
            eps = tuple(int(e) % 2 for e in m)
            half = tuple((int(e) - (int(e) % 2)) // 2 for e in m)
            bucket = buckets.setdefault(eps, {})
            bucket[half] = (bucket.get(half, 0) + c) % 2
        out = {}
        for eps, s in buckets.items():
            s = {m: c for m, c in s.items() if c}
            if s:
                out[eps] = self.make(s, dict(a.den))
        return out

    def fmt(self, a) -> str:
        if not a.num:
            return "0"
        num = pp_format(a.num, self.params)
        if a.den == self._one_pp:
            return num
        den = pp_format(a.den, self.params)
        if len(a.num) > 1:
            num = f"({num})"
        if len(a.den) > 1:
            den = f"({den})"
        return f"{num}/{den}"

    def __repr__(self):
        return f"GF({self.p})({', '.join(self.params)})"

    def __eq__(self, other):
        return (type(other) is type(self) and other.p == self.p
                and other.params == self.params)

    def __hash__(self):
        return hash((self.kind, self.p, self.params))


class PerfectClosure(FunctionField):
    """Perfection of a characteristic-2 function field.

    Elements carry dyadic rational parameter exponents; the denominator of
    any exponent is capped at 2^max_denom_log and exceeding the cap raises
    :class:`DepthCapError`.
    """

    kind = "perfect-closure"
    is_perfect = True

    def __init__(self, base: FunctionField | None = None, max_denom_log: int = 8):
        if base is None:
            base = FunctionField(2)
        if base.p != 2:
            raise FieldError("perfect closure supported in characteristic 2 only")
        super().__init__(base.p, base.params)
        self.base = base
        self.max_denom_log = max_denom_log

    def _check_cap(self, a):
        cap = 1 << self.max_denom_log
        for m in a:
            for e in m:
                if isinstance(e, Fraction) and e.denominator > cap:
                    raise DepthCapError(
                        f"dyadic exponent denominator exceeds 2^{self.max_denom_log}")
        return a

    def _gcd(self, a, b):
        scale = _exponent_lcm_denominator(a, b)
        if scale == 1:
            return pp_gcd(a, b, self.p)
        a2 = _scale_exponents(a, scale)
        b2 = _scale_exponents(b, scale)
        g = pp_gcd(a2, b2, self.p)
        return self._check_cap(_scale_exponents_back(g, scale))

    def _divexact(self, a, b):
        scale = _exponent_lcm_denominator(a, b)
        if scale == 1:
            return pp_divexact(a, b, self.p)
        a2 = _scale_exponents(a, scale)
        b2 = _scale_exponents(b, scale)
        q = pp_divexact(a2, b2, self.p)
        return self._check_cap(_scale_exponents_back(q, scale))

    def make(self, num, den):
        self._check_cap(num)
        self._check_cap(den)
        return super().make(num, den)

    def lift(self, a: FFrac) -> FFrac:
        """View a base-field element inside the closure (same representation)."""
        return a

    def sqrt(self, a):
        if not a.num:
            return self.zero
        num = pp_sqrt_dyadic(a.num, self.max_denom_log)
        den = pp_sqrt_dyadic(a.den, self.max_denom_log)
        return FFrac(num, den)


def _scale_exponents_back(a, factor):
    out = {}
    for m, c in a.items():
        mm = []
        for e in m:
            v = Fraction(e, factor)
            if v.denominator == 1:
                v = int(v)
            mm.append(v)
        out[tuple(mm)] = c
    return out


GF2 = PrimeField(2)
GF3 = PrimeField(3)

"""Sparse exact multivariate polynomials over a pluggable coefficient field.

A :class:`Polynomial` stores an ordered variable list, a coefficient field
(any object following the protocol in :mod:`sing2lab.fields`), and a term
map from exponent tuples to nonzero coefficients.  Values are immutable
after construction and safe to share between threads.

The module also owns the text grammar used by the catalog and recipe
files::

    poly   := term ('+' term | '-' term)*
    term   := factor ('*' factor | '/' factor)*
    factor := base ('^' exponent)?
    base   := NAME | INT | '(' poly ')'
    exponent := INT | NAME | '(' int-expr ')'

Variable names may carry prime suffixes (``x'``, ``y''``).  Names that are
field parameters (``xi``, ``eta``, ``theta``, ``iota``) become coefficients;
``/`` requires a coefficient-valued divisor.  Exponents admit integer
arithmetic over declared meta-parameters, e.g. ``y^(2*r+1)``; ``//`` rounds
down.
"""

from __future__ import annotations

import ast
import re

from .fields import FieldError


# ---------------------------------------------------------------------------
# safe integer expressions for meta-parameters (n, r, j)

_ALLOWED_CALLS = {"max": max, "min": min, "abs": abs}


def eval_int(expr, env=None):
    """Evaluate a small integer/boolean expression over an int environment.

    Supports + - * // / % comparisons, and/or/not, max/min/abs.  A bare '/'
    must divide exactly.
    """
    if isinstance(expr, (int, bool)):
        return expr
    env = env or {}

    def rec(node):
        if isinstance(node, ast.Expression):
            return rec(node.body)
        if isinstance(node, ast.Constant):
            if isinstance(node.value, (int, bool)):
                return node.value
            raise ValueError(f"bad constant {node.value!r}")
        if isinstance(node, ast.Name):
            if node.id in env:
                return env[node.id]
            raise ValueError(f"unknown name {node.id!r}")
        if isinstance(node, ast.BinOp):
            a, b = rec(node.left), rec(node.right)
            if isinstance(node.op, ast.Add):
                return a + b
            if isinstance(node.op, ast.Sub):
                return a - b
            if isinstance(node.op, ast.Mult):
                return a * b
            if isinstance(node.op, ast.FloorDiv):
                return a // b
            if isinstance(node.op, ast.Mod):
                return a % b
            if isinstance(node.op, ast.Div):
                if b == 0 or a % b:
                    raise ValueError(f"non-exact division {a}/{b}")
                return a // b
            raise ValueError("operator not allowed")
        if isinstance(node, ast.UnaryOp):
            v = rec(node.operand)
            if isinstance(node.op, ast.USub):
                return -v
            if isinstance(node.op, ast.UAdd):
                return v
            if isinstance(node.op, ast.Not):
                return not v
            raise ValueError("operator not allowed")
        if isinstance(node, ast.Compare):
            left = rec(node.left)
            for op, cmp in zip(node.ops, node.comparators):
                right = rec(cmp)
                ok = (isinstance(op, ast.Lt) and left < right or
                      isinstance(op, ast.LtE) and left <= right or
                      isinstance(op, ast.Gt) and left > right or
                      isinstance(op, ast.GtE) and left >= right or
                      isinstance(op, ast.Eq) and left == right or
                      isinstance(op, ast.NotEq) and left != right)
                if not ok:
                    return False
                left = right
            return True
        if isinstance(node, ast.BoolOp):
            vals = [rec(v) for v in node.values]
            return all(vals) if isinstance(node.op, ast.And) else any(vals)
        if isinstance(node, ast.Call):
            if isinstance(node.func, ast.Name) and node.func.id in _ALLOWED_CALLS:
                return _ALLOWED_CALLS[node.func.id](*[rec(a) for a in node.args])
            raise ValueError("call not allowed")
        raise ValueError(f"syntax not allowed: {ast.dump(node)}")

    return rec(ast.parse(str(expr), mode="eval"))


# ---------------------------------------------------------------------------

class Polynomial:
    """Immutable sparse polynomial; arithmetic is exact in the declared field."""

    __slots__ = ("variables", "field", "terms")

    def __init__(self, variables, field, terms):
        object.__setattr__(self, "variables", tuple(variables))
        object.__setattr__(self, "field", field)
        clean = {}
        for m, c in terms.items():
            if len(m) != len(self.variables):
                raise FieldError("exponent arity mismatch")
            if not field.is_zero(c):
                clean[m] = c
        object.__setattr__(self, "terms", clean)

    def __setattr__(self, *a):
        raise AttributeError("Polynomial is immutable")

    # constructors ----------------------------------------------------------
    @classmethod
    def zero(cls, variables, field):
        return cls(variables, field, {})

    @classmethod
    def constant(cls, variables, field, c):
        return cls(variables, field, {(0,) * len(variables): field.coerce(c) if isinstance(c, int) else c})

    @classmethod
    def variable(cls, name, variables, field):
        m = [0] * len(variables)
        m[tuple(variables).index(name)] = 1
        return cls(variables, field, {tuple(m): field.one})

    # basics ----------------------------------------------------------------
    def is_zero(self):
        return not self.terms

    def __bool__(self):
        return bool(self.terms)

    def __eq__(self, other):
        return (isinstance(other, Polynomial)
                and self.variables == other.variables
                and self.field == other.field
                and self.terms == other.terms)

    def __hash__(self):
        return hash((self.variables,
                     tuple(sorted(self.terms.keys()))))

    def _check(self, other):
        if self.variables != other.variables or self.field != other.field:
            raise FieldError("polynomials live in different rings")

    def __add__(self, other):
        if isinstance(other, int):
            other = Polynomial.constant(self.variables, self.field, other)
        self._check(other)
        F = self.field
        out = dict(self.terms)
        for m, c in other.terms.items():
            v = F.add(out.get(m, F.zero), c)
            if F.is_zero(v):
                out.pop(m, None)
            else:
                out[m] = v
        return Polynomial(self.variables, F, out)

    def __neg__(self):
        F = self.field
        return Polynomial(self.variables, F, {m: F.neg(c) for m, c in self.terms.items()})

    def __sub__(self, other):
        if isinstance(other, int):
            other = Polynomial.constant(self.variables, self.field, other)
        return self + (-other)

    def __mul__(self, other):
        F = self.field
        if isinstance(other, int):
            other = F.coerce(other)
        if not isinstance(other, Polynomial):
            out = {}
            for m, c in self.terms.items():
                v = F.mul(c, other)
                if not F.is_zero(v):
                    out[m] = v
            return Polynomial(self.variables, F, out)
        self._check(other)
        out = {}
        for m1, c1 in self.terms.items():
            for m2, c2 in other.terms.items():
                m = tuple(a + b for a, b in zip(m1, m2))
                v = F.mul(c1, c2)
                prev = out.get(m)
                v = F.add(prev, v) if prev is not None else v
                if F.is_zero(v):
                    out.pop(m, None)
                else:
                    out[m] = v
        return Polynomial(self.variables, F, out)

    __rmul__ = __mul__

    def __pow__(self, e):
        if e < 0:
            raise FieldError("negative polynomial power")
        result = Polynomial.constant(self.variables, self.field, 1)
        base = self
        while e:
            if e & 1:
                result = result * base
            base = base * base
            e >>= 1
        return result

    # structure -------------------------------------------------------------
    def total_degree(self):
        if not self.terms:
            return -1
        return max(sum(m) for m in self.terms)

    def degree_in(self, var):
        i = self.variables.index(var)
        return max((m[i] for m in self.terms), default=-1)

    def constant_term(self):
        return self.terms.get((0,) * len(self.variables), self.field.zero)

    def graded_part(self, d):
        return Polynomial(self.variables, self.field,
                          {m: c for m, c in self.terms.items() if sum(m) == d})

    def truncate(self, N):
        """Drop all terms of total degree >= N (a jet of order N)."""
        return Polynomial(self.variables, self.field,
                          {m: c for m, c in self.terms.items() if sum(m) < N})

    def coefficient_of(self, var, power):
        """Coefficient polynomial of var^power (in the full ring)."""
        i = self.variables.index(var)
        out = {}
        for m, c in self.terms.items():
            if m[i] == power:
                mm = list(m)
                mm[i] = 0
                out[tuple(mm)] = c
        return Polynomial(self.variables, self.field, out)

    def involves(self, var):
        i = self.variables.index(var)
        return any(m[i] for m in self.terms)

    def divisible_part(self, monomial):
        """Quotient of the sum of terms divisible by the given monomial tuple."""
        out = {}
        for m, c in self.terms.items():
            if all(a >= b for a, b in zip(m, monomial)):
                out[tuple(a - b for a, b in zip(m, monomial))] = c
        return Polynomial(self.variables, self.field, out)

    def monomial_multiple(self, monomial, coeff=None):
        F = self.field
        coeff = F.one if coeff is None else coeff
        out = {}
        for m, c in self.terms.items():
            out[tuple(a + b for a, b in zip(m, monomial))] = F.mul(c, coeff)
        return Polynomial(self.variables, F, out)

    # morphisms ---------------------------------------------------------------
    def substitute(self, assignment):
        """Ring homomorphism sending each assigned variable to its image.

        Unassigned variables map to themselves; images must live in one
        common ring (same variable list and field).
        """
        if not assignment:
            return self
        for v in assignment:
            if v not in self.variables:
                raise FieldError(f"unknown variable {v!r}")
        images = {}
        target = None
        for v, img in assignment.items():
            if isinstance(img, Polynomial):
                if target is None:
                    target = (img.variables, img.field)
                elif target != (img.variables, img.field):
                    raise FieldError("substitution images live in different rings")
                images[v] = img
        if target is None:
            target = (self.variables, self.field)
        tvars, tfield = target
        if tfield != self.field and not (self.field.kind == "prime"
                                         and self.field.p == tfield.p):
            raise FieldError("incompatible substitution field")
        for v in self.variables:
            if v not in images:
                if v not in tvars:
                    raise FieldError(f"variable {v!r} missing from target ring")
                images[v] = Polynomial.variable(v, tvars, tfield)
        one = Polynomial.constant(tvars, tfield, 1)
        powers = {v: {0: one} for v in self.variables}
        result = Polynomial.zero(tvars, tfield)
        for m, c in self.terms.items():
            piece = one * (tfield.coerce(c) if self.field != tfield else c)
            for v, e in zip(self.variables, m):
                if e == 0:
                    continue
                cache = powers[v]
                if e not in cache:
                    p = max(k for k in cache if k <= e)
                    img = cache[p]
                    while p < e:
                        img = img * images[v]
                        p += 1
                        cache[p] = img
                piece = piece * cache[e]
            result = result + piece
        return result

    def change_field(self, field):
        """Coerce coefficients into another field (prime subfield lifting)."""
        if field == self.field:
            return self
        out = {}
        for m, c in self.terms.items():
            if self.field.kind != "prime":
                raise FieldError("only prime-field coefficients can be lifted")
            out[m] = field.coerce(int(c))
        return Polynomial(self.variables, field, out)

    def rename_variables(self, new_variables):
        return Polynomial(new_variables, self.field, dict(self.terms))

    def permute_variables(self, mapping):
        """Relabel variables by the given old->new name mapping."""
        perm = []
        for v in self.variables:
            perm.append(self.variables.index(mapping.get(v, v)))
        out = {}
        for m, c in self.terms.items():
            mm = [0] * len(m)
            for i, v in enumerate(self.variables):
                tgt = mapping.get(v, v)
                mm[self.variables.index(tgt)] = m[i]
            out[tuple(mm)] = c
        return Polynomial(self.variables, self.field, out)

    def drop_variable(self, var):
        i = self.variables.index(var)
        if any(m[i] for m in self.terms):
            raise FieldError(f"polynomial still involves {var!r}")
        new_vars = self.variables[:i] + self.variables[i + 1:]
        return Polynomial(new_vars, self.field,
                          {m[:i] + m[i + 1:]: c for m, c in self.terms.items()})

    def derivative(self, var):
        """Formal partial derivative with coefficients reduced mod p."""
        i = self.variables.index(var)
        F = self.field
        out = {}
        for m, c in self.terms.items():
            e = m[i]
            if e == 0:
                continue
            k = e % F.p
            if k == 0:
                continue
            coeff = c
            for _ in range(k - 1):
                coeff = F.add(coeff, c)
            mm = list(m)
            mm[i] = e - 1
            mm = tuple(mm)
            prev = out.get(mm)
            coeff = F.add(prev, coeff) if prev is not None else coeff
            if F.is_zero(coeff):
                out.pop(mm, None)
            else:
                out[mm] = coeff
        return Polynomial(self.variables, F, out)

    def eval_coeffs(self, assignment):
        """Evaluate at field-element values for every variable."""
        F = self.field
        total = F.zero
        for m, c in self.terms.items():
            v = c
            for name, e in zip(self.variables, m):
                if e:
                    x = assignment[name]
                    for _ in range(e):
                        v = F.mul(v, x)
            total = F.add(total, v)
        return total

    def specialize_coeffs(self, coeff_map, target_field):
        """Map every coefficient through coeff_map into target_field."""
        out = {}
        F = target_field
        for m, c in self.terms.items():
            v = coeff_map(c)
            if not F.is_zero(v):
                out[m] = v
        return Polynomial(self.variables, F, out)

    # text ------------------------------------------------------------------
    def sorted_terms(self):
        """Terms in the module's global print order: graded lex, descending."""
        return sorted(self.terms.items(),
                      key=lambda kv: (sum(kv[0]), kv[0]), reverse=True)

    def to_str(self):
        if not self.terms:
            return "0"
        F = self.field
        bits = []
        for m, c in self.sorted_terms():
            factors = []
            cs = F.fmt(c)
            if cs != "1" or not any(m):
                factors.append(cs if ("/" not in cs and "+" not in cs)
                               else f"({cs})")
            for v, e in zip(self.variables, m):
                if e == 0:
                    continue
                factors.append(v if e == 1 else f"{v}^{e}")
            bits.append("*".join(factors))
        return "+".join(bits)

    def __repr__(self):
        return f"<{self.to_str()}>"


# ---------------------------------------------------------------------------
# parser

_TOKEN = re.compile(r"\s*(\d+|[A-Za-z][A-Za-z0-9_]*'*|//|\*\*|[-+*/^(),])")


def _tokenize(text):
    pos = 0
    out = []
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise FieldError(f"bad character in polynomial text: {text[pos:]!r}")
        tok = m.group(1)
        out.append("^" if tok == "**" else tok)
        pos = m.end()
    return out


class _Parser:
    def __init__(self, tokens, variables, field, env):
        self.toks = tokens
        self.i = 0
        self.variables = tuple(variables)
        self.field = field
        self.env = env or {}

    def peek(self):
        return self.toks[self.i] if self.i < len(self.toks) else None

    def take(self, expect=None):
        tok = self.peek()
        if tok is None or (expect is not None and tok != expect):
            raise FieldError(f"unexpected token {tok!r} (wanted {expect!r})")
        self.i += 1
        return tok

    # integer expressions inside exponents ---------------------------------
    def int_expr(self):
        v = self.int_term()
        while self.peek() in ("+", "-"):
            op = self.take()
            w = self.int_term()
            v = v + w if op == "+" else v - w
        return v

    def int_term(self):
        v = self.int_factor()
        while self.peek() in ("*", "//", "/"):
            op = self.take()
            w = self.int_factor()
            if op == "*":
                v = v * w
            elif op == "//":
                v = v // w
            else:
                if w == 0 or v % w:
                    raise FieldError(f"non-exact exponent division {v}/{w}")
                v = v // w
        return v

    def int_factor(self):
        tok = self.peek()
        if tok == "-":
            self.take()
            return -self.int_factor()
        if tok == "(":
            self.take()
            v = self.int_expr()
            self.take(")")
            return v
        tok = self.take()
        if tok.isdigit():
            return int(tok)
        if tok in self.env:
            return int(self.env[tok])
        if tok in ("max", "min"):
            self.take("(")
            args = [self.int_expr()]
            while self.peek() == ",":
                self.take()
                args.append(self.int_expr())
            self.take(")")
            return (max if tok == "max" else min)(*args)
        raise FieldError(f"unknown exponent name {tok!r}")

    # polynomial grammar ----------------------------------------------------
    def poly(self):
        p = self.term()
        while self.peek() in ("+", "-"):
            op = self.take()
            q = self.term()
            p = p + q if op == "+" else p - q
        return p

    def term(self):
        p = self.factor()
        while self.peek() in ("*", "/"):
            op = self.take()
            q = self.factor()
            if op == "*":
                p = p * q
            else:
                c = _constant_value(q)
                if c is None:
                    raise FieldError("'/' requires a coefficient divisor")
                p = p * self.field.inv(c)
        return p

    def factor(self):
        base = self.base()
        if self.peek() == "^":
            self.take()
            e = self.exponent()
            if e < 0:
                raise FieldError("negative exponent")
            base = base ** e
        return base

    def exponent(self):
        tok = self.peek()
        if tok == "(":
            self.take()
            v = self.int_expr()
            self.take(")")
            return v
        tok = self.take()
        if tok.isdigit():
            return int(tok)
        if tok in self.env:
            return int(self.env[tok])
        raise FieldError(f"bad exponent token {tok!r}")

    def base(self):
        tok = self.peek()
        if tok == "(":
            self.take()
            p = self.poly()
            self.take(")")
            return p
        if tok == "-":
            self.take()
            return -self.base()
        tok = self.take()
        if tok.isdigit():
            return Polynomial.constant(self.variables, self.field, int(tok))
        if tok in self.variables:
            return Polynomial.variable(tok, self.variables, self.field)
        params = getattr(self.field, "params", ())
        if tok in params:
            return Polynomial.constant(self.variables, self.field,
                                       self.field.param(tok))
        if tok in self.env:
            return Polynomial.constant(self.variables, self.field,
                                       int(self.env[tok]))
        raise FieldError(f"unknown name {tok!r}")


def _constant_value(p: Polynomial):
    if not p.terms:
        return p.field.zero
    if len(p.terms) == 1:
        (m, c), = p.terms.items()
        if not any(m):
            return c
    return None


def parse_poly(text, variables, field, env=None) -> Polynomial:
    """Parse catalog polynomial text; see the module docstring for the grammar."""
    parser = _Parser(_tokenize(text), variables, field, env)
    p = parser.poly()
    if parser.peek() is not None:
        raise FieldError(f"trailing tokens in {text!r}")
    return p

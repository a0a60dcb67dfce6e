"""Chart-by-chart blow-up along coordinate-line centers and the recipe
interpreter that replays resolution chains.

A blow-up round blows up the coordinate line cut by a 3-subset of the
ambient variables.  Each of the three charts keeps the original variable
names: in the chart of ``c`` every other center variable ``v`` pulls back
to ``v * c``.  The strict transform divides the total transform by the
exceptional factor ``c^k``; ``k = 2`` is the crepancy certificate.

Recipes are data (see ``data/recipes``): per chart they list coordinate
changes, unit absorptions and assertions, and end in one of ``smooth``,
``covered``, ``a1`` (a trivial A1 x curve product, resolved by one more
round) or ``successor`` (the catalog entry the chain continues with).
"""

from __future__ import annotations

from dataclasses import dataclass, field as dfield

from .fields import FieldError
from .poly import Polynomial, parse_poly, eval_int
from .germs import (HypersurfaceGerm, CoordinateChange, apply_change,
                    jacobian_ideal, singular_locus_is_line, multiplicity_along,
                    default_jet_order)
from .groebner import buchberger, grlex


class RecipeError(Exception):
    """A recipe assertion failed; carries the step log for diagnosis."""

    def __init__(self, message, log=None):
        super().__init__(message)
        self.log = log or []


@dataclass(frozen=True)
class ChartTransform:
    center: tuple
    chart: str

    def __post_init__(self):
        if len(self.center) != 3 or self.chart not in self.center:
            raise FieldError("a chart names one of the three center variables")

    def substitution(self, variables, field):
        chart_poly = Polynomial.variable(self.chart, variables, field)
        out = {}
        for v in self.center:
            if v != self.chart:
                out[v] = Polynomial.variable(v, variables, field) * chart_poly
        return out


def strict_transform(f: Polynomial, chart: ChartTransform):
    """Strict transform (g, k) of f in the given chart; exact on exponents."""
    idx = [f.variables.index(v) for v in chart.center]
    ci = f.variables.index(chart.chart)
    if f.is_zero():
        raise FieldError("cannot transform the zero polynomial")
    k = min(sum(m[i] for i in idx) for m in f.terms)
    if k < 1:
        raise FieldError("f does not vanish on the center line")
    out = {}
    for m, c in f.terms.items():
        s = sum(m[i] for i in idx)
        mm = list(m)
        mm[ci] = s - k
        out[tuple(mm)] = c
    return Polynomial(f.variables, f.field, out), k


def total_transform_identity(f: Polynomial, chart: ChartTransform) -> bool:
    """Check substitute(chart map) == chart_var^k * strict transform."""
    g, k = strict_transform(f, chart)
    sub = f.substitute(chart.substitution(f.variables, f.field))
    ci = f.variables.index(chart.chart)
    mono = tuple(k if i == ci else 0 for i in range(len(f.variables)))
    return sub == g.monomial_multiple(mono)


def chart_overlap_consistent(f: Polynomial, center=("x", "y", "z"),
                             principal="y", secondary="x") -> bool:
    """Glue the principal and secondary charts and compare strict transforms.

    On the overlap the secondary chart coordinates are rational in the
    principal ones; clearing denominators must reproduce the principal
    strict transform times the right exceptional power.
    """
    gy, k = strict_transform(f, ChartTransform(center, principal))
    gx, k2 = strict_transform(f, ChartTransform(center, secondary))
    if k != k2:
        return False
    vars_ = f.variables
    i_sec = vars_.index(secondary)
    i_pri = vars_.index(principal)
    rest = [i for i in range(len(vars_)) if i not in (i_sec, i_pri)
            and vars_[i] in center]
    (i_z,) = rest
    # term x^a y^b z^c (secondary chart) -> x^(a-b-c) y^a z^c in principal coords
    shifted = {}
    min_exp = 0
    items = []
    for m, c in gx.terms.items():
        a, b, cc = m[i_sec], m[i_pri], m[i_z]
        e = a - b - cc
        mm = list(m)
        mm[i_sec] = 0
        mm[i_pri] = a
        mm[i_z] = cc
        items.append((tuple(mm), e, c))
        min_exp = min(min_exp, e)
    D = -min_exp
    for mm, e, c in items:
        mmm = list(mm)
        mmm[i_sec] = e + D
        key = tuple(mmm)
        prev = shifted.get(key)
        v = f.field.add(prev, c) if prev is not None else c
        if f.field.is_zero(v):
            shifted.pop(key, None)
        else:
            shifted[key] = v
    glued = Polynomial(vars_, f.field, shifted)
    shift = D - k
    if shift >= 0:
        target = gy.monomial_multiple(
            tuple(shift if i == i_sec else 0 for i in range(len(vars_))))
        return glued == target
    target = glued.monomial_multiple(
        tuple(-shift if i == i_sec else 0 for i in range(len(vars_))))
    return target == gy


# ---------------------------------------------------------------------------
# smoothness checks

def smoothness_ideal(f: Polynomial):
    gens = [f] + [f.derivative(v) for v in f.variables]
    gens = [g for g in gens if not g.is_zero()]
    return buchberger(gens, grlex(*f.variables))


def is_smooth_chart(f: Polynomial) -> bool:
    """Jacobian criterion: the singular locus in this chart is empty."""
    return smoothness_ideal(f).contains_one()


def is_covered_chart(f: Polynomial, other_center_vars) -> bool:
    """Singular points, if any, lie where another chart is defined."""
    gens = [f] + [f.derivative(v) for v in f.variables]
    gens += [Polynomial.variable(v, f.variables, f.field)
             for v in other_center_vars]
    gens = [g for g in gens if not g.is_zero()]
    return buchberger(gens, grlex(*f.variables)).contains_one()


def detect_a1_product(f: Polynomial):
    """Return (square_var, factor_vars) when f is exactly u^2 + v*t."""
    if len(f.terms) != 2:
        return None
    sq = None
    pair = None
    for m, c in f.terms.items():
        if not f.field.eq(c, f.field.one):
            return None
        nz = [(i, e) for i, e in enumerate(m) if e]
        if len(nz) == 1 and nz[0][1] == 2:
            sq = f.variables[nz[0][0]]
        elif len(nz) == 2 and nz[0][1] == 1 and nz[1][1] == 1:
            pair = (f.variables[nz[0][0]], f.variables[nz[1][0]])
        else:
            return None
    if sq is None or pair is None or sq in pair:
        return None
    return sq, pair


# ---------------------------------------------------------------------------
# recipe interpreter

@dataclass
class ChainReport:
    entry_id: str
    reading: str
    rounds: int = 0
    crepant: bool = True
    final_smooth: bool = True
    passed: bool = True
    stated_count: int | None = None
    successor_path: list = dfield(default_factory=list)
    log: list = dfield(default_factory=list)
    discrepancies: list = dfield(default_factory=list)
    jet_orders: list = dfield(default_factory=list)

    def note(self, **kv):
        self.log.append(kv)


class RecipeEngine:
    """Replays and validates the resolution chains described by recipes."""

    def __init__(self, catalog, radical_bound: int = 8, max_rounds: int = 64):
        self.catalog = catalog
        self.radical_bound = radical_bound
        self.max_rounds = max_rounds

    def _bound(self, f: Polynomial) -> int:
        # centers of high-degree rows need radical exponents past the
        # configured floor (for the f-purity row without a pure y power the
        # minimal exponent reaches 2n-1, n the largest mixed y-degree)
        return max(self.radical_bound, 2 * f.total_degree())

    # steps -----------------------------------------------------------------
    def _apply_steps(self, f, steps, env, report):
        for raw in steps or []:
            step = dict(raw)
            cond = step.pop("when", None)
            if cond is not None and not eval_int(cond, env):
                continue
            if "shear" in step:
                spec = step["shear"]
                h = parse_poly(spec["add"], f.variables, f.field, env)
                change = CoordinateChange("shear", {spec["var"]: h})
                f = apply_change(HypersurfaceGerm(f), change).f
                report.note(step="shear", var=spec["var"], add=h.to_str())
            elif "relabel" in step:
                mapping = dict(step["relabel"])
                change = CoordinateChange("relabel", mapping)
                f = apply_change(HypersurfaceGerm(f), change).f
                report.note(step="relabel", mapping=mapping)
            elif "unit_absorb" in step:
                carrier = parse_poly(step["unit_absorb"], f.variables, f.field, env)
                f = self._unit_absorb(f, carrier, report)
            elif "absorb" in step:
                spec = step["absorb"]
                carrier = parse_poly(spec["carrier"], f.variables, f.field, env)
                f = self._absorb(f, spec["var"], carrier, report)
            elif "assert_eq" in step:
                expected = parse_poly(step["assert_eq"], f.variables, f.field, env)
                if f != expected:
                    raise RecipeError(
                        f"assert_eq failed: got {f.to_str()}, "
                        f"expected {expected.to_str()}", report.log)
                report.note(step="assert_eq", ok=True)
            else:
                raise RecipeError(f"unknown recipe step {step!r}", report.log)
        return f

    @staticmethod
    def _single_monomial(p: Polynomial, what):
        if len(p.terms) != 1:
            raise RecipeError(f"{what} must be a single monomial")
        (m, c), = p.terms.items()
        if not p.field.eq(c, p.field.one):
            raise RecipeError(f"{what} must be monic")
        return m

    def _unit_absorb(self, f, carrier, report):
        """Collect all terms divisible by the carrier as unit * carrier and
        replace the unit by 1 (recorded with its jet order)."""
        m = self._single_monomial(carrier, "unit_absorb carrier")
        u = f.divisible_part(m)
        if not f.field.eq(u.constant_term(), f.field.one):
            raise RecipeError(
                f"carrier {carrier.to_str()} not present with coefficient 1 "
                f"in {f.to_str()}", report.log)
        one = Polynomial.constant(f.variables, f.field, 1)
        new_f = f - (u - one).monomial_multiple(m)
        N = default_jet_order(new_f)
        report.note(step="unit_absorb", carrier=carrier.to_str(),
                    unit=u.to_str(), jet_order=N)
        report.jet_orders.append(N)
        return new_f

    def _absorb(self, f, var, carrier, report):
        """Shear var by the computed cofactor so that only var*carrier keeps
        terms divisible by the carrier."""
        m = self._single_monomial(carrier, "absorb carrier")
        if f.degree_in(var) != 1:
            raise RecipeError(f"absorb({var}) needs degree 1 in {var}",
                              report.log)
        w_cof = f.coefficient_of(var, 1)
        if w_cof != Polynomial(f.variables, f.field, {m: f.field.one}):
            raise RecipeError(
                f"absorb({var}): cofactor {w_cof.to_str()} is not the "
                f"carrier {carrier.to_str()}", report.log)
        a_part = f.coefficient_of(var, 0)
        h = a_part.divisible_part(m)
        if h.is_zero():
            report.note(step="absorb", var=var, h="0")
            return f
        new_f = f - h.monomial_multiple(m)
        report.note(step="absorb", var=var, carrier=carrier.to_str(),
                    h=h.to_str())
        return new_f

    # chart endings -----------------------------------------------------------
    def _a1_round(self, f, report):
        shape = detect_a1_product(f)
        if shape is None:
            raise RecipeError(f"not an A1 x curve product: {f.to_str()}",
                              report.log)
        sq, (v1, v2) = shape
        center = (sq, v1, v2)
        germ = HypersurfaceGerm(f)
        locus = singular_locus_is_line(germ, center, bound=self._bound(f))
        if not locus.passed:
            raise RecipeError(f"A1 center {center} is not the singular line",
                              report.log)
        k_seen = set()
        for cvar in center:
            g, k = strict_transform(f, ChartTransform(center, cvar))
            k_seen.add(k)
            others = [v for v in center if v != cvar]
            if not (is_smooth_chart(g) or is_covered_chart(g, others)):
                raise RecipeError(
                    f"A1 chart {cvar} not resolved: {g.to_str()}", report.log)
        if k_seen != {2}:
            report.crepant = False
            report.discrepancies.append(
                {"kind": "crepancy", "detail": f"A1 center k={sorted(k_seen)}"})
        report.note(step="a1_round", center=center, equation=f.to_str())
        return 1

    # main ---------------------------------------------------------------------
    def run_chain(self, entry, reading: str = "primary", depth: int = 0) -> ChainReport:
        report = ChainReport(entry_id=entry.id, reading=reading,
                             stated_count=entry.stated_count)
        try:
            report.rounds = self._run(entry, reading, report, depth)
        except RecipeError as exc:
            report.passed = False
            report.final_smooth = False
            report.discrepancies.append({"kind": "failure", "detail": str(exc)})
            return report
        if entry.stated_count is not None and report.rounds != entry.stated_count:
            report.discrepancies.append({
                "kind": "round-count",
                "detail": (f"computed {report.rounds} blow-ups, paper states "
                           f"{entry.stated_count}"),
                "computed": report.rounds,
                "stated": entry.stated_count,
            })
        return report

    def _run(self, entry, reading, report, depth) -> int:
        if depth > self.max_rounds:
            raise RecipeError("chain exceeded the round limit", report.log)
        recipe = self.catalog.recipe_for(entry)
        env = dict(n=entry.n or 0, r=entry.r or 0, j=entry.j or 0,
                   alt=1 if reading == "alt" else 0)
        f = entry.equation if reading == "primary" else entry.alt_equation
        if f is None:
            raise RecipeError(f"{entry.id} has no {reading} reading", report.log)
        germ = HypersurfaceGerm(f, label=entry.id)
        center = tuple(recipe["center"])
        locus = singular_locus_is_line(germ, center, bound=self._bound(f))
        if not locus.passed:
            raise RecipeError(
                f"{entry.id}: center {center} fails the singular-line check "
                f"({locus.offending_generator}, {locus.radical_exponents})",
                report.log)
        mult = multiplicity_along(f, center)
        if mult != 2:
            report.crepant = False
            report.discrepancies.append(
                {"kind": "crepancy",
                 "detail": f"{entry.id}: center multiplicity {mult}"})
        rounds = 1
        report.note(step="blowup", entry=entry.id, center=center, k=mult)
        for chart_var, chart_spec in sorted(recipe["charts"].items()):
            g, k = strict_transform(f, ChartTransform(center, chart_var))
            if k != mult:
                raise RecipeError(
                    f"{entry.id}: chart {chart_var} exceptional power {k} != "
                    f"{mult}", report.log)
            g = self._apply_steps(g, chart_spec.get("steps"), env, report)
            end = chart_spec["end"]
            if isinstance(end, list):
                end = self._select_end(end, env, report)
            if end == "smooth":
                if not is_smooth_chart(g):
                    raise RecipeError(
                        f"{entry.id}: chart {chart_var} is not smooth: "
                        f"{g.to_str()}", report.log)
                report.note(step="smooth", chart=chart_var)
            elif end == "covered":
                others = [v for v in center if v != chart_var]
                if not is_covered_chart(g, others):
                    raise RecipeError(
                        f"{entry.id}: chart {chart_var} has singular points "
                        f"outside the other charts: {g.to_str()}", report.log)
                report.note(step="covered", chart=chart_var)
            elif end == "a1":
                rounds += self._a1_round(g, report)
            elif end == "successor":
                rounds += self._successor(entry, g, env, report, depth)
            else:
                raise RecipeError(f"unknown chart end {end!r}", report.log)
        return rounds

    def _select_end(self, branches, env, report):
        for branch in branches:
            cond = branch.get("when")
            if cond is None or eval_int(cond, env):
                return branch["end"]
        raise RecipeError("no recipe branch matched", report.log)

    def _successor(self, entry, g, env, report, depth) -> int:
        succ_id = entry.successor_id()
        if succ_id is None:
            raise RecipeError(f"{entry.id} has no successor entry", report.log)
        succ = self.catalog.lookup(succ_id)
        matched = None
        if g == succ.equation:
            matched = "primary"
        elif succ.alt_equation is not None and g == succ.alt_equation:
            matched = "alt"
        if matched is None:
            raise RecipeError(
                f"{entry.id}: transform {g.to_str()} does not match the "
                f"{succ_id} template {succ.equation.to_str()}"
                + (f" or its alternate reading {succ.alt_equation.to_str()}"
                   if succ.alt_equation is not None else ""),
                report.log)
        report.successor_path.append({"id": succ_id, "reading": matched})
        report.note(step="successor", id=succ_id, reading=matched)
        return self._run(succ, matched, report, depth + 1)


def successor_check(germ_poly: Polynomial, entry) -> bool:
    """True when the polynomial matches the entry's template (either reading)."""
    if germ_poly == entry.equation:
        return True
    return entry.alt_equation is not None and germ_poly == entry.alt_equation

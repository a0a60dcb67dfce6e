"""Declarative catalog of the classified families.

Loads the table documents (fixed rows and parameterized family templates),
the golden Tjurina-basis lists, and the blow-up recipes from
``sing2lab/data`` (overridable via the ``SING2LAB_CATALOG_DIR`` environment
variable), and exposes label lookup, instantiation, and enumeration.
"""

from __future__ import annotations

import os
import re
from dataclasses import dataclass

import yaml

from .fields import GF2, GF3, FieldError, PrimeField
from .poly import Polynomial, parse_poly, eval_int

AMBIENT = ("x", "y", "z", "w")

_LABEL_D = re.compile(r"^D_(\d+)\^(\d+)([BC])_(\d+)$")
_SLOT = re.compile(r"\[([^][]+)\]")


def format_label(template: str, env) -> str:
    """Fill [expr] slots in a label template, e.g. D_[2*n-2]^[r-1]B_[j-1]."""
    return _SLOT.sub(lambda m: str(eval_int(m.group(1), env)), template)


class CatalogError(Exception):
    pass


@dataclass(frozen=True)
class CatalogEntry:
    id: str
    table: int
    p: int
    n: int
    r: int
    j: int
    family: str | None
    equation: Polynomial
    alt_equation: Polynomial | None
    artin_letter: str
    artin_N: int
    artin_coindex: int
    lipman: str
    stated_count: int | None
    successor: str | None
    boxed: bool
    recipe: str
    dual_flagged: bool = False

    def successor_id(self):
        return self.successor

    @property
    def lipman_letter(self):
        return self.lipman.split("_")[0]

    @property
    def lipman_index(self):
        bits = self.lipman.split("_")
        return int(bits[1]) if len(bits) > 1 else None

    def env(self):
        return {"n": self.n, "r": self.r, "j": self.j}


def _field_for(p: int):
    if p == 2:
        return GF2
    if p == 3:
        return GF3
    return PrimeField(p)


def _build_equation(terms, env, field) -> Polynomial:
    total = Polynomial.zero(AMBIENT, field)
    for t in terms:
        if isinstance(t, dict):
            if "when" in t and not eval_int(t["when"], env):
                continue
            text = t["t"]
        else:
            text = t
        total = total + parse_poly(text, AMBIENT, field, env)
    return total


class Catalog:
    """All catalog entries plus golden bases and recipe bindings."""

    def __init__(self, data_dir: str | None = None):
        if data_dir is None:
            data_dir = os.environ.get("SING2LAB_CATALOG_DIR") or os.path.join(
                os.path.dirname(__file__), "data")
        self.data_dir = data_dir
        self.fixed: dict[str, CatalogEntry] = {}
        self.families: list[dict] = []
        self.golden: dict[str, dict] = {}
        self.recipes: dict[str, dict] = {}
        self._load()

    # loading ----------------------------------------------------------------
    def _load(self):
        for name in ("table1", "table2", "table3"):
            path = os.path.join(self.data_dir, "catalog", f"{name}.yaml")
            with open(path) as fh:
                doc = yaml.safe_load(fh)
            p = doc["characteristic"]
            field = _field_for(p)
            for row in doc["entries"]:
                entry = self._fixed_entry(row, doc["table"], p, field)
                if entry.id in self.fixed:
                    raise CatalogError(f"duplicate catalog id {entry.id}")
                self.fixed[entry.id] = entry
        with open(os.path.join(self.data_dir, "catalog", "table4.yaml")) as fh:
            doc = yaml.safe_load(fh)
        self.families = doc["families"]
        golden_path = os.path.join(self.data_dir, "golden", "tjurina_bases.yaml")
        with open(golden_path) as fh:
            self.golden = yaml.safe_load(fh)["bases"]
        rdir = os.path.join(self.data_dir, "recipes")
        for fname in sorted(os.listdir(rdir)):
            if not fname.endswith(".yaml"):
                continue
            with open(os.path.join(rdir, fname)) as fh:
                doc = yaml.safe_load(fh)
            for rec in doc["recipes"]:
                if rec["id"] in self.recipes:
                    raise CatalogError(f"duplicate recipe id {rec['id']}")
                self.recipes[rec["id"]] = rec

    def _fixed_entry(self, row, table, p, field) -> CatalogEntry:
        env = {k: row.get(k, 0) for k in ("n", "r", "j")}
        eq = parse_poly(row["equation"], AMBIENT, field, env)
        alt = row.get("alt_equation")
        alt_eq = parse_poly(alt, AMBIENT, field, env) if alt else None
        letter, N, coindex, lip = _parse_id(row["id"])
        return CatalogEntry(
            id=row["id"], table=table, p=p,
            n=row.get("n", 0), r=row.get("r", 0), j=row.get("j", 0),
            family=row.get("family"),
            equation=eq, alt_equation=alt_eq,
            artin_letter=letter, artin_N=N, artin_coindex=coindex,
            lipman=lip,
            stated_count=row.get("blowups"),
            successor=row.get("successor"),
            boxed=bool(row.get("boxed", False)),
            recipe=row["recipe"],
            dual_flagged=bool(row.get("dual_flagged", False)),
        )

    # families ----------------------------------------------------------------
    def _family(self, fam_id: str) -> dict:
        for fam in self.families:
            if fam["id"] == fam_id:
                return fam
        raise CatalogError(f"unknown family {fam_id!r}")

    def family_rows(self, fam: dict, n: int):
        """Yield (r, j) pairs valid for the family at this n."""
        if n < fam.get("min_n", 3):
            return
        for block in fam["blocks"]:
            for r in range(0, n):
                env = {"n": n, "r": r}
                if not eval_int(block["cond"], env):
                    continue
                jmin = eval_int(block["jmin"], env)
                jmax = eval_int(block["jmax"], env)
                for j in range(jmin, jmax + 1):
                    yield r, j

    def instantiate(self, fam_id: str, n: int, r: int, j: int) -> CatalogEntry:
        """Concrete germ for a family row; rejects invalid (n, r, j)."""
        fam = self._family(fam_id)
        if (r, j) not in set(self.family_rows(fam, n)):
            raise CatalogError(
                f"({fam_id}, n={n}, r={r}, j={j}) violates the family "
                f"constraints (blocks: "
                + "; ".join(b["cond"] for b in fam["blocks"]) + ")")
        env = {"n": n, "r": r, "j": j}
        N = eval_int(fam["N"], env)
        label = f"D_{N}^{r}{fam['letter']}_{j}"
        eq = _build_equation(fam["terms"], env, GF2)
        stated = eval_int(fam["stated_count"], env)
        successor = None
        for rule in fam["successor"]:
            cond = rule.get("when")
            if cond is None or eval_int(cond, env):
                lbl = rule["label"]
                successor = None if lbl == "none" else format_label(lbl, env)
                break
        return CatalogEntry(
            id=label, table=4, p=2, n=n, r=r, j=j, family=fam_id,
            equation=eq, alt_equation=None,
            artin_letter="D", artin_N=N, artin_coindex=r,
            lipman=f"{fam['letter']}_{j}",
            stated_count=stated, successor=successor,
            boxed=False, recipe=fam["recipe"])

    # lookup -------------------------------------------------------------------
    def lookup(self, label: str) -> CatalogEntry:
        if label in self.fixed:
            return self.fixed[label]
        m = _LABEL_D.match(label)
        if not m:
            raise CatalogError(f"unknown catalog id {label!r}")
        N, coindex, letter, j = int(m.group(1)), int(m.group(2)), m.group(3), int(m.group(4))
        if N % 2 == 0:
            n = N // 2
            fam_id = "even_B" if letter == "B" else "even_C"
        else:
            n = (N - 1) // 2
            fam_id = "odd_B" if letter == "B" else "odd_C"
        return self.instantiate(fam_id, n, coindex, j)

    def enumerate_entries(self, p: int = 2, n_range=()) -> list[CatalogEntry]:
        """All fixed rows for characteristic p, plus the family instances for
        the given n values (deduplicated against fixed labels)."""
        out = []
        for entry in self.fixed.values():
            if entry.p == p:
                out.append(entry)
        if p != 2:
            return out
        seen = {e.id for e in out}
        for fam in self.families:
            for n in sorted(set(n_range)):
                for r, j in self.family_rows(fam, n):
                    inst = self.instantiate(fam["id"], n, r, j)
                    if inst.id in seen:
                        continue
                    seen.add(inst.id)
                    out.append(inst)
        return out

    def template_consistency(self, n_values=(2, 3, 4)) -> list[dict]:
        """Compare family instantiations against explicit Table-3 rows.

        Returns a list of mismatch records; matching a row's primary or
        alternate reading both count as consistent, with the reading noted.
        """
        issues = []
        for fam in self.families:
            for n in n_values:
                for r, j in self.family_rows(fam, n):
                    inst = self.instantiate(fam["id"], n, r, j)
                    fixed = self.fixed.get(inst.id)
                    if fixed is None:
                        continue
                    if inst.equation == fixed.equation:
                        continue
                    if fixed.alt_equation is not None and \
                            inst.equation == fixed.alt_equation:
                        issues.append({"id": inst.id, "kind": "alt-reading",
                                       "detail": "template matches the "
                                                 "alternate reading"})
                        continue
                    issues.append({
                        "id": inst.id, "kind": "mismatch",
                        "detail": (f"template {inst.equation.to_str()} vs "
                                   f"explicit {fixed.equation.to_str()}")})
        return [i for i in issues if i["kind"] == "mismatch"]

    # recipes -------------------------------------------------------------------
    def recipe_for(self, entry: CatalogEntry) -> dict:
        try:
            return self.recipes[entry.recipe]
        except KeyError:
            raise CatalogError(f"no recipe {entry.recipe!r} for {entry.id}")

    # paper-derived expectations --------------------------------------------------
    def expected_f_pure(self, entry: CatalogEntry) -> bool:
        """Membership in the F-pure list of the classification (p = 2)."""
        if entry.p != 2:
            return False
        if entry.id in ("E_7^3F_4", "D_4^1B_1", "D_4^1B_2", "D_5^1C_3"):
            return True
        if entry.artin_letter != "D":
            return False
        N, r, j = entry.artin_N, entry.artin_coindex, entry.lipman_index
        letter = entry.lipman_letter
        if N % 2 == 0:
            n = N // 2
            if n < 3 or r != n - 1:
                return False
            return (letter == "B" and j in (n - 1, n)) or \
                   (letter == "C" and j == 2 * n - 2)
        n = (N - 1) // 2
        if n < 3 or r != n - 1:
            return False
        return (letter == "B" and j == n - 1) or \
               (letter == "C" and j == 2 * n - 1)

    def golden_for(self, label: str):
        return self.golden.get(label)


def _parse_id(label: str):
    m = _LABEL_D.match(label)
    if m:
        return "D", int(m.group(1)), int(m.group(2)), f"{m.group(3)}_{m.group(4)}"
    m = re.match(r"^E_(\d+)\^(\d+)F_4$", label)
    if m:
        return "E", int(m.group(1)), int(m.group(2)), "F_4"
    m = re.match(r"^E_(\d+)\^(\d+)G_2$", label)
    if m:
        return "E", int(m.group(1)), int(m.group(2)), "G_2"
    raise CatalogError(f"cannot parse catalog id {label!r}")


_default_catalog = None


def default_catalog() -> Catalog:
    global _default_catalog
    if _default_catalog is None:
        _default_catalog = Catalog()
    return _default_catalog

"""Monoidal-system data: labels, fusion multiplicities, F-symbols and a unit.

F-symbol index convention
-------------------------
``F^{abc}_{d;e,f}`` is stored under the key ``(a, b, c, d, e, f)`` where the
internal label ``e`` appears in ``a x b`` (left-associated tree, ``e x c -> d``)
and ``f`` appears in ``b x c`` (right-associated tree, ``a x f -> d``).  For a
fixed block ``(a, b, c, d)`` the matrix ``[F^{abc}_d]`` has rows indexed by the
admissible ``e`` and columns by the admissible ``f``.  Every consumer in this
package (pentagon checker, projection matrices, the ``c`` formula) indexes the
table this way; the pentagon checker is the arbiter of consistency.

The pentagon identity, the projection matrices and the ``c`` constants are all
invariant (up to an overall transpose of the projections) under replacing each
block by its inverse transpose, so the two common "which tree is expanded in
which basis" readings give the same downstream results.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Hashable, Iterable, Mapping

import numpy as np

DEFAULT_TOLERANCE = 1e-10

LabelId = Hashable


class TLCatError(Exception):
    """Base class for all errors raised by this package."""


class StructureError(TLCatError):
    """Malformed input: unknown labels, missing unit, bad shapes."""


class SingularBlockError(TLCatError):
    """An F-matrix block that should be invertible is singular."""


class HypothesisError(TLCatError):
    """A construction hypothesis (admissibility, simplicity, ...) fails."""


@dataclass(frozen=True)
class Label:
    id: LabelId
    name: str = ""

    def __post_init__(self):
        if not self.name:
            object.__setattr__(self, "name", str(self.id))

    def __str__(self):
        return self.name


@dataclass(frozen=True)
class Violation:
    kind: str
    where: tuple
    detail: str = ""
    deviation: float = 0.0


@dataclass
class ValidationReport:
    checked: int = 0
    violations: list[Violation] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def merge(self, other: "ValidationReport") -> "ValidationReport":
        return ValidationReport(self.checked + other.checked, self.violations + other.violations)

    def max_deviation(self) -> float:
        return max((v.deviation for v in self.violations), default=0.0)


@dataclass
class PentagonReport:
    max_residual: float
    equations: int
    nontrivial: int
    worst: tuple | None
    tolerance: float

    @property
    def ok(self) -> bool:
        return self.max_residual < self.tolerance


class FusionRules:
    """Fusion multiplicities ``N^c_{ab}`` keyed by label ids.

    Arbitrary nonnegative multiplicities are accepted so that tables can be
    validated; :class:`MonoidalSystem` additionally requires them to be 0 or 1.
    """

    def __init__(self, multiplicity: Mapping[tuple, int]):
        self._n = {}
        for key, value in multiplicity.items():
            value = int(value)
            if value < 0:
                raise StructureError(f"negative multiplicity {value} at {key}")
            if value:
                self._n[tuple(key)] = value
        self._products = {}
        for (a, b, c), n in self._n.items():
            self._products.setdefault((a, b), []).append(c)

    def __call__(self, a, b, c) -> int:
        return self._n.get((a, b, c), 0)

    def N(self, a, b, c) -> int:
        return self._n.get((a, b, c), 0)

    def items(self):
        return self._n.items()

    def labels_used(self) -> set:
        return {x for key in self._n for x in key}

    def products(self, a, b, order: Iterable | None = None) -> list:
        """Labels ``c`` with ``N^c_{ab} > 0``, sorted by ``order`` if given."""
        out = self._products.get((a, b), [])
        if order is not None:
            rank = {x: i for i, x in enumerate(order)}
            out = sorted(out, key=rank.__getitem__)
        return list(out)

    def __eq__(self, other):
        return isinstance(other, FusionRules) and self._n == other._n


def is_multiplicity_free(rules: FusionRules) -> bool:
    return all(n <= 1 for _, n in rules.items())


def validate_fusion(rules: FusionRules, labels: list, unit, window=None) -> ValidationReport:
    """Check the unit law and the associativity count of ``rules`` exactly.

    ``labels`` may be :class:`Label` objects or bare ids.  ``window`` optionally
    restricts the associativity count to the quadruples ``(a, b, c, d)`` it
    contains (used for truncated systems).

    Raises
    ------
    StructureError
        If ``labels`` is empty, ``unit`` is not a label, or the table refers to
        an unknown label.
    """
    ids = [x.id if isinstance(x, Label) else x for x in labels]
    unit = unit.id if isinstance(unit, Label) else unit
    if not ids:
        raise StructureError("label set is empty")
    if unit not in ids:
        raise StructureError(f"unit {unit!r} is not a label")
    unknown = rules.labels_used() - set(ids)
    if unknown:
        raise StructureError(f"fusion table references unknown labels {sorted(map(str, unknown))}")

    report = ValidationReport()
    for a, b in itertools.product(ids, repeat=2):
        want = int(a == b)
        for n, where in ((rules(a, unit, b), (a, unit, b)), (rules(unit, a, b), (unit, a, b))):
            report.checked += 1
            if n != want:
                report.violations.append(
                    Violation("unit-law", (a, b), f"N^{where[2]}_{{{where[0]},{where[1]}}} = {n}, expected {want}", abs(n - want))
                )
    for a, b, c, d in itertools.product(ids, repeat=4):
        if window is not None and (a, b, c, d) not in window:
            continue
        report.checked += 1
        left = sum(rules(e, c, d) * rules(a, b, e) for e in ids)
        right = sum(rules(a, f, d) * rules(b, c, f) for f in ids)
        if left != right:
            report.violations.append(
                Violation("associativity", (a, b, c, d), f"sum_e N^d_ec N^e_ab = {left} != {right} = sum_f N^d_af N^f_bc", abs(left - right))
            )
    return report


class MonoidalSystem:
    """Immutable multiplicity-free monoidal system ``(I, F, V, 1)``.

    Parameters
    ----------
    labels : list of Label
        In the deterministic order used for every enumeration downstream.
    unit : label id
    rules : FusionRules
    f_symbols : mapping ``(a, b, c, d, e, f) -> complex``
    tolerance : float
    window : set of ``(a, b, c, d)`` or None
        For truncated systems, the F-blocks whose internal labels are complete.
        Validators and constructions only trust blocks inside the window.
    """

    def __init__(self, labels, unit, rules: FusionRules, f_symbols: Mapping, tolerance=DEFAULT_TOLERANCE,
                 window=None, name="", meta=None):
        self.labels = tuple(x if isinstance(x, Label) else Label(x) for x in labels)
        self.ids = tuple(x.id for x in self.labels)
        if len(set(self.ids)) != len(self.ids):
            raise StructureError("label ids are not unique")
        if not self.ids:
            raise StructureError("label set is empty")
        self.unit = unit.id if isinstance(unit, Label) else unit
        if self.unit not in self.ids:
            raise StructureError(f"unit {self.unit!r} is not a label")
        unknown = rules.labels_used() - set(self.ids)
        if unknown:
            raise StructureError(f"fusion table references unknown labels {sorted(map(str, unknown))}")
        if not is_multiplicity_free(rules):
            raise StructureError("fusion rules are not multiplicity-free")
        self.rules = rules
        self.tolerance = float(tolerance)
        self.window = None if window is None else frozenset(tuple(w) for w in window)
        self.name = name
        self.meta = dict(meta or {})
        idset = set(self.ids)
        table = {}
        for key, value in f_symbols.items():
            key = tuple(key)
            if len(key) != 6 or not set(key) <= idset:
                raise StructureError(f"F-symbol key {key} references unknown labels")
            table[key] = complex(value)
        self._f = table
        self._blocks = {}
        self._inverses = {}

    # -- lookups ---------------------------------------------------------

    def label(self, x) -> LabelId:
        """Resolve ``x`` (id, str(id) or display name) to a label id."""
        if isinstance(x, Label):
            x = x.id
        if x in self.ids:
            return x
        for lab in self.labels:
            if str(lab.id) == str(x) or lab.name == str(x):
                return lab.id
        raise StructureError(f"unknown label {x!r} in system {self.name or '<unnamed>'}")

    def _check(self, *xs):
        for x in xs:
            if x not in self.ids:
                raise StructureError(f"unknown label {x!r}")

    def N(self, a, b, c) -> int:
        return self.rules(a, b, c)

    def products(self, a, b) -> list:
        return self.rules.products(a, b, self.ids)

    def in_window(self, a, b, c, d) -> bool:
        return self.window is None or (a, b, c, d) in self.window

    def f_entries(self):
        return self._f.items()

    def block_labels(self, a, b, c, d):
        """Admissible internal labels ``(es, fs)`` of the block ``(a, b, c, d)``."""
        es = [e for e in self.products(a, b) if self.N(e, c, d)]
        fs = [f for f in self.products(b, c) if self.N(a, f, d)]
        return es, fs

    def f_symbol(self, a, b, c, d, e, f) -> complex:
        """Entry ``F^{abc}_{d;e,f}``; exactly 0 for inadmissible index tuples."""
        self._check(a, b, c, d, e, f)
        return self._f.get((a, b, c, d, e, f), 0j)

    def block(self, a, b, c, d):
        """``(es, fs, matrix)`` of the block ``(a, b, c, d)``, cached."""
        key = (a, b, c, d)
        if key not in self._blocks:
            self._check(*key)
            es, fs = self.block_labels(*key)
            mat = np.array([[self._f.get((a, b, c, d, e, f), 0j) for f in fs] for e in es], dtype=complex)
            self._blocks[key] = (es, fs, mat.reshape(len(es), len(fs)))
        return self._blocks[key]

    def f_inverse(self, a, b, c, d, f, e) -> complex:
        """Entry ``(F^{-1})^{abc}_{d;f,e}`` of the inverse of the block ``(a, b, c, d)``.

        Raises
        ------
        SingularBlockError
            If the block is non-square or singular.
        """
        self._check(a, b, c, d, e, f)
        key = (a, b, c, d)
        if key not in self._inverses:
            es, fs, mat = self.block(*key)
            if not es and not fs:
                self._inverses[key] = None
            else:
                if mat.shape[0] != mat.shape[1]:
                    raise SingularBlockError(f"F-block {key} is not square: {mat.shape}")
                if np.linalg.matrix_rank(mat, tol=self.tolerance) < mat.shape[0]:
                    raise SingularBlockError(f"F-block {key} is singular")
                inv = np.linalg.inv(mat)
                self._inverses[key] = ({f_: i for i, f_ in enumerate(fs)}, {e_: j for j, e_ in enumerate(es)}, inv)
        entry = self._inverses[key]
        if entry is None:
            return 0j
        frow, ecol, inv = entry
        if f not in frow or e not in ecol:
            return 0j
        return complex(inv[frow[f], ecol[e]])

    def blocks(self):
        """Iterate over every nonempty block ``(a, b, c, d)`` in the window."""
        for a, b, c, d in itertools.product(self.ids, repeat=4):
            if not self.in_window(a, b, c, d):
                continue
            es, fs = self.block_labels(a, b, c, d)
            if es or fs:
                yield a, b, c, d

    def __repr__(self):
        return f"MonoidalSystem({self.name or '?'}, labels={[str(x) for x in self.labels]})"


def check_unit_constraints(sys: MonoidalSystem, tolerance=None) -> ValidationReport:
    """Verify ``F^{a1c}_d`` is the identity on its (1x1) admissible basis."""
    tol = sys.tolerance if tolerance is None else tolerance
    u = sys.unit
    report = ValidationReport()
    for a, c, d in itertools.product(sys.ids, repeat=3):
        if not sys.N(a, c, d) or not sys.in_window(a, u, c, d):
            continue
        report.checked += 1
        key = (a, u, c, d, a, c)
        if key not in sys._f:
            report.violations.append(Violation("unit-missing", (a, u, c, d), "required entry F^{a1c}_{d;a,c} absent", 1.0))
            continue
        dev = abs(sys._f[key] - 1.0)
        if dev >= tol:
            report.violations.append(Violation("unit-value", (a, u, c, d), f"F^{{a1c}}_{{d;a,c}} = {sys._f[key]}", dev))
        es, fs = sys.block_labels(a, u, c, d)
        if es != [a] or fs != [c]:
            report.violations.append(Violation("unit-shape", (a, u, c, d), f"internal labels {es}, {fs}", 1.0))
    return report


def check_pentagon(sys: MonoidalSystem, tolerance=None) -> PentagonReport:
    """Evaluate every pentagon equation and report the worst residual.

    For top labels ``(a, b, c, d)`` and total ``e`` the identity checked is::

        F^{fcd}_{e;g,l} F^{abl}_{e;f,k} = sum_h F^{abc}_{g;f,h} F^{ahd}_{e;g,k} F^{bcd}_{k;h,l}

    with ``f in a x b``, ``g in f x c``, ``e in g x d`` on the left tree and
    ``l in c x d``, ``k in b x l``, ``e in a x k`` on the right tree.  Equations
    touching a block outside the window are skipped.  An equation is
    "nontrivial" when none of ``a, b, c, d`` is the unit.
    """
    tol = sys.tolerance if tolerance is None else tolerance
    F = sys._f
    ids, u = sys.ids, sys.unit
    prod = sys.products
    worst, max_res, count, nontrivial = None, 0.0, 0, 0
    for a, b, c, d in itertools.product(ids, repeat=4):
        for f in prod(a, b):
            for g in prod(f, c):
                for e in prod(g, d):
                    for l in prod(c, d):
                        for k in prod(b, l):
                            if not sys.N(a, k, e):
                                continue
                            hs = [h for h in prod(b, c) if sys.N(a, h, g) and sys.N(h, d, k)]
                            needed = [(f, c, d, e), (a, b, l, e), (a, b, c, g), (b, c, d, k)] + [(a, h, d, e) for h in hs]
                            if not all(sys.in_window(*blk) for blk in needed):
                                continue
                            lhs = F.get((f, c, d, e, g, l), 0j) * F.get((a, b, l, e, f, k), 0j)
                            rhs = sum(F.get((a, b, c, g, f, h), 0j) * F.get((a, h, d, e, g, k), 0j)
                                      * F.get((b, c, d, k, h, l), 0j) for h in hs)
                            res = abs(lhs - rhs)
                            count += 1
                            if u not in (a, b, c, d):
                                nontrivial += 1
                            if worst is None or res > max_res:
                                max_res, worst = res, (a, b, c, d, e, f, g, k, l)
    return PentagonReport(max_res, count, nontrivial, worst, tol)


def check_inverses(sys: MonoidalSystem) -> float:
    """Max residual of ``F F^{-1} - 1`` over all blocks."""
    worst = 0.0
    for blk in sys.blocks():
        es, fs, mat = sys.block(*blk)
        inv = np.array([[sys.f_inverse(*blk, f, e) for e in es] for f in fs], dtype=complex)
        worst = max(worst, float(np.max(np.abs(mat @ inv - np.eye(len(es))))))
    return worst


def validate_system(sys: MonoidalSystem):
    """Run every validator; returns ``(fusion, unit, pentagon)`` reports."""
    return (
        validate_fusion(sys.rules, list(sys.labels), sys.unit, sys.window),
        check_unit_constraints(sys),
        check_pentagon(sys),
    )

"""Generators for the shipped monoidal systems.

* ``su2_generic``: U_q(sl2) with labels ``0..max_label`` (twice the spin),
  fusion truncated to the window, F-symbols from the q-deformed Racah formula.
* ``su2_level_k``: the same at ``q = exp(i pi/(k+2))`` with level-truncated
  fusion ``c <= min(a+b, 2k-a-b)``; a finite, closed system.
* ``fibonacci`` and ``ising`` in their standard unitary gauge.
"""

from __future__ import annotations

import cmath
import itertools
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .monoidal_system import FusionRules, HypothesisError, Label, MonoidalSystem, StructureError
from .qnumbers import quantum_factorial, quantum_integer, root_of_unity

PHI = (1 + math.sqrt(5)) / 2
KINDS = ("su2_generic", "su2_level_k", "fibonacci", "ising")


@dataclass(frozen=True)
class QParameter:
    value: complex
    description: str = "generic"

    def __post_init__(self):
        if self.value == 0:
            raise StructureError("q must be nonzero")

    @classmethod
    def level(cls, k: int) -> "QParameter":
        return cls(root_of_unity(k), f"root-of-unity (level {k})")


@dataclass(frozen=True)
class CategorySpec:
    kind: str
    q: QParameter | None = None
    max_label: int = 6
    level: int | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise StructureError(f"unknown category kind {self.kind!r}; expected one of {KINDS}")
        if self.kind == "su2_level_k":
            if self.level is None or self.level < 1:
                raise StructureError("su2_level_k needs a level k >= 1")
            expected = root_of_unity(self.level)
            if self.q is not None and abs(self.q.value - expected) > 1e-12:
                raise StructureError(f"level {self.level} fixes q = exp(i pi/{self.level + 2})")
        if self.kind == "su2_generic" and self.max_label < 0:
            raise StructureError("max_label must be nonnegative")


def _su2_admissible(a, b, c, level=None):
    if c < abs(a - b) or c > a + b or (a + b + c) % 2:
        return False
    return level is None or a + b + c <= 2 * level


def build_su2(spec: CategorySpec) -> MonoidalSystem:
    """U_q(sl2) fusion category data on labels ``0..M``.

    Raises
    ------
    HypothesisError
        If a quantum integer needed inside the label range vanishes.
    """
    if spec.kind == "su2_level_k":
        level = spec.level
        top = level
        q = root_of_unity(level)
        needed = level + 1
        name = f"su2_level_{level}"
    elif spec.kind == "su2_generic":
        level = None
        top = spec.max_label
        q = complex(spec.q.value if spec.q is not None else 1.0)
        needed = 2 * top + 2
        name = f"su2_generic(q={_fmt_q(q)}, max_label={top})"
    else:
        raise StructureError(f"build_su2 cannot build kind {spec.kind!r}")

    scale = max(1.0, abs(q), 1 / abs(q)) ** needed
    for n in range(1, needed + 1):
        if abs(quantum_integer(n, q)) < 1e-12 * scale:
            raise HypothesisError(f"quantum integer [{n}]_q vanishes for q = {q}")

    ids = list(range(top + 1))
    n_table = {(a, b, c): 1 for a, b, c in itertools.product(ids, repeat=3) if _su2_admissible(a, b, c, level)}
    rules = FusionRules(n_table)

    window = None
    if level is None:
        window = set()
        for a, b, c, d in itertools.product(ids, repeat=4):
            es = [e for e in range(a + b + 1) if _su2_admissible(a, b, e) and _su2_admissible(e, c, d)]
            fs = [f for f in range(b + c + 1) if _su2_admissible(b, c, f) and _su2_admissible(a, f, d)]
            if all(x <= top for x in es + fs):
                window.add((a, b, c, d))

    fq = _racah_f(q)
    table = {}
    for a, b, c, d in itertools.product(ids, repeat=4):
        if window is not None and (a, b, c, d) not in window:
            continue
        for e in ids:
            if not (rules(a, b, e) and rules(e, c, d)):
                continue
            for f in ids:
                if rules(b, c, f) and rules(a, f, d):
                    table[(a, b, c, d, e, f)] = fq(a, b, c, d, e, f)
    labels = [Label(i, str(i)) for i in ids]
    meta = {"kind": spec.kind, "q": [q.real, q.imag], "max_label": top}
    if level is not None:
        meta["level"] = level
    return MonoidalSystem(labels, 0, rules, table, window=window, name=name, meta=meta)


def _fmt_q(q):
    return f"{q.real:g}" if q.imag == 0 else f"{q.real:g}{q.imag:+g}j"


def _racah_f(q):
    """F-symbol function for U_q(sl2) on doubled-spin labels."""

    @lru_cache(maxsize=None)
    def qint(n):
        return quantum_integer(n, q)

    @lru_cache(maxsize=None)
    def qfact(n):
        return quantum_factorial(n, q)

    @lru_cache(maxsize=None)
    def sqrt_qint(n):
        return cmath.sqrt(qint(n))

    @lru_cache(maxsize=None)
    def triangle(a, b, c):
        num = qfact((a + b - c) // 2) * qfact((a - b + c) // 2) * qfact((-a + b + c) // 2)
        return cmath.sqrt(num / qfact((a + b + c) // 2 + 1))

    def six_j(a, b, e, c, d, f):
        alphas = ((a + b + e) // 2, (e + c + d) // 2, (b + c + f) // 2, (a + f + d) // 2)
        betas = ((a + b + c + d) // 2, (a + c + e + f) // 2, (b + d + e + f) // 2)
        total = 0j
        for z in range(max(alphas), min(betas) + 1):
            den = 1 + 0j
            for x in alphas:
                den *= qfact(z - x)
            for y in betas:
                den *= qfact(y - z)
            total += (-1) ** z * qfact(z + 1) / den
        return triangle(a, b, e) * triangle(e, c, d) * triangle(b, c, f) * triangle(a, f, d) * total

    def fsym(a, b, c, d, e, f):
        sign = -1 if ((a + b + c + d) // 2) % 2 else 1
        return sign * sqrt_qint(e + 1) * sqrt_qint(f + 1) * six_j(a, b, e, c, d, f)

    return fsym


def _table_from(rules, ids, special):
    """All admissible 1x1 blocks set to 1, plus explicit larger blocks."""
    table = {}
    for a, b, c, d in itertools.product(ids, repeat=4):
        es = [e for e in ids if rules(a, b, e) and rules(e, c, d)]
        fs = [f for f in ids if rules(b, c, f) and rules(a, f, d)]
        if not es and not fs:
            continue
        if (a, b, c, d) in special:
            mat = np.asarray(special[(a, b, c, d)], dtype=complex)
        elif len(es) == len(fs) == 1:
            mat = np.ones((1, 1))
        else:
            raise StructureError(f"no F-matrix given for block {(a, b, c, d)}")
        for (i, e), (j, f) in itertools.product(enumerate(es), enumerate(fs)):
            table[(a, b, c, d, e, f)] = complex(mat[i, j])
    return table


def build_fibonacci() -> MonoidalSystem:
    """Fibonacci category: labels ``{1, tau}`` with ``tau x tau = 1 + tau``."""
    ids = ["1", "tau"]
    n = {("1", x, x): 1 for x in ids} | {(x, "1", x): 1 for x in ids}
    n |= {("tau", "tau", "1"): 1, ("tau", "tau", "tau"): 1}
    rules = FusionRules(n)
    s = 1 / math.sqrt(PHI)
    special = {("tau", "tau", "tau", "tau"): [[1 / PHI, s], [s, -1 / PHI]]}
    labels = [Label("1", "1"), Label("tau", "τ")]
    return MonoidalSystem(labels, "1", rules, _table_from(rules, ids, special), name="fibonacci",
                          meta={"kind": "fibonacci"})


def build_ising() -> MonoidalSystem:
    """Ising category: labels ``{1, sigma, psi}``; ``psi`` is a simple current."""
    ids = ["1", "sigma", "psi"]
    n = {("1", x, x): 1 for x in ids} | {(x, "1", x): 1 for x in ids}
    n |= {
        ("sigma", "sigma", "1"): 1, ("sigma", "sigma", "psi"): 1,
        ("sigma", "psi", "sigma"): 1, ("psi", "sigma", "sigma"): 1,
        ("psi", "psi", "1"): 1,
    }
    rules = FusionRules(n)
    r = 1 / math.sqrt(2)
    special = {
        ("sigma", "sigma", "sigma", "sigma"): [[r, r], [r, -r]],
        ("sigma", "psi", "sigma", "psi"): [[-1]],
        ("psi", "sigma", "psi", "sigma"): [[-1]],
    }
    labels = [Label("1", "1"), Label("sigma", "σ"), Label("psi", "ψ")]
    return MonoidalSystem(labels, "1", rules, _table_from(rules, ids, special), name="ising",
                          meta={"kind": "ising"})


def build(spec: CategorySpec) -> MonoidalSystem:
    if spec.kind == "fibonacci":
        return build_fibonacci()
    if spec.kind == "ising":
        return build_ising()
    return build_su2(spec)


def su2(q=1.0, max_label=6) -> MonoidalSystem:
    """Shorthand for a truncated generic U_q(sl2) system."""
    return build_su2(CategorySpec("su2_generic", QParameter(complex(q)), max_label=max_label))


def su2_level(k: int) -> MonoidalSystem:
    return build_su2(CategorySpec("su2_level_k", QParameter.level(k), level=k))

"""Projections ``p_i`` from F-symbols and their Temperley-Lieb normalization.

Matrix elements of the projection onto the channel ``nu_i`` of
``lambda_i x lambda_{i+1}`` are::

    <mu'|p_i|mu> = F^{mu_{i-1} lam_i lam_{i+1}}_{mu_{i+1}; mu_i, nu_i}
                   (F^-1)^{mu'_{i-1} lam_i lam_{i+1}}_{mu'_{i+1}; nu_i, mu'_i}
                   prod_{j != i} delta(mu_j, mu'_j)

For a periodic chain the indices run modulo ``L``; the basis is the set of
closed paths (``mu_L = mu_0``) and ``p_L`` updates ``mu_0 = mu_L`` using the
neighbours ``mu_{L-1}`` and ``mu_1``.
"""

from __future__ import annotations

import cmath
import time
from dataclasses import dataclass, field

from .monoidal_system import HypothesisError, MonoidalSystem, StructureError
from .path_basis import PathBasis, SparseOperator, StrandDecoration, enumerate_paths


@dataclass
class ChainSpec:
    """Strands ``lambda_1..lambda_L`` with fusion targets ``nu_1..nu_{L-1}``.

    ``targets`` has length ``L - 1`` (open) or ``L`` (periodic, the last one
    fusing ``lambda_L`` with ``lambda_1``).  ``start=None`` takes every label
    as a source, which guarantees that every ``p_i`` is nonzero.
    """

    sys: MonoidalSystem
    strands: tuple
    targets: tuple
    start: tuple | None = None
    periodic: bool = False
    c0: complex | str = 1.0

    def __post_init__(self):
        sys = self.sys
        self.strands = tuple(sys.label(x) for x in self.strands)
        self.targets = tuple(sys.label(x) for x in self.targets)
        if self.start is not None:
            self.start = tuple(sys.label(x) for x in self.start)
        L = len(self.strands)
        want = L if self.periodic else L - 1
        if L < 2:
            raise StructureError("a chain needs at least two strands")
        if len(self.targets) != want:
            raise StructureError(f"expected {want} fusion targets for L={L}, got {len(self.targets)}")
        for i in range(1, want + 1):
            a, b, nu = self.lam(i), self.lam(i + 1), self.nu(i)
            if not sys.N(a, b, nu):
                raise HypothesisError(f"Hom({a} x {b}, {nu}) is empty at i={i}")

    @classmethod
    def homogeneous(cls, sys, strand, target, L, **kw):
        periodic = kw.get("periodic", False)
        return cls(sys, (strand,) * L, (target,) * (L if periodic else L - 1), **kw)

    @property
    def L(self) -> int:
        return len(self.strands)

    @property
    def n_projections(self) -> int:
        return self.L if self.periodic else self.L - 1

    @property
    def n_constants(self) -> int:
        return self.L if self.periodic else self.L - 2

    def _wrap(self, i):
        return (i - 1) % self.L + 1 if self.periodic else i

    def lam(self, i):
        return self.strands[self._wrap(i) - 1]

    def nu(self, i):
        j = (i - 1) % len(self.targets) + 1 if self.periodic else i
        return self.targets[j - 1]

    def is_homogeneous(self) -> bool:
        return len(set(self.strands)) == 1 and len(set(self.targets)) == 1

    def basis(self) -> PathBasis:
        start = self.sys.ids if (self.start is None or self.periodic) else self.start
        dec = StrandDecoration(self.strands, frozenset(start), closed=self.periodic)
        return enumerate_paths(self.sys, dec)


def projection_matrix(chain: ChainSpec, basis: PathBasis, i: int) -> SparseOperator:
    """Matrix of ``p_i`` on ``basis``.

    Raises
    ------
    HypothesisError
        If ``nu_i`` is not a channel of ``lambda_i x lambda_{i+1}`` or a needed
        F-block lies outside the system's window.
    """
    sys = chain.sys
    if not 1 <= i <= chain.n_projections:
        raise StructureError(f"projection index {i} out of range 1..{chain.n_projections}")
    lam1, lam2, nu = chain.lam(i), chain.lam(i + 1), chain.nu(i)
    if not sys.N(lam1, lam2, nu):
        raise HypothesisError(f"{nu} is not a channel of {lam1} x {lam2}")
    L = chain.L
    closed_seam = chain.periodic and i == L
    entries = {}
    for col, mu in enumerate(basis.states):
        if closed_seam:
            a, e, d = mu[L - 1], mu[L], mu[1]
        else:
            a, e, d = mu[i - 1], mu[i], mu[i + 1]
        if not sys.in_window(a, lam1, lam2, d):
            raise HypothesisError(f"F-block {(a, lam1, lam2, d)} is outside the system window; enlarge the truncation")
        left = sys.f_symbol(a, lam1, lam2, d, e, nu)
        if left == 0:
            continue
        for e2 in sys.products(a, lam1):
            if not sys.N(e2, lam2, d):
                continue
            val = left * sys.f_inverse(a, lam1, lam2, d, nu, e2)
            if val == 0:
                continue
            out = list(mu)
            if closed_seam:
                out[0] = out[L] = e2
            else:
                out[i] = e2
            entries[(basis.position(out), col)] = val
    return SparseOperator.from_entries(basis, entries)


def _mu(chain: ChainSpec, i: int, side: str):
    """The simple ``nu_i x lambda_{i+2}`` (right) or ``lambda_i x nu_{i+1}`` (left)."""
    sys = chain.sys
    if side == "right":
        a, b, what = chain.nu(i), chain.lam(i + 2), f"nu_{i} x lambda_{i + 2}"
    else:
        a, b, what = chain.lam(i), chain.nu(i + 1), f"lambda_{i} x nu_{i + 1}"
    out = sys.products(a, b)
    if len(out) != 1:
        raise HypothesisError(f"simplicity fails at i={i}: {what} = {a} x {b} has {len(out)} summands {out}")
    return out[0]


def simplicity(chain: ChainSpec, i: int) -> dict:
    """Which simplicity hypotheses hold at ``i`` (without raising)."""
    out = {}
    for side in ("right", "left"):
        try:
            out[side] = _mu(chain, i, side)
        except HypothesisError as err:
            out[side] = None
            out[side + "_error"] = str(err)
    return out


def compute_c(chain: ChainSpec, i: int) -> complex:
    """``c_i = F^{lam_i lam_{i+1} lam_{i+2}}_{mu_i; nu_i, nu_{i+1}} (F^-1)^{...}_{mu_i; nu_{i+1}, nu_i}``."""
    if not 1 <= i <= chain.n_constants:
        raise StructureError(f"c index {i} out of range 1..{chain.n_constants}")
    mu_r = _mu(chain, i, "right")
    mu_l = _mu(chain, i, "left")
    if mu_r != mu_l:
        raise HypothesisError(f"simplicity fails at i={i}: nu_i x lambda_(i+2) = {mu_r} but lambda_i x nu_(i+1) = {mu_l}")
    sys = chain.sys
    a, b, c = chain.lam(i), chain.lam(i + 1), chain.lam(i + 2)
    n1, n2 = chain.nu(i), chain.nu(i + 1)
    val = sys.f_symbol(a, b, c, mu_r, n1, n2) * sys.f_inverse(a, b, c, mu_r, n2, n1)
    if abs(val) < sys.tolerance:
        raise HypothesisError(f"c_{i} vanishes")
    return val


@dataclass
class HomogeneityReport:
    """``c_i`` along the chain; ``None`` entries failed a hypothesis (see ``failures``)."""

    values: list
    max_deviation: float
    tolerance: float
    failures: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return not self.failures and self.max_deviation < self.tolerance


def verify_c_homogeneity(chain: ChainSpec, tolerance=None) -> HomogeneityReport:
    """``max_i |c_i - c_1|``.  Sites where simplicity fails are reported, not raised."""
    tol = chain.sys.tolerance if tolerance is None else tolerance
    cs, failures = [], {}
    for i in range(1, chain.n_constants + 1):
        try:
            cs.append(compute_c(chain, i))
        except HypothesisError as err:
            cs.append(None)
            failures[i] = str(err)
    known = [c for c in cs if c is not None]
    dev = max((abs(c - known[0]) for c in known), default=0.0)
    return HomogeneityReport(cs, dev, tol, failures)


def resolve_c0(c0, c):
    """``"auto"`` gives the principal ``1/sqrt(c)``."""
    if isinstance(c0, str):
        if c0 == "auto":
            return 1 / cmath.sqrt(c)
        if c0 == "-auto":
            return -1 / cmath.sqrt(c)
        return complex(c0)
    return complex(c0)


def prefactors(cs, c0, n) -> list:
    """Scalars ``a_1..a_n`` with ``U_j = a_j p_j``.

    ``a_1 = c0``, ``a_{2i} = prod_{j<i} c_{2j} / (c0 prod_{j<=i} c_{2j-1})`` and
    ``a_{2i+1} = c0 prod_{j<=i} c_{2j-1} / prod_{j<=i} c_{2j}``; ``cs`` is
    1-indexed as ``cs[0] = c_1``.
    """
    if c0 == 0:
        raise HypothesisError("c0 must be nonzero")
    if any(c == 0 for c in cs):
        raise HypothesisError("zero c encountered")
    c = lambda j: cs[j - 1]
    out = []
    for j in range(1, n + 1):
        if j == 1:
            out.append(complex(c0))
        elif j % 2 == 0:
            i = j // 2
            num = _prod(c(2 * k) for k in range(1, i))
            den = c0 * _prod(c(2 * k - 1) for k in range(1, i + 1))
            out.append(num / den)
        else:
            i = (j - 1) // 2
            num = c0 * _prod(c(2 * k - 1) for k in range(1, i + 1))
            den = _prod(c(2 * k) for k in range(1, i + 1))
            out.append(num / den)
    return out


def _prod(xs):
    out = 1 + 0j
    for x in xs:
        out *= x
    return out


def normalize_generators(chain: ChainSpec, projections, cs, c0) -> list:
    c0 = resolve_c0(c0, cs[0]) if cs else complex(1.0 if c0 in ("auto", "-auto") else c0)
    return [a * p for a, p in zip(prefactors(cs, c0, len(projections)), projections)]


class NotProportionalError(HypothesisError):
    pass


def loop_parameter(U: SparseOperator, tolerance=1e-10) -> complex:
    """Scalar ``d`` with ``U^2 = d U``, read off a maximal-magnitude entry."""
    if U.norm_max() == 0:
        raise HypothesisError("loop parameter undefined for the zero operator")
    sq = U @ U
    ent = U.entries()
    (r, c), val = max(ent.items(), key=lambda kv: abs(kv[1]))
    d = sq[r, c] / val
    res = (sq - d * U).norm_max()
    if res >= tolerance * max(1.0, abs(d)) * max(1.0, U.norm_max()):
        raise NotProportionalError(f"U^2 is not proportional to U (residual {res:.3e})")
    return d


@dataclass
class TLFamily:
    chain: ChainSpec
    basis: PathBasis
    projections: list
    constants: list
    generators: list
    loops: list
    c0: complex
    delta: complex
    build_seconds: float = 0.0

    @property
    def periodic(self):
        return self.chain.periodic


def build_family(chain: ChainSpec, c0=None, basis=None, tolerance=None) -> TLFamily:
    """Projections, constants, generators and loop parameters for ``chain``.

    When a loop parameter cannot be extracted (``U^2`` not proportional to
    ``U``) the entry in ``loops`` is ``None``.
    """
    t0 = time.perf_counter()
    tol = chain.sys.tolerance if tolerance is None else tolerance
    basis = chain.basis() if basis is None else basis
    ps = [projection_matrix(chain, basis, i) for i in range(1, chain.n_projections + 1)]
    cs = [compute_c(chain, i) for i in range(1, chain.n_constants + 1)]
    c0 = chain.c0 if c0 is None else c0
    if cs:
        c0v = resolve_c0(c0, cs[0])
    else:
        c0v = complex(1.0) if c0 in ("auto", "-auto") else complex(c0)
    us = [a * p for a, p in zip(prefactors(cs, c0v, len(ps)), ps)]
    loops = []
    for u in us:
        try:
            loops.append(loop_parameter(u, tol))
        except HypothesisError:
            loops.append(None)
    delta = loops[0] if loops else None
    return TLFamily(chain, basis, ps, cs, us, loops, c0v, delta, time.perf_counter() - t0)


def family_for(sys, strand, target, L, c0="auto", periodic=False, start=None, **kw) -> TLFamily:
    chain = ChainSpec.homogeneous(sys, strand, target, L, periodic=periodic, start=start, c0=c0)
    return build_family(chain, **kw)


@dataclass
class TLReport:
    residuals: dict
    applicable: dict
    tolerance: float
    delta: complex
    loops: list
    constants: list
    basis_size: int
    wall_seconds: float = 0.0
    extra: dict = field(default_factory=dict)

    @property
    def passed(self) -> dict:
        return {k: (v < self.tolerance) for k, v in self.residuals.items() if self.applicable.get(k, True)}

    @property
    def ok(self) -> bool:
        return all(self.passed.values())


def _adjacent(family: TLFamily):
    """Index pairs ``(i, j)`` (1-based) with ``j = i + 1``, cyclic if periodic."""
    n = len(family.generators)
    if family.periodic:
        return [(i, i % n + 1) for i in range(1, n + 1)] if n >= 3 else []
    return [(i, i + 1) for i in range(1, n)]


def _distant(family: TLFamily):
    n = len(family.generators)
    out = []
    for i in range(1, n + 1):
        for j in range(i + 1, n + 1):
            gap = j - i
            if family.periodic:
                gap = min(gap, n - gap)
            if gap > 1:
                out.append((i, j))
    return out


def verify_tl(family: TLFamily, tolerance=None, delta=None) -> TLReport:
    """Residuals of the four Temperley-Lieb relation families.

    ``loop``: ``U_i^2 - delta U_i`` with ``delta = d_1`` unless given;
    ``commute``: ``[U_i, U_j]`` for distance > 1; ``cubic_right``:
    ``U_i U_{i+1} U_i - U_i``; ``cubic_left``: ``U_i U_{i-1} U_i - U_i``.
    For a single generator the cubic relations are marked not applicable.
    """
    t0 = time.perf_counter()
    tol = family.chain.sys.tolerance if tolerance is None else tolerance
    U = family.generators
    d = family.delta if delta is None else delta
    if d is None:
        d = (U[0] @ U[0])[0, 0] / U[0][0, 0] if U[0][0, 0] else 0
    res = {}
    res["loop"] = max(((u @ u) - d * u).norm_max() for u in U)
    per_loop = []
    for u in U:
        try:
            loop_parameter(u, tol)
            per_loop.append(0.0)
        except HypothesisError:
            per_loop.append(float("inf"))
    pairs = _adjacent(family)
    res["commute"] = max(((U[i - 1] @ U[j - 1]) - (U[j - 1] @ U[i - 1])).norm_max() for i, j in _distant(family)) if _distant(family) else 0.0
    res["cubic_right"] = max(((U[i - 1] @ U[j - 1] @ U[i - 1]) - U[i - 1]).norm_max() for i, j in pairs) if pairs else 0.0
    res["cubic_left"] = max(((U[j - 1] @ U[i - 1] @ U[j - 1]) - U[j - 1]).norm_max() for i, j in pairs) if pairs else 0.0
    applicable = {"loop": True, "commute": bool(_distant(family)), "cubic_right": bool(pairs), "cubic_left": bool(pairs)}
    return TLReport(res, applicable, tol, d, family.loops, family.constants, len(family.basis),
                    family.build_seconds + time.perf_counter() - t0, {"individual_loops": max(per_loop)})


@dataclass
class ProjectionReport:
    right: float
    left: float
    c_formula: list
    c_matrix: list
    c_mismatch: float
    idempotency: float
    sector_preserving: bool
    tolerance: float

    @property
    def ok(self) -> bool:
        return max(self.right, self.left, self.c_mismatch, self.idempotency) < self.tolerance and self.sector_preserving


def _ratio(num: SparseOperator, den: SparseOperator) -> complex:
    ent = den.entries()
    if not ent:
        return 0j
    (r, c), val = max(ent.items(), key=lambda kv: abs(kv[1]))
    return num[r, c] / val


def verify_projection_relations(family: TLFamily, tolerance=None) -> ProjectionReport:
    """Check ``p_i p_{i+-1} p_i = c p_i`` directly on the matrices.

    The ``c`` read off the matrices is compared with the F-symbol formula.
    """
    tol = family.chain.sys.tolerance if tolerance is None else tolerance
    P = family.projections
    cs = family.constants
    n = len(P)
    idem = max((p @ p - p).norm_max() for p in P)
    right = left = mismatch = 0.0
    c_mat = []
    for k in range(1, len(cs) + 1):
        i, j = k, k % n + 1 if family.periodic else k + 1
        rhs = P[i - 1] @ P[j - 1] @ P[i - 1]
        lhs = P[j - 1] @ P[i - 1] @ P[j - 1]
        cm = _ratio(rhs, P[i - 1])
        c_mat.append(cm)
        mismatch = max(mismatch, abs(cm - cs[k - 1]))
        right = max(right, (rhs - cs[k - 1] * P[i - 1]).norm_max())
        left = max(left, (lhs - cs[k - 1] * P[j - 1]).norm_max())
    sectors = family.basis.sectors().values()
    preserving = family.periodic or all(p.is_block_diagonal(sectors) for p in P + family.generators)
    return ProjectionReport(right, left, cs, c_mat, mismatch, idem, preserving, tol)


@dataclass
class PeriodicReport:
    L: int
    c: complex
    trials: list
    ok: bool


def periodic_constraint_check(chain: ChainSpec, tolerance=None, samples=(0.7, 1.9, -1.3 + 0.4j)) -> PeriodicReport:
    """Cubic relations on the periodic chain versus the choice of ``c0``.

    Odd ``L``: ``c0 = +-1/sqrt(c)`` must pass and ``c0 = 1`` (or ``chain.c0``
    when it is non-compliant) must fail.  Even ``L``: every sampled ``c0``
    must pass.  "Pass" means cubic relations, distant commutation and a loop
    parameter per generator (``U_j^2 = d_j U_j``, ``d_j`` may alternate).
    """
    if not chain.periodic:
        raise StructureError("periodic_constraint_check needs a periodic chain")
    if not chain.is_homogeneous():
        raise StructureError("periodic_constraint_check needs a homogeneous chain")
    tol = chain.sys.tolerance if tolerance is None else tolerance
    basis = chain.basis()
    c = compute_c(chain, 1)
    root = 1 / cmath.sqrt(c)
    if chain.L % 2:
        bad = complex(chain.c0) if not isinstance(chain.c0, str) else 1.0
        if abs(abs(bad) - abs(root)) < tol or abs(bad ** 2 - 1 / c) < tol:
            bad = 1.0 if abs(1 - root ** 2) > tol else 2.0
        plan = [(root, True), (-root, True), (complex(bad), False)]
    else:
        plan = [(complex(s), True) for s in samples]
    trials = []
    ok = True
    for c0, expect in plan:
        fam = build_family(chain, c0=c0, basis=basis, tolerance=tol)
        rep = verify_tl(fam, tol)
        worst = max(rep.residuals["cubic_right"], rep.residuals["cubic_left"], rep.residuals["commute"],
                    rep.extra["individual_loops"])
        passed = worst < tol
        trials.append({"c0": c0, "expected_pass": expect, "passed": passed, "cubic_residual": max(rep.residuals["cubic_right"], rep.residuals["cubic_left"]),
                       "loops": fam.loops})
        ok &= passed == expect
    return PeriodicReport(chain.L, c, trials, ok)

"""Pairs-of-sequences (POS) basis of TL_L([2]_q) and its U_q(sl2) realization.

Sequences ``s = (s_0, ..., s_L)`` start at ``s_0 = 1`` and move by +-1 while
staying positive; shifting by one gives an su2 fusion path from 0 over ``L``
spin-1/2 strands.  A pair ``(s, t)`` with equal final entries is realized as
the rank-one operator ``|s-1><t-1|``.

The reference generators are ``U_i = delta p_i`` with ``p_i`` the projection
onto the trivial channel (``c0 = 1/sqrt(c) = delta``), built by
:mod:`tlcat.tl_builder` from the su2 F-symbols.
"""

from __future__ import annotations

import cmath
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .category_zoo import su2
from .monoidal_system import HypothesisError, StructureError, TLCatError
from .path_basis import PathBasis, SparseOperator, make_basis, rank_one
from .qnumbers import quantum_integer
from .tl_builder import ChainSpec, build_family

__all__ = [
    "quantum_integer", "chebyshev_u", "chebyshev_ratio", "SchurWeylSetup", "POSElement",
    "validate_sequence", "sequences", "theta", "jones_wenzl", "jones_wenzl_oracle", "pos_seed",
    "seed_product_form", "seed_sequence", "jones_wenzl_diagonal", "pos_raise", "pos_transpose", "pos_basis", "pos_action_matrix",
    "check_f_identity", "verify_pos_vs_fsymbol", "UndefinedElementError",
]


class UndefinedElementError(TLCatError):
    """A pair of sequences with different final entries."""


def chebyshev_u(n: int, x: complex) -> complex:
    """Chebyshev polynomial of the second kind, ``U_{-1} = 0``, ``U_0 = 1``."""
    if n < -1:
        raise ValueError("n must be >= -1")
    prev, cur = 0j, 1 + 0j
    if n == -1:
        return prev
    for _ in range(n):
        prev, cur = cur, 2 * x * cur - prev
    return cur


def chebyshev_ratio(n: int, delta: complex, tol=1e-12) -> complex:
    """``k_n = U_{n-2}(delta/2) / U_{n-1}(delta/2)``."""
    if n < 1:
        raise ValueError("k_n is defined for n >= 1")
    den = chebyshev_u(n - 1, delta / 2)
    if abs(den) < tol:
        raise HypothesisError(f"k_{n} undefined: U_{n - 1}(delta/2) vanishes")
    return chebyshev_u(n - 2, delta / 2) / den


def validate_sequence(seq) -> tuple:
    seq = tuple(int(x) for x in seq)
    if not seq or seq[0] != 1:
        raise StructureError(f"sequence {seq} must start at 1")
    for a, b in zip(seq, seq[1:]):
        if abs(a - b) != 1 or b < 1:
            raise StructureError(f"sequence {seq} is not admissible")
    return seq


def sequences(L: int, final: int | None = None) -> list:
    """All admissible sequences of length ``L + 1``, lexicographic."""
    out = []

    def grow(s):
        if len(s) == L + 1:
            if final is None or s[-1] == final:
                out.append(tuple(s))
            return
        for nxt in (s[-1] - 1, s[-1] + 1):
            if nxt >= 1:
                s.append(nxt)
                grow(s)
                s.pop()

    grow([1])
    return out


@dataclass
class SchurWeylSetup:
    """su2 system, path basis over ``L`` spin-1/2 strands from 0, and the ``U_i``."""

    L: int
    q: complex
    tolerance: float = 1e-10

    def __post_init__(self):
        if self.L < 1:
            raise StructureError("L must be >= 1")
        self.q = complex(self.q)
        self.sys = su2(self.q, max_label=max(self.L, 2))
        self.basis = make_basis(self.sys, [1] * self.L, start=[0])
        self.delta = quantum_integer(2, self.q)

    @cached_property
    def family(self):
        if self.L < 2:
            return None
        # c0 = delta is 1/sqrt(c) for c = 1/delta^2, and still defined when L = 2
        chain = ChainSpec.homogeneous(self.sys, 1, 0, self.L, start=(0,), c0=self.delta)
        return build_family(chain, basis=self.basis, tolerance=self.tolerance)

    @cached_property
    def generators(self) -> list:
        """``U_1..U_{L-1}``; the list is padded so ``U[i]`` is ``U_i``."""
        if self.family is None:
            return [None]
        return [None] + list(self.family.generators)

    def k(self, n):
        return chebyshev_ratio(n, self.delta)

    def identity(self):
        return SparseOperator.identity(self.basis)

    @property
    def complex_q(self) -> bool:
        return abs(self.q.imag) > 0


def _as_path(seq):
    return tuple(x - 1 for x in seq)


def theta(mu, mu_p, basis: PathBasis) -> SparseOperator:
    """``(mu, mu') -> |mu-1><mu'-1|``."""
    mu, mu_p = validate_sequence(mu), validate_sequence(mu_p)
    if len(mu) != len(mu_p):
        raise UndefinedElementError(f"sequences {mu} and {mu_p} differ in length")
    if mu[-1] != mu_p[-1]:
        raise UndefinedElementError(f"final entries differ ({mu[-1]} != {mu_p[-1]}); the element is undefined")
    return rank_one(basis, _as_path(mu), _as_path(mu_p))


@dataclass
class POSElement:
    s: tuple
    t: tuple
    op: SparseOperator
    notes: dict = field(default_factory=dict)

    def __post_init__(self):
        self.s, self.t = validate_sequence(self.s), validate_sequence(self.t)
        if len(self.s) != len(self.t) or self.s[-1] != self.t[-1]:
            raise UndefinedElementError(f"({self.s}, {self.t}) is undefined")

    def deviation(self, basis=None) -> float:
        """``|| op - |s-1><t-1| ||_max``."""
        return (self.op - theta(self.s, self.t, basis or self.op.basis)).norm_max()


def jones_wenzl(m: int, L: int, q, basis=None, shift: int = 0, setup: SchurWeylSetup | None = None,
                tolerance=1e-10) -> SparseOperator:
    """The idempotent ``E_m^{(shift)}`` killed by ``U_{shift+1} .. U_{shift+m-2}``.

    Built with the recursion ``E_{n+1} = E_n - k_n E_n U_{shift+n-1} E_n``
    from ``E_1 = E_2 = 1``; idempotency and the annihilation property are
    verified before returning.

    Raises
    ------
    HypothesisError
        If ``E_m`` does not exist (vanishing ``U_{n-1}(delta/2)``) or the
        verification fails.
    """
    setup = setup or SchurWeylSetup(L, q, tolerance)
    if basis is not None and basis.states != setup.basis.states:
        raise StructureError("basis does not match the su2 path basis for this L")
    if m < 1 or shift + m - 1 > setup.L and m > 2:
        raise StructureError(f"E_{m} with shift {shift} does not fit on {setup.L} strands")
    U = setup.generators
    E = setup.identity()
    for n in range(2, m):
        k = setup.k(n)
        E = E - k * (E @ U[shift + n - 1] @ E)
    err = (E @ E - E).norm_max()
    for i in range(shift + 1, shift + m - 1):
        err = max(err, (E @ U[i]).norm_max(), (U[i] @ E).norm_max())
    if err >= tolerance * max(1.0, E.norm_max()):
        raise HypothesisError(f"E_{m} fails its defining properties (residual {err:.3e})")
    return E


def jones_wenzl_diagonal(m: int, setup: SchurWeylSetup) -> SparseOperator:
    """``E_m`` (unshifted) as the projector onto paths with ``mu_{m-1} = m-1``."""
    if m <= 2:
        return setup.identity()
    vals = [1.0 if s[m - 1] == m - 1 else 0.0 for s in setup.basis.states]
    return SparseOperator.diagonal(setup.basis, vals)


def _words(gens, limit=10_000):
    """Basis (as flattened dense vectors) of the span of nonempty words in ``gens``."""
    mats = [g.to_dense() for g in gens]
    if not mats:
        return np.zeros((0, 0))
    n = mats[0].shape[0]
    span = np.zeros((0, n * n), dtype=complex)
    frontier = list(mats)

    def add(vec, span):
        if span.shape[0]:
            coeffs, *_ = np.linalg.lstsq(span.T, vec, rcond=None)
            if np.max(np.abs(span.T @ coeffs - vec)) < 1e-9 * max(1.0, np.max(np.abs(vec))):
                return span, False
        return np.vstack([span, vec]), True

    words = []
    for m_ in frontier:
        span, new = add(m_.ravel(), span)
        if new:
            words.append(m_)
    frontier = list(words)
    while frontier and len(words) < limit:
        nxt = []
        for w in frontier:
            for g in mats:
                cand = w @ g
                span, new = add(cand.ravel(), span)
                if new:
                    words.append(cand)
                    nxt.append(cand)
        frontier = nxt
    return words


def jones_wenzl_oracle(m: int, setup: SchurWeylSetup, shift: int = 0) -> SparseOperator:
    """Solve for ``E = 1 + X`` with ``X`` in the ideal spanned by words in
    ``U_{shift+1}..U_{shift+m-2}`` and ``U_i E = 0`` for those ``i``.

    Independent of the Wenzl recursion; least squares on the linear system.
    """
    if m <= 2:
        return setup.identity()
    gens = [setup.generators[i] for i in range(shift + 1, shift + m - 1)]
    words = _words(gens)
    n = len(setup.basis)
    ident = np.eye(n, dtype=complex)
    dense = [g.to_dense() for g in gens]
    A = np.vstack([np.column_stack([(g @ w).ravel() for w in words]) for g in dense]
                  + [np.column_stack([(w @ g).ravel() for w in words]) for g in dense])
    b = -np.concatenate([(g @ ident).ravel() for g in dense] + [(ident @ g).ravel() for g in dense])
    x, *_ = np.linalg.lstsq(A, b, rcond=None)
    E = ident + sum(c * w for c, w in zip(x, words))
    return SparseOperator(setup.basis, E)


def seed_sequence(m: int, L: int) -> tuple:
    """``(12)^p 12...m`` with ``p = (L - m + 1)/2``."""
    if (m + L) % 2 == 0 or not 1 <= m < L + 2:
        raise StructureError(f"(e_{m}, e_{m}) needs m + L odd and 1 <= m < L + 2 (got m={m}, L={L})")
    p = (L - m + 1) // 2
    return (1, 2) * p + tuple(range(1, m + 1))


def seed_product_form(m: int, setup: SchurWeylSetup) -> SparseOperator:
    """``(prod_{i<=p} U_{2i-1}/delta) E_m^{(2p)}``.

    Each trivial-channel factor carries ``1/delta`` so that the seed is an
    idempotent matrix unit like its rank-one counterpart.
    """
    L = setup.L
    seed_sequence(m, L)
    p = (L - m + 1) // 2
    E = jones_wenzl(m, L, setup.q, shift=2 * p, setup=setup, tolerance=setup.tolerance) if m > 2 else setup.identity()
    out = setup.identity()
    for i in range(1, p + 1):
        out = out @ (setup.generators[2 * i - 1] / setup.delta)
    return out @ E


def pos_seed(m: int, L: int, q=None, setup: SchurWeylSetup | None = None) -> POSElement:
    """``(e_m, e_m)`` computed as a product and compared with ``theta(e_m, e_m)``."""
    setup = setup or SchurWeylSetup(L, q)
    e = seed_sequence(m, L)
    prod = seed_product_form(m, setup)
    dev = (prod - theta(e, e, setup.basis)).norm_max()
    if dev >= 1e-9:
        raise HypothesisError(f"product form of (e_{m}, e_{m}) deviates from theta by {dev:.3e}")
    return POSElement(e, e, prod, {"product_vs_theta": dev})


def pos_raise(elem: POSElement, i: int, setup: SchurWeylSetup) -> POSElement:
    """``(s^i, t) = sqrt(k_g k_{g+1}) (1 - U_i/k_g) (s, t)`` at a minimum ``s_i = g - 1``."""
    s = elem.s
    if not 1 <= i <= len(s) - 2:
        raise StructureError(f"position {i} has no two neighbours in {s}")
    g = s[i - 1]
    if not (s[i + 1] == g and s[i] == g - 1):
        raise StructureError(f"{s} has no minimum at position {i}")
    kg, kg1 = setup.k(g), setup.k(g + 1)
    if abs(kg) < 1e-14:
        raise HypothesisError(f"k_{g} vanishes")
    op = cmath.sqrt(kg * kg1) * (elem.op - (setup.generators[i] @ elem.op) / kg)
    raised = s[:i] + (s[i] + 2,) + s[i + 1:]
    return POSElement(raised, elem.t, op)


def pos_transpose(elem: POSElement) -> POSElement:
    """``(t, s) = (s, t)^T`` (plain transpose of the realization)."""
    return POSElement(elem.t, elem.s, elem.op.transpose())


def _minima(s):
    return [i for i in range(1, len(s) - 1) if s[i - 1] == s[i + 1] == s[i] + 1]


def pos_basis(setup: SchurWeylSetup) -> dict:
    """Every POS element ``(s, t)`` built from the seeds by raising and transposing.

    Returns a dict ``(s, t) -> POSElement``.
    """
    L = setup.L
    out = {}
    for m in range(1, L + 2):
        if (m + L) % 2 == 0:
            continue
        seed = pos_seed(m, L, setup=setup)
        col = {seed.s: seed}
        frontier = [seed]
        while frontier:
            nxt = []
            for el in frontier:
                for i in _minima(el.s):
                    up = pos_raise(el, i, setup)
                    if up.s not in col:
                        col[up.s] = up
                        nxt.append(up)
            frontier = nxt
        rows = {s: pos_transpose(el) for s, el in col.items()}
        for s, left in col.items():
            for t, right in rows.items():
                out[(s, t)] = POSElement(s, t, left.op @ right.op)
    return out


def pos_action_matrix(i: int, setup: SchurWeylSetup) -> SparseOperator:
    """``U_i`` from the POS action coefficients alone, in the path basis.

    With ``a`` the sequence having a minimum ``g - 1`` at ``i`` and ``b = a^i``:
    ``U a = k_g a - sqrt(k_g/k_{g+1}) b`` and
    ``U b = -sqrt(k_g k_{g+1}) (delta - k_g) a + (delta - k_g) b``;
    ``U`` kills sequences that are monotone through ``i``.
    """
    basis = setup.basis
    d = setup.delta
    k = setup.k
    entries = {}
    for col, path in enumerate(basis.states):
        s = tuple(x + 1 for x in path)
        left, mid, right = s[i - 1], s[i], s[i + 1]
        if left != right:
            continue
        g = left
        if mid == g - 1:
            b = s[:i] + (g + 1,) + s[i + 1:]
            entries[(col, col)] = k(g)
            entries[(basis.position(_as_path(b)), col)] = -cmath.sqrt(k(g) / k(g + 1))
        else:
            entries[(col, col)] = d - k(g)
            if g >= 2:
                a = s[:i] + (g - 1,) + s[i + 1:]
                entries[(basis.position(_as_path(a)), col)] = -cmath.sqrt(k(g) * k(g + 1)) * (d - k(g))
    return SparseOperator.from_entries(basis, entries)


def check_f_identity(sys_su2, x: int, q=None) -> float:
    """``|F^{x11}_{x;x-1,0} (F^-1)^{x11}_{x;0,x-1} - k_{x+1}/delta|``."""
    if x < 1:
        raise StructureError("x must be >= 1")
    for lab in (x - 1, x, x + 1):
        if lab not in sys_su2.ids:
            raise StructureError(f"label {lab} is outside the truncated system")
    if not sys_su2.in_window(x, 1, 1, x):
        raise StructureError(f"block ({x},1,1,{x}) is outside the window")
    if q is None:
        q = complex(*sys_su2.meta["q"])
    d = quantum_integer(2, q)
    lhs = sys_su2.f_symbol(x, 1, 1, x, x - 1, 0) * sys_su2.f_inverse(x, 1, 1, x, 0, x - 1)
    return abs(lhs - chebyshev_ratio(x + 1, d) / d)


@dataclass
class SchurWeylReport:
    L: int
    q: complex
    delta: complex
    generator_deviation: float
    per_generator: list
    seed_deviation: float
    pos_elements: int
    pos_realization_deviation: float
    product_rule_theta: float
    product_rule_pos: float
    f_identity: dict
    k2_error: float
    complex_q: bool
    tolerance: float = 1e-9
    notes: list = field(default_factory=list)

    @property
    def checks(self) -> dict:
        return {
            "generators_pos_vs_fsymbol": (self.generator_deviation, self.tolerance),
            "seed_product_vs_theta": (self.seed_deviation, self.tolerance),
            "pos_realization": (self.pos_realization_deviation, self.tolerance),
            "product_rule_theta_exact": (self.product_rule_theta, 0.0),
            "product_rule_pos": (self.product_rule_pos, self.tolerance),
            "f_identity": (max(self.f_identity.values(), default=0.0), 1e-10),
            "k2_equals_inverse_delta": (self.k2_error, 0.0),
        }

    @property
    def ok(self) -> bool:
        return all(r == 0 if t == 0 else r < t for r, t in self.checks.values())


def verify_pos_vs_fsymbol(L: int, q, tolerance=1e-9, max_pairs=None) -> SchurWeylReport:
    """Compare the F-symbol generators with the POS action, and the POS basis
    with its rank-one realization.
    """
    setup = SchurWeylSetup(L, q)
    per = []
    for i in range(1, L):
        per.append((setup.generators[i] - pos_action_matrix(i, setup)).norm_max())
    seed_dev = 0.0
    for m in range(1, L + 2):
        if (m + L) % 2:
            seed_dev = max(seed_dev, pos_seed(m, L, setup=setup).notes["product_vs_theta"])
    elems = pos_basis(setup)
    real_dev = max(el.deviation(setup.basis) for el in elems.values())

    keys = list(elems)
    thetas = {key: theta(*key, setup.basis) for key in keys}
    exact = 0.0
    numeric = 0.0
    count = 0
    for (u, s) in keys:
        for (t, v) in keys:
            if u[-1] != v[-1]:
                continue
            count += 1
            if max_pairs is not None and count > max_pairs:
                break
            prod = thetas[(u, s)] @ thetas[(t, v)]
            want = thetas[(u, v)] if s == t else SparseOperator.zero(setup.basis)
            exact = max(exact, (prod - want).norm_max())
            pprod = elems[(u, s)].op @ elems[(t, v)].op
            pwant = elems[(u, v)].op if s == t else SparseOperator.zero(setup.basis)
            numeric = max(numeric, (pprod - pwant).norm_max())

    fid = {}
    sysx = su2(setup.q, max_label=max(L, 6))
    for x in range(1, min(5, sysx.meta["max_label"] - 1) + 1):
        fid[x] = check_f_identity(sysx, x, setup.q)
    k2 = abs(setup.k(2) - 1 / setup.delta)
    notes = ["complex q: square-root branches are principal"] if setup.complex_q else []
    return SchurWeylReport(L, setup.q, setup.delta, max(per, default=0.0), per, seed_dev, len(elems), real_dev,
                           exact, numeric, fid, k2, setup.complex_q, tolerance, notes)

"""Fusion-path basis ``|mu_0, ..., mu_L>`` and sparse operators over it."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
import scipy.sparse as sp

from .monoidal_system import MonoidalSystem, StructureError, TLCatError


class BasisMismatchError(TLCatError):
    pass


@dataclass(frozen=True)
class StrandDecoration:
    """Strand labels ``(lambda_1, ..., lambda_L)`` and boundary conditions.

    ``closed=True`` selects periodic paths (``mu_L == mu_0``).
    """

    strands: tuple
    start: frozenset
    end: frozenset | None = None
    closed: bool = False

    def __post_init__(self):
        object.__setattr__(self, "strands", tuple(self.strands))
        object.__setattr__(self, "start", frozenset(self.start))
        if self.end is not None:
            object.__setattr__(self, "end", frozenset(self.end))
        if len(self.strands) < 1:
            raise StructureError("a decoration needs at least one strand")

    @property
    def L(self) -> int:
        return len(self.strands)

    def validate(self, sys: MonoidalSystem):
        for x in (*self.strands, *self.start, *(self.end or ())):
            if x not in sys.ids:
                raise StructureError(f"label {x!r} not in system {sys.name}")


@dataclass(frozen=True)
class PathBasis:
    states: tuple
    decoration: StrandDecoration
    index: dict = field(repr=False, compare=False)

    def __len__(self):
        return len(self.states)

    def __iter__(self):
        return iter(self.states)

    def __contains__(self, state):
        return tuple(state) in self.index

    def position(self, state) -> int:
        try:
            return self.index[tuple(state)]
        except KeyError:
            raise StructureError(f"state {tuple(state)} is not in the basis") from None

    def sectors(self) -> dict:
        """Positions grouped by the source label ``mu_0``."""
        out = {}
        for n, s in enumerate(self.states):
            out.setdefault(s[0], []).append(n)
        return out


def is_admissible(sys: MonoidalSystem, decoration: StrandDecoration, seq: Sequence) -> bool:
    if len(seq) != decoration.L + 1 or seq[0] not in decoration.start:
        return False
    if any(not sys.N(seq[i - 1], lam, seq[i]) for i, lam in enumerate(decoration.strands, start=1)):
        return False
    if decoration.end is not None and seq[-1] not in decoration.end:
        return False
    return not decoration.closed or seq[-1] == seq[0]


def enumerate_paths(sys: MonoidalSystem, decoration: StrandDecoration) -> PathBasis:
    """All admissible paths, lexicographic in the system's label order."""
    decoration.validate(sys)
    if not decoration.start:
        raise StructureError("start set I0 is empty")
    starts = [x for x in sys.ids if x in decoration.start]
    states = []

    def grow(path):
        i = len(path)
        if i == decoration.L + 1:
            if is_admissible(sys, decoration, path):
                states.append(tuple(path))
            return
        for nxt in sys.products(path[-1], decoration.strands[i - 1]):
            path.append(nxt)
            grow(path)
            path.pop()

    for s in starts:
        grow([s])
    states = tuple(states)
    return PathBasis(states, decoration, {s: n for n, s in enumerate(states)})


def make_basis(sys, strands, start=None, end=None, closed=False) -> PathBasis:
    """Resolve labels by id/name and enumerate.  ``start=None`` means all labels."""
    strands = [sys.label(x) for x in strands]
    start = sys.ids if start is None else [sys.label(x) for x in start]
    end = None if end is None else [sys.label(x) for x in end]
    return enumerate_paths(sys, StrandDecoration(tuple(strands), frozenset(start), end and frozenset(end), closed))


def braket(basis: PathBasis, bra, ket) -> int:
    """``<mu'|mu>``: the Kronecker delta of the two sequences."""
    basis.position(bra)
    basis.position(ket)
    return int(tuple(bra) == tuple(ket))


class SparseOperator:
    """Complex matrix over a :class:`PathBasis`, stored in CSR form.

    Row index is the output state ``mu'``, column the input ``mu``, so
    ``op[mu', mu] = <mu'|op|mu>``.
    """

    __array_priority__ = 100

    def __init__(self, basis: PathBasis, matrix):
        n = len(basis)
        m = sp.csr_matrix(matrix, dtype=complex)
        if m.shape != (n, n):
            raise StructureError(f"operator shape {m.shape} does not match basis size {n}")
        m.eliminate_zeros()
        m.sort_indices()
        self.basis = basis
        self.matrix = m

    @classmethod
    def from_entries(cls, basis, entries: dict):
        n = len(basis)
        if not entries:
            return cls.zero(basis)
        rows, cols = zip(*entries)
        return cls(basis, sp.coo_matrix((list(entries.values()), (rows, cols)), shape=(n, n)))

    @classmethod
    def zero(cls, basis):
        n = len(basis)
        return cls(basis, sp.csr_matrix((n, n), dtype=complex))

    @classmethod
    def identity(cls, basis):
        return cls(basis, sp.identity(len(basis), dtype=complex, format="csr"))

    @classmethod
    def diagonal(cls, basis, values):
        return cls(basis, sp.diags(np.asarray(values, dtype=complex), format="csr"))

    def _same(self, other):
        if not isinstance(other, SparseOperator):
            raise TypeError(f"expected SparseOperator, got {type(other).__name__}")
        if other.basis is not self.basis and other.basis.states != self.basis.states:
            raise BasisMismatchError("operators live on different bases")

    def __add__(self, other):
        self._same(other)
        return SparseOperator(self.basis, self.matrix + other.matrix)

    def __sub__(self, other):
        self._same(other)
        return SparseOperator(self.basis, self.matrix - other.matrix)

    def __neg__(self):
        return SparseOperator(self.basis, -self.matrix)

    def __mul__(self, scalar):
        return SparseOperator(self.basis, self.matrix * complex(scalar))

    __rmul__ = __mul__

    def __truediv__(self, scalar):
        return SparseOperator(self.basis, self.matrix / complex(scalar))

    def __matmul__(self, other):
        self._same(other)
        return SparseOperator(self.basis, self.matrix @ other.matrix)

    def __getitem__(self, key):
        r, c = key
        if not isinstance(r, int):
            r = self.basis.position(r)
        if not isinstance(c, int):
            c = self.basis.position(c)
        return complex(self.matrix[r, c])

    def adjoint(self):
        return SparseOperator(self.basis, self.matrix.conj().T)

    def transpose(self):
        return SparseOperator(self.basis, self.matrix.T)

    def norm_max(self) -> float:
        return float(np.max(np.abs(self.matrix.data))) if self.matrix.nnz else 0.0

    def trace(self) -> complex:
        return complex(self.matrix.diagonal().sum())

    def rank(self, tol=1e-9) -> int:
        return int(np.linalg.matrix_rank(self.to_dense(), tol=tol)) if self.matrix.nnz else 0

    def entries(self) -> dict:
        coo = self.matrix.tocoo()
        return {(int(r), int(c)): complex(v) for r, c, v in sorted(zip(coo.row, coo.col, coo.data))}

    def prune(self, tol):
        m = self.matrix.copy()
        m.data[np.abs(m.data) <= tol] = 0
        return SparseOperator(self.basis, m)

    def to_dense(self) -> np.ndarray:
        return self.matrix.toarray()

    def apply(self, ket) -> np.ndarray:
        """Image of ``|mu>`` as a dense coefficient vector."""
        v = np.zeros(len(self.basis), dtype=complex)
        v[self.basis.position(ket)] = 1
        return self.matrix @ v

    def is_block_diagonal(self, groups: Iterable[Iterable[int]]) -> bool:
        owner = {}
        for g, members in enumerate(groups):
            for m in members:
                owner[m] = g
        coo = self.matrix.tocoo()
        return all(owner[int(r)] == owner[int(c)] for r, c in zip(coo.row, coo.col))

    def __repr__(self):
        return f"SparseOperator(n={len(self.basis)}, nnz={self.matrix.nnz})"


def rank_one(basis: PathBasis, bra_out, ket_in) -> SparseOperator:
    """``|mu'><mu|``: a single unit entry at ``(index(mu'), index(mu))``."""
    return SparseOperator.from_entries(basis, {(basis.position(bra_out), basis.position(ket_in)): 1.0})


def add(x: SparseOperator, y: SparseOperator) -> SparseOperator:
    return x + y


def scale(x: SparseOperator, s) -> SparseOperator:
    return x * s


def compose(x: SparseOperator, y: SparseOperator) -> SparseOperator:
    return x @ y


def adjoint(x: SparseOperator) -> SparseOperator:
    return x.adjoint()


def norm_max(x: SparseOperator) -> float:
    return x.norm_max()

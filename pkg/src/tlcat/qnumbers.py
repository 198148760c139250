"""Quantum integers and factorials."""

from __future__ import annotations

import cmath

from .monoidal_system import TLCatError


def quantum_integer(n: int, q: complex) -> complex:
    """``[n]_q = q^{n-1} + q^{n-3} + ... + q^{-(n-1)}``.

    The sum form equals ``(q^n - q^-n)/(q - q^-1)`` and stays exact at
    ``q = +-1`` (``[n]_1 = n``).  Negative ``n`` uses ``[-n] = -[n]``.
    """
    if q == 0:
        raise TLCatError("quantum integer undefined at q = 0")
    if n < 0:
        return -quantum_integer(-n, q)
    q = complex(q)
    return sum(q ** (n - 1 - 2 * k) for k in range(n)) if n else 0j


def quantum_factorial(n: int, q: complex) -> complex:
    out = 1 + 0j
    for k in range(2, n + 1):
        out *= quantum_integer(k, q)
    return out


def delta(q: complex) -> complex:
    """Loop parameter ``[2]_q = q + 1/q``."""
    return quantum_integer(2, q)


def root_of_unity(level: int) -> complex:
    """``exp(i pi / (k + 2))`` for level ``k``."""
    return cmath.exp(1j * cmath.pi / (level + 2))

"""Independent reference implementations used only by the tests."""

from __future__ import annotations

import itertools

import numpy as np


def assignment_table(n: int) -> tuple[np.ndarray, np.ndarray]:
    """All 4**n assignments in ascending word order as (e, e') bit arrays."""
    rows = np.array(list(itertools.product([0, 1], repeat=2 * n)), dtype=np.int64)
    return rows[:, :n], rows[:, n:]


def chain_values(kind: str, n: int, indices=()) -> np.ndarray:
    """Chain member values at every assignment, straight from the product formulas."""
    e, ep = assignment_table(n)
    ebar = 1 - e

    def primes_without(*skip):
        keep = [q for q in range(n) if q + 1 not in skip]
        return np.prod(ep[:, keep], axis=1)

    v = np.prod(ebar, axis=1) - np.prod(ep, axis=1)
    if kind == "X":
        skip = ()
    elif kind == "Xij":
        i, j = indices
        v = v + e[:, i - 1] * ebar[:, j - 1] * primes_without(i, j)
        skip = (i,)
    elif kind == "Xijk":
        i, j, k = indices
        v = v + e[:, i - 1] * ebar[:, j - 1] * ebar[:, k - 1] * primes_without(i, j, k)
        skip = (i,)
    elif kind == "Xijkl":
        i, j, k, l = indices
        v = v + e[:, i - 1] * ebar[:, j - 1] * primes_without(i, j)
        v = v + e[:, k - 1] * ebar[:, l - 1] * primes_without(k, l)
        skip = (i, k)
    else:
        raise ValueError(kind)
    for p in range(1, n + 1):
        if p not in skip:
            v = v + e[:, p - 1] * primes_without(p)
    return v


def pauli_projector(axis, outcome: int) -> np.ndarray:
    x, y, z = axis
    s = np.array([[z, x - 1j * y], [x + 1j * y, -z]])
    sign = 1 if outcome == 1 else -1
    return (np.eye(2) + sign * s) / 2


def probability(psi: np.ndarray, projectors) -> float:
    """<psi| P_1 x ... x P_n |psi> through one dense Kronecker product."""
    op = projectors[0]
    for p in projectors[1:]:
        op = np.kron(op, p)
    return float(np.vdot(psi, op @ psi).real)

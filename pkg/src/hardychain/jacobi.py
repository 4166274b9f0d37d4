"""Cyclic Jacobi eigensolver for dense complex Hermitian matrices.

Rotations are scheduled round-robin so that each round touches disjoint
index pairs; all rotations of a round are then applied at once as a
block-diagonal unitary, which lets numpy do the work row- and column-wise.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np

from .errors import ConvergenceError

OFF_TOL = 1e-13
MAX_SWEEPS = 60


@lru_cache(maxsize=32)
def _rounds(dim: int) -> tuple[tuple[np.ndarray, np.ndarray], ...]:
    m = dim + (dim % 2)
    players = list(range(m))
    out = []
    for _ in range(m - 1):
        pairs = [(players[k], players[m - 1 - k]) for k in range(m // 2)]
        pairs = [(min(a, b), max(a, b)) for a, b in pairs if max(a, b) < dim]
        out.append((np.array([a for a, _ in pairs]), np.array([b for _, b in pairs])))
        players = [players[0], players[-1]] + players[1:-1]
    return tuple(out)


def _off_norm(a: np.ndarray) -> float:
    off = a.copy()
    np.fill_diagonal(off, 0)
    return float(np.linalg.norm(off))


def jacobi_eigh(matrix, tol: float = OFF_TOL, max_sweeps: int = MAX_SWEEPS):
    """Return ``(eigenvalues, eigenvectors)`` with eigenvalues ascending.

    Iterates until the off-diagonal Frobenius norm drops below
    ``tol * ||A||_F``.  Rounding can stall the last few orders of magnitude on
    large matrices, so a stalled sweep that already sits below ``1e-10 ||A||``
    is accepted.
    """
    a = np.array(matrix, dtype=complex)
    dim = a.shape[0]
    a = (a + a.conj().T) / 2
    if not np.any(a.imag):
        # real symmetric input: same rotations with phases reduced to signs
        a = a.real.copy()
    v = np.eye(dim, dtype=a.dtype)
    scale = float(np.linalg.norm(a))
    if dim == 1 or scale == 0.0:
        return np.real(np.diag(a)).copy(), v

    rounds = _rounds(dim)
    off = _off_norm(a)
    for sweep in range(max_sweeps):
        if off <= tol * scale:
            break
        for p, q in rounds:
            apq = a[p, q]
            mag = np.abs(apq)
            active = mag > 1e-300
            if not np.any(active):
                continue
            p, q, apq, mag = p[active], q[active], apq[active], mag[active]
            phase = apq / mag
            tau = (a[q, q].real - a[p, p].real) / (2 * mag)
            t = np.where(tau >= 0, 1.0, -1.0) / (np.abs(tau) + np.sqrt(1 + tau * tau))
            c = 1 / np.sqrt(1 + t * t)
            s = t * c
            cph = np.conj(phase)

            cp, cq = a[:, p].copy(), a[:, q].copy()
            a[:, p] = c * cp - s * cph * cq
            a[:, q] = s * cp + c * cph * cq
            rp, rq = a[p, :].copy(), a[q, :].copy()
            a[p, :] = c[:, None] * rp - (s * phase)[:, None] * rq
            a[q, :] = s[:, None] * rp + (c * phase)[:, None] * rq
            a[p, q] = 0
            a[q, p] = 0

            vp, vq = v[:, p].copy(), v[:, q].copy()
            v[:, p] = c * vp - s * cph * vq
            v[:, q] = s * vp + c * cph * vq
        new_off = _off_norm(a)
        if new_off >= off and new_off <= 1e-10 * scale:
            off = new_off
            break
        off = new_off
    if off > 1e-10 * scale:
        raise ConvergenceError(
            "Jacobi iteration did not converge",
            {"off_norm": off, "scale": scale, "sweeps": max_sweeps},
        )
    w = np.real(np.diag(a))
    order = np.argsort(w, kind="stable")
    return w[order], v[:, order]

"""Bell operators of the chain members and their spectra.

Each chain member is a signed sum of n-fold coincidence probabilities, so its
quantum operator is the same signed sum of tensor products of projectors.
For the default frame (sigma_z unprimed, sigma_x primed) the X and X_ij
operators leave a small subspace invariant, and their eigenvalues on it are
the roots of a cubic and a quartic respectively.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import InvalidMemberError, SingularityError, ValidationError
from .lhv import ChainMember, Term
from .quantum import (
    IDENTITY2,
    PRIMED,
    UNPRIMED,
    Event,
    MeasurementFrame,
    StateVector,
    as_state,
    default_frame,
    eigh,
    joint_probability,
    tensor,
)

_FACTOR_SETTING = {"e": (UNPRIMED, 1), "ebar": (UNPRIMED, 0), "ep": (PRIMED, 1), "epbar": (PRIMED, 0)}

# Eigenvalues as printed alongside the LHV bounds in the reference tables.
REFERENCE_X_EIGENVALUES = {
    2: (1.20711, -0.20711, 0.5),
    3: (1.4501, -0.223046, 0.77294),
    4: (1.80652, -0.210496, 0.903973),
    5: (2.23266, -0.190055, 0.957394),
    6: (2.688752, -0.1689639, 0.9802124),
}
REFERENCE_XIJ_EIGENVALUES = {
    3: (1.183013, 0.6830127, -0.1830127, 0.3169873),
    4: (1.4667, 0.91912, -0.19033, 0.30448),
    5: (1.911717, 0.9524242, -0.1734191, 0.3092781),
    6: (2.37600, 0.978917, -0.156122, 0.301206),
    7: (2.8549439, 0.9847124, -0.1447244, 0.3050681),
}
TABLE_TOL = 1e-4


def exact_x_eigenvalues_n2() -> tuple[float, float, float]:
    r2 = math.sqrt(2)
    return ((1 - r2) / 2, 0.5, (1 + r2) / 2)


def exact_xij_eigenvalues_n3() -> tuple[float, float, float, float]:
    hi = math.sqrt(1 + math.sqrt(3) / 2)
    lo = math.sqrt(1 - math.sqrt(3) / 2)
    return ((1 - hi) / 2, (1 - lo) / 2, (1 + lo) / 2, (1 + hi) / 2)


# ---------------------------------------------------------------------------
# operators


def term_operator(term: Term, n: int, frame: MeasurementFrame) -> np.ndarray:
    """Tensor product of projectors for one signed term; unconstrained qubits get the identity."""
    sign, factors = term
    by_qubit = dict(factors)
    mats = []
    for q in range(1, n + 1):
        f = by_qubit.get(q)
        mats.append(IDENTITY2 if f is None else frame.projector(q, *_FACTOR_SETTING[f]))
    return sign * tensor(mats)


def member_operator(member: ChainMember, frame: MeasurementFrame | None = None) -> np.ndarray:
    n = member.n
    frame = frame or default_frame(n)
    if frame.n != n:
        raise ValidationError(f"frame has {frame.n} qubits, member has {n}")
    op = np.zeros((1 << n, 1 << n), dtype=complex)
    for term in member.terms():
        op += term_operator(term, n, frame)
    return op


def build_X_operator(n: int, frame: MeasurementFrame | None = None) -> np.ndarray:
    if n < 2:
        raise InvalidMemberError(f"X operator needs n >= 2, got {n}")
    return member_operator(ChainMember("X", n), frame)


def build_Xij_operator(n: int, i: int, j: int, frame: MeasurementFrame | None = None) -> np.ndarray:
    return member_operator(ChainMember("Xij", n, (i, j)), frame)


def build_Xijk_operator(n: int, i: int, j: int, k: int, frame: MeasurementFrame | None = None) -> np.ndarray:
    return member_operator(ChainMember("Xijk", n, (i, j, k)), frame)


def build_Xijkl_operator(n: int, i: int, j: int, k: int, l: int,
                         frame: MeasurementFrame | None = None) -> np.ndarray:
    return member_operator(ChainMember("Xijkl", n, (i, j, k, l)), frame)


def member_probability_sum(state, member: ChainMember, frame: MeasurementFrame | None = None) -> float:
    """The member's signed sum of coincidence probabilities, one event at a time.

    A term that leaves some qubits unconstrained is a marginal; it is summed
    over both outcomes of the unprimed setting on those qubits.
    """
    psi = as_state(state)
    n = member.n
    frame = frame or default_frame(n)
    total = 0.0
    for sign, factors in member.terms():
        fixed = dict(factors)
        free = [q for q in range(1, n + 1) if q not in fixed]
        for outcomes in np.ndindex(*([2] * len(free))):
            cons = []
            free_iter = iter(outcomes)
            for q in range(1, n + 1):
                cons.append(_FACTOR_SETTING[fixed[q]] if q in fixed else (UNPRIMED, int(next(free_iter))))
            total += sign * joint_probability(psi, frame, Event(tuple(cons)))
    return total


# ---------------------------------------------------------------------------
# special vectors of the default frame

_Z_PLUS = np.array([1, 0], dtype=complex)
_Z_MINUS = np.array([0, 1], dtype=complex)
_X_PLUS = np.array([1, 1], dtype=complex) / math.sqrt(2)


def _product(vectors) -> np.ndarray:
    return StateVector.product(vectors).amplitudes


@dataclass
class SpecialVectors:
    """|Phi> = all z-, |chi> = all x+, |Psi_j> = z+ on j and x+ elsewhere, and friends."""

    n: int
    phi: np.ndarray
    chi: np.ndarray
    psi_j: list[np.ndarray]
    psi: np.ndarray  # unnormalized sum of psi_j
    psi_ij: np.ndarray | None = None
    indices: tuple[int, int] | None = None

    @classmethod
    def build(cls, n: int, indices: tuple[int, int] | None = None) -> SpecialVectors:
        phi = _product([_Z_MINUS] * n)
        chi = _product([_X_PLUS] * n)
        psi_j = [_product([_Z_PLUS if k == j else _X_PLUS for k in range(1, n + 1)]) for j in range(1, n + 1)]
        psi_ij = None
        if indices is not None:
            i, j = indices
            psi_ij = _product([_Z_PLUS if k == i else _Z_MINUS if k == j else _X_PLUS for k in range(1, n + 1)])
        return cls(n, phi, chi, psi_j, np.sum(psi_j, axis=0), psi_ij, indices)


def invariant_basis(n: int, kind: str, indices: Sequence[int] = ()) -> list[np.ndarray]:
    sv = SpecialVectors.build(n, tuple(indices) if kind == "Xij" else None)
    if kind == "X":
        return [sv.phi, sv.chi, sv.psi]
    if kind == "Xij":
        i, j = indices
        rest = np.sum([sv.psi_j[l - 1] for l in range(1, n + 1) if l not in (i, j)], axis=0)
        return [sv.phi, sv.chi, sv.psi_ij + math.sqrt(2) * sv.psi_j[j - 1], rest]
    raise InvalidMemberError(f"no invariant subspace known for {kind!r}")


@dataclass
class SubspaceCheck:
    residual: float
    reduced: np.ndarray  # op @ B = B @ reduced, B the basis as columns

    @property
    def eigenvalues(self) -> np.ndarray:
        return np.sort(np.linalg.eigvals(self.reduced).real)


def reduce_to_subspace(op: np.ndarray, basis: Sequence[np.ndarray]) -> SubspaceCheck:
    b = np.column_stack(basis)
    image = op @ b
    coeffs, *_ = np.linalg.lstsq(b, image, rcond=None)
    residual = float(np.max(np.linalg.norm(image - b @ coeffs, axis=0)))
    return SubspaceCheck(residual, coeffs)


def verify_invariant_subspace(n: int, kind: str = "X", indices: Sequence[int] = (1, 2)) -> SubspaceCheck:
    """Apply the default-frame operator to its special vectors and measure what leaks out of their span."""
    if kind == "X":
        op = build_X_operator(n)
        basis = invariant_basis(n, "X")
    elif kind == "Xij":
        op = build_Xij_operator(n, *indices)
        basis = invariant_basis(n, "Xij", indices)
    else:
        raise InvalidMemberError(f"no invariant subspace known for {kind!r}")
    return reduce_to_subspace(op, basis)


# ---------------------------------------------------------------------------
# characteristic polynomials


def x_cubic_coefficients(n: int) -> tuple[float, float, float, float]:
    """Coefficients (highest degree first) of the cubic whose roots are X's subspace eigenvalues."""
    t = 2.0 ** -n
    return (2.0, -(n + 1.0), 2 * t - 2 + n, -(n * t + t - 1))


def _polish(coeffs, x: float, steps: int = 8) -> float:
    p = np.poly1d(coeffs)
    dp = p.deriv()
    for _ in range(steps):
        d = dp(x)
        if d == 0:
            break
        step = p(x) / d
        x -= step
        if abs(step) <= 1e-16 * max(1.0, abs(x)):
            break
    return float(x)


def cubic_eigenvalues_X(n: int) -> np.ndarray:
    """Three real roots, ascending, by the trigonometric method."""
    if n < 2:
        raise InvalidMemberError(f"X needs n >= 2, got {n}")
    c3, c2, c1, c0 = x_cubic_coefficients(n)
    a, b, c = c2 / c3, c1 / c3, c0 / c3
    p = b - a * a / 3
    q = 2 * a ** 3 / 27 - a * b / 3 + c
    if p >= 0 or 4 * p ** 3 + 27 * q ** 2 > 0:
        raise ValidationError(f"cubic for n={n} does not have three real roots")
    r = 2 * math.sqrt(-p / 3)
    arg = max(-1.0, min(1.0, 3 * q / (2 * p) * math.sqrt(-3 / p)))
    theta = math.acos(arg) / 3
    roots = [r * math.cos(theta - 2 * math.pi * k / 3) - a / 3 for k in range(3)]
    return np.sort([_polish((c3, c2, c1, c0), x) for x in roots])


def xij_quartic_coefficients(n: int) -> np.ndarray:
    """Expanded quartic (highest degree first) whose roots are X_ij's subspace eigenvalues."""
    P = np.polynomial.Polynomial
    mu = P([0.0, 1.0])
    first = 4 * (mu - 1) * (2 * mu - n + 1) - 3 * (n - 2)
    second = mu * (mu - 1) + 2.0 ** -n
    poly = first * second + (4 * mu - 1) * (mu - 1) * (2 * mu - 1)
    return poly.coef[::-1].copy()


def companion_matrix(coeffs) -> np.ndarray:
    c = np.asarray(coeffs, dtype=float)
    c = c / c[0]
    deg = c.size - 1
    m = np.zeros((deg, deg))
    m[0, :] = -c[1:]
    m[1:, :-1] = np.eye(deg - 1)
    return m


def quartic_eigenvalues_Xij(n: int) -> np.ndarray:
    """Four real roots, ascending: companion-matrix eigenvalues then Newton polishing."""
    if n < 3:
        raise InvalidMemberError(f"X_ij needs n >= 3, got {n}")
    coeffs = xij_quartic_coefficients(n)
    raw = np.linalg.eigvals(companion_matrix(coeffs))
    if np.max(np.abs(raw.imag)) > 1e-6:
        raise ValidationError(f"quartic for n={n} has complex roots {raw}")
    return np.sort([_polish(coeffs, float(x.real)) for x in raw])


# ---------------------------------------------------------------------------
# eigenstates


def eigenstate_X(n: int, mu: float) -> StateVector:
    """Normalized eigenvector of the default-frame X operator for a root ``mu`` of its cubic."""
    denom = 2 * mu - n - 1
    if abs(denom) <= 1e-9:
        raise SingularityError(f"2*mu = n + 1 for mu={mu}, n={n}")
    sv = SpecialVectors.build(n)
    vec = sv.phi + (mu - 1) * 2 ** (n / 2) * sv.chi + 2 ** ((n + 1) / 2) * (mu - 1) / denom * sv.psi
    return StateVector(vec).normalized()


def eigen_residual(op: np.ndarray, state, mu: float) -> float:
    v = np.asarray(as_state(state).amplitudes)
    return float(np.linalg.norm(op @ v - mu * v))


# ---------------------------------------------------------------------------
# spectrum reports


@dataclass
class SpectrumReport:
    n: int
    kind: str
    indices: tuple[int, ...]
    roots: list[float]
    spectrum: list[float]
    matched: list[tuple[float, float, float]]
    lhv_bounds: tuple[int, int]
    reference: list[float] | None = None
    reference_errors: list[float] = field(default_factory=list)

    @property
    def max_match_distance(self) -> float:
        return max(d for _, _, d in self.matched)

    @property
    def lower_violated(self) -> bool:
        return min(self.roots) < self.lhv_bounds[0]

    @property
    def upper_violated(self) -> bool:
        return max(self.roots) > self.lhv_bounds[1]

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "kind": self.kind,
            "indices": list(self.indices),
            "roots": list(self.roots),
            "spectrum": list(self.spectrum),
            "matched": [{"root": r, "eigenvalue": e, "distance": d} for r, e, d in self.matched],
            "lhv_bounds": list(self.lhv_bounds),
            "reference": None if self.reference is None else list(self.reference),
            "reference_errors": list(self.reference_errors),
        }


def match_roots(roots, spectrum) -> list[tuple[float, float, float]]:
    spec = np.asarray(spectrum, dtype=float)
    out = []
    for r in roots:
        k = int(np.argmin(np.abs(spec - r)))
        out.append((float(r), float(spec[k]), float(abs(spec[k] - r))))
    return out


def reference_errors(roots, reference) -> list[float]:
    """For each printed value, distance to the nearest computed root."""
    r = np.asarray(roots, dtype=float)
    return [float(np.min(np.abs(r - v))) for v in reference]


def spectrum_report(kind: str, n: int, indices: Sequence[int] = (1, 2), full: bool = True) -> SpectrumReport:
    if kind == "X":
        roots = cubic_eigenvalues_X(n)
        op = build_X_operator(n) if full else None
        reference = REFERENCE_X_EIGENVALUES.get(n)
        bounds = (0, n - 1)
        indices = ()
    elif kind == "Xij":
        roots = quartic_eigenvalues_Xij(n)
        op = build_Xij_operator(n, *indices) if full else None
        reference = REFERENCE_XIJ_EIGENVALUES.get(n)
        bounds = (0, n - 2)
    else:
        raise InvalidMemberError(f"spectrum reports cover X and Xij, not {kind!r}")
    spectrum = eigh(op)[0].tolist() if full else []
    matched = match_roots(roots, spectrum) if full else []
    return SpectrumReport(
        n=n,
        kind=kind,
        indices=tuple(indices),
        roots=[float(x) for x in roots],
        spectrum=spectrum,
        matched=matched,
        lhv_bounds=bounds,
        reference=None if reference is None else list(reference),
        reference_errors=[] if reference is None else reference_errors(roots, reference),
    )


def format_table(reports: Sequence[SpectrumReport], digits: int = 7) -> str:
    """Aligned text table: n | polynomial roots | LHV bounds."""
    rows = []
    for r in reports:
        label = "X" if r.kind == "X" else "(X_ij)"
        roots = ",  ".join(f"{x:.{digits}g}" for x in sorted(r.roots, reverse=True))
        rows.append((str(r.n), roots, f"0 <= {label}_LHV <= {r.lhv_bounds[1]}"))
    head = ("n", f"Eigenvalues of {'X' if reports and reports[0].kind == 'X' else 'X_ij'}", "LHV bounds")
    widths = [max(len(h), *(len(row[c]) for row in rows)) for c, h in enumerate(head)]
    lines = [" | ".join(h.ljust(w) for h, w in zip(head, widths)).rstrip()]
    lines.append("-+-".join("-" * w for w in widths))
    lines += [" | ".join(c.ljust(w) for c, w in zip(row, widths)).rstrip() for row in rows]
    return "\n".join(lines)

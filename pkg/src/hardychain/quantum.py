"""Pure-state n-qubit toolkit.

Conventions used throughout the package:

* qubit 1 is the most significant bit of an amplitude index;
* ``|0>`` is ``|z+>`` (sigma_z eigenvalue +1), ``|1>`` is ``|z->``;
* the projector for outcome 1 along a Bloch axis ``a`` is ``(I + sigma.a)/2``
  and for outcome 0 it is ``(I - sigma.a)/2``.  With ``a = z`` outcome 1
  therefore selects ``|0>``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import reduce
from typing import Sequence

import numpy as np

from .errors import DimensionError, ValidationError
from .jacobi import jacobi_eigh

PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)
IDENTITY2 = np.eye(2, dtype=complex)

X_AXIS = (1.0, 0.0, 0.0)
Y_AXIS = (0.0, 1.0, 0.0)
Z_AXIS = (0.0, 0.0, 1.0)

UNPRIMED, PRIMED = "unprimed", "primed"

NORM_TOL = 1e-10
AXIS_TOL = 1e-12
HERMITIAN_TOL = 1e-12
PROB_TOL = 1e-12


def _unit_axis(axis) -> np.ndarray:
    a = np.asarray(axis, dtype=float)
    if a.shape != (3,):
        raise ValidationError(f"Bloch axis must be a 3-vector, got shape {a.shape}")
    if abs(np.linalg.norm(a) - 1.0) > AXIS_TOL:
        raise ValidationError(f"Bloch axis {a.tolist()} is not a unit vector")
    return a


def projector(axis, outcome: int) -> np.ndarray:
    """``(I + sigma.axis)/2`` for outcome 1, ``(I - sigma.axis)/2`` for outcome 0."""
    a = _unit_axis(axis)
    if outcome not in (0, 1):
        raise ValidationError(f"outcome must be 0 or 1, got {outcome!r}")
    s = a[0] * PAULI_X + a[1] * PAULI_Y + a[2] * PAULI_Z
    return (IDENTITY2 + s) / 2 if outcome == 1 else (IDENTITY2 - s) / 2


def tensor(factors: Sequence[np.ndarray]) -> np.ndarray:
    """Kronecker product with the first factor acting on qubit 1."""
    if len(factors) == 0:
        raise ValidationError("tensor() needs at least one factor")
    return reduce(np.kron, [np.asarray(f, dtype=complex) for f in factors])


def check_hermitian(op, tol: float = HERMITIAN_TOL) -> np.ndarray:
    a = np.asarray(op, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValidationError(f"operator must be square, got shape {a.shape}")
    dev = np.max(np.abs(a - a.conj().T)) if a.size else 0.0
    if dev >= tol:
        raise ValidationError(f"operator is not Hermitian (max |A - A^dag| = {dev:.3e})")
    return a


def num_qubits(dim: int) -> int:
    n = int(dim).bit_length() - 1
    if n < 1 or 1 << n != dim:
        raise DimensionError(f"dimension {dim} is not a power of two >= 2")
    return n


@dataclass(frozen=True, eq=False)
class StateVector:
    """Amplitudes of an n-qubit pure state.

    Unnormalized vectors are allowed as intermediates; every probability
    routine calls :meth:`require_normalized` first.
    """

    amplitudes: np.ndarray

    def __post_init__(self):
        amps = np.array(self.amplitudes, dtype=complex).reshape(-1)
        num_qubits(amps.size)
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)

    @property
    def n(self) -> int:
        return num_qubits(self.amplitudes.size)

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    @property
    def is_normalized(self) -> bool:
        return abs(self.norm ** 2 - 1.0) <= NORM_TOL

    def normalized(self) -> StateVector:
        nrm = self.norm
        if nrm == 0:
            raise ValidationError("cannot normalize the zero vector")
        return StateVector(self.amplitudes / nrm)

    def require_normalized(self) -> StateVector:
        if not self.is_normalized:
            raise ValidationError(f"state is not normalized (norm^2 = {self.norm ** 2:.12g})")
        return self

    @classmethod
    def product(cls, single_qubit: Sequence[Sequence[complex]]) -> StateVector:
        return cls(reduce(np.kron, [np.asarray(v, dtype=complex) for v in single_qubit]))

    def __array__(self, dtype=None, copy=None):
        return self.amplitudes if dtype is None else self.amplitudes.astype(dtype)


def as_state(state) -> StateVector:
    return state if isinstance(state, StateVector) else StateVector(state)


@dataclass(frozen=True, eq=False)
class MeasurementFrame:
    """Bloch axes of the unprimed and primed measurement on every qubit."""

    unprimed: np.ndarray
    primed: np.ndarray

    def __post_init__(self):
        u = np.array(self.unprimed, dtype=float)
        p = np.array(self.primed, dtype=float)
        if u.ndim != 2 or u.shape[1] != 3 or u.shape != p.shape or u.shape[0] < 1:
            raise DimensionError("frame needs matching (n, 3) arrays of axes")
        for a in np.concatenate([u, p]):
            _unit_axis(a)
        u.setflags(write=False)
        p.setflags(write=False)
        object.__setattr__(self, "unprimed", u)
        object.__setattr__(self, "primed", p)

    @property
    def n(self) -> int:
        return self.unprimed.shape[0]

    def axis(self, qubit: int, setting: str) -> np.ndarray:
        if setting == UNPRIMED:
            return self.unprimed[qubit - 1]
        if setting == PRIMED:
            return self.primed[qubit - 1]
        raise ValidationError(f"unknown setting {setting!r}")

    def projector(self, qubit: int, setting: str, outcome: int) -> np.ndarray:
        return projector(self.axis(qubit, setting), outcome)

    @classmethod
    def uniform(cls, n: int, unprimed=Z_AXIS, primed=X_AXIS) -> MeasurementFrame:
        return cls([unprimed] * n, [primed] * n)


def default_frame(n: int) -> MeasurementFrame:
    """sigma_z for every unprimed setting and sigma_x for every primed one."""
    return MeasurementFrame.uniform(n, Z_AXIS, X_AXIS)


@dataclass(frozen=True)
class Event:
    """One (setting, outcome) pair for every qubit: an n-fold coincidence."""

    constraints: tuple[tuple[str, int], ...]

    def __post_init__(self):
        cons = tuple((str(s), int(o)) for s, o in self.constraints)
        if not cons:
            raise ValidationError("event must constrain at least one qubit")
        for s, o in cons:
            if s not in (UNPRIMED, PRIMED) or o not in (0, 1):
                raise ValidationError(f"bad event constraint {(s, o)!r}")
        object.__setattr__(self, "constraints", cons)

    @property
    def n(self) -> int:
        return len(self.constraints)

    @classmethod
    def from_factors(cls, n: int, factors) -> Event:
        """Build from lhv-style ``(qubit, factor)`` pairs covering all n qubits."""
        table = {"e": (UNPRIMED, 1), "ebar": (UNPRIMED, 0), "ep": (PRIMED, 1), "epbar": (PRIMED, 0)}
        by_qubit = {q: table[f] for q, f in factors}
        if sorted(by_qubit) != list(range(1, n + 1)):
            raise ValidationError("event must constrain every qubit exactly once")
        return cls(tuple(by_qubit[q] for q in range(1, n + 1)))

    @classmethod
    def uniform(cls, n: int, setting: str, outcome: int) -> Event:
        return cls(((setting, outcome),) * n)

    def describe(self) -> str:
        names = {UNPRIMED: "e", PRIMED: "e'"}
        return ",".join(f"{names[s]}{q}={o}" for q, (s, o) in enumerate(self.constraints, start=1))


def apply_local(state: np.ndarray, n: int, qubit: int, mat: np.ndarray) -> np.ndarray:
    """Apply a 2x2 matrix to one qubit of an amplitude vector without building the full operator."""
    t = np.asarray(state).reshape((2,) * n)
    t = np.tensordot(mat, t, axes=([1], [qubit - 1]))
    return np.moveaxis(t, 0, qubit - 1).reshape(-1)


def joint_probability(state, frame: MeasurementFrame, event: Event) -> float:
    """Probability of the n-fold coincidence ``event`` in ``state``.

    Projectors are applied qubit by qubit; the full 2^n operator is never
    formed, which keeps this path independent of :func:`expectation`.
    """
    psi = as_state(state).require_normalized()
    n = psi.n
    if frame.n != n or event.n != n:
        raise DimensionError(f"state has {n} qubits, frame {frame.n}, event {event.n}")
    phi = psi.amplitudes
    for q, (setting, outcome) in enumerate(event.constraints, start=1):
        phi = apply_local(phi, n, q, frame.projector(q, setting, outcome))
    p = float(np.vdot(phi, phi).real)
    if p < -PROB_TOL or p > 1 + PROB_TOL:
        raise ValidationError(f"probability {p!r} outside [0, 1]")
    return min(max(p, 0.0), 1.0)


def expectation(state, op) -> float:
    psi = as_state(state).require_normalized().amplitudes
    a = np.asarray(op, dtype=complex)
    if a.shape != (psi.size, psi.size):
        raise DimensionError(f"operator shape {a.shape} does not match state dimension {psi.size}")
    val = np.vdot(psi, a @ psi)
    if abs(val.imag) >= 1e-10:
        raise ValidationError(f"expectation has imaginary part {val.imag:.3e}; operator not Hermitian?")
    return float(val.real)


MAX_EIGH_DIM = 4096


def eigh(op) -> tuple[np.ndarray, np.ndarray]:
    """Ascending eigenvalues and unitary eigenvector matrix of a Hermitian operator."""
    a = check_hermitian(op)
    if a.shape[0] > MAX_EIGH_DIM:
        raise DimensionError(f"dimension {a.shape[0]} above eigensolver cap {MAX_EIGH_DIM}")
    return jacobi_eigh(a)


def basis_state(n: int, bits: str) -> StateVector:
    """Computational basis vector, e.g. ``basis_state(3, "010")`` (qubit 1 leftmost)."""
    if len(bits) != n or set(bits) - {"0", "1"}:
        raise ValidationError(f"need {n} bits, got {bits!r}")
    v = np.zeros(1 << n, dtype=complex)
    v[int(bits, 2)] = 1.0
    return StateVector(v)


def random_state(n: int, rng: np.random.Generator, real: bool = False) -> StateVector:
    v = rng.standard_normal(1 << n)
    if not real:
        v = v + 1j * rng.standard_normal(1 << n)
    return StateVector(v).normalized()


def random_axis(rng: np.random.Generator) -> np.ndarray:
    v = rng.standard_normal(3)
    return v / np.linalg.norm(v)


def random_frame(n: int, rng: np.random.Generator) -> MeasurementFrame:
    return MeasurementFrame([random_axis(rng) for _ in range(n)], [random_axis(rng) for _ in range(n)])

"""Hardy-type arguments without inequalities.

Each variant pairs with a chain member: the member's positive terms other
than ``prod ebar_k`` must vanish, ``P(e'_k = 1 for all k)`` must be positive,
and local realism then forces ``P(e_k = 0 for all k) >= P(e'_k = 1 for all k)``.
A quantum state violates the argument when the premises hold and the
conclusion probability stays below the target.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.optimize import minimize

from .errors import ConvergenceError, DomainError, InvalidMemberError, ResourceLimitError, SingularityError, ValidationError
from .lhv import CHUNK_BITS, Assignment, ChainMember, CheckResult, Term, term_masks
from .quantum import PRIMED, UNPRIMED, Z_AXIS, Event, MeasurementFrame, StateVector, as_state, joint_probability

GOLDEN = (math.sqrt(5) - 1) / 2
HARDY_N3_OPTIMUM = (5 * math.sqrt(5) - 11) / 2
HARDY_N3_ARGMAX = (3 - math.sqrt(5)) / 2

DEFAULT_TAU = 1e-9
MAX_OPTIMIZER_QUBITS = 6

_VARIANT_MEMBER = {"Standard": "X", "VariantI": "Xij", "VariantII": "Xijk", "VariantIII": "Xijkl"}
_VARIANT_ALIASES = {
    "standard": "Standard", "s": "Standard", "x": "Standard",
    "i": "VariantI", "varianti": "VariantI", "1": "VariantI",
    "ii": "VariantII", "variantii": "VariantII", "2": "VariantII",
    "iii": "VariantIII", "variantiii": "VariantIII", "3": "VariantIII",
}


@dataclass(frozen=True)
class HardyVariant:
    kind: str
    n: int
    indices: tuple[int, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "indices", tuple(int(i) for i in self.indices))
        if self.kind not in _VARIANT_MEMBER:
            raise InvalidMemberError(f"unknown Hardy variant {self.kind!r}")
        if self.kind == "Standard" and self.n < 2:
            raise InvalidMemberError("standard Hardy argument needs n >= 2")
        self.member  # validates indices

    @classmethod
    def parse(cls, name: str, n: int, indices=()) -> HardyVariant:
        kind = _VARIANT_ALIASES.get(name.strip().lower(), name)
        return cls(kind, n, tuple(indices))

    @property
    def member(self) -> ChainMember:
        return ChainMember(_VARIANT_MEMBER[self.kind], self.n, self.indices)

    def zero_terms(self) -> tuple[Term, ...]:
        # terms()[0] is +prod ebar (conclusion), terms()[1] is -prod e' (target)
        return self.member.terms()[2:]

    def zero_events(self) -> list[Event]:
        return [Event.from_factors(self.n, factors) for _, factors in self.zero_terms()]

    @property
    def target_event(self) -> Event:
        return Event.uniform(self.n, PRIMED, 1)

    @property
    def conclusion_event(self) -> Event:
        return Event.uniform(self.n, UNPRIMED, 0)

    @property
    def label(self) -> str:
        idx = f"({','.join(map(str, self.indices))})" if self.indices else ""
        return f"{self.kind}{idx}@n={self.n}"


@dataclass
class HardyReport:
    target: float
    zero_terms: list[tuple[str, float]]
    conclusion: float
    premises_hold: bool
    lhv_violated: bool
    tau: float = DEFAULT_TAU

    @property
    def max_zero_term(self) -> float:
        return max((p for _, p in self.zero_terms), default=0.0)

    def to_dict(self) -> dict:
        return {
            "target": self.target,
            "zero_terms": [{"event": d, "probability": p} for d, p in self.zero_terms],
            "conclusion": self.conclusion,
            "premises_hold": self.premises_hold,
            "lhv_violated": self.lhv_violated,
            "tau": self.tau,
        }


def check_hardy(state, frame: MeasurementFrame, variant: HardyVariant, tau: float = DEFAULT_TAU) -> HardyReport:
    psi = as_state(state).require_normalized()
    if tau <= 0:
        raise ValidationError("tau must be positive")
    target = joint_probability(psi, frame, variant.target_event)
    zeros = [(ev.describe(), joint_probability(psi, frame, ev)) for ev in variant.zero_events()]
    conclusion = joint_probability(psi, frame, variant.conclusion_event)
    premises = target > tau and all(p <= tau for _, p in zeros)
    return HardyReport(target, zeros, conclusion, premises, premises and conclusion < target - tau, tau)


def lhv_soundness_check(variant: HardyVariant) -> CheckResult:
    """Every vertex where all zero terms vanish and all e' are 1 must have all e equal to 0.

    Any distribution supported on vertices with vanishing zero terms then
    satisfies conclusion >= target.
    """
    n = variant.n
    masks, values, _ = term_masks(variant.zero_terms(), n)
    all_e = ((1 << n) - 1) << n
    all_ep = (1 << n) - 1
    for start in range(0, 1 << (2 * n), 1 << CHUNK_BITS):
        w = np.arange(start, min(start + (1 << CHUNK_BITS), 1 << (2 * n)), dtype=np.int64)
        feasible = np.ones(w.shape, dtype=bool)
        for m, v in zip(masks, values):
            feasible &= (w & m) != v
        bad = feasible & ((w & all_ep) == all_ep) & ((w & all_e) != 0)
        idx = np.flatnonzero(bad)
        if idx.size:
            return CheckResult(False, Assignment.from_word(n, start + int(idx[0])))
    return CheckResult(True)


# ---------------------------------------------------------------------------
# three-qubit stationary family


@dataclass(frozen=True)
class LocalUnitaryParams:
    """Real (a_i, b_i) relating the primed basis to the unprimed one on each qubit.

    ``|e'=1> = b|e=0> + a|e=1>`` and ``|e'=0> = -a|e=0> + b|e=1>``.
    """

    a: tuple[float, ...]
    b: tuple[float, ...]

    def __post_init__(self):
        a = tuple(float(x) for x in self.a)
        b = tuple(float(x) for x in self.b)
        if len(a) != len(b) or not a:
            raise ValidationError("need one (a, b) pair per qubit")
        for x, y in zip(a, b):
            if abs(x * x + y * y - 1) > 1e-12:
                raise ValidationError(f"a^2 + b^2 = {x * x + y * y!r} != 1")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)

    @classmethod
    def from_angles(cls, angles) -> LocalUnitaryParams:
        return cls(tuple(math.cos(t) for t in angles), tuple(math.sin(t) for t in angles))

    @property
    def n(self) -> int:
        return len(self.a)

    def frame(self) -> MeasurementFrame:
        """Unprimed axes along z; primed axes in the x-z plane."""
        primed = [(2 * x * y, 0.0, x * x - y * y) for x, y in zip(self.a, self.b)]
        return MeasurementFrame([Z_AXIS] * self.n, primed)


def state_from_outcome_amplitudes(coeffs) -> StateVector:
    """State from amplitudes labelled by unprimed outcomes ``e_1 .. e_n`` (z-axis frame).

    With the unprimed axis along z, outcome ``e = 1`` is ``|0>``, so the
    computational index is the bitwise complement of the outcome label.
    """
    c = np.asarray(coeffs, dtype=complex).reshape(-1)
    return StateVector(c[::-1].copy())


def construct_stationary_state_n3(params: LocalUnitaryParams) -> StateVector:
    """The three-qubit state making the target stationary under the Variant (1,2) constraints."""
    if params.n != 3:
        raise ValidationError("the stationary family is defined for three qubits")
    (a1, a2, a3), (b1, b2, b3) = params.a, params.b
    big = b1 * b1 * b2 * b2
    denom = (1 - big) * (b3 * b3 * (1 - big) + big)
    if denom <= 1e-15:
        raise SingularityError("degenerate normalization: b3^2 (1 - b1^2 b2^2) + b1^2 b2^2 = 0 or b1^2 b2^2 = 1")
    c = np.zeros(8)
    c[0b001] = b3 * (1 - big)
    c[0b010] = a2 * a3 * b1 * b1 * b2
    c[0b011] = -b1 * b1 * a2 * b2 * b3
    c[0b100] = a1 * b1 * b2 * b2 * a3
    c[0b101] = -a1 * b1 * b2 * b2 * b3
    c[0b110] = a1 * a2 * a3 * b1 * b2
    c[0b111] = -a1 * a2 * b1 * b2 * b3
    return state_from_outcome_amplitudes(c / math.sqrt(denom))


def stationary_probability_n3(u: float, v: float) -> float:
    """Stationary target value with ``u = b1^2 b2^2`` and ``v = b3^2``."""
    if not (0.0 <= u <= 1.0 and 0.0 <= v <= 1.0):
        raise DomainError(f"(u, v) = ({u}, {v}) outside the unit square")
    den = v * (1 - u) + u
    if den <= 0:
        raise DomainError("denominator v (1 - u) + u vanishes")
    return u * v * (1 - v) * (1 - u) / den


@dataclass
class ScanResult:
    u: float
    v: float
    value: float
    grid_value: float


def scan_stationary_surface_n3(resolution: int = 1000) -> ScanResult:
    if resolution < 100:
        raise ValidationError("resolution must be at least 100")
    g = np.arange(1, resolution + 1) / (resolution + 1)
    uu, vv = np.meshgrid(g, g, indexing="ij")
    vals = uu * vv * (1 - vv) * (1 - uu) / (vv * (1 - uu) + uu)
    k = np.unravel_index(np.argmax(vals), vals.shape)
    start = np.array([g[k[0]], g[k[1]]])

    def neg(x):
        if not (0 < x[0] < 1 and 0 < x[1] < 1):
            return 1.0
        return -stationary_probability_n3(x[0], x[1])

    res = minimize(neg, start, method="Nelder-Mead",
                   options={"xatol": 1e-13, "fatol": 1e-18, "maxiter": 20000})
    u, v = (float(x) for x in res.x)
    return ScanResult(u, v, stationary_probability_n3(u, v), float(vals[k]))


# ---------------------------------------------------------------------------
# penalty optimizer


@dataclass
class OptimizerConfig:
    starts: int = 32
    penalty_start: float = 1e2
    penalty_stop: float = 1e8
    penalty_factor: float = 10.0
    max_iter: int = 2000
    tolerance: float = 1e-6
    seed: int = 0
    complex_search: bool = False
    workers: int = 1
    polish: bool = True

    def __post_init__(self):
        if self.starts < 1 or self.max_iter < 1 or self.workers < 1:
            raise ValidationError("starts, max_iter and workers must be positive")
        if self.tolerance <= 0 or self.penalty_start <= 0 or self.penalty_factor <= 1:
            raise ValidationError("tolerance and penalty must be positive, factor > 1")
        if self.penalty_stop < self.penalty_start:
            raise ValidationError("penalty_stop must be >= penalty_start")

    def penalties(self) -> list[float]:
        out, w = [], self.penalty_start
        while w <= self.penalty_stop * (1 + 1e-12):
            out.append(w)
            w *= self.penalty_factor
        return out


@dataclass
class OptimizationResult:
    best_value: float
    state: StateVector
    frame: MeasurementFrame
    constraint_residual: float
    iterations: int
    evaluations: int
    start_index: int
    feasible_starts: int
    report: HardyReport
    start_values: list[float] = field(default_factory=list)

    def to_dict(self) -> dict:
        amps = self.state.amplitudes
        return {
            "best_value": self.best_value,
            "constraint_residual": self.constraint_residual,
            "iterations": self.iterations,
            "evaluations": self.evaluations,
            "start_index": self.start_index,
            "feasible_starts": self.feasible_starts,
            "state": [[float(z.real), float(z.imag)] for z in amps],
            "frame": {"unprimed": self.frame.unprimed.tolist(), "primed": self.frame.primed.tolist()},
            "report": self.report.to_dict(),
            "start_values": list(self.start_values),
        }


_CODE = {"ebar": 0, "e": 1, "epbar": 2, "ep": 3}


class _Problem:
    """Fast evaluation of the variant's probabilities for a parameter vector.

    Row 0 is the target event, row 1 the conclusion event, the rest are the
    zero terms.  Event bras are assembled by one gather over per-qubit rows.
    """

    def __init__(self, variant: HardyVariant, complex_search: bool):
        self.n = n = variant.n
        self.dim = 1 << n
        self.complex_search = complex_search
        terms = [(1, tuple((q, "ep") for q in range(1, n + 1)))]
        terms += [(1, tuple((q, "ebar") for q in range(1, n + 1)))]
        terms += list(variant.zero_terms())
        digits = np.array([[dict(factors)[q] for q in range(1, n + 1)] for _, factors in terms])
        self._digits = np.vectorize(_CODE.get)(digits)[:, None, :]
        bits = (np.arange(self.dim)[:, None] >> (n - 1 - np.arange(n))[None, :]) & 1
        self._bits = bits[None, :, :]
        self._qubits = np.arange(n)[None, None, :]

    def split(self, x):
        n, d = self.n, self.dim
        if self.complex_search:
            psi = x[:d] + 1j * x[d:2 * d]
            theta, phi = x[2 * d:2 * d + n], x[2 * d + n:]
        else:
            psi, theta, phi = x[:d], x[d:], None
        nrm = np.linalg.norm(psi)
        return (psi / nrm if nrm > 0 else psi), theta, phi

    def size(self) -> int:
        return (2 * self.dim + 2 * self.n) if self.complex_search else (self.dim + self.n)

    def local_bras(self, theta, phi):
        """Per qubit, bra vectors for (e=0, e=1, e'=0, e'=1)."""
        c, s = np.cos(theta), np.sin(theta)
        if phi is None:
            rows = np.zeros((self.n, 4, 2))
            rows[:, 2, 0], rows[:, 2, 1] = s, -c
            rows[:, 3, 0], rows[:, 3, 1] = c, s
        else:
            ph = np.exp(1j * phi)
            rows = np.zeros((self.n, 4, 2), dtype=complex)
            rows[:, 2, 0], rows[:, 2, 1] = s * ph, -c
            rows[:, 3, 0], rows[:, 3, 1] = c, s * np.conj(ph)
        rows[:, 0, 1] = 1
        rows[:, 1, 0] = 1
        return rows

    def event_bras(self, theta, phi) -> np.ndarray:
        rows = self.local_bras(theta, phi)
        return rows[self._qubits, self._digits, self._bits].prod(axis=-1)

    def probabilities(self, x) -> np.ndarray:
        psi, theta, phi = self.split(x)
        return np.abs(self.event_bras(theta, phi) @ psi) ** 2

    def frame(self, x) -> MeasurementFrame:
        _, theta, phi = self.split(x)
        phi = np.zeros(self.n) if phi is None else phi
        primed = np.column_stack([np.sin(2 * theta) * np.cos(phi), np.sin(2 * theta) * np.sin(phi), np.cos(2 * theta)])
        return MeasurementFrame([Z_AXIS] * self.n, primed)

    def constraint_bras(self, x) -> np.ndarray:
        _, theta, phi = self.split(x)
        return self.event_bras(theta, phi)[1:]


def _project_feasible(problem: _Problem, x) -> np.ndarray | None:
    psi, _, _ = problem.split(x)
    # psi must be orthogonal to every constraint ket
    kets = problem.constraint_bras(x).conj().T
    u, sv, _ = np.linalg.svd(kets, full_matrices=False)
    basis = u[:, sv > 1e-12 * max(sv.max(), 1.0)]
    proj = psi - basis @ (basis.conj().T @ psi)
    nrm = np.linalg.norm(proj)
    if nrm < 1e-8:
        return None
    return proj / nrm


def _run_start(args):
    variant, config, index, entropy = args
    problem = _Problem(variant, config.complex_search)
    rng = np.random.default_rng(np.random.SeedSequence(entropy))
    x = rng.standard_normal(problem.size())
    angles = slice(problem.size() - (2 if config.complex_search else 1) * problem.n, None)
    x[angles] = rng.uniform(0, math.pi, x[angles].size)
    iterations = evaluations = 0
    for w in config.penalties():
        def objective(z, w=w):
            p = problem.probabilities(z)
            return -p[0] + w * float(np.sum(p[1:] ** 2))

        res = minimize(objective, x, method="Nelder-Mead",
                       options={"maxiter": config.max_iter, "maxfev": 2 * config.max_iter,
                                "xatol": 1e-11, "fatol": 1e-15, "adaptive": True})
        x = res.x
        iterations += int(res.nit)
        evaluations += int(res.nfev)
    penalty_residual = float(np.max(problem.probabilities(x)[1:]))
    psi, _, _ = problem.split(x)
    if config.polish:
        polished = _project_feasible(problem, x)
        if polished is not None:
            psi = polished
    frame = problem.frame(x)
    state = StateVector(psi if config.complex_search else psi.real)
    report = check_hardy(state, frame, variant)
    residual = max(report.max_zero_term, report.conclusion)
    return {
        "index": index, "value": report.target, "residual": residual, "state": state, "frame": frame,
        "report": report, "iterations": iterations, "evaluations": evaluations,
        "penalty_residual": penalty_residual,
    }


def maximize_violation(variant: HardyVariant, config: OptimizerConfig | None = None) -> OptimizationResult:
    """Multi-start penalty maximization of P(e'_k = 1 for all k) under the variant's zero constraints.

    The conclusion probability P(e_k = 0 for all k) is constrained to zero as
    well.  Each start runs a Nelder-Mead solve per penalty weight, then its
    state is projected onto the exact null space of the constraint events for
    the frame it found.  The best feasible start wins, lowest index on ties.
    """
    config = config or OptimizerConfig()
    if variant.n > MAX_OPTIMIZER_QUBITS:
        raise ResourceLimitError(f"optimizer is capped at n={MAX_OPTIMIZER_QUBITS}, got n={variant.n}")
    seeds = np.random.SeedSequence(config.seed).spawn(config.starts)
    jobs = [(variant, config, k, _seed_words(s)) for k, s in enumerate(seeds)]
    if config.workers > 1:
        with ProcessPoolExecutor(config.workers) as pool:
            runs = list(pool.map(_run_start, jobs))
    else:
        runs = [_run_start(j) for j in jobs]
    feasible = [r for r in runs if r["residual"] <= config.tolerance]
    if not feasible:
        raise ConvergenceError(
            f"no feasible point for {variant.label} after {config.starts} starts",
            {
                "best_residual": min(r["residual"] for r in runs),
                "penalty_residuals": [r["penalty_residual"] for r in runs],
                "values": [r["value"] for r in runs],
                "config": asdict(config),
            },
        )
    best = max(feasible, key=lambda r: (r["value"], -r["index"]))
    return OptimizationResult(
        best_value=best["value"],
        state=best["state"],
        frame=best["frame"],
        constraint_residual=best["residual"],
        iterations=sum(r["iterations"] for r in runs),
        evaluations=sum(r["evaluations"] for r in runs),
        start_index=best["index"],
        feasible_starts=len(feasible),
        report=best["report"],
        start_values=[r["value"] for r in runs],
    )


def _seed_words(seq: np.random.SeedSequence) -> list[int]:
    return [int(x) for x in seq.generate_state(4)]

"""Named property checks run by ``hardychain verify``."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import bell, hardy, lhv
from .quantum import default_frame, expectation, random_frame, random_state


@dataclass
class PropertyResult:
    name: str
    passed: bool
    checked: int
    detail: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"name": self.name, "passed": self.passed, "checked": self.checked, "detail": self.detail}


@dataclass
class VerifyConfig:
    n_max: int = 6
    samples: int = 100
    seed: int = 0
    cap: int = lhv.DEFAULT_CAP


def index_tuples(kind: str, n: int):
    k = {"X": 0, "Xij": 2, "Xijk": 3, "Xijkl": 4}[kind]
    return itertools.combinations(range(1, n), k)


def chain_members(n: int, all_indices: bool = True):
    for kind in lhv.CHAIN_KINDS:
        if n < lhv._MIN_N[kind]:
            continue
        tuples = index_tuples(kind, n)
        for idx in (tuples if all_indices else itertools.islice(tuples, 1)):
            yield lhv.ChainMember(kind, n, idx)


def check_master_identity(cfg: VerifyConfig) -> PropertyResult:
    for n in range(1, cfg.n_max + 1):
        res = lhv.master_identity_check(n, cfg.cap)
        if not res.ok:
            return PropertyResult("master-identity", False, n, {"n": n, "witness": res.witness.to_bitstring()})
    return PropertyResult("master-identity", True, cfg.n_max)


def check_pointwise_chain(cfg: VerifyConfig) -> PropertyResult:
    count = 0
    for n in range(1, min(cfg.n_max, 8) + 1):
        for m in chain_members(n):
            res = lhv.pointwise_chain_check(m, cfg.cap)
            count += 1
            if not res.ok:
                return PropertyResult("pointwise-chain", False, count,
                                      {"member": m.label, "witness": res.witness.to_bitstring()})
    return PropertyResult("pointwise-chain", True, count)


def check_lhv_bounds(cfg: VerifyConfig) -> PropertyResult:
    count = 0
    for n in range(1, cfg.n_max + 1):
        for m in chain_members(n, all_indices=False):
            b = lhv.lhv_bounds_bruteforce(m, cfg.cap)
            count += 1
            witnesses_ok = (lhv.eval_chain_member(m, b.min_witness) == b.min
                            and lhv.eval_chain_member(m, b.max_witness) == b.max)
            if (b.min, b.max) != (0, m.upper_bound) or not witnesses_ok:
                return PropertyResult("lhv-bounds", False, count,
                                      {"member": m.label, "min": b.min, "max": b.max, "expected_max": m.upper_bound})
    return PropertyResult("lhv-bounds", True, count)


def check_op_prob_consistency(cfg: VerifyConfig) -> PropertyResult:
    rng = np.random.default_rng(cfg.seed)
    worst, count = 0.0, 0
    for n in range(2, min(cfg.n_max, 5) + 1):
        for m in chain_members(n, all_indices=False):
            for s in range(cfg.samples):
                frame = default_frame(n) if s % 2 == 0 else random_frame(n, rng)
                psi = random_state(n, rng)
                a = expectation(psi, bell.member_operator(m, frame))
                b = bell.member_probability_sum(psi, m, frame)
                worst = max(worst, abs(a - b))
                count += 1
    return PropertyResult("op-prob-consistency", worst < 1e-10, count, {"max_abs_diff": worst})


def check_invariant_subspace(cfg: VerifyConfig) -> PropertyResult:
    worst, count = 0.0, 0
    for n in range(2, min(cfg.n_max, 8) + 1):
        worst = max(worst, bell.verify_invariant_subspace(n, "X").residual)
        count += 1
        if n >= 3:
            for idx in index_tuples("Xij", n):
                worst = max(worst, bell.verify_invariant_subspace(n, "Xij", idx).residual)
                count += 1
    return PropertyResult("invariant-subspace", worst < 1e-10, count, {"max_residual": worst})


def check_polynomial_spectrum(cfg: VerifyConfig) -> PropertyResult:
    worst, count = 0.0, 0
    for n in range(2, min(cfg.n_max, 8) + 1):
        kinds = ["X"] + (["Xij"] if n >= 3 else [])
        for kind in kinds:
            rep = bell.spectrum_report(kind, n)
            worst = max(worst, rep.max_match_distance)
            count += len(rep.roots)
    return PropertyResult("polynomial-spectrum", worst < 1e-8, count, {"max_distance": worst})


def check_eigenstates(cfg: VerifyConfig) -> PropertyResult:
    worst, count = 0.0, 0
    for n in range(2, min(cfg.n_max, 6) + 1):
        op = bell.build_X_operator(n)
        for mu in bell.cubic_eigenvalues_X(n):
            if abs(2 * mu - n - 1) <= 1e-9:
                continue
            worst = max(worst, bell.eigen_residual(op, bell.eigenstate_X(n, mu), mu))
            count += 1
    return PropertyResult("eigenstates", worst < 1e-8, count, {"max_residual": worst})


def check_hardy_soundness(cfg: VerifyConfig) -> PropertyResult:
    count = 0
    names = {"X": "Standard", "Xij": "VariantI", "Xijk": "VariantII", "Xijkl": "VariantIII"}
    for n in range(2, min(cfg.n_max, 6) + 1):
        for m in chain_members(n):
            v = hardy.HardyVariant(names[m.kind], n, m.indices)
            res = hardy.lhv_soundness_check(v)
            count += 1
            if not res.ok:
                return PropertyResult("hardy-soundness", False, count,
                                      {"variant": v.label, "witness": res.witness.to_bitstring()})
    return PropertyResult("hardy-soundness", True, count)


def check_stationary_state(cfg: VerifyConfig) -> PropertyResult:
    g = hardy.GOLDEN
    params = hardy.LocalUnitaryParams((math.sqrt(g), 0.0, math.sqrt(g)), (g, 1.0, g))
    state = hardy.construct_stationary_state_n3(params)
    rep = hardy.check_hardy(state, params.frame(), hardy.HardyVariant("VariantI", 3, (1, 2)))
    worst = max(rep.max_zero_term, rep.conclusion)
    ok = worst <= 1e-10 and abs(rep.target - hardy.HARDY_N3_OPTIMUM) <= 1e-10 and rep.lhv_violated
    return PropertyResult("stationary-state", ok, 1, {"target": rep.target, "max_zero": worst})


PROPERTIES: dict[str, Callable[[VerifyConfig], PropertyResult]] = {
    "master-identity": check_master_identity,
    "pointwise-chain": check_pointwise_chain,
    "lhv-bounds": check_lhv_bounds,
    "op-prob-consistency": check_op_prob_consistency,
    "invariant-subspace": check_invariant_subspace,
    "polynomial-spectrum": check_polynomial_spectrum,
    "eigenstates": check_eigenstates,
    "hardy-soundness": check_hardy_soundness,
    "stationary-state": check_stationary_state,
}


def run(cfg: VerifyConfig, only: list[str] | None = None) -> list[PropertyResult]:
    names = only or list(PROPERTIES)
    unknown = [n for n in names if n not in PROPERTIES]
    if unknown:
        raise KeyError(f"unknown properties: {', '.join(unknown)}")
    return [PROPERTIES[name](cfg) for name in names]

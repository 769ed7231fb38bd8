"""Search for witness-indistinguishable low-negativity states: constrained
negative-log-likelihood minimization over the Cholesky-angle parametrization
of the two-qubit state space."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize

from .qstate import (CholeskyAngles, check_density_matrix, cholesky_to_state,
                     eigenbasis, negativity, state_to_cholesky_angles)
from .stats import DataVector, trial_rng
from .tomography import MLEConfig, mle_reconstruct
from .witnesses import W1_OBSERVABLES

__all__ = [
    "OptimizationConfig",
    "LoopholeResult",
    "LoopholeVerification",
    "InfeasibleSearchError",
    "KNOWN_LOOPHOLE_STATE",
    "neg_log_likelihood",
    "state_neg_log_likelihood",
    "find_loophole_state",
    "verify_loophole",
    "result_to_json",
]

_TAG_RESTART = 21

#: reference loophole state for the 350 um, gamma = 0.3 s^-1, tau = 0.34 s
#: setting, with entries rounded to three significant figures: it fits the
#: witness data as well as the true state while its negativity (~0.104) stays
#: below the null state's (~0.108).
KNOWN_LOOPHOLE_STATE = np.array([
    [0.256,           0.009 + 0.012j,  0.042 - 0.174j,  0.212 + 0.010j],
    [0.009 - 0.012j,  0.244,           0.109 - 0.022j, -0.008 + 0.004j],
    [0.042 + 0.174j,  0.109 + 0.023j,  0.246,           0.017 + 0.161j],
    [0.212 - 0.011j, -0.008 - 0.004j,  0.017 - 0.161j,  0.254],
])


@dataclass(frozen=True)
class OptimizationConfig:
    max_iterations: int = 150
    gradient_step: float = 1e-6
    constraint_margin: float = 1e-4
    restarts: int = 32

    def __post_init__(self):
        if self.max_iterations < 1 or self.restarts < 1:
            raise ValueError("max_iterations and restarts must be >= 1")
        if self.gradient_step <= 0 or self.constraint_margin < 0:
            raise ValueError("gradient_step must be > 0 and constraint_margin >= 0")


@dataclass(frozen=True)
class LoopholeResult:
    """Best feasible state found: its fit to the data and its entanglement."""

    state: np.ndarray
    nll: float
    negativity: float
    constraint_satisfied: bool
    nll_reference: float


class InfeasibleSearchError(RuntimeError):
    """No feasible point found across restarts."""


def _projector_stack(observables) -> np.ndarray:
    return np.concatenate([eigenbasis(obs).projectors for obs in observables])


def state_neg_log_likelihood(rho: np.ndarray, n: DataVector, observables) -> float:
    """-sum n_i log Tr(rho P_i); +inf when a counted outcome has zero
    probability (an infinitely bad fit the optimizer can move away from)."""
    projs = _projector_stack(observables)
    probs = np.real(np.einsum("pij,ji->p", projs, rho))
    counts = n.flat.astype(float)
    active = counts > 0
    if np.any(probs[active] <= 0.0):
        return math.inf
    return float(-np.sum(counts[active] * np.log(probs[active])))


def neg_log_likelihood(angles: CholeskyAngles, n: DataVector, observables) -> float:
    return state_neg_log_likelihood(cholesky_to_state(angles), n, observables)


def _central_grad(fun, x: np.ndarray, h: float) -> np.ndarray:
    grad = np.empty_like(x)
    for i in range(x.size):
        step = np.zeros_like(x)
        step[i] = h
        grad[i] = (fun(x + step) - fun(x - step)) / (2 * h)
    return grad


class _WitnessSetup:
    """Duck-typed setup so the fixed-point MLE runs on witness-only data."""

    def __init__(self, observables, projectors):
        self.observables = observables
        self.projectors = projectors


def find_loophole_state(n: DataVector, rho_null: np.ndarray,
                        cfg: OptimizationConfig = OptimizationConfig(),
                        seed: int = 0, observables=W1_OBSERVABLES,
                        rho_reference: np.ndarray | None = None) -> LoopholeResult:
    """Minimize the negative log-likelihood over the 15 Cholesky angles
    subject to negativity(state) <= negativity(rho_null) - margin.

    Multi-start: the fixed-point MLE of the data seeds the first restart, the
    rest start from uniform random angles. The incumbent is the best feasible
    point over every evaluation, so accepted improvements are monotone. Ties
    in likelihood break toward lower negativity.
    """
    projs = _projector_stack(observables)
    counts = n.flat.astype(float)
    neg_cap = negativity(rho_null) - cfg.constraint_margin

    def nll_of(x: np.ndarray) -> float:
        rho = cholesky_to_state(CholeskyAngles.from_vector(x))
        probs = np.real(np.einsum("pij,ji->p", projs, rho))
        active = counts > 0
        if np.any(probs[active] <= 0.0):
            return math.inf
        return float(-np.sum(counts[active] * np.log(probs[active])))

    def neg_of(x: np.ndarray) -> float:
        return negativity(cholesky_to_state(CholeskyAngles.from_vector(x)))

    best: tuple | None = None

    def consider(x: np.ndarray, fx: float | None = None):
        nonlocal best
        gap = neg_cap - neg_of(x)
        if gap < -1e-9:
            return
        fx = nll_of(x) if fx is None else fx
        if not np.isfinite(fx):
            return
        ng = neg_cap - gap
        if best is None or fx < best[0] - 1e-12 or \
                (abs(fx - best[0]) <= 1e-12 and ng < best[1]):
            best = (fx, ng, x.copy())

    def objective(x: np.ndarray) -> float:
        fx = nll_of(x)
        consider(x, fx)
        return fx if np.isfinite(fx) else 1e300

    def constraint(x: np.ndarray) -> float:
        return neg_cap - neg_of(x)

    h = cfg.gradient_step
    mle_state = mle_reconstruct(n, _WitnessSetup(tuple(observables), projs),
                                MLEConfig(100))
    starts = [state_to_cholesky_angles(mle_state).as_vector()]
    for r in range(cfg.restarts - 1):
        rng = trial_rng(seed, (_TAG_RESTART,), r)
        starts.append(rng.uniform(0.0, np.pi, 15))

    for x0 in starts:
        consider(x0)
        try:
            minimize(objective, x0, method="SLSQP",
                     jac=lambda x: _central_grad(objective, x, h),
                     constraints=[{"type": "ineq", "fun": constraint,
                                   "jac": lambda x: _central_grad(constraint, x, h)}],
                     options={"maxiter": cfg.max_iterations, "ftol": 1e-10})
        except (ValueError, ZeroDivisionError):
            continue

    if best is None:
        raise InfeasibleSearchError(
            f"no feasible state found in {cfg.restarts} restarts: constraint "
            f"negativity <= {neg_cap:.6g} (null {negativity(rho_null):.6g}, "
            f"margin {cfg.constraint_margin:g})")

    nll_ref = math.nan
    if rho_reference is not None:
        nll_ref = state_neg_log_likelihood(rho_reference, n, observables)
    state = cholesky_to_state(CholeskyAngles.from_vector(best[2]))
    return LoopholeResult(state=state, nll=best[0], negativity=best[1],
                          constraint_satisfied=True, nll_reference=nll_ref)


@dataclass(frozen=True)
class LoopholeVerification:
    """Three-part report: entanglement ordering, likelihood comparison, and
    state-validity checks, plus validation of the known reference state."""

    negativity_null: float
    negativity_result: float
    ordering_ok: bool
    nll_result: float
    nll_rho_a: float
    likelihood_ok: bool
    state_ok: bool
    reference_state_ok: bool

    @property
    def passed(self) -> bool:
        return (self.ordering_ok and self.likelihood_ok and self.state_ok
                and self.reference_state_ok)


def _reference_state_ok() -> bool:
    rho = KNOWN_LOOPHOLE_STATE
    herm = 0.5 * (rho + rho.conj().T)
    if abs(np.trace(rho).real - 1.0) > 1e-3:
        return False
    if np.linalg.eigvalsh(herm).min() < -2e-3:
        return False
    return abs(negativity(herm) - 0.104) <= 3e-3


def verify_loophole(result: LoopholeResult, rho_a: np.ndarray,
                    rho_null: np.ndarray, n: DataVector,
                    observables=W1_OBSERVABLES) -> LoopholeVerification:
    neg_null = negativity(rho_null)
    neg_res = negativity(result.state)
    nll_res = state_neg_log_likelihood(result.state, n, observables)
    nll_a = state_neg_log_likelihood(rho_a, n, observables)
    try:
        check_density_matrix(result.state)
        state_ok = True
    except ValueError:
        state_ok = False
    return LoopholeVerification(
        negativity_null=neg_null, negativity_result=neg_res,
        ordering_ok=neg_null > neg_res,
        nll_result=nll_res, nll_rho_a=nll_a,
        likelihood_ok=nll_res <= nll_a,
        state_ok=state_ok,
        reference_state_ok=_reference_state_ok())


def result_to_json(result: LoopholeResult) -> str:
    rho = np.asarray(result.state, dtype=complex)
    return json.dumps({
        "state": {"re": rho.real.tolist(), "im": rho.imag.tolist()},
        "nll": result.nll,
        "negativity": result.negativity,
        "constraint_satisfied": result.constraint_satisfied,
        "nll_reference": result.nll_reference,
    })

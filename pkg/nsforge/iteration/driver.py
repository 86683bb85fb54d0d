"""
Iteration driver: base step, frequency search, and the run loop with its report
"""

import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Callable, Dict, List, Optional, Tuple

from ..core.fourier_field import SHELL, Arity, from_modes, grid_limit
from ..core.mikado import build_family, concentration_for, pulses_for
from ..core.norms import besov_norm, lp_norm, paraproduct_table, shell_range, sobolev_norm
from ..core.tensor_geometry import FRAME, admissible_radius
from ..errors import CapExceeded, GridError, NotPositive, ParameterError, ZeroStress
from ..utils.events import IterationEvents, emit
from .checks import CheckReport, check_inductive, euler_reynolds_residual, weak_form_residual
from .increment import (Increment, build_increment, corrector_ratio, diagonal_cancellation_report,
                        envelope_fits, increment_bounds, reynolds_update, stress_budget)
from .params import IterationParams, IterationState, containment, p_exponent, shell_index

logger = logging.getLogger(__name__)

BESOV_MARGINS = (0.1, 0.25)
SOBOLEV_LADDER = (0.1, 0.25, 0.5)


def base_step(params: IterationParams) -> IterationState:
    """u_0 = A sin(2 pi x_2) e_1, p_0 = 0, R_12 = R_21 = -2 pi A cos(2 pi x_2)"""
    A = float(params.amplitude)
    u0 = from_modes(Arity.VECTOR2, {(0, 1): (-0.5j * A, 0.0)})
    R0 = from_modes(Arity.SYMTENSOR2, {(0, 1): (0.0, -math.pi * A, 0.0)})
    stress = sobolev_norm(R0, -2.0)
    if stress >= 2.0 ** -10:
        raise ParameterError(f"Base stress {stress:.6g} violates ||R_0||_H^-2 < 2^-10; lower the amplitude")
    norm = lp_norm(u0, p_exponent(0))
    C = max(4.0 / norm, 4.0)
    logger.info("base step: A=%s, ||R_0||_H^-2=%.6e, C=%.6g", params.amplitude, stress, C)
    return IterationState(q=0, u=u0, R=R0, C=C, params=params, base_velocity=u0)


@dataclass
class LambdaChoice:
    lam: int
    eps: Fraction
    increment: Increment
    state: IterationState
    checks: CheckReport
    attempts: List[Dict[str, Any]] = field(default_factory=list)


def _next_power_of_two(value: int) -> int:
    return 1 << max(int(value) - 1, 0).bit_length()


def _reject(attempts: List[Dict[str, Any]], lam: int, eps: Optional[Fraction], reason: str, detail: str):
    attempt = {"lambda": lam, "eps_gamma": None if eps is None else str(eps), "accepted": False,
               "failed": reason, "detail": detail}
    attempts.append(attempt)
    emit(IterationEvents.LAMBDA_TRIED, "select_lambda", attempt)
    logger.debug("lambda=%d rejected (%s): %s", lam, reason, detail)
    return f"lambda={lam}: {reason} ({detail})"


def select_lambda(state: IterationState, params: Optional[IterationParams] = None) -> LambdaChoice:
    """Smallest admissible power of two from max(lambda0, gap * lambda_q), doubling up to the cap

    A candidate must make lam^eps an integer, keep the modulated envelope
    inside one shell disjoint from the stored ones, keep the Mikado pulses
    apart, fit the grid, and pass check_inductive after a trial build.
    """
    params = params or state.params
    last = state.last_lambda
    lam = params.lambda0 if last is None else max(params.lambda0, _next_power_of_two(params.gap * last))
    attempts: List[Dict[str, Any]] = []
    last_failure = "no candidate below the cap"
    while lam <= params.lambda_cap:
        eps = concentration_for(lam, params.eps_gamma) if params.adapt_eps else params.eps_gamma
        try:
            pulses_for(lam, eps)
        except ParameterError as exc:
            last_failure = _reject(attempts, lam, eps, "integrality", str(exc))
            lam *= 2
            continue
        box = containment(lam, params.beta)
        if not box["holds"]:
            last_failure = _reject(attempts, lam, eps, "containment",
                                   f"[{box['inner']}, {box['outer']}] not inside {box['plateau']}")
            lam *= 2
            continue
        j = shell_index(lam, params.beta)
        if any(abs(j - s) < 2 for s in state.shells):
            last_failure = _reject(attempts, lam, eps, "shell_gap", f"shell {j} against {list(state.shells)}")
            lam *= 2
            continue
        try:
            family = build_family(lam, eps)
        except ParameterError as exc:
            last_failure = _reject(attempts, lam, eps, "mikado_disjointness", str(exc))
            lam *= 2
            continue
        if not envelope_fits(lam, params.beta, params.grid_max):
            last_failure = _reject(attempts, lam, eps, "grid", f"products exceed grid {params.grid_max}")
            lam *= 2
            continue
        try:
            with grid_limit(params.grid_max):
                increment = build_increment(state, lam, eps, family)
                R_next = reynolds_update(state, increment.w)
                trial = state.advance(increment.w, R_next, lam, eps, j)
                checks = check_inductive(trial)
        except NotPositive as exc:
            last_failure = _reject(attempts, lam, eps, "positivity", str(exc))
            lam *= 2
            continue
        except GridError as exc:
            last_failure = _reject(attempts, lam, eps, "grid", str(exc))
            lam *= 2
            continue
        if not checks.passed:
            last_failure = _reject(attempts, lam, eps, "checks",
                                   ", ".join(c.name for c in checks.failures()))
            lam *= 2
            continue
        attempt = {"lambda": lam, "eps_gamma": str(eps), "accepted": True, "failed": None, "detail": ""}
        attempts.append(attempt)
        emit(IterationEvents.LAMBDA_TRIED, "select_lambda", attempt)
        emit(IterationEvents.LAMBDA_SELECTED, "select_lambda", {"lambda": lam, "shell": j, "q": trial.q})
        logger.info("selected lambda=%d (shell %d) for q=%d", lam, j, trial.q)
        return LambdaChoice(lam, Fraction(eps), increment, trial, checks, attempts)
    raise CapExceeded(f"No admissible lambda up to {params.lambda_cap}", last_failure)


@dataclass
class RunReport:
    """Everything a run measured; serializes to JSON through to_dict"""
    params: Dict[str, Any]
    frame: List[List[str]]
    shell_profile: Dict[str, Any]
    admissible_radius: float
    base: Dict[str, Any] = field(default_factory=dict)
    steps: List[Dict[str, Any]] = field(default_factory=list)
    diagnostics: Dict[str, Any] = field(default_factory=dict)
    converged: bool = False
    failure: Optional[Dict[str, str]] = None

    @property
    def passed(self) -> bool:
        if self.failure is not None:
            return False
        blocks = [self.base] + self.steps
        return all(b["checks"]["passed"] and all(r["pass"] for r in b["weak_form"]) for b in blocks)

    @property
    def cap_exceeded(self) -> bool:
        return self.failure is not None and self.failure.get("kind") == "cap_exceeded"

    def to_dict(self) -> Dict[str, Any]:
        return {
            "params": self.params,
            "frame": self.frame,
            "shell_profile": self.shell_profile,
            "admissible_radius": self.admissible_radius,
            "base": self.base,
            "steps": self.steps,
            "diagnostics": self.diagnostics,
            "converged": self.converged,
            "failure": self.failure,
            "passed": self.passed,
        }


def _state_norms(state: IterationState) -> Dict[str, Any]:
    return {
        "stress_h_minus_2": sobolev_norm(state.R, -2.0),
        "stress_bound": 2.0 ** (-state.q - 10),
        "velocity_lp": state.memo(("velocity", state.q, "lp", str(p_exponent(state.q))),
                                  lambda: lp_norm(state.u, p_exponent(state.q))),
        "velocity_l2": lp_norm(state.u, 2),
        "velocity_band": state.u.band,
        "stress_band": state.R.band,
    }


def _base_block(state: IterationState) -> Dict[str, Any]:
    A = float(state.params.amplitude)
    residual = euler_reynolds_residual(state.u, state.R)
    block = {"q": 0, "C": state.C, "residual": residual, "expected_stress": 2.0 * math.pi * A}
    block.update(_state_norms(state))
    block["checks"] = check_inductive(state).to_dict()
    block["weak_form"] = weak_form_residual(state)
    return block


def _step_block(previous: IterationState, choice: LambdaChoice) -> Dict[str, Any]:
    increment, state = choice.increment, choice.state
    block = {
        "q": state.q,
        "lambda": choice.lam,
        "eps_gamma": str(choice.eps),
        "shell": increment.shell,
        "containment": containment(choice.lam, increment.beta),
        "attempts": choice.attempts,
        "mikado": increment.family.manifest(),
        "increment": increment.diagnostics,
        "residual": euler_reynolds_residual(state.u, state.R),
        "bounds": increment_bounds(increment, state.q),
        "corrector_ratio": corrector_ratio(increment),
        "diagonal": diagonal_cancellation_report(previous, increment),
        "budget": stress_budget(previous, increment),
    }
    block.update(_state_norms(state))
    block["checks"] = choice.checks.to_dict()
    block["weak_form"] = weak_form_residual(state)
    return block


def summability_diagnostics(state: IterationState) -> Dict[str, Any]:
    """Summability, paraproduct and Besov numbers for the final velocity"""
    eps_prime = state.params.eps_prime
    p = 2 - eps_prime
    partial, running = [], 0.0
    for index in range(state.q + 1):
        running += state.memo(("difference", index, "lp", str(p)),
                              lambda: lp_norm(state.difference(index), p))
        partial.append(running)
    shells = shell_range(state.u)
    j_max = shells[-1] if len(shells) else 0
    table = paraproduct_table(state.u, state.u, -2.0, j_max)
    return {
        "eps_prime": str(eps_prime),
        "increment_partial_sums": partial,
        "paraproduct": {"s": -2.0, "j_max": j_max, "nonzero_cells": [list(c) for c in table.nonzero_cells()],
                        "partial_sums": table.partial_sums},
        "besov": {str(-0.5 - e): besov_norm(state.u, -0.5 - e) for e in BESOV_MARGINS},
        "sobolev_ladder": {str(-e): sobolev_norm(state.u, -e) for e in SOBOLEV_LADDER},
    }


def run(params: IterationParams,
        on_state: Optional[Callable[[IterationState], None]] = None) -> Tuple[List[IterationState], RunReport]:
    """Base step then q_max rounds of select, build, update and check

    An exhausted frequency search ends the run with report.failure set;
    a vanishing stress ends it with report.converged.
    """
    report = RunReport(
        params=params.to_dict(),
        frame=[[str(c) for c in k] for k in FRAME],
        shell_profile=SHELL.describe(),
        admissible_radius=admissible_radius(FRAME),
    )
    emit(IterationEvents.RUN_STARTED, "run", {"params": report.params})
    with grid_limit(params.grid_max):
        state = base_step(params)
        states = [state]
        report.base = _base_block(state)
        emit(IterationEvents.BASE_READY, "run", {"C": state.C})
        if on_state:
            on_state(state)

        for _ in range(params.q_max):
            if state.R.is_zero():
                report.converged = True
                emit(IterationEvents.STEP_SKIPPED, "run", {"q": state.q, "reason": "zero stress"})
                break
            try:
                choice = select_lambda(state, params)
            except ZeroStress:
                report.converged = True
                emit(IterationEvents.STEP_SKIPPED, "run", {"q": state.q, "reason": "zero stress"})
                break
            except CapExceeded as exc:
                report.failure = {"kind": "cap_exceeded", "message": str(exc), "last_failure": exc.last_failure}
                logger.warning("run stopped at q=%d: %s (%s)", state.q, exc, exc.last_failure)
                break
            emit(IterationEvents.INCREMENT_BUILT, "run", {"q": choice.state.q, "lambda": choice.lam})
            report.steps.append(_step_block(state, choice))
            emit(IterationEvents.STRESS_UPDATED, "run",
                 {"q": choice.state.q, "stress_h_minus_2": report.steps[-1]["stress_h_minus_2"]})
            emit(IterationEvents.CHECKS_DONE, "run", {"q": choice.state.q, "passed": choice.checks.passed})
            state = choice.state
            states.append(state)
            if on_state:
                on_state(state)

        report.diagnostics = summability_diagnostics(state)
        report.diagnostics["stress_history"] = [sobolev_norm(s.R, -2.0) for s in states]
    emit(IterationEvents.RUN_FINISHED, "run", {"q": state.q, "passed": report.passed})
    logger.info("run finished at q=%d: %s", state.q, "pass" if report.passed else "fail")
    return states, report

"""
Inductive checks on an iteration state, the Euler-Reynolds residual, and the weak form
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from ..core.fourier_field import (Arity, Grid2, SpectralField, deformation, divergence, divergence_ratio,
                                  get_max_grid, inverse_transform, laplacian, outer, perp_gradient,
                                  plane_wave, project_mean_zero, shell_project)
from ..core.norms import inner_product, lp_norm, magnitude, sobolev_norm
from ..errors import FieldError, GridError
from .params import IterationState, modulation_wavenumber, p_exponent

logger = logging.getLogger(__name__)

RESIDUAL_TOLERANCE = 1e-9
DIVERGENCE_TOLERANCE = 1e-12
SHELL_TOLERANCE = 1e-12


@dataclass
class CheckItem:
    item: str
    name: str
    measured: float
    bound: float
    passed: bool
    gate: bool = True
    note: str = ""

    def to_dict(self) -> Dict[str, Any]:
        return {"item": self.item, "name": self.name, "measured": self.measured, "bound": self.bound,
                "pass": bool(self.passed), "gate": self.gate, "note": self.note}


@dataclass
class CheckReport:
    q: int
    items: List[CheckItem] = field(default_factory=list)
    details: Dict[str, Any] = field(default_factory=dict)

    def add(self, item: str, name: str, measured: float, bound: float, passed: bool,
            gate: bool = True, note: str = "") -> CheckItem:
        check = CheckItem(item, name, float(measured), float(bound), bool(passed), gate, note)
        self.items.append(check)
        return check

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.items if c.gate)

    def failures(self) -> List[CheckItem]:
        return [c for c in self.items if c.gate and not c.passed]

    def by_item(self, item: str) -> List[CheckItem]:
        return [c for c in self.items if c.item == item]

    def lookup(self, name: str) -> Optional[CheckItem]:
        return next((c for c in self.items if c.name == name), None)

    def to_dict(self) -> Dict[str, Any]:
        return {"q": self.q, "passed": self.passed, "items": [c.to_dict() for c in self.items],
                "details": self.details}


def euler_reynolds_residual(u: SpectralField, R: SpectralField) -> Dict[str, float]:
    """div(u x u) - lap u + grad p - div R with constant pressure, relative to its largest term"""
    transport = divergence(outer(u, u))
    viscous = laplacian(u)
    stress = divergence(R)
    residual = transport - viscous - stress
    scale = max(transport.max_coeff(), viscous.max_coeff(), stress.max_coeff(), 1e-300)
    return {"absolute": residual.max_coeff(), "scale": scale, "relative": residual.max_coeff() / scale}


def support_report(w: SpectralField, shell: int, lam: Optional[int] = None, beta: Optional[int] = None,
                   frame=None) -> Dict[str, Any]:
    """Exact integer test of every nonzero wavenumber against the shell plateau and the balls"""
    modes = w.nonzero_wavenumbers()
    squared = (modes[:, 0] ** 2 + modes[:, 1] ** 2).astype(np.int64)
    low = 4 ** shell
    inside = (squared >= low) & (49 * squared <= 144 * low)
    report = {"shell": shell, "modes": int(len(modes)), "outside_plateau": int(np.count_nonzero(~inside))}
    if lam is not None:
        from ..core.tensor_geometry import FRAME
        frame = frame or FRAME
        radius = lam * lam + lam
        best = np.full(len(modes), np.iinfo(np.int64).max, dtype=np.int64)
        for direction in frame:
            center = np.array(modulation_wavenumber(lam, beta, direction), dtype=np.int64)
            for sign in (1, -1):
                offset = modes - sign * center
                best = np.minimum(best, offset[:, 0] ** 2 + offset[:, 1] ** 2)
        report["outside_balls"] = int(np.count_nonzero(best > radius * radius))
        report["ball_radius"] = radius
    if w.band < w.n // 2:
        projected = shell_project(w, shell)
        report["projection_error"] = (projected - w).max_coeff() / max(w.max_coeff(), 1e-300)
    return report


def _product_l1(a: SpectralField, b: SpectralField) -> float:
    """Integral of |a||b|, the L^1 norm of a x b in the Frobenius convention"""
    try:
        n = Grid2.for_band(a.band + b.band).n
    except GridError:
        n = get_max_grid()
    return float(np.mean(magnitude(inverse_transform(a, n), a.arity) * magnitude(inverse_transform(b, n), b.arity)))


def check_inductive(state: IterationState) -> CheckReport:
    """Items (1)-(5) of the induction at level q; failures are data"""
    params = state.params
    q = state.q
    C = state.C
    report = CheckReport(q)

    # item 1
    residual = euler_reynolds_residual(state.u, state.R)
    report.add("1", "euler_reynolds_residual", residual["relative"], RESIDUAL_TOLERANCE,
               residual["relative"] <= RESIDUAL_TOLERANCE)
    div_u = divergence_ratio(state.u)
    report.add("1", "velocity_divergence", div_u, DIVERGENCE_TOLERANCE, div_u <= DIVERGENCE_TOLERANCE)
    mean = float(np.abs(state.u.mean).max())
    report.add("1", "velocity_mean", mean, 0.0, mean == 0.0)

    # item 2
    for index in range(q + 1):
        p = p_exponent(index)
        value = state.memo(("difference", index, "lp", str(p)), lambda: lp_norm(state.difference(index), p))
        report.add("2", f"difference_lp_{index}", value, 2.0 ** (-index - 2), value < 2.0 ** (-index - 2))
    p = p_exponent(q)
    norm_u = state.memo(("velocity", q, "lp", str(p)), lambda: lp_norm(state.u, p))
    lower = (1.0 + 2.0 ** -q) / C
    report.add("2", "velocity_lower_bound", norm_u, lower, norm_u > lower)
    if q >= 1:
        previous_p = p_exponent(q - 1)
        w = state.difference(q)
        w_norm = lp_norm(w, previous_p)
        chain = lp_norm(state.u - w, previous_p) - w_norm
        report.add("2", "lower_bound_chain", chain, lower, chain > lower, gate=False,
                   note="||u_{q-1}||_{L^p(q-1)} - ||w_q||_{L^p(q-1)}")
        report.add("2", "increment_smallness", w_norm, 2.0 ** -q / C, w_norm < 2.0 ** -q / C, gate=False,
                   note="sufficient condition for the lower bound")

    # item 3
    stress = sobolev_norm(state.R, -2.0)
    report.add("3", "stress_h_minus_2", stress, 2.0 ** (-q - 10), stress < 2.0 ** (-q - 10),
               gate=params.enforce_stress_bound,
               note="" if params.enforce_stress_bound else "reported; gate with enforce_stress_bound")

    # item 4
    supports = []
    for index in range(q + 1):
        shell = state.shells[index]
        if index == 0:
            info = support_report(state.difference(0), shell)
        else:
            info = support_report(state.difference(index), shell, state.lambdas[index - 1], params.beta)
        supports.append(info)
        outside = info["outside_plateau"] + info.get("outside_balls", 0)
        report.add("4", f"single_shell_{index}", outside, 0, outside == 0,
                   note=f"shell {shell}, {info['modes']} modes")
        if "projection_error" in info:
            report.add("4", f"shell_projection_{index}", info["projection_error"], SHELL_TOLERANCE,
                       info["projection_error"] <= SHELL_TOLERANCE)
    gaps = [abs(a - b) for i, a in enumerate(state.shells) for b in state.shells[i + 1:]]
    closest = min(gaps) if gaps else math.inf
    report.add("4", "shell_separation", closest if gaps else -1.0, 2, closest >= 2,
               note="minimum |j - j'| over stored shells")
    report.details["supports"] = supports

    # item 5
    slack = C - 2.0 ** -q
    off_diagonal = 0.0
    for m in range(1, q + 1):
        for n in range(m + 1, q + 1):
            pair = state.memo(("difference", m, "pair_l1", n),
                              lambda: _product_l1(state.difference(m), state.difference(n)))
            off_diagonal += 2.0 * pair
    report.add("5", "off_diagonal_l1", off_diagonal, slack, off_diagonal < slack)
    diagonal = 0.0
    for m in range(1, q + 1):
        w = state.difference(m)
        diagonal += state.memo(("difference", m, "self_h_minus_2"),
                               lambda: sobolev_norm(project_mean_zero(outer(w, w)), -2.0))
    report.add("5", "diagonal_h_minus_2", diagonal, slack, diagonal < slack)
    if q >= 2:
        newest = state.difference(q)
        earlier = sum(lp_norm(state.difference(n), math.inf) for n in range(1, q))
        report.details["off_diagonal_bound"] = 2.0 * lp_norm(newest, 1) * earlier

    logger.info("checks at q=%d: %s", q, "pass" if report.passed else
                ", ".join(c.name for c in report.failures()))
    return report


TestMode = Union[Tuple[int, int, str], SpectralField]

DEFAULT_TEST_MODES: Tuple[Tuple[int, int, str], ...] = ((1, 0, "cos"), (0, 1, "cos"), (1, 1, "sin"), (2, 1, "cos"))


def _test_field(mode: TestMode) -> Tuple[str, SpectralField]:
    if isinstance(mode, SpectralField):
        if mode.arity is not Arity.VECTOR2:
            raise FieldError("Test fields must be vector fields")
        if divergence_ratio(mode) > DIVERGENCE_TOLERANCE:
            raise FieldError("Test field is not divergence-free")
        return "custom", mode
    m1, m2, kind = mode
    return f"perp_grad_{kind}({m1},{m2})", perp_gradient(plane_wave(kind, (m1, m2)))


def weak_form_residual(state: IterationState,
                       test_modes: Sequence[TestMode] = DEFAULT_TEST_MODES) -> List[Dict[str, Any]]:
    """int(d_i phi^j u^i u^j + d_ii phi^j u^j) - int d_i phi^j R^ij for each test field"""
    quadratic_field = outer(state.u, state.u)
    rows = []
    for mode in test_modes:
        label, phi = _test_field(mode)
        symmetric = deformation(phi) * 0.5
        quadratic = inner_product(symmetric, quadratic_field)
        viscous = inner_product(laplacian(phi), state.u)
        stress = inner_product(symmetric, state.R)
        residual = quadratic + viscous - stress
        scale = max(abs(quadratic), abs(viscous), abs(stress))
        rows.append({
            "q": state.q,
            "test": label,
            "quadratic": quadratic,
            "viscous": viscous,
            "stress": stress,
            "residual": residual,
            "relative": abs(residual) / scale if scale > 0 else 0.0,
            "pass": abs(residual) <= RESIDUAL_TOLERANCE * scale + 1e-18,
        })
    return rows

"""
Decay probes for products with dilated oscillations in H^-2
"""

import logging
from fractions import Fraction
from typing import Any, Callable, Dict, Optional, Sequence, Tuple

from ..core.fourier_field import Grid2, SpectralField, constant_field, dilate, highpass, lowpass, multiply
from ..core.mikado import MikadoFamily, build_profile, concentration_for
from ..core.norms import lp_norm, sobolev_norm
from ..core.tensor_geometry import FRAME
from ..errors import FieldError, GridError, NSForgeError

logger = logging.getLogger(__name__)

RIPPLE = 0.10
HHL_LAMBDAS = (4, 8)
HHL_EXTENDED = 16


def _is_power_of_two(n: int) -> bool:
    return n > 0 and n & (n - 1) == 0


def _trend(values: Sequence[float]) -> Dict[str, Any]:
    """Nonincreasing up to a 10% ripple, strictly decreasing, and final/initial ratio"""
    if len(values) < 2:
        return {"nonincreasing": True, "strictly_decreasing": True,
                "ratio": 1.0 if values else None}
    steps = list(zip(values, values[1:]))
    return {
        "nonincreasing": all(b <= a * (1.0 + RIPPLE) for a, b in steps),
        "strictly_decreasing": all(b < a for a, b in steps),
        "ratio": values[-1] / values[0] if values[0] > 0 else 0.0,
    }


def _require_mean_zero(V: SpectralField):
    if V.mean.any():
        raise FieldError("The oscillating factor must be mean-zero")


def decay_probe_hl(a: SpectralField, V: SpectralField,
                   lambdas: Sequence[int] = (2, 4, 8, 16)) -> Dict[str, Any]:
    """||a V(lam .)||_{H^-2} per lam, split at lam/2 into low and high parts of a

    The low part P_0 a + P_{<=lam/2} a times V(lam .) is supported away
    from the origin, which is where the decay comes from; the high part is
    small because a is smooth.
    """
    _require_mean_zero(V)
    rows = []
    for lam in lambdas:
        lam = int(lam)
        oscillation = dilate(V, lam)
        row: Dict[str, Any] = {"lambda": lam, "value": sobolev_norm(multiply(a, oscillation), -2.0)}
        if lam >= 2 and _is_power_of_two(lam):
            low = lowpass(a, lam // 2, include_mean=True)
            row["low_part"] = sobolev_norm(multiply(low, oscillation), -2.0)
            row["high_part"] = sobolev_norm(multiply(a - low, oscillation), -2.0)
        rows.append(row)
        logger.debug("hl probe lambda=%d: %.6e", lam, row["value"])
    result = {"rows": rows}
    result.update(_trend([r["value"] for r in rows]))
    return result


def mikado_square(lam: int, eps: Fraction, direction: int = 0) -> SpectralField:
    """(P_{<=lam^2} rho)^2 for one direction of the frame"""
    profile = build_profile(lam, eps, FRAME.directions[direction])
    low = MikadoFamily(lam, Fraction(eps), FRAME, [profile]).lowpassed(0)
    return multiply(low, low)


def default_hhl_lambdas(alpha: SpectralField, V: SpectralField, beta: int = 3) -> Tuple[int, ...]:
    """4 and 8, plus 16 when the products at lam = 16 fit the grid cap"""
    lam = HHL_EXTENDED
    band = lam ** beta * V.band + 2 * lam * lam + alpha.band
    try:
        Grid2.for_band(band)
    except GridError as exc:
        logger.info("hhl sweep stops at lambda=%d: %s", HHL_LAMBDAS[-1], exc)
        return HHL_LAMBDAS
    return HHL_LAMBDAS + (lam,)


def decay_probe_hhl(alpha: SpectralField, V: SpectralField, lambdas: Optional[Sequence[int]] = None,
                    beta: int = 3, target_eps: Fraction = Fraction(1, 3),
                    profile: Optional[Callable[[int], SpectralField]] = None) -> Dict[str, Any]:
    """||alpha beta_lam V(lam^beta .)||_{H^-2} per lam with its three-term split

    beta_lam defaults to the Mikado square with eps chosen per lam so that
    lam^eps is an integer; pass profile to probe another family. Values of
    lam whose products do not fit the grid are reported as infeasible.
    Without lambdas the sweep is default_hhl_lambdas.
    """
    _require_mean_zero(V)
    if lambdas is None:
        lambdas = default_hhl_lambdas(alpha, V, beta)
    rows = []
    for lam in lambdas:
        lam = int(lam)
        if not _is_power_of_two(lam) or lam < 2:
            raise FieldError(f"lambda must be a power of two >= 2, got {lam}")
        row: Dict[str, Any] = {"lambda": lam, "beta": beta}
        try:
            if profile is None:
                eps = concentration_for(lam, target_eps)
                row["eps_gamma"] = str(eps)
                beta_lam = mikado_square(lam, eps)
            else:
                beta_lam = profile(lam)
            oscillation = dilate(V, lam ** beta)
            alpha_low = lowpass(alpha, lam, include_mean=True)
            beta_low = lowpass(beta_lam, lam * lam, include_mean=True)
            terms = [
                multiply(multiply(alpha_low, beta_low), oscillation),
                multiply(multiply(alpha - alpha_low, beta_lam), oscillation),
                multiply(multiply(alpha_low, beta_lam - beta_low), oscillation),
            ]
            total = terms[0] + terms[1] + terms[2]
            row.update({
                "feasible": True,
                "value": sobolev_norm(total, -2.0),
                "low_low": sobolev_norm(terms[0], -2.0),
                "high_alpha": sobolev_norm(terms[1], -2.0),
                "high_beta": sobolev_norm(terms[2], -2.0),
                "beta_l1": lp_norm(beta_lam, 1),
                "beta_tail_l1": lp_norm(highpass(beta_lam, lam * lam), 1),
            })
            logger.debug("hhl probe lambda=%d: %.6e", lam, row["value"])
        except (NSForgeError, MemoryError) as exc:
            row.update({"feasible": False, "reason": f"{type(exc).__name__}: {exc}"})
            logger.info("hhl probe lambda=%d infeasible: %s", lam, exc)
        rows.append(row)
    feasible = [r for r in rows if r.get("feasible")]
    result: Dict[str, Any] = {"rows": rows}
    result.update(_trend([r["value"] for r in feasible]))
    l1 = [r["beta_l1"] for r in feasible]
    result["beta_l1_spread"] = max(l1) / min(l1) if l1 and min(l1) > 0 else None
    result["tail_trend"] = _trend([r["beta_tail_l1"] for r in feasible])
    return result


def unit_profile(lam: int) -> SpectralField:
    """beta_lam = 1, reducing the three-term probe to the two-term one"""
    return constant_field(1.0)

"""
Velocity increment, Reynolds stress update, and the error breakdowns
"""

import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Dict, Iterable, List, Optional, Tuple

from ..core.fourier_field import (Arity, SpectralField, constant_field, deformation, highpass, lowpass,
                                  modulate, multiply, outer, perp_gradient, project_mean_zero,
                                  restrict_to_disc, sample_plane_wave, scalar_times)
from ..core.mikado import MikadoFamily, build_family, concentration_for, cross_direction_mass, pulses_for
from ..core.norms import lp_norm, sobolev_norm
from ..core.tensor_geometry import AmplitudeFields, amplitude_fields
from ..errors import GridError, NSForgeError
from .params import IterationState, modulation_wavenumber, p_exponent, shell_index

logger = logging.getLogger(__name__)

PREFACTOR = 2.0 / (5.0 * math.pi)


@dataclass(eq=False)
class Increment:
    """w_{q+1} with its corrector/principal split and the pieces it was built from"""
    lam: int
    eps: Fraction
    beta: int
    shell: int
    w: SpectralField
    corrector: SpectralField
    principal: SpectralField
    principal_parts: Tuple[SpectralField, SpectralField, SpectralField]
    envelopes: List[SpectralField]
    amplitude_low: List[SpectralField]
    amplitude_truncated: List[SpectralField]
    profiles: List[SpectralField]
    amplitudes: AmplitudeFields
    family: MikadoFamily
    diagnostics: Dict[str, Any] = field(default_factory=dict)

    @property
    def wavenumbers(self) -> List[Tuple[int, int]]:
        return [modulation_wavenumber(self.lam, self.beta, k) for k in self.family.frame]

    @property
    def support_radius(self) -> int:
        return self.lam * self.lam + self.lam

    def reassembly_errors(self) -> Dict[str, float]:
        """Relative mismatch of w = w_c + w_p and w_p = w_p1 + w_p2 + w_p3"""
        scale = max(self.w.max_coeff(), 1e-300)
        split = (self.w - self.corrector - self.principal).max_coeff() / scale
        p1, p2, p3 = self.principal_parts
        pscale = max(self.principal.max_coeff(), 1e-300)
        parts = (self.principal - p1 - p2 - p3).max_coeff() / pscale
        return {"corrector_principal": split, "principal_parts": parts}


def _accumulate(total: Optional[SpectralField], term: SpectralField) -> SpectralField:
    return term if total is None else total + term


def build_increment(state: IterationState, lam: int, eps: Optional[Fraction] = None,
                    family: Optional[MikadoFamily] = None) -> Increment:
    """w = perp-gradient of the modulated stream summed over the frame directions

    The envelope P_{<=lam}(a_k) P_{<=lam^2}(rho_k) is cut to its exact
    support |k| <= lam^2 + lam; what that removes is round-off and is
    reported. Raises ZeroStress when R_q vanishes.
    """
    params = state.params
    beta = params.beta
    eps = Fraction(eps if eps is not None else params.eps_gamma)
    pulses_for(lam, eps)
    amplitude_band = params.amplitude_band_factor * lam
    profile_band = params.profile_band_factor * lam * lam
    radius = lam * lam + lam

    amplitudes = amplitude_fields(state.R, eps, band=amplitude_band)
    family = family or build_family(lam, eps)
    scale = PREFACTOR / float(lam) ** beta

    w = corrector = principal = None
    p1 = p2 = p3 = None
    envelopes, lows, truncated, profiles = [], [], [], []
    discarded = 0.0
    for k, direction in enumerate(family.frame):
        perp = [float(c) for c in family.frame.perp(direction)]
        wavenumber = modulation_wavenumber(lam, beta, direction)

        a_full = amplitudes.field(k, band=amplitude_band)
        a_low = lowpass(a_full, lam, include_mean=True)
        rho_low = family.lowpassed(k)
        raw = multiply(a_low, rho_low)
        envelope = restrict_to_disc(raw, radius)
        discarded = max(discarded, (raw - envelope).max_coeff())

        w = _accumulate(w, perp_gradient(modulate(envelope, wavenumber, "sin")) * scale)
        corrector = _accumulate(corrector, modulate(perp_gradient(envelope), wavenumber, "sin") * scale)
        principal = _accumulate(principal, scalar_times(modulate(envelope, wavenumber, "cos"), perp))

        rho = family.rho(k, profile_band)
        a_high = a_full - a_low
        rho_high = highpass(rho, lam * lam)
        p1 = _accumulate(p1, -scalar_times(modulate(multiply(a_high, rho_low), wavenumber, "cos"), perp))
        p2 = _accumulate(p2, -scalar_times(modulate(multiply(a_full, rho_high), wavenumber, "cos"), perp))
        p3 = _accumulate(p3, scalar_times(modulate(multiply(a_full, rho), wavenumber, "cos"), perp))

        envelopes.append(envelope)
        lows.append(a_low)
        truncated.append(a_full)
        profiles.append(rho)
        logger.debug("direction %d: modulation %s, envelope band %d", k, wavenumber, envelope.band)

    diagnostics = {
        "lambda": lam,
        "eps_gamma": str(eps),
        "beta": beta,
        "shell": shell_index(lam, beta),
        "envelope_radius": radius,
        "modulation": [list(m) for m in (modulation_wavenumber(lam, beta, d) for d in family.frame)],
        "amplitude_band": amplitude_band,
        "profile_band": profile_band,
        "velocity_band": w.band,
        "discarded_roundoff": discarded,
        "stress_sup": amplitudes.norm_inf,
        "min_gamma_squared": amplitudes.min_coefficient,
        "max_argument_distance": amplitudes.max_argument_distance,
        "amplitude_grid": amplitudes.n,
        "amplitude_identity_residual": amplitudes.identity_residual(),
        "amplitude_aliasing": [amplitudes.aliasing_estimate(k) for k in range(3)],
    }
    increment = Increment(lam=lam, eps=eps, beta=beta, shell=shell_index(lam, beta), w=w,
                          corrector=corrector, principal=principal, principal_parts=(p1, p2, p3),
                          envelopes=envelopes, amplitude_low=lows, amplitude_truncated=truncated,
                          profiles=profiles, amplitudes=amplitudes, family=family,
                          diagnostics=diagnostics)
    diagnostics.update(increment.reassembly_errors())
    logger.info("built increment lambda=%d eps=%s band=%d", lam, eps, w.band)
    return increment


def reynolds_update(state: IterationState, w: SpectralField) -> SpectralField:
    """R_{q+1} = R_q + w x w + (w x u_q + u_q x w) - (grad w + grad w^T), pressure unchanged"""
    if w.is_zero():
        return state.R
    nash = outer(w, state.u) * 2.0
    return state.R + outer(w, w) + nash - deformation(w)


def _perp_tensor(frame, k: int) -> List[float]:
    return [float(v) for v in frame.perp_tensors()[k]]


def _cross_tensor(frame, a: int, b: int) -> List[float]:
    """(11, 12, 22) of the symmetric part of k_a_perp x k_b_perp"""
    pa = [float(c) for c in frame.perp(frame.directions[a])]
    pb = [float(c) for c in frame.perp(frame.directions[b])]
    return [pa[0] * pb[0], 0.5 * (pa[0] * pb[1] + pa[1] * pb[0]), pa[1] * pb[1]]


def _relative(difference: SpectralField, reference: float) -> float:
    return difference.max_coeff() / max(reference, 1e-300)


def diagonal_cancellation_report(state: IterationState, increment: Increment) -> Dict[str, Any]:
    """Breakdown of ||R_q + w_p3 x w_p3||_{H^-2} and the field identities behind it

    Two identities are checked before any norm is taken: with the exact
    a_k^2, R_q plus the diagonal part equals eps^-1 ||R_q|| I plus the
    mean-free and doubled-frequency terms; and w_p3 x w_p3 equals its
    diagonal part plus the cross-direction terms.
    """
    frame = increment.family.frame
    amplitudes = increment.amplitudes
    level = amplitudes.norm_inf / float(increment.eps)
    wavenumbers = increment.wavenumbers
    q = state.q

    squares = [multiply(rho, rho) for rho in increment.profiles]
    means = [float(s.mean[0]) for s in squares]

    # identity with the exact amplitude squares
    lhs = state.R
    rhs = constant_field([level, 0.0, level], Arity.SYMTENSOR2)
    for k in range(3):
        tensor = _perp_tensor(frame, k)
        wave = sample_plane_wave("cos", increment.lam ** increment.beta, frame.directions[k])
        weighted = multiply(amplitudes.squared[k], squares[k])
        lhs = lhs + scalar_times(multiply(weighted, multiply(wave, wave)), tensor)
        rhs = rhs + scalar_times(amplitudes.squared[k] * (0.5 * (means[k] - 1.0)), tensor)
        rhs = rhs + scalar_times(multiply(amplitudes.squared[k], project_mean_zero(squares[k])) * 0.5, tensor)
        doubled = tuple(2 * m for m in wavenumbers[k])
        rhs = rhs + scalar_times(modulate(weighted, doubled, "cos") * 0.5, tensor)
    identity_error = _relative(lhs - rhs, max(lhs.max_coeff(), level))

    # breakdown with the amplitudes actually used in w_p3
    mean_part = oscillation = doubled_part = cross = None
    for k in range(3):
        tensor = _perp_tensor(frame, k)
        a = increment.amplitude_truncated[k]
        a2 = multiply(a, a)
        mean_part = _accumulate(mean_part, scalar_times(a2 * (0.5 * means[k]), tensor))
        oscillation = _accumulate(oscillation, scalar_times(
            multiply(a2, project_mean_zero(squares[k])) * 0.5, tensor))
        doubled = tuple(2 * m for m in wavenumbers[k])
        doubled_part = _accumulate(doubled_part, scalar_times(
            modulate(multiply(a2, squares[k]), doubled, "cos") * 0.5, tensor))
    pieces = [multiply(increment.amplitude_truncated[k], increment.profiles[k]) for k in range(3)]
    for a in range(3):
        for b in range(a + 1, 3):
            env = multiply(pieces[a], pieces[b])
            minus = tuple(x - y for x, y in zip(wavenumbers[a], wavenumbers[b]))
            plus = tuple(x + y for x, y in zip(wavenumbers[a], wavenumbers[b]))
            both = modulate(env, minus, "cos") + modulate(env, plus, "cos")
            cross = _accumulate(cross, scalar_times(both, _cross_tensor(frame, a, b)))

    p3 = increment.principal_parts[2]
    direct = state.R + outer(p3, p3)
    assembled = state.R + mean_part + oscillation + doubled_part + cross
    decomposition_error = _relative(direct - assembled, direct.max_coeff())
    defect = state.R + mean_part - constant_field([level, 0.0, level], Arity.SYMTENSOR2)

    total = sobolev_norm(direct, -2.0)
    terms = {
        "constant": sobolev_norm(constant_field([level, 0.0, level], Arity.SYMTENSOR2), -2.0),
        "mean_free_oscillation": sobolev_norm(oscillation, -2.0),
        "doubled_frequency": sobolev_norm(doubled_part, -2.0),
        "cross_direction": sobolev_norm(cross, -2.0),
        "amplitude_defect": sobolev_norm(defect, -2.0),
    }
    masses = cross_direction_mass(increment.family)
    report = {
        "lambda": increment.lam,
        "total_h_minus_2": total,
        "bound": 2.0 ** (-2 * q - 98),
        "terms": terms,
        "triangle_holds": total <= sum(terms.values()) * (1 + 1e-9) + 1e-300,
        "profile_mean_squares": means,
        "identity_error": identity_error,
        "decomposition_error": decomposition_error,
        "cross_direction_l1": {f"{a}-{b}": v for (a, b), v in masses.items()},
        "cross_direction_scale": float(increment.lam) ** float(increment.eps - 1),
    }
    logger.debug("diagonal report lambda=%d: total %.3e, identity %.1e", increment.lam, total, identity_error)
    return report


def stress_budget(state: IterationState, increment: Increment) -> Dict[str, Any]:
    """H^-2 sizes of the nonlinear, Nash and dissipation errors and the principal cross terms"""
    q = state.q
    w, wc, wp = increment.w, increment.corrector, increment.principal
    p1, p2, p3 = increment.principal_parts
    nash = outer(w, state.u) * 2.0
    rows = [
        ("nonlinear", state.R + outer(w, w), 2.0 ** (-2 * q - 95)),
        ("nash", nash, 2.0 ** (-q - 15)),
        ("dissipation", deformation(w), 2.0 ** (-q - 15)),
        ("corrector_corrector", outer(wc, wc), 2.0 ** (-2 * q - 100)),
        ("principal_corrector", outer(wp, wc) * 2.0, 2.0 ** (-2 * q - 100)),
        ("p1_p3", outer(p1, p3) * 2.0, 2.0 ** (-2 * q - 100)),
        ("p2_p3", outer(p2, p3) * 2.0, 2.0 ** (-2 * q - 100)),
    ]
    out = {}
    for name, tensor, bound in rows:
        value = sobolev_norm(tensor, -2.0)
        out[name] = {"h_minus_2": value, "bound": bound, "ratio": value / bound}
    out["nash"]["l1"] = lp_norm(nash, 1)
    return out


def increment_bounds(increment: Increment, q: int) -> List[Dict[str, Any]]:
    """Scaled L^p sizes of the corrector and principal parts"""
    lam, beta, eps = increment.lam, increment.beta, float(increment.eps)
    rows = []
    for p in (1.0, float(p_exponent(q)), 2.0, math.inf):
        predicted = float(lam) ** ((eps - 1.0) * ((0.0 if math.isinf(p) else 1.0 / p) - 0.5))
        corrector = lp_norm(increment.corrector, p)
        principal = lp_norm(increment.principal, p)
        rows.append({
            "p": p,
            "w": lp_norm(increment.w, p),
            "corrector": corrector,
            "corrector_scaled": corrector * float(lam) ** (beta - 1),
            "principal": principal,
            "principal_scaled": principal / predicted,
        })
    return rows


def corrector_ratio(increment: Increment) -> Dict[str, Any]:
    """||w_c||_inf / ||w_p||_inf against 8 lam^{-(beta-1)}"""
    ratio = lp_norm(increment.corrector, math.inf) / max(lp_norm(increment.principal, math.inf), 1e-300)
    bound = 8.0 * float(increment.lam) ** (1 - increment.beta)
    return {"ratio": ratio, "bound": bound, "pass": ratio <= bound}


def envelope_fits(lam: int, beta: int, grid_max: int) -> bool:
    """Products of the increment with itself stay below the grid limit"""
    reach = Fraction(5, 4) * lam ** beta + lam * lam + lam
    return 2 * reach < grid_max // 2


def reynolds_trend(state: IterationState, lambdas: Iterable[int],
                   target_eps: Optional[Fraction] = None) -> List[Dict[str, Any]]:
    """||R_{q+1}||_{H^-2} of one trial step per lambda, or why lambda is infeasible"""
    params = state.params
    target = Fraction(target_eps if target_eps is not None else params.eps_gamma)
    rows = []
    for lam in lambdas:
        row: Dict[str, Any] = {"lambda": lam}
        try:
            eps = concentration_for(lam, target)
            row["eps_gamma"] = str(eps)
            if not envelope_fits(lam, params.beta, params.grid_max):
                raise GridError(f"lambda={lam} needs products beyond grid {params.grid_max}")
            increment = build_increment(state, lam, eps)
            R_next = reynolds_update(state, increment.w)
            row.update({"feasible": True, "stress_h_minus_2": sobolev_norm(R_next, -2.0)})
        except (NSForgeError, MemoryError) as exc:
            row.update({"feasible": False, "reason": f"{type(exc).__name__}: {exc}"})
        rows.append(row)
    values = [r["stress_h_minus_2"] for r in rows if r.get("feasible")]
    if len(values) > 1:
        decreasing = all(b < a for a, b in zip(values, values[1:]))
        for row in rows:
            row["feasible_trend_decreasing"] = decreasing
    return rows

"""
Intermittent Mikado flows W = rho(k.x) k_perp, one per frame direction

Each profile is a 1D pulse train in t = k.x over its period P (1 for the
axis direction, 1/5 for the tilted ones): lam^eps equally spaced pulses of
width (3/4)/lam, each the derivative of the standard C^inf bump, L2
normalized over the period. Wavenumber l of the 1D train sits at the 2D
wavenumber (l/P) k, which is an integer vector.
"""

import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Dict, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy import fft as sfft

from ..errors import GridError, ParameterError
from .fourier_field import (SHELL, Arity, Grid2, SpectralField, divergence_ratio, fft_workers, lowpass,
                            multiply, scalar_times)
from .tensor_geometry import FRAME, DirectionSet

logger = logging.getLogger(__name__)

PULSE_FILL = Fraction(3, 4)


def _is_power_of_two(n: int) -> bool:
    return n > 0 and n & (n - 1) == 0


def _next_pow2(n: float) -> int:
    return 1 << max(0, int(math.ceil(math.log2(max(n, 1)))))


def pulses_for(lam: int, eps: Union[Fraction, str, float]) -> int:
    """lam^eps as an exact integer, or ParameterError"""
    if not _is_power_of_two(int(lam)) or lam < 2:
        raise ParameterError(f"lambda must be a power of two >= 2, got {lam}")
    eps = Fraction(eps)
    if not 0 < eps < 1:
        raise ParameterError(f"Concentration exponent must lie in (0, 1), got {eps}")
    exponent = eps * (int(lam).bit_length() - 1)
    if exponent.denominator != 1:
        raise ParameterError(f"lambda^eps = {lam}^{eps} is not an integer")
    return 1 << int(exponent)


def concentration_for(lam: int, target: Union[Fraction, float]) -> Fraction:
    """Rational eps closest to target with lam^eps integral"""
    j = int(lam).bit_length() - 1
    if j < 2:
        raise ParameterError(f"lambda = {lam} admits no exponent in (0, 1)")
    steps = min(max(round(float(target) * j), 1), j - 1)
    return Fraction(steps, j)


def bump_derivative(t: np.ndarray) -> np.ndarray:
    """d/dt exp(-1/(t(1-t))) on (0, 1), zero elsewhere"""
    t = np.asarray(t, dtype=float)
    inside = (t > 0) & (t < 1)
    out = np.zeros_like(t)
    s = t[inside]
    u = s * (1.0 - s)
    out[inside] = np.exp(-1.0 / u) * (1.0 - 2.0 * s) / (u * u)
    return out


@dataclass(frozen=True, eq=False)
class MikadoProfile:
    """1D pulse train for one direction"""
    direction: Tuple[Fraction, Fraction]
    period: Fraction
    pulses: int
    width: float
    samples: np.ndarray
    coeffs: np.ndarray

    @property
    def lattice(self) -> Tuple[int, int]:
        """Integer 2D wavenumber of the 1D mode l = 1"""
        return tuple(int(c / self.period) for c in self.direction)

    @property
    def resolution(self) -> int:
        return self.samples.shape[0]

    @property
    def spacing(self) -> float:
        return float(self.period) / self.pulses

    def lp(self, p: float) -> float:
        """||rho||_{L^p(T^2)}, equal to the period average of |g|^p"""
        values = np.abs(self.samples)
        if math.isinf(p):
            return float(values.max())
        return float(np.mean(values ** p) ** (1.0 / p))

    def support_fraction(self) -> float:
        return float(np.count_nonzero(self.samples)) / self.resolution

    def expected_support_fraction(self) -> float:
        return self.pulses * self.width / float(self.period)

    def wavenumber(self, mode: int) -> Tuple[int, int]:
        l1, l2 = self.lattice
        return mode * l1, mode * l2

    def field(self, radius: float) -> SpectralField:
        """Mean-free part of rho as a 2D field, keeping modes with |(l/P) k| <= radius"""
        scale = float(1 / self.period)
        top = min(int(math.floor(radius / scale)), self.resolution // 2 - 1)
        l1, l2 = self.lattice
        band = top * max(abs(l1), abs(l2))
        grid = Grid2.for_band(band)
        n = grid.n
        out = np.zeros((1, n, n // 2 + 1), dtype=np.complex128)
        for mode in range(-top, top + 1):
            value = self.coeffs[mode % self.resolution]
            if mode == 0 or value == 0:
                continue
            k1, k2 = mode * l1, mode * l2
            if k2 < 0 or (k2 == 0 and k1 < 0):
                continue
            out[0, k1 % n, k2] = value
            if k2 == 0 and k1 != 0:
                out[0, (-k1) % n, 0] = np.conj(value)
        return SpectralField(Arity.SCALAR, out, band, True)

    def evaluate(self, n: int) -> np.ndarray:
        """rho sampled on the n x n grid, read off the 1D samples exactly"""
        if self.resolution % n:
            raise GridError(f"Grid {n} does not divide the profile resolution {self.resolution}")
        l1, l2 = self.lattice
        i = np.arange(n)
        index = ((l1 * i[:, None] + l2 * i[None, :]) * (self.resolution // n)) % self.resolution
        return self.samples[index]


def build_profile(lam: int, eps: Union[Fraction, str], direction: Tuple[Fraction, Fraction],
                  resolution: Optional[int] = None) -> MikadoProfile:
    """Pulse train with lam^eps pulses per period along direction"""
    pulses = pulses_for(lam, eps)
    period = Fraction(1) if direction[1] == 0 else Fraction(1, 5)
    width = float(PULSE_FILL) / lam
    spacing = float(period) / pulses
    if width >= spacing:
        raise ParameterError(f"Pulses of width {width:.4g} overlap at spacing {spacing:.4g} "
                             f"(lambda={lam}, eps={Fraction(eps)})")
    m = resolution or _next_pow2(max(512 * lam, 8 * lam * lam))
    if m % pulses:
        raise ParameterError(f"Resolution {m} is not a multiple of {pulses} pulses")
    cell = m // pulses
    # one pulse centered in its cell, then repeated
    t = (np.arange(cell) + 0.5) / cell
    fill = width / spacing
    local = bump_derivative((t - 0.5 * (1.0 - fill)) / fill)
    local /= math.sqrt(float(np.mean(local * local)))
    samples = np.tile(local, pulses)
    # only multiples of the pulse count carry energy
    coeffs = np.zeros(m, dtype=np.complex128)
    coeffs[::pulses] = sfft.fft(local, workers=fft_workers()) / cell
    logger.debug("mikado profile k=%s: %d pulses, width %.4g, resolution %d", direction, pulses, width, m)
    return MikadoProfile(direction=direction, period=period, pulses=pulses, width=width,
                         samples=samples, coeffs=coeffs)


@dataclass
class MikadoFamily:
    lam: int
    eps: Fraction
    frame: DirectionSet
    profiles: List[MikadoProfile]
    _cache: Dict[Tuple[int, float], SpectralField] = field(default_factory=dict, repr=False)

    @property
    def pulses(self) -> int:
        return self.profiles[0].pulses

    def rho(self, k: int, radius: Optional[float] = None) -> SpectralField:
        radius = float(self.lam ** 2 if radius is None else radius)
        key = (k, radius)
        if key not in self._cache:
            self._cache[key] = self.profiles[k].field(radius)
        return self._cache[key]

    def lowpassed(self, k: int) -> SpectralField:
        """P_{<=lam^2} rho"""
        return lowpass(self.rho(k, self.lam ** 2), self.lam ** 2)

    def velocity(self, k: int, radius: Optional[float] = None) -> SpectralField:
        """W = rho k_perp"""
        perp = self.frame.perp(self.frame.directions[k])
        return scalar_times(self.rho(k, radius), [float(c) for c in perp])

    def manifest(self) -> Dict[str, Any]:
        return {
            "lambda": self.lam,
            "eps_gamma": str(self.eps),
            "pulses": self.pulses,
            "pulse_width": self.profiles[0].width,
            "directions": [[str(c) for c in p.direction] for p in self.profiles],
            "periods": [str(p.period) for p in self.profiles],
            "resolution": [p.resolution for p in self.profiles],
        }


def build_family(lam: int, eps: Union[Fraction, str], frame: DirectionSet = FRAME) -> MikadoFamily:
    eps = Fraction(eps)
    profiles = [build_profile(lam, eps, k) for k in frame]
    logger.info("built Mikado family lambda=%d eps=%s with %d pulses", lam, eps, profiles[0].pulses)
    return MikadoFamily(lam, eps, frame, profiles)


@dataclass
class ItemCheck:
    item: str
    direction: int
    measured: float
    bound: Optional[float]
    passed: Optional[bool]
    gate: bool = True
    note: str = ""

    def to_row(self) -> Dict[str, Any]:
        return {"item": self.item, "direction": self.direction, "measured": self.measured,
                "bound": self.bound, "pass": self.passed, "gate": self.gate, "note": self.note}


def check_items(family: MikadoFamily, check_radius: Optional[float] = None,
                tolerance: float = 1e-10) -> List[ItemCheck]:
    """Structural properties of every flow in the family

    Divergence checks use a truncation of rho; the direction structure
    survives any truncation, so a moderate radius suffices.
    """
    radius = float(check_radius or min(family.lam ** 2, 128))
    checks: List[ItemCheck] = []
    for k, profile in enumerate(family.profiles):
        W = family.velocity(k, radius)
        div_w = divergence_ratio(W)
        checks.append(ItemCheck("divergence_free", k, div_w, 1e-12, div_w <= 1e-12))

        ww = multiply(W, W)
        div_ww = divergence_ratio(ww)
        checks.append(ItemCheck("stationary_euler", k, div_ww, 1e-12, div_ww <= 1e-12))

        energy = float(np.mean(profile.samples ** 2))
        checks.append(ItemCheck("mean_square", k, abs(energy - 1.0), tolerance,
                                abs(energy - 1.0) <= tolerance, "mean of W x W minus k_perp x k_perp"))

        mean = abs(float(np.mean(profile.samples)))
        checks.append(ItemCheck("mean_zero", k, mean, tolerance, mean <= tolerance))

        lattice = np.array(profile.lattice)
        modes = family.rho(k, radius).nonzero_wavenumbers()
        off = 0
        for row in modes:
            mode = int(row[0] // lattice[0]) if lattice[0] else int(row[1] // lattice[1])
            if mode % family.pulses or np.any(row != mode * lattice):
                off += 1
        checks.append(ItemCheck("periodicity", k, float(off), 0.0, off == 0,
                                f"wavenumbers in {family.pulses} Z^2"))

        measured = profile.support_fraction()
        expected = profile.expected_support_fraction()
        ratio = measured / expected
        checks.append(ItemCheck("support_fraction", k, measured, expected, abs(ratio - 1.0) <= 0.1,
                                f"ratio to lambda^(eps-1): {measured / family.lam ** float(family.eps - 1):.4f}"))

        checks.append(ItemCheck("tail_mass", k, tail_mass_profile(profile, family.lam), None, None,
                                gate=False, note="||P_{>lam^2}(rho^2)||_{L^1}, compared across lambda"))
    return checks


def tail_mass_profile(profile: MikadoProfile, lam: int) -> float:
    """||P_{>lam^2}(rho^2)||_{L^1}; the tensor factor has unit Frobenius norm"""
    m = profile.resolution
    square = sfft.fft(profile.samples ** 2, workers=fft_workers()) / m
    modes = np.abs(sfft.fftfreq(m, 1.0 / m)) / float(profile.period)
    cutoff = float(lam) ** 2
    multiplier = 1.0 - SHELL.step(2.0 * modes / cutoff)
    multiplier[0] = 0.0
    high = sfft.ifft(square * multiplier, workers=fft_workers()).real * m
    return float(np.mean(np.abs(high)))


def tail_mass(family: MikadoFamily) -> List[float]:
    return [tail_mass_profile(p, family.lam) for p in family.profiles]


def cross_direction_mass(family: MikadoFamily, n: Optional[int] = None) -> Dict[Tuple[int, int], float]:
    """||W^k x W^k'||_{L^1} for k != k', evaluated pointwise on an n x n grid"""
    n = n or min(min(p.resolution for p in family.profiles), 2048)
    values = [np.abs(p.evaluate(n)) for p in family.profiles]
    out = {}
    for a in range(len(values)):
        for b in range(a + 1, len(values)):
            # |k_perp x k'_perp|_F = 1 for unit vectors
            out[(a, b)] = float(np.mean(values[a] * values[b]))
    return out


def lp_scaling_check(family: MikadoFamily, ps: Sequence[Any] = (1, 2, "inf")) -> List[Dict[str, Any]]:
    """(p, measured ||W||_{L^p}, predicted lam^{(eps-1)(1/p-1/2)}) per direction"""
    rows = []
    for k, profile in enumerate(family.profiles):
        for p in ps:
            value = math.inf if str(p).lower() in ("inf", "infinity") else float(p)
            exponent = float(family.eps - 1) * ((0.0 if math.isinf(value) else 1.0 / value) - 0.5)
            predicted = float(family.lam) ** exponent
            measured = profile.lp(value)
            rows.append({"lambda": family.lam, "eps_gamma": str(family.eps), "direction": k, "p": value,
                         "measured": measured, "predicted": predicted, "ratio": measured / predicted})
    return rows


def lp_scaling_sweep(lambdas: Iterable[int], target_eps: Union[Fraction, float],
                     ps: Sequence[Any] = (1, 2, "inf"), directions: Sequence[int] = (0,)) -> Dict[str, Any]:
    """L^p scaling rows over a lambda sweep plus the ratio band per p"""
    rows = []
    for lam in lambdas:
        eps = concentration_for(lam, target_eps)
        for k in directions:
            profile = build_profile(lam, eps, FRAME.directions[k])
            family = MikadoFamily(lam, eps, FRAME, [profile])
            for row in lp_scaling_check(family, ps):
                row["direction"] = k
                rows.append(row)
    band = {}
    for row in rows:
        low, high = band.get(row["p"], (math.inf, 0.0))
        band[row["p"]] = (min(low, row["ratio"]), max(high, row["ratio"]))
    spread = {str(p): hi / lo for p, (lo, hi) in band.items() if lo > 0}
    return {"rows": rows, "ratio_band": {str(p): list(v) for p, v in band.items()}, "spread": spread}


def tail_sweep(lambdas: Iterable[int], target_eps: Union[Fraction, float]) -> List[Dict[str, Any]]:
    rows = []
    for lam in lambdas:
        eps = concentration_for(lam, target_eps)
        profile = build_profile(lam, eps, FRAME.directions[0])
        rows.append({"lambda": lam, "eps_gamma": str(eps), "tail_mass": tail_mass_profile(profile, lam)})
    return rows

"""
Iteration parameters, the iteration state, and the exact shell arithmetic
"""

import logging
import math
from dataclasses import asdict, dataclass, field, fields, replace
from fractions import Fraction
from typing import Any, Callable, Dict, Optional, Tuple, Union

from ..core.fourier_field import SpectralField
from ..core.mikado import pulses_for
from ..errors import ParameterError

logger = logging.getLogger(__name__)

Rational = Union[Fraction, int, float, str]


def as_fraction(value: Rational) -> Fraction:
    """Exact rational from '1/3', '1e-4', ints, or floats (via their shortest repr)"""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise ParameterError(f"Expected a number, got {value!r}")
    try:
        if isinstance(value, float):
            return Fraction(repr(value))
        return Fraction(str(value).strip())
    except (ValueError, ZeroDivisionError) as exc:
        raise ParameterError(f"Cannot read {value!r} as a rational number") from exc


def _is_power_of_two(n: int) -> bool:
    return isinstance(n, int) and n > 0 and n & (n - 1) == 0


def p_exponent(q: int) -> Fraction:
    """p(q) = 2 - 2^{-q-10}"""
    return 2 - Fraction(1, 2 ** (q + 10))


def shell_index(lam: int, beta: int) -> int:
    return beta * (int(lam).bit_length() - 1)


def modulation_wavenumber(lam: int, beta: int, direction) -> Tuple[int, int]:
    """(5/4) lam^beta k; integral because 5k is"""
    values = [Fraction(5, 4) * lam ** beta * Fraction(c) for c in direction]
    if any(v.denominator != 1 for v in values):
        raise ParameterError(f"(5/4) {lam}^{beta} k is not an integer vector for k = {direction}")
    return int(values[0]), int(values[1])


def containment(lam: int, beta: int) -> Dict[str, Any]:
    """Single-shell test: 2^j <= (5/4)lam^beta - r and (5/4)lam^beta + r < (3/2) 2^j, r = lam^2 + lam"""
    j = shell_index(lam, beta)
    center = Fraction(5, 4) * lam ** beta
    radius = lam * lam + lam
    inner, outer = center - radius, center + radius
    lower, upper = Fraction(2) ** j, Fraction(3, 2) * 2 ** j
    return {
        "lambda": lam,
        "shell": j,
        "inner": float(inner),
        "outer": float(outer),
        "plateau": [float(lower), float(upper)],
        "holds": lower <= inner and outer < upper,
    }


@dataclass(frozen=True)
class IterationParams:
    """Parameters of one run; validated on construction"""
    lambda0: int = 8
    beta: int = 3
    eps_gamma: Fraction = Fraction(1, 3)
    amplitude: Fraction = Fraction(1, 10000)
    gap: int = 8
    q_max: int = 1
    lambda_cap: int = 64
    grid_max: int = 4096
    enforce_stress_bound: bool = False
    adapt_eps: bool = False
    eps_prime: Fraction = Fraction(1, 2)
    amplitude_band_factor: int = 4
    profile_band_factor: int = 4

    def __post_init__(self):
        for name in ("eps_gamma", "amplitude", "eps_prime"):
            object.__setattr__(self, name, as_fraction(getattr(self, name)))
        for name in ("lambda0", "beta", "gap", "q_max", "lambda_cap", "grid_max",
                     "amplitude_band_factor", "profile_band_factor"):
            value = getattr(self, name)
            try:
                number = int(value, 0) if isinstance(value, str) else int(value)
            except (TypeError, ValueError):
                number = None
            if isinstance(value, bool) or number is None or (not isinstance(value, str) and number != value):
                raise ParameterError(f"{name} must be an integer, got {value!r}")
            object.__setattr__(self, name, number)
        self.validate()

    def validate(self):
        if self.beta < 3:
            raise ParameterError(f"beta must be >= 3, got {self.beta}")
        if not _is_power_of_two(self.lambda0) or self.lambda0 < 2:
            raise ParameterError(f"lambda0 must be a power of two >= 2, got {self.lambda0}")
        if not _is_power_of_two(self.lambda_cap) or self.lambda_cap < self.lambda0:
            raise ParameterError(f"lambda_cap must be a power of two >= lambda0, got {self.lambda_cap}")
        if not _is_power_of_two(self.grid_max) or self.grid_max < 16:
            raise ParameterError(f"grid_max must be a power of two >= 16, got {self.grid_max}")
        if not 0 < self.eps_gamma < 1:
            raise ParameterError(f"eps_gamma must lie in (0, 1), got {self.eps_gamma}")
        if not 0 < self.eps_prime < 1:
            raise ParameterError(f"eps_prime must lie in (0, 1), got {self.eps_prime}")
        if self.amplitude <= 0 or 2 * math.pi * float(self.amplitude) >= 2.0 ** -10:
            raise ParameterError(f"amplitude must lie in (0, 2^-10/(2 pi)), got {self.amplitude}")
        if self.gap < 1 or self.q_max < 0:
            raise ParameterError("gap must be >= 1 and q_max >= 0")
        if self.amplitude_band_factor < 1 or self.profile_band_factor < 1:
            raise ParameterError("band factors must be >= 1")
        if not self.adapt_eps:
            pulses_for(self.lambda0, self.eps_gamma)

    def replace(self, **changes) -> "IterationParams":
        return replace(self, **changes)

    def to_dict(self) -> Dict[str, Any]:
        out = {}
        for key, value in asdict(self).items():
            out[key] = str(value) if isinstance(value, Fraction) else value
        return out

    @classmethod
    def field_names(cls) -> Tuple[str, ...]:
        return tuple(f.name for f in fields(cls))

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "IterationParams":
        known = set(cls.field_names())
        cleaned = {}
        for key, value in (data or {}).items():
            name = key.replace("-", "_")
            if name not in known:
                raise ParameterError(f"Unknown parameter {key!r}")
            cleaned[name] = value
        return cls(**cleaned)


@dataclass(frozen=True, eq=False)
class IterationState:
    """(u_q, R_q) with the history the inductive checks need

    shells[0] is the shell of u_0; shells[i] that of w_i. The norm cache
    is keyed by (quantity, index, parameter).
    """
    q: int
    u: SpectralField
    R: SpectralField
    C: float
    params: IterationParams
    base_velocity: SpectralField
    lambdas: Tuple[int, ...] = ()
    eps_history: Tuple[Fraction, ...] = ()
    shells: Tuple[int, ...] = (0,)
    increments: Tuple[SpectralField, ...] = ()
    pressure: float = 0.0
    cache: Dict[Tuple, float] = field(default_factory=dict, repr=False)

    def difference(self, index: int) -> SpectralField:
        """u_index - u_{index-1}, with u_{-1} = 0"""
        if index == 0:
            return self.base_velocity
        return self.increments[index - 1]

    def memo(self, key: Tuple, compute: Callable[[], float]) -> float:
        if key not in self.cache:
            self.cache[key] = float(compute())
        return self.cache[key]

    @property
    def last_lambda(self) -> Optional[int]:
        return self.lambdas[-1] if self.lambdas else None

    def advance(self, w: SpectralField, R_next: SpectralField, lam: int, eps: Fraction,
                shell: int) -> "IterationState":
        carried = {key: value for key, value in self.cache.items() if key[0] == "difference"}
        return IterationState(
            q=self.q + 1,
            u=self.u + w,
            R=R_next,
            C=self.C,
            params=self.params,
            base_velocity=self.base_velocity,
            lambdas=self.lambdas + (lam,),
            eps_history=self.eps_history + (Fraction(eps),),
            shells=self.shells + (shell,),
            increments=self.increments + (w,),
            pressure=self.pressure,
            cache=carried,
        )

    def summary(self) -> Dict[str, Any]:
        return {
            "q": self.q,
            "lambdas": list(self.lambdas),
            "eps_history": [str(e) for e in self.eps_history],
            "shells": list(self.shells),
            "C": self.C,
            "pressure": self.pressure,
            "velocity_band": self.u.band,
            "stress_band": self.R.band,
        }

"""
Three-direction frame, the coefficient solve gamma_k^2(R), and the amplitude fields a_k(R_q)
"""

import logging
import threading
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy import optimize

from ..errors import FieldError, NotPositive, ZeroStress
from .fourier_field import (Arity, Grid2, SpectralField, constant_field, forward_transform,
                            inverse_transform, stack_components)

logger = logging.getLogger(__name__)

Pair = Tuple[Fraction, Fraction]

K1: Pair = (Fraction(1), Fraction(0))
K2: Pair = (Fraction(3, 5), Fraction(4, 5))
K3: Pair = (Fraction(3, 5), Fraction(-4, 5))


def _invert_exact(matrix: List[List[Fraction]]) -> List[List[Fraction]]:
    """Gauss-Jordan inverse over the rationals"""
    size = len(matrix)
    work = [list(row) + [Fraction(int(i == j)) for j in range(size)] for i, row in enumerate(matrix)]
    for col in range(size):
        pivot = next((r for r in range(col, size) if work[r][col] != 0), None)
        if pivot is None:
            raise FieldError("Direction tensors do not span the symmetric matrices")
        work[col], work[pivot] = work[pivot], work[col]
        lead = work[col][col]
        work[col] = [v / lead for v in work[col]]
        for r in range(size):
            if r != col and work[r][col] != 0:
                factor = work[r][col]
                work[r] = [a - factor * b for a, b in zip(work[r], work[col])]
    return [row[size:] for row in work]


@dataclass(frozen=True)
class DirectionSet:
    """Unit directions with 5k integral whose tensors k_perp x k_perp span Sym(2)"""
    directions: Tuple[Pair, ...] = (K1, K2, K3)

    def __post_init__(self):
        if len(self.directions) != 3:
            raise FieldError("The frame needs exactly three directions")
        for k in self.directions:
            if k[0] ** 2 + k[1] ** 2 != 1:
                raise FieldError(f"Direction {k} is not a unit vector")
            if any((5 * c).denominator != 1 for c in k):
                raise FieldError(f"Direction {k} does not satisfy 5k in Z^2")

    def __len__(self) -> int:
        return len(self.directions)

    def __iter__(self):
        return iter(self.directions)

    @staticmethod
    def perp(k: Pair) -> Pair:
        """Rotation by +pi/2"""
        return (-k[1], k[0])

    def perps(self) -> List[Pair]:
        return [self.perp(k) for k in self.directions]

    def vectors(self) -> np.ndarray:
        return np.array([[float(c) for c in k] for k in self.directions])

    def perp_vectors(self) -> np.ndarray:
        return np.array([[float(c) for c in k] for k in self.perps()])

    def perp_tensors(self) -> List[Tuple[Fraction, Fraction, Fraction]]:
        """(11, 12, 22) entries of k_perp x k_perp"""
        return [(p[0] * p[0], p[0] * p[1], p[1] * p[1]) for p in self.perps()]

    def frame_matrix(self) -> List[List[Fraction]]:
        """Maps (c_1, c_2, c_3) to the entries (11, 12, 22) of 1/2 sum c_k k_perp x k_perp"""
        tensors = self.perp_tensors()
        return [[Fraction(1, 2) * tensors[k][entry] for k in range(3)] for entry in range(3)]

    def inverse(self) -> np.ndarray:
        return np.array([[float(v) for v in row] for row in _invert_exact(self.frame_matrix())])

    def reflected(self) -> "DirectionSet":
        """Mirror image under x2 -> -x2"""
        return DirectionSet(tuple((k[0], -k[1]) for k in self.directions))


FRAME = DirectionSet()


@dataclass(frozen=True)
class SymMatrix2:
    r11: float
    r12: float
    r22: float

    @classmethod
    def identity(cls) -> "SymMatrix2":
        return cls(1.0, 0.0, 1.0)

    @classmethod
    def from_array(cls, matrix: Sequence[Sequence[float]]) -> "SymMatrix2":
        m = np.asarray(matrix, dtype=float)
        return cls(float(m[0, 0]), float(0.5 * (m[0, 1] + m[1, 0])), float(m[1, 1]))

    def as_array(self) -> np.ndarray:
        return np.array([[self.r11, self.r12], [self.r12, self.r22]])

    def entries(self) -> np.ndarray:
        return np.array([self.r11, self.r12, self.r22])

    def op_norm(self) -> float:
        return float(op_norm_entries(self.entries()))

    def __add__(self, other: "SymMatrix2") -> "SymMatrix2":
        return SymMatrix2(self.r11 + other.r11, self.r12 + other.r12, self.r22 + other.r22)

    def __sub__(self, other: "SymMatrix2") -> "SymMatrix2":
        return SymMatrix2(self.r11 - other.r11, self.r12 - other.r12, self.r22 - other.r22)

    def scaled(self, factor: float) -> "SymMatrix2":
        return SymMatrix2(factor * self.r11, factor * self.r12, factor * self.r22)


def op_norm_entries(entries: np.ndarray) -> np.ndarray:
    """Largest |eigenvalue| of symmetric matrices given as (11, 12, 22) along axis 0"""
    entries = np.asarray(entries, dtype=float)
    center = 0.5 * (entries[0] + entries[2])
    spread = np.hypot(0.5 * (entries[0] - entries[2]), entries[1])
    return np.abs(center) + spread


def gamma_coefficients(entries: np.ndarray, frame: DirectionSet = FRAME) -> np.ndarray:
    """c_k for matrices given as (11, 12, 22) along axis 0; vectorized"""
    inverse = frame.inverse()
    entries = np.asarray(entries, dtype=float)
    return np.tensordot(inverse, entries, axes=(1, 0))


def reconstruct(c: np.ndarray, frame: DirectionSet = FRAME) -> np.ndarray:
    """Entries (11, 12, 22) of 1/2 sum c_k k_perp x k_perp"""
    matrix = np.array([[float(v) for v in row] for row in frame.frame_matrix()])
    return np.tensordot(matrix, np.asarray(c, dtype=float), axes=(1, 0))


@dataclass(frozen=True)
class GammaSolution:
    c: Tuple[float, float, float]
    residual: float
    radius: Optional[float] = None

    @property
    def positive(self) -> bool:
        return all(v > 0 for v in self.c)

    @property
    def gamma(self) -> Tuple[float, ...]:
        return tuple(float(np.sqrt(v)) for v in self.c)


def gamma_squared(R: SymMatrix2, frame: DirectionSet = FRAME, with_radius: bool = False) -> GammaSolution:
    """Solve 1/2 sum c_k k_perp x k_perp = R"""
    entries = R.entries()
    c = gamma_coefficients(entries, frame)
    residual = float(np.max(np.abs(reconstruct(c, frame) - entries)))
    solution = GammaSolution(tuple(float(v) for v in c), residual,
                             admissible_radius(frame) if with_radius else None)
    if not solution.positive:
        raise NotPositive(f"gamma^2 = {solution.c} is not positive for R = {R}", solution)
    return solution


_radius_cache: Dict[DirectionSet, float] = {}
_radius_lock = threading.Lock()


def _unit_sphere(theta: np.ndarray, t: np.ndarray, sign: float) -> np.ndarray:
    """Symmetric E with eigenvalues (sign, t) rotated by theta; ||E||_op = 1 for |t| <= 1"""
    cos, sin = np.cos(theta), np.sin(theta)
    return np.stack([sign * cos ** 2 + t * sin ** 2,
                     (sign - t) * sin * cos,
                     sign * sin ** 2 + t * cos ** 2])


def _worst_descent(row: np.ndarray) -> float:
    """max over the operator-norm unit sphere of -row . (E11, E12, E22)"""
    theta = np.linspace(0.0, np.pi, 721)
    t = np.linspace(-1.0, 1.0, 201)
    grid_theta, grid_t = np.meshgrid(theta, t, indexing="ij")
    best, start = -np.inf, None
    for sign in (1.0, -1.0):
        values = -np.tensordot(row, _unit_sphere(grid_theta, grid_t, sign), axes=(0, 0))
        index = np.unravel_index(np.argmax(values), values.shape)
        if values[index] > best:
            best, start = float(values[index]), (grid_theta[index], grid_t[index], sign)
    theta0, t0, sign = start
    result = optimize.minimize(
        lambda x: float(np.dot(row, _unit_sphere(x[0], x[1], sign))),
        x0=np.array([theta0, t0]), method="L-BFGS-B",
        bounds=[(theta0 - 0.05, theta0 + 0.05), (-1.0, 1.0)])
    return max(best, -float(result.fun))


def admissible_radius(frame: DirectionSet = FRAME) -> float:
    """Largest eps with every c_k(R) > 0 whenever ||R - I||_op <= eps

    c is affine in R, so each direction gives c_k(I) / max_E(-L_k(E)) over
    perturbations E of unit operator norm.
    """
    with _radius_lock:
        if frame in _radius_cache:
            return _radius_cache[frame]
        inverse = frame.inverse()
        base = inverse @ np.array([1.0, 0.0, 1.0])
        radii = []
        for k in range(3):
            descent = _worst_descent(inverse[k])
            radii.append(np.inf if descent <= 0 else base[k] / descent)
        radius = float(min(radii))
        _radius_cache[frame] = radius
        logger.debug("admissible radius %.12g (per direction %s)", radius, radii)
        return radius


@dataclass
class AmplitudeFields:
    """Samples of a_k(R_q) on a refined grid, with the exact squares"""
    samples: np.ndarray
    norm_inf: float
    eps_gamma: Fraction
    frame: DirectionSet
    squared: List[SpectralField]
    stress: SpectralField
    min_coefficient: float
    max_argument_distance: float
    diagnostics: Dict[str, float] = field(default_factory=dict)

    @property
    def n(self) -> int:
        return self.samples.shape[-1]

    def field(self, k: int, band: Optional[int] = None) -> SpectralField:
        """a_k as a spectral field, truncated to the band box (default: all but Nyquist)"""
        limit = self.n // 2 - 1 if band is None else min(band, self.n // 2 - 1)
        return forward_transform(self.samples[k], Arity.SCALAR, band=limit)

    def aliasing_estimate(self, k: int) -> float:
        """Share of coefficient energy of a_k beyond half the resolved band"""
        coeffs = forward_transform(self.samples[k], Arity.SCALAR).coeffs[0]
        n = self.n
        k1 = np.abs(np.fft.fftfreq(n, 1.0 / n))[:, None]
        k2 = np.arange(n // 2 + 1)[None, :]
        energy = np.abs(coeffs) ** 2
        tail = energy[np.maximum(k1, k2) > n // 4].sum()
        total = energy.sum()
        return float(tail / total) if total > 0 else 0.0

    def identity_residual(self) -> float:
        """max |1/2 sum a_k^2 k_perp x k_perp - (eps^-1 ||R|| I - R)| relative to ||R||_inf"""
        rebuilt = reconstruct(self.samples ** 2, self.frame)
        stress = inverse_transform(self.stress, self.n)
        level = self.norm_inf / float(self.eps_gamma)
        target = np.stack([level - stress[0], -stress[1], level - stress[2]])
        return float(np.max(np.abs(rebuilt - target)) / self.norm_inf)


def stress_sup(R: SpectralField, n: Optional[int] = None) -> float:
    """Global sup of the pointwise operator norm, sampled on a 4x refined grid"""
    if R.arity is not Arity.SYMTENSOR2:
        raise FieldError("stress_sup takes a symmetric tensor field")
    n = n or Grid2.for_band(4 * max(R.band, 1)).n
    return float(op_norm_entries(inverse_transform(R, n)).max())


def amplitude_squared(R: SpectralField, eps_gamma: Union[Fraction, float], norm_inf: float,
                      frame: DirectionSet = FRAME) -> List[SpectralField]:
    """a_k^2 = eps^-1 ||R|| c_k(I) - L_k(R): exact, with the band of R"""
    inverse = frame.inverse()
    base = inverse @ np.array([1.0, 0.0, 1.0])
    level = norm_inf / float(eps_gamma)
    out = []
    for k in range(3):
        coeffs = -(inverse[k][:, None, None] * R.coeffs).sum(axis=0, keepdims=True)
        coeffs[0, 0, 0] += level * base[k]
        out.append(SpectralField(Arity.SCALAR, coeffs, R.band))
    return out


def amplitude_fields(R: SpectralField, eps_gamma: Union[Fraction, float], band: int = 0,
                     frame: DirectionSet = FRAME) -> AmplitudeFields:
    """a_k = (eps^-1 ||R||_inf)^{1/2} gamma_k(I - eps R / ||R||_inf) on a refined grid

    The sampling grid is four times finer than max(band(R), band); positivity
    of every c_k is checked at each sample.
    """
    if R.arity is not Arity.SYMTENSOR2:
        raise FieldError("amplitude_fields takes a symmetric tensor field")
    eps = Fraction(eps_gamma)
    n = Grid2.for_band(4 * max(R.band, band, 1)).n
    stress = inverse_transform(R, n)
    norm_inf = float(op_norm_entries(stress).max())
    if norm_inf == 0.0:
        raise ZeroStress("Reynolds stress vanishes; the iteration is exact")
    radius = admissible_radius(frame)
    if float(eps) >= radius:
        logger.warning("eps_gamma=%s exceeds the admissible radius %.4f; positivity is checked pointwise",
                       eps, radius)
    scale = float(eps) / norm_inf
    argument = np.stack([1.0 - scale * stress[0], -scale * stress[1], 1.0 - scale * stress[2]])
    distance = float(op_norm_entries(argument - np.array([1.0, 0.0, 1.0])[:, None, None]).max())
    c = gamma_coefficients(argument, frame)
    minimum = float(c.min())
    if minimum <= 0.0:
        raise NotPositive(f"gamma^2 reaches {minimum:.3e} <= 0; shrink eps_gamma")
    samples = np.sqrt((norm_inf / float(eps)) * c)
    logger.debug("amplitude fields on %d^2: ||R||_inf=%.6e, min c=%.4f, distance=%.4f",
                 n, norm_inf, minimum, distance)
    return AmplitudeFields(samples=samples, norm_inf=norm_inf, eps_gamma=eps, frame=frame,
                           squared=amplitude_squared(R, eps, norm_inf, frame), stress=R,
                           min_coefficient=minimum, max_argument_distance=distance,
                           diagnostics={"grid": float(n), "admissible_radius": radius})

"""
Band-limited periodic fields on the unit torus [0,1]^2

A field is f(x) = sum_k c(k) exp(2 pi i k.x) over integer wavenumbers k.
Coefficients are stored in the real-FFT half plane: an array of shape
(components, n, n//2 + 1) whose row index is k1 in FFT order and whose
column index is k2 >= 0. The missing half follows from c(-k) = conj(c(k)).
"""

import logging
import math
import os
from contextlib import contextmanager
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from functools import lru_cache
from typing import Dict, Iterator, Optional, Sequence, Tuple, Union

import numpy as np
from scipy import fft as sfft
from scipy import signal

from ..errors import FieldError, GridError

logger = logging.getLogger(__name__)

Number = Union[int, float, complex]

_max_grid = 8192


def fft_workers() -> int:
    """Worker count for scipy.fft, taken from NSFORGE_THREADS"""
    value = os.environ.get("NSFORGE_THREADS", "1")
    try:
        workers = int(value)
    except ValueError:
        logger.warning("Ignoring non-integer NSFORGE_THREADS=%r", value)
        return 1
    return max(1, workers)


def get_max_grid() -> int:
    return _max_grid


def set_max_grid(n: int) -> int:
    """Set the largest grid any operation may allocate; returns the old value"""
    global _max_grid
    if n < 4 or n & (n - 1):
        raise GridError(f"Grid limit must be a power of two >= 4, got {n}")
    previous = _max_grid
    _max_grid = n
    return previous


@contextmanager
def grid_limit(n: int) -> Iterator[int]:
    previous = set_max_grid(n)
    try:
        yield n
    finally:
        set_max_grid(previous)


class Arity(Enum):
    """Field kinds and their stored components"""
    SCALAR = "scalar"
    VECTOR2 = "vector2"
    SYMTENSOR2 = "symtensor2"

    @property
    def components(self) -> int:
        return {"scalar": 1, "vector2": 2, "symtensor2": 3}[self.value]

    @property
    def frobenius_weights(self) -> Tuple[float, ...]:
        # the 12 entry of a symmetric tensor stands for both 12 and 21
        return {"scalar": (1.0,), "vector2": (1.0, 1.0),
                "symtensor2": (1.0, 2.0, 1.0)}[self.value]


def _is_power_of_two(n: int) -> bool:
    return n > 0 and (n & (n - 1)) == 0


@dataclass(frozen=True)
class Grid2:
    """Uniform n x n grid on the unit torus"""
    n: int

    def __post_init__(self):
        if not isinstance(self.n, (int, np.integer)) or not _is_power_of_two(int(self.n)) or self.n < 4:
            raise GridError(f"Grid size must be a power of two >= 4, got {self.n}")

    @property
    def max_band(self) -> int:
        """Largest per-axis frequency represented without aliasing"""
        return self.n // 2 - 1

    def resolves(self, band: int) -> bool:
        return band < self.n // 2

    @classmethod
    def for_band(cls, band: int) -> "Grid2":
        """Smallest grid that holds every |k_i| <= band exactly"""
        n = 4
        while n // 2 <= band:
            n *= 2
        if n > _max_grid:
            raise GridError(f"Band {band} needs a {n}x{n} grid, limit is {_max_grid}")
        return cls(n)

    def points(self) -> Tuple[np.ndarray, np.ndarray]:
        x = np.arange(self.n) / self.n
        return np.meshgrid(x, x, indexing="ij")

    def wavenumbers(self) -> Tuple[np.ndarray, np.ndarray]:
        return wavenumber_mesh(self.n)


@lru_cache(maxsize=16)
def wavenumber_mesh(n: int) -> Tuple[np.ndarray, np.ndarray]:
    k1 = sfft.fftfreq(n, 1.0 / n)
    k2 = sfft.rfftfreq(n, 1.0 / n)
    mesh1, mesh2 = np.meshgrid(k1, k2, indexing="ij")
    mesh1.setflags(write=False)
    mesh2.setflags(write=False)
    return mesh1, mesh2


@lru_cache(maxsize=16)
def radius_mesh(n: int) -> np.ndarray:
    k1, k2 = wavenumber_mesh(n)
    radius = np.sqrt(k1 * k1 + k2 * k2)
    radius.setflags(write=False)
    return radius


@lru_cache(maxsize=16)
def half_plane_weights(n: int) -> np.ndarray:
    """Multiplicity of each stored column when summing over the full plane"""
    weights = np.full(n // 2 + 1, 2.0)
    weights[0] = 1.0
    weights[-1] = 1.0
    weights.setflags(write=False)
    return weights


@dataclass(frozen=True, eq=False)
class SpectralField:
    """Immutable band-limited real field"""
    arity: Arity
    coeffs: np.ndarray
    band: int
    mean_zero: bool = False

    def __post_init__(self):
        coeffs = np.ascontiguousarray(self.coeffs, dtype=np.complex128)
        if coeffs.ndim != 3 or coeffs.shape[0] != self.arity.components:
            raise FieldError(f"{self.arity.value} field needs {self.arity.components} components, "
                             f"got array of shape {coeffs.shape}")
        n = coeffs.shape[1]
        if not _is_power_of_two(n) or n < 4 or coeffs.shape[2] != n // 2 + 1:
            raise FieldError(f"Coefficient array {coeffs.shape} is not a half-plane layout")
        if self.band < 0 or self.band > n // 2:
            raise FieldError(f"Band {self.band} does not fit grid {n}")
        if self.mean_zero and np.any(coeffs[:, 0, 0] != 0):
            raise FieldError("Field flagged mean-zero has a nonzero mean")
        # the array is frozen in place; constructors hand over fresh arrays
        coeffs.setflags(write=False)
        object.__setattr__(self, "coeffs", coeffs)
        object.__setattr__(self, "band", int(self.band))

    @property
    def n(self) -> int:
        return self.coeffs.shape[1]

    @property
    def grid(self) -> Grid2:
        return Grid2(self.n)

    @property
    def components(self) -> int:
        return self.arity.components

    @property
    def mean(self) -> np.ndarray:
        return self.coeffs[:, 0, 0].real.copy()

    def component(self, index: int) -> "SpectralField":
        return SpectralField(Arity.SCALAR, self.coeffs[index:index + 1], self.band, self.mean_zero)

    def with_coeffs(self, coeffs: np.ndarray, band: Optional[int] = None,
                    mean_zero: Optional[bool] = None, arity: Optional[Arity] = None) -> "SpectralField":
        return SpectralField(arity or self.arity, coeffs,
                             self.band if band is None else band,
                             self.mean_zero if mean_zero is None else mean_zero)

    def samples(self, n: Optional[int] = None) -> np.ndarray:
        return inverse_transform(self, n)

    def max_coeff(self) -> float:
        return float(np.abs(self.coeffs).max()) if self.coeffs.size else 0.0

    def is_zero(self) -> bool:
        return not np.any(self.coeffs)

    def nonzero_wavenumbers(self) -> np.ndarray:
        """Integer wavenumbers (k1, k2), k2 >= 0, carrying a nonzero coefficient"""
        mask = np.any(self.coeffs != 0, axis=0)
        k1, k2 = wavenumber_mesh(self.n)
        return np.stack([k1[mask], k2[mask]], axis=-1).astype(np.int64)

    def resample(self, n: int) -> "SpectralField":
        """Same field on an n x n grid; never drops a nonzero coefficient"""
        if n == self.n:
            return self
        if n > _max_grid:
            raise GridError(f"Resampling to {n} exceeds grid limit {_max_grid}")
        if self.band >= self.n // 2:
            if n < self.n:
                raise GridError(f"Field carries Nyquist modes of grid {self.n}; cannot shrink to {n}")
            # Nyquist modes are split symmetrically, as scipy.signal.resample does
            data = inverse_transform(self)
            data = signal.resample(signal.resample(data, n, axis=-2), n, axis=-1)
            return forward_transform(data, self.arity, band=self.n // 2)
        if self.band >= n // 2:
            raise GridError(f"Band {self.band} does not fit a {n}x{n} grid")
        b = self.band
        rows = np.r_[0:b + 1, -b:0]
        out = np.zeros((self.components, n, n // 2 + 1), dtype=np.complex128)
        out[:, rows % n, :b + 1] = self.coeffs[:, rows % self.n, :b + 1]
        return SpectralField(self.arity, out, b, self.mean_zero)

    def compact(self) -> "SpectralField":
        """Move to the smallest grid holding the band"""
        if self.band >= self.n // 2:
            return self
        target = Grid2.for_band(self.band).n
        return self.resample(target) if target < self.n else self

    def _align(self, other: "SpectralField") -> Tuple["SpectralField", "SpectralField"]:
        if self.arity is not other.arity:
            raise FieldError(f"Cannot combine {self.arity.value} with {other.arity.value}")
        n = max(self.n, other.n)
        return self.resample(n), other.resample(n)

    def __add__(self, other: "SpectralField") -> "SpectralField":
        a, b = self._align(other)
        return a.with_coeffs(a.coeffs + b.coeffs, band=max(a.band, b.band),
                             mean_zero=a.mean_zero and b.mean_zero)

    def __sub__(self, other: "SpectralField") -> "SpectralField":
        a, b = self._align(other)
        return a.with_coeffs(a.coeffs - b.coeffs, band=max(a.band, b.band),
                             mean_zero=a.mean_zero and b.mean_zero)

    def __neg__(self) -> "SpectralField":
        return self.with_coeffs(-self.coeffs)

    def __mul__(self, scalar: float) -> "SpectralField":
        if isinstance(scalar, SpectralField):
            return multiply(self, scalar)
        return self.with_coeffs(self.coeffs * float(scalar))

    __rmul__ = __mul__

    def __truediv__(self, scalar: float) -> "SpectralField":
        return self.with_coeffs(self.coeffs / float(scalar))

    def __repr__(self) -> str:
        return f"SpectralField({self.arity.value}, n={self.n}, band={self.band})"


# ---------------------------------------------------------------- constructors

def zeros(arity: Arity, n: int = 4) -> SpectralField:
    Grid2(n)
    return SpectralField(arity, np.zeros((arity.components, n, n // 2 + 1), dtype=np.complex128), 0, True)


def constant_field(values: Union[Number, Sequence[float]], arity: Arity = Arity.SCALAR, n: int = 4) -> SpectralField:
    values = np.atleast_1d(np.asarray(values, dtype=float))
    if values.size != arity.components:
        raise FieldError(f"{arity.value} constant needs {arity.components} values")
    out = zeros(arity, n).coeffs.copy()
    out[:, 0, 0] = values
    return SpectralField(arity, out, 0, not np.any(values))


def identity_tensor(scale: float = 1.0, n: int = 4) -> SpectralField:
    return constant_field([scale, 0.0, scale], Arity.SYMTENSOR2, n)


def _store_mode(coeffs: np.ndarray, component: int, k1: int, k2: int, value: complex) -> None:
    n = coeffs.shape[1]
    if k2 < 0 or (k2 == 0 and k1 < 0):
        k1, k2, value = -k1, -k2, np.conj(value)
    coeffs[component, k1 % n, k2] += value
    if k2 == 0 and k1 != 0:
        coeffs[component, (-k1) % n, 0] += np.conj(value)
    elif k1 == 0 and k2 == 0 and np.imag(value) != 0:
        raise FieldError("Mean coefficient of a real field must be real")


def from_modes(arity: Arity, modes: Dict[Tuple[int, int], Union[Number, Sequence[Number]]],
               n: Optional[int] = None) -> SpectralField:
    """Field from one coefficient per conjugate pair {k, -k}

    The partner -k receives the conjugate value automatically.
    """
    band = max((max(abs(k1), abs(k2)) for k1, k2 in modes), default=0)
    grid = Grid2(n) if n is not None else Grid2.for_band(band)
    if not grid.resolves(band):
        raise GridError(f"Band {band} does not fit grid {grid.n}")
    coeffs = np.zeros((arity.components, grid.n, grid.n // 2 + 1), dtype=np.complex128)
    for (k1, k2), value in modes.items():
        values = np.atleast_1d(np.asarray(value, dtype=complex))
        if values.size != arity.components:
            raise FieldError(f"Mode {(k1, k2)} needs {arity.components} values")
        for c, v in enumerate(values):
            _store_mode(coeffs, c, int(k1), int(k2), complex(v))
    return SpectralField(arity, coeffs, band, not np.any(coeffs[:, 0, 0]))


def random_band_limited(arity: Arity, band: int, seed: int = 0, mean_zero: bool = True) -> SpectralField:
    """Random real field with every coefficient inside the band box"""
    grid = Grid2.for_band(band)
    rng = np.random.default_rng(seed)
    data = rng.standard_normal((arity.components, grid.n, grid.n))
    field = forward_transform(data, arity, band=band)
    return project_mean_zero(field) if mean_zero else field


# ------------------------------------------------------------------ transforms

def forward_transform(samples: np.ndarray, arity: Arity = Arity.SCALAR,
                      band: Optional[int] = None) -> SpectralField:
    """Discrete Fourier coefficients of real grid samples

    Without a band hint every mode is kept (Nyquist included), so
    inverse_transform reproduces the samples. With a hint, modes with
    max(|k1|, |k2|) > band are set to zero.
    """
    data = np.asarray(samples, dtype=float)
    if data.ndim == 2:
        data = data[np.newaxis]
    if data.ndim != 3 or data.shape[0] != arity.components or data.shape[1] != data.shape[2]:
        raise FieldError(f"Samples of shape {np.shape(samples)} do not match a {arity.value} field on a square grid")
    n = data.shape[1]
    Grid2(n)
    coeffs = sfft.rfft2(data, workers=fft_workers()) / float(n * n)
    if band is None or band >= n // 2:
        band = n // 2
    else:
        k1, k2 = wavenumber_mesh(n)
        coeffs[:, np.maximum(np.abs(k1), np.abs(k2)) > band] = 0.0
    return SpectralField(arity, coeffs, band)


def inverse_transform(f: SpectralField, n: Optional[int] = None) -> np.ndarray:
    """Grid samples of shape (components, n, n)"""
    field = f if n is None else f.resample(n)
    m = field.n
    return sfft.irfft2(field.coeffs * float(m * m), s=(m, m), workers=fft_workers())


def dealiased(f: SpectralField) -> SpectralField:
    # fields with Nyquist content move to the doubled grid before calculus
    if f.band >= f.n // 2:
        return f.resample(2 * f.n)
    return f


def _apply(f: SpectralField, multiplier: np.ndarray, band: Optional[int] = None,
           mean_zero: Optional[bool] = None) -> SpectralField:
    return f.with_coeffs(f.coeffs * multiplier, band=band, mean_zero=mean_zero)


def project_mean_zero(f: SpectralField) -> SpectralField:
    coeffs = f.coeffs.copy()
    coeffs[:, 0, 0] = 0.0
    return f.with_coeffs(coeffs, mean_zero=True)


def restrict_to_disc(f: SpectralField, radius: float) -> SpectralField:
    """Zero every coefficient with |k| > radius"""
    outside = radius_mesh(f.n) > radius
    coeffs = f.coeffs.copy()
    coeffs[:, outside] = 0.0
    return f.with_coeffs(coeffs, band=min(f.band, int(math.floor(radius))))


# ------------------------------------------------------- Littlewood-Paley shells

def _smoothstep(t: np.ndarray) -> np.ndarray:
    t = np.asarray(t, dtype=float)
    inside_low = t > 0
    inside_high = t < 1
    with np.errstate(over="ignore", divide="ignore"):
        a = np.where(inside_low, np.exp(-1.0 / np.where(inside_low, t, 1.0)), 0.0)
        b = np.where(inside_high, np.exp(-1.0 / np.where(inside_high, 1.0 - t, 1.0)), 0.0)
    return a / (a + b)


@dataclass(frozen=True)
class ShellCutoff:
    """Dyadic shell profile phi(r) = chi(r) - chi(2r)

    chi is 1 on [0, 12/7] and 0 on [2, inf), joined by the exp(-1/t)
    smoothstep, so phi lives on [6/7, 2] and equals 1 on [1, 12/7].
    """
    inner: Fraction = Fraction(12, 7)
    outer: Fraction = Fraction(2)

    def step(self, r: np.ndarray) -> np.ndarray:
        t = (np.asarray(r, dtype=float) - float(self.inner)) / float(self.outer - self.inner)
        return 1.0 - _smoothstep(t)

    def profile(self, r: np.ndarray) -> np.ndarray:
        r = np.asarray(r, dtype=float)
        return self.step(r) - self.step(2.0 * r)

    def shell(self, j: int, radius: np.ndarray) -> np.ndarray:
        return self.profile(np.asarray(radius, dtype=float) / 2.0 ** j)

    @property
    def support(self) -> Tuple[float, float]:
        return float(self.inner) / 2.0, float(self.outer)

    @property
    def plateau(self) -> Tuple[float, float]:
        return float(self.outer) / 2.0, float(self.inner)

    def describe(self, samples: int = 33) -> Dict[str, object]:
        """Serializable description of the profile for run reports"""
        radii = np.linspace(0.0, 2.5, samples)
        return {
            "construction": "phi(r) = chi(r) - chi(2r), chi(r) = 1 - s((r - 12/7)/(2 - 12/7)), "
                            "s(t) = e(t)/(e(t) + e(1-t)), e(t) = exp(-1/t) for t > 0 else 0",
            "support": list(self.support),
            "plateau": list(self.plateau),
            "radii": [float(r) for r in radii],
            "values": [float(v) for v in self.profile(radii)],
        }


SHELL = ShellCutoff()


def _check_dyadic(lam: int) -> int:
    if not isinstance(lam, (int, np.integer)) or not _is_power_of_two(int(lam)):
        raise FieldError(f"Cutoff must be a power of two, got {lam}")
    return int(lam).bit_length() - 1


def shell_project(f: SpectralField, j: int) -> SpectralField:
    """P_{2^j} f: multiply coefficients by phi(|k| / 2^j)"""
    if j < 0:
        raise FieldError(f"Shell index must be >= 0, got {j}")
    multiplier = SHELL.shell(j, radius_mesh(f.n))
    return _apply(f, multiplier, band=min(f.band, 2 ** (j + 1) - 1), mean_zero=True)


def lowpass(f: SpectralField, lam: int, include_mean: bool = False) -> SpectralField:
    """P_{<=lam} f, the sum of shells 2^j' < lam; support |k| <= lam

    The mean is excluded unless include_mean is set, so that
    lowpass + highpass + mean reassembles f.
    """
    _check_dyadic(lam)
    multiplier = SHELL.step(2.0 * radius_mesh(f.n) / lam)
    out = _apply(f, multiplier, band=min(f.band, int(lam) - 1), mean_zero=False)
    return out if include_mean else project_mean_zero(out)


def highpass(f: SpectralField, lam: int) -> SpectralField:
    """(Id - P_0 - P_{<=lam}) f"""
    _check_dyadic(lam)
    multiplier = 1.0 - SHELL.step(2.0 * radius_mesh(f.n) / lam)
    return project_mean_zero(_apply(f, multiplier))


# --------------------------------------------------------------------- calculus

def _derivative(f: SpectralField, axis: int, component: int) -> np.ndarray:
    k1, k2 = wavenumber_mesh(f.n)
    k = k1 if axis == 0 else k2
    return 2j * np.pi * k * f.coeffs[component]


def gradient(f: SpectralField) -> Union[SpectralField, Tuple[SpectralField, SpectralField]]:
    """Scalar: the vector (d1 f, d2 f). Vector: the columns (d1 f, d2 f) of grad f"""
    f = dealiased(f)
    if f.arity is Arity.SCALAR:
        coeffs = np.stack([_derivative(f, 0, 0), _derivative(f, 1, 0)])
        return SpectralField(Arity.VECTOR2, coeffs, f.band, True)
    if f.arity is Arity.VECTOR2:
        columns = []
        for axis in (0, 1):
            coeffs = np.stack([_derivative(f, axis, 0), _derivative(f, axis, 1)])
            columns.append(SpectralField(Arity.VECTOR2, coeffs, f.band, True))
        return tuple(columns)
    raise FieldError("gradient takes a scalar or vector field")


def perp_gradient(f: SpectralField) -> SpectralField:
    """(-d2 f, d1 f)"""
    if f.arity is not Arity.SCALAR:
        raise FieldError("perp_gradient takes a scalar field")
    f = dealiased(f)
    coeffs = np.stack([-_derivative(f, 1, 0), _derivative(f, 0, 0)])
    return SpectralField(Arity.VECTOR2, coeffs, f.band, True)


def divergence(f: SpectralField) -> SpectralField:
    """Vector: d1 f1 + d2 f2. Symmetric tensor: row-wise divergence"""
    f = dealiased(f)
    if f.arity is Arity.VECTOR2:
        coeffs = (_derivative(f, 0, 0) + _derivative(f, 1, 1))[np.newaxis]
        return SpectralField(Arity.SCALAR, coeffs, f.band, True)
    if f.arity is Arity.SYMTENSOR2:
        coeffs = np.stack([_derivative(f, 0, 0) + _derivative(f, 1, 1),
                           _derivative(f, 0, 1) + _derivative(f, 1, 2)])
        return SpectralField(Arity.VECTOR2, coeffs, f.band, True)
    raise FieldError("divergence of a scalar field is undefined")


def divergence_ratio(f: SpectralField) -> float:
    """max |div f| coefficient over 2 pi band max |f| coefficient, the size of grad f"""
    scale = 2.0 * np.pi * max(f.band, 1) * max(f.max_coeff(), 1e-300)
    return divergence(f).max_coeff() / scale


def laplacian(f: SpectralField) -> SpectralField:
    f = dealiased(f)
    k1, k2 = wavenumber_mesh(f.n)
    return _apply(f, -4.0 * np.pi ** 2 * (k1 * k1 + k2 * k2), mean_zero=True)


def deformation(w: SpectralField) -> SpectralField:
    """grad w + grad w^T as a symmetric tensor"""
    if w.arity is not Arity.VECTOR2:
        raise FieldError("deformation takes a vector field")
    w = dealiased(w)
    coeffs = np.stack([2.0 * _derivative(w, 0, 0),
                       _derivative(w, 1, 0) + _derivative(w, 0, 1),
                       2.0 * _derivative(w, 1, 1)])
    return SpectralField(Arity.SYMTENSOR2, coeffs, w.band, True)


def vorticity(u: SpectralField) -> SpectralField:
    if u.arity is not Arity.VECTOR2:
        raise FieldError("vorticity takes a vector field")
    u = dealiased(u)
    coeffs = (_derivative(u, 0, 1) - _derivative(u, 1, 0))[np.newaxis]
    return SpectralField(Arity.SCALAR, coeffs, u.band, True)


# --------------------------------------------------------------------- products

def _pointwise(fa: Arity, a: np.ndarray, ga: Arity, b: np.ndarray) -> Tuple[Arity, np.ndarray]:
    if fa is Arity.SCALAR:
        return ga, a[0] * b
    if ga is Arity.SCALAR:
        return fa, b[0] * a
    if fa is Arity.VECTOR2 and ga is Arity.VECTOR2:
        return Arity.SYMTENSOR2, np.stack([a[0] * b[0], 0.5 * (a[0] * b[1] + a[1] * b[0]), a[1] * b[1]])
    raise FieldError(f"No product rule for {fa.value} x {ga.value}")


def multiply(f: SpectralField, g: SpectralField) -> SpectralField:
    """Alias-free product; vector x vector gives the symmetrized outer product

    Both factors are evaluated on a grid with n/2 > band(f) + band(g), so
    every product mode is represented exactly.
    """
    f, g = dealiased(f), dealiased(g)
    band = f.band + g.band
    grid = Grid2.for_band(band)
    logger.debug("multiply %s x %s on %d^2", f.arity.value, g.arity.value, grid.n)
    arity, product = _pointwise(f.arity, inverse_transform(f, grid.n), g.arity, inverse_transform(g, grid.n))
    return forward_transform(product, arity, band=band)


def outer(f: SpectralField, g: SpectralField) -> SpectralField:
    if f.arity is not Arity.VECTOR2 or g.arity is not Arity.VECTOR2:
        raise FieldError("outer takes two vector fields")
    return multiply(f, g)


def scalar_times(f: SpectralField, entries: Sequence[float]) -> SpectralField:
    """Scalar field times a constant vector (2 entries) or symmetric matrix (11, 12, 22)"""
    if f.arity is not Arity.SCALAR:
        raise FieldError("scalar_times takes a scalar field")
    arity = {2: Arity.VECTOR2, 3: Arity.SYMTENSOR2}.get(len(entries))
    if arity is None:
        raise FieldError("entries must describe a vector or a symmetric matrix")
    coeffs = np.stack([float(e) * f.coeffs[0] for e in entries])
    return SpectralField(arity, coeffs, f.band, f.mean_zero)


def stack_components(parts: Sequence[SpectralField]) -> SpectralField:
    """Vector (2 scalars) or symmetric tensor (3 scalars: 11, 12, 22)"""
    arity = {2: Arity.VECTOR2, 3: Arity.SYMTENSOR2}.get(len(parts))
    if arity is None or any(p.arity is not Arity.SCALAR for p in parts):
        raise FieldError("stack_components takes 2 or 3 scalar fields")
    n = max(p.n for p in parts)
    aligned = [p.resample(n) for p in parts]
    return SpectralField(arity, np.concatenate([p.coeffs for p in aligned]),
                         max(p.band for p in aligned), all(p.mean_zero for p in aligned))


# ------------------------------------------------------- shifts and plane waves

def _centered_block(f: SpectralField) -> Tuple[np.ndarray, np.ndarray]:
    """Full-plane coefficients for k1, k2 in [-band, band], indexed [k1 + b, k2 + b]"""
    b, n = f.band, f.n
    idx = np.arange(-b, b + 1)
    block = np.empty((f.components, 2 * b + 1, 2 * b + 1), dtype=np.complex128)
    block[:, :, b:] = f.coeffs[:, (idx % n)[:, None], idx[b:][None, :]]
    block[:, :, :b] = np.conj(f.coeffs[:, ((-idx) % n)[:, None], (-idx[:b])[None, :]])
    return idx, block


def _place(block: np.ndarray, rows_k: np.ndarray, cols_k: np.ndarray, out: np.ndarray, factor: complex) -> None:
    m = out.shape[1]
    keep = cols_k >= 0
    if not np.any(keep):
        return
    out[:, (rows_k % m)[:, None], cols_k[keep][None, :]] += factor * block[:, :, keep]


def _as_wavenumber(wavenumber: Sequence) -> Tuple[int, int]:
    m1, m2 = (Fraction(v) for v in wavenumber)
    if m1.denominator != 1 or m2.denominator != 1:
        raise FieldError(f"Wavenumber {wavenumber} is not an integer vector")
    return int(m1), int(m2)


def modulate(f: SpectralField, wavenumber: Sequence, kind: str = "cos") -> SpectralField:
    """Exact f * cos(2 pi m.x) or f * sin(2 pi m.x) as a coefficient shift"""
    if kind not in ("sin", "cos"):
        raise FieldError(f"Unknown plane wave kind {kind!r}")
    m1, m2 = _as_wavenumber(wavenumber)
    f = dealiased(f)
    band = f.band + max(abs(m1), abs(m2))
    grid = Grid2.for_band(band)
    idx, block = _centered_block(f)
    out = np.zeros((f.components, grid.n, grid.n // 2 + 1), dtype=np.complex128)
    plus, minus = (0.5, 0.5) if kind == "cos" else (-0.5j, 0.5j)
    _place(block, idx + m1, idx + m2, out, plus)
    _place(block, idx - m1, idx - m2, out, minus)
    return SpectralField(f.arity, out, band, not np.any(out[:, 0, 0]))


def dilate(f: SpectralField, lam: int) -> SpectralField:
    """V(lam x) for integer lam >= 1"""
    lam = int(lam)
    if lam < 1:
        raise FieldError(f"Dilation factor must be a positive integer, got {lam}")
    f = dealiased(f)
    grid = Grid2.for_band(lam * f.band)
    idx, block = _centered_block(f)
    out = np.zeros((f.components, grid.n, grid.n // 2 + 1), dtype=np.complex128)
    _place(block, lam * idx, lam * idx, out, 1.0)
    return SpectralField(f.arity, out, lam * f.band, f.mean_zero)


def plane_wave(kind: str, wavenumber: Sequence) -> SpectralField:
    """sin or cos of 2 pi m.x for an integer wavenumber m"""
    return modulate(constant_field(1.0), wavenumber, kind)


def sample_plane_wave(kind: str, mu: int, direction: Sequence, grid: Optional[Grid2] = None) -> SpectralField:
    """sin/cos(5 pi/2 mu k.x): two coefficients at +-(5/4) mu k"""
    wavenumber = [Fraction(5, 4) * int(mu) * Fraction(c) for c in direction]
    wave = plane_wave(kind, wavenumber)
    if grid is not None:
        if not grid.resolves(wave.band):
            raise GridError(f"Plane wave band {wave.band} does not fit grid {grid.n}")
        wave = wave.resample(grid.n)
    return wave

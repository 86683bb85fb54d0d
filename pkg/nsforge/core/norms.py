"""
Norm calculators: L^p, homogeneous Sobolev, Besov, and paraproduct tables
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Any, Dict, Iterable, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np

from ..errors import GridError, ParameterError
from .fourier_field import (Arity, Grid2, SpectralField, radius_mesh, dealiased, get_max_grid,
                            half_plane_weights, inverse_transform, lowpass, multiply,
                            project_mean_zero, shell_project)

logger = logging.getLogger(__name__)

INF = math.inf


@dataclass
class NormEntry:
    kind: str
    parameter: float
    value: float
    grid: int
    error: Optional[float] = None
    label: str = ""
    note: str = ""

    def to_row(self) -> Dict[str, Any]:
        return {
            "label": self.label,
            "kind": self.kind,
            "parameter": self.parameter,
            "value": self.value,
            "grid": self.grid,
            "error": self.error,
            "note": self.note,
        }


class NormTable:
    """Ordered collection of norm values with their grids and error estimates"""

    def __init__(self):
        self.entries: List[NormEntry] = []

    def add(self, entry: NormEntry) -> NormEntry:
        if entry.value < 0:
            raise ParameterError(f"Norm values are nonnegative, got {entry.value}")
        self.entries.append(entry)
        return entry

    def add_lp(self, f: SpectralField, p: float, label: str = "", estimate_error: bool = True) -> NormEntry:
        result = lp_quadrature(f, p, estimate_error)
        note = "grid capped, products may alias" if result.capped else ""
        return self.add(NormEntry("lp", float(p), result.value, result.grid, result.error, label, note))

    def add_sobolev(self, f: SpectralField, s: float, label: str = "") -> NormEntry:
        return self.add(NormEntry("sobolev", float(s), sobolev_norm(f, s), f.n, 0.0, label))

    def add_besov(self, f: SpectralField, s: float, label: str = "") -> NormEntry:
        return self.add(NormEntry("besov", float(s), besov_norm(f, s), f.n, None, label))

    def lookup(self, kind: str, parameter: float, label: str = "") -> Optional[NormEntry]:
        for entry in self.entries:
            if entry.kind == kind and entry.parameter == float(parameter) and entry.label == label:
                return entry
        return None

    def to_rows(self) -> List[Dict[str, Any]]:
        return [entry.to_row() for entry in self.entries]

    def __len__(self) -> int:
        return len(self.entries)


def magnitude(samples: np.ndarray, arity: Arity) -> np.ndarray:
    """Pointwise |f|: absolute value, Euclidean length or Frobenius norm"""
    if arity is Arity.SCALAR:
        return np.abs(samples[0])
    if arity is Arity.VECTOR2:
        return np.hypot(samples[0], samples[1])
    return np.sqrt(samples[0] ** 2 + 2.0 * samples[1] ** 2 + samples[2] ** 2)


def _parse_p(p: Any) -> float:
    if isinstance(p, str):
        p = INF if p.lower() in ("inf", "infinity") else float(p)
    p = float(p)
    if p < 1:
        raise ParameterError(f"L^p needs p >= 1, got {p}")
    return p


def _lp_on_grid(f: SpectralField, p: float, n: int) -> float:
    values = magnitude(inverse_transform(f, n), f.arity)
    if math.isinf(p):
        return float(values.max())
    if p == 2.0:
        return float(math.sqrt(np.mean(values * values)))
    return float(np.mean(values ** p) ** (1.0 / p))


class Quadrature(NamedTuple):
    value: float
    grid: int
    error: Optional[float]
    capped: bool = False


def lp_quadrature(f: SpectralField, p: Any, estimate_error: bool = True) -> Quadrature:
    """Rectangle rule for ||f||_{L^p} on the dealiased grid

    The grid holds twice the field band, which integrates |f|^2 exactly.
    The error estimate compares against the doubled grid when it fits.
    When that grid exceeds the cap the field's own grid is used, the
    result is marked capped and a warning is logged.
    """
    p = _parse_p(p)
    f = dealiased(f)
    capped = False
    try:
        n = Grid2.for_band(2 * f.band).n
    except GridError:
        n = f.n
        capped = True
        logger.warning("L^%s quadrature of a band-%d field needs more than the %d grid cap; "
                       "using its own %d grid", p, f.band, get_max_grid(), n)
    value = _lp_on_grid(f, p, n)
    error = None
    if estimate_error and 2 * n <= get_max_grid():
        error = abs(_lp_on_grid(f, p, 2 * n) - value)
    return Quadrature(value, n, error, capped)


def lp_norm(f: SpectralField, p: Any) -> float:
    return lp_quadrature(f, p, estimate_error=False).value


def sobolev_norm(f: SpectralField, s: float) -> float:
    """sqrt(sum_{k != 0} |k|^{2s} |c(k)|^2), Frobenius-summed over components"""
    f = dealiased(f)
    radius = radius_mesh(f.n)
    weight = np.zeros_like(radius)
    nonzero = radius > 0
    weight[nonzero] = radius[nonzero] ** (2.0 * s)
    weight = weight * half_plane_weights(f.n)[np.newaxis, :]
    total = 0.0
    for c, frobenius in enumerate(f.arity.frobenius_weights):
        total += frobenius * float(np.sum(weight * (f.coeffs[c].real ** 2 + f.coeffs[c].imag ** 2)))
    return math.sqrt(total)


def inner_product(f: SpectralField, g: SpectralField) -> float:
    """Integral of f . g over the torus by Parseval; tensors contract with Frobenius weights"""
    if f.arity is not g.arity:
        raise ParameterError(f"Cannot pair {f.arity.value} with {g.arity.value}")
    f, g = dealiased(f), dealiased(g)
    n = max(f.n, g.n)
    f, g = f.resample(n), g.resample(n)
    columns = half_plane_weights(n)[np.newaxis, :]
    total = 0.0
    for c, frobenius in enumerate(f.arity.frobenius_weights):
        product = f.coeffs[c] * np.conj(g.coeffs[c])
        total += frobenius * float(np.sum(columns * product.real))
    return total


def shell_range(f: SpectralField) -> range:
    """Shell indices whose support meets the band box of f"""
    if f.band == 0:
        return range(0)
    top = math.sqrt(2.0) * f.band * 7.0 / 6.0
    return range(0, int(math.ceil(math.log2(top))) + 1)


def besov_norm(f: SpectralField, s: float) -> float:
    """sup_j 2^{js} ||P_{2^j} f||_{L^inf}"""
    f = dealiased(f)
    best = 0.0
    for j in shell_range(f):
        piece = shell_project(f, j)
        if piece.is_zero():
            continue
        best = max(best, 2.0 ** (j * s) * lp_norm(piece, INF))
    return best


@dataclass
class ParaproductTable:
    s: float
    j_max: int
    cells: List[List[float]] = field(default_factory=list)
    partial_sums: List[float] = field(default_factory=list)

    def nonzero_cells(self) -> List[Tuple[int, int, float]]:
        return [(j, jp, v) for j, row in enumerate(self.cells) for jp, v in enumerate(row) if v > 0]

    def to_rows(self) -> List[Dict[str, Any]]:
        return [{"j": j, "j_prime": jp, "value": v, "s": self.s}
                for j, row in enumerate(self.cells) for jp, v in enumerate(row)]

    def partial_sum_rows(self) -> List[Dict[str, Any]]:
        return [{"J": J, "partial_sum": v, "s": self.s} for J, v in enumerate(self.partial_sums)]


def paraproduct_table(f: SpectralField, g: SpectralField, s: float, j_max: int) -> ParaproductTable:
    """Cells ||P_{!=0}(P_{2^j} f  P_{2^j'} g)||_{H^s} for j, j' <= j_max"""
    shells_f = [shell_project(f, j).compact() for j in range(j_max + 1)]
    shells_g = [shell_project(g, j).compact() for j in range(j_max + 1)]
    table = ParaproductTable(float(s), j_max)
    for a in shells_f:
        row = []
        for b in shells_g:
            if a.is_zero() or b.is_zero():
                row.append(0.0)
            else:
                row.append(sobolev_norm(project_mean_zero(multiply(a, b)), s))
        table.cells.append(row)
    running = 0.0
    for J in range(j_max + 1):
        # add the new L-shaped strip so the sums stay monotone
        strip = [table.cells[J][jp] for jp in range(J + 1)] + [table.cells[j][J] for j in range(J)]
        running += sum(strip)
        table.partial_sums.append(running)
    logger.debug("paraproduct table s=%s up to shell %d: %d nonzero cells",
                 s, j_max, len(table.nonzero_cells()))
    return table


def embedding_constant(fields: Iterable[SpectralField]) -> Tuple[float, List[float]]:
    """Largest observed ratio ||f||_{H^-2} / ||f||_{L^1}"""
    ratios = []
    for f in fields:
        l1 = lp_norm(f, 1)
        if l1 > 0:
            ratios.append(sobolev_norm(f, -2.0) / l1)
    return (max(ratios) if ratios else 0.0), ratios


def projection_bound_probe(fields: Sequence[SpectralField], cutoffs: Sequence[int], p: Any) -> Dict[str, Any]:
    """Observed L^p operator norm of P_0 + P_{<=lam} on a set of fields"""
    ratios = []
    for f in fields:
        base = lp_norm(f, p)
        if base == 0:
            continue
        for lam in cutoffs:
            ratios.append(lp_norm(lowpass(f, lam, include_mean=True), p) / base)
    return {"p": _parse_p(p), "cutoffs": list(cutoffs), "max_ratio": max(ratios) if ratios else 0.0,
            "ratios": ratios}

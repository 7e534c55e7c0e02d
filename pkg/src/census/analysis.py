"""Growth-rate fits, normalised constants, predicted lattice constants, and
discrepancy statistics for direction histograms."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .hyp_core import Kind


class InsufficientDataError(ValueError):
    pass


class MissingLatticeDataError(ValueError):
    pass


@dataclass(frozen=True)
class GrowthFit:
    slope: float
    intercept: float
    window: tuple
    residual: float
    points: int


def fit_growth_rate(series, window: tuple | None = None) -> GrowthFit:
    """Least-squares fit of ``log N`` against the threshold over ``window`` (zeros dropped)."""
    t = np.asarray(series.thresholds, dtype=float)
    n = np.asarray(series.counts, dtype=float)
    lo, hi = window if window is not None else (t[0], t[-1])
    sel = (t >= lo - 1e-12) & (t <= hi + 1e-12) & (n > 0)
    if sel.sum() < 4:
        raise InsufficientDataError(f"need at least 4 nonzero counts in [{lo}, {hi}], got {int(sel.sum())}")
    x, y = t[sel], np.log(n[sel])
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    return GrowthFit(float(slope), float(intercept), (float(lo), float(hi)), float(np.sqrt(np.mean(resid**2))), int(sel.sum()))


@dataclass(frozen=True)
class EmpiricalConstant:
    thresholds: list
    values: list
    tail_mean: float
    tail_min: float
    tail_max: float


def empirical_constant(series, delta: float, window: tuple | None = None) -> EmpiricalConstant:
    """``N(t) exp(-delta t / 2)`` and its summary over the last third of the nonzero thresholds."""
    if not delta > 0:
        raise ValueError("growth exponent must be positive")
    t = np.asarray(series.thresholds, dtype=float)
    n = np.asarray(series.counts, dtype=float)
    if window is not None:
        sel = (t >= window[0] - 1e-12) & (t <= window[1] + 1e-12)
        t, n = t[sel], n[sel]
    c = n * np.exp(-delta * t / 2.0)
    nz = np.flatnonzero(n > 0)
    if len(nz) == 0:
        raise InsufficientDataError("no nonzero counts")
    tail = c[nz[len(nz) - max(1, len(nz) // 3) :]]
    return EmpiricalConstant(t.tolist(), c.tolist(), float(tail.mean()), float(tail.min()), float(tail.max()))


@dataclass(frozen=True)
class TheoreticalConstant:
    value: float
    formula: str
    inputs: dict = field(default_factory=dict)


def _sphere_volume(k: int) -> float:
    """Volume of the unit k-sphere S^k."""
    return 2.0 * math.pi ** ((k + 1) / 2.0) / math.gamma((k + 1) / 2.0)


def loxodromic_constant(dim: int, ell: float, theta: float, covolume: float, m: int = 1, n_fix: int = 1) -> float:
    """Finite-covolume loxodromic constant in H^dim for a uniformly rotating class."""
    return (
        _sphere_volume(dim - 2)
        * ell
        / (2 ** ((dim - 1) / 2.0) * (dim - 1) * m * n_fix * covolume * (math.cosh(ell) - math.cos(theta)) ** ((dim - 1) / 2.0))
    )


def surface_loxodromic_constant(ell: float, genus: int, punctures: int) -> float:
    return ell / (2 * math.pi * (2 * genus + punctures - 2) * math.sinh(ell / 2.0))


def parabolic_constant(dim: int, ell: float, cusp_volume: float, covolume: float, index: int = 1) -> float:
    """Finite-covolume parabolic constant; ``cusp_volume`` is the volume of the horoball quotient."""
    return index * cusp_volume / (covolume * (2.0 * math.sinh(ell / 2.0)) ** (dim - 1))


def elliptic_constant(theta: float, covolume: float, index: int = 1, stabiliser_order: int = 1) -> float:
    """Plane elliptic constant for a lattice.

    In the plane the skinning mass of a point is ``2 pi / |Stab|`` and the
    Bowen-Margulis mass is ``4 pi Vol``, with Patterson-Sullivan mass ``2 pi``.
    """
    mu, sigma, bm = 2 * math.pi, 2 * math.pi / stabiliser_order, 4 * math.pi * covolume
    return index * mu * sigma / (bm * math.sin(theta / 2.0))


def theoretical_constant(group, inv, m: int = 1, n_fix: int = 1) -> TheoreticalConstant:
    """Predicted limit of ``N(t) exp(-t/2)`` for a class in a plane lattice."""
    if group.covolume is None:
        raise MissingLatticeDataError(f"group {group.name!r} has no covolume")
    vol = group.covolume
    echo = {"covolume": vol, "genus": group.genus, "punctures": group.punctures, "iota": inv.iota, "index": inv.index}
    if inv.kind is Kind.LOXODROMIC:
        value = loxodromic_constant(2, inv.length, inv.angle, vol, m, n_fix)
        echo.update(length=inv.length, angle=inv.angle, m=m, n=n_fix)
        return TheoreticalConstant(value, "loxodromic-finite-covolume", echo)
    if inv.kind is Kind.PARABOLIC:
        # cusp area of the horoball quotient by the primitive translation equals 2 sinh(l/2)
        # for the primitive class, so the constant reduces to index / Vol
        cusp_area = 2.0 * math.sinh(inv.length / 2.0) / m
        value = parabolic_constant(2, inv.length, cusp_area, vol, inv.index)
        echo.update(length=inv.length, m=m)
        return TheoreticalConstant(value, "parabolic-finite-covolume", echo)
    value = elliptic_constant(inv.angle, vol, inv.index, n_fix)
    echo.update(angle=inv.angle)
    return TheoreticalConstant(value, "elliptic-finite-covolume", echo)


# -- equidistribution ---------------------------------------------------------


@dataclass(frozen=True)
class Histogram:
    counts: tuple
    edges: tuple

    @property
    def total(self) -> int:
        return int(sum(self.counts))

    @property
    def bins(self) -> int:
        return len(self.counts)


@dataclass(frozen=True)
class Discrepancy:
    tv: float
    sup_cdf: float
    chi2: float


def discrepancy_stats(hist: Histogram) -> Discrepancy:
    """Total variation, sup-norm CDF gap and Pearson statistic against the uniform law."""
    counts = np.asarray(hist.counts, dtype=float)
    total = counts.sum()
    if total <= 0:
        raise ValueError("empty histogram")
    b = len(counts)
    p = counts / total
    tv = 0.5 * float(np.abs(p - 1.0 / b).sum())
    cdf = np.cumsum(p)
    sup = float(np.abs(cdf - np.arange(1, b + 1) / b).max())
    expected = total / b
    chi2 = float(((counts - expected) ** 2 / expected).sum())
    return Discrepancy(tv, sup, chi2)

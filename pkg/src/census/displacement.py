"""Displacement laws d(x, g x) as functions of the distance to the convex set of g.

For a loxodromic element the convex set is its axis, for a parabolic one a
chosen horoball at its fixed point, and for an elliptic one its fixed point.
The ``psi_*`` functions invert these laws: given a displacement ``t`` they
return the distance to the convex set.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

from .hyp_core import (
    DomainError,
    Horoball,
    Isometry2,
    Kind,
    IsometryKind,
    classify,
    elliptic_data,
    parabolic_data,
)


@dataclass(frozen=True)
class ConjClassInvariants:
    """Everything the displacement laws and the lattice constants need from a class.

    ``length`` is the translation length (loxodromic) or the horospherical
    translation length for ``horoball`` (parabolic).  ``angle`` is the
    rotation angle.  ``iota`` and ``index`` are user-supplied multiplicity
    flags that only enter the predicted constants.
    """

    kind: Kind
    length: float = 0.0
    angle: float = 0.0
    iota: int = 1
    index: int = 1
    horoball: Horoball | None = field(default=None, compare=False)

    def __post_init__(self):
        if self.kind is Kind.IDENTITY:
            raise DomainError("the identity class has no displacement law")
        if self.kind in (Kind.LOXODROMIC, Kind.PARABOLIC) and not self.length > 0:
            raise DomainError(f"{self.kind.value} class needs length > 0")
        if self.kind is Kind.ELLIPTIC and not 0 < self.angle <= math.pi:
            raise DomainError("elliptic angle must lie in (0, pi]")
        if self.iota not in (1, 2):
            raise DomainError("iota must be 1 or 2")
        if self.index < 1:
            raise DomainError("index must be a positive integer")

    @property
    def complex_length(self) -> complex:
        return complex(self.length, self.angle)

    @property
    def tau(self) -> float:
        if self.kind is Kind.LOXODROMIC:
            return math.sqrt(_lox_factor(self.length, self.angle))
        if self.kind is Kind.PARABOLIC:
            return 2.0 * math.sinh(self.length / 2.0)
        return math.sin(self.angle / 2.0)

    @property
    def min_displacement(self) -> float:
        return 0.0 if self.kind is Kind.ELLIPTIC else self.length


def invariants_of(g, horoball: Horoball | None = None, iota: int = 1, index: int = 1) -> ConjClassInvariants:
    """Build the invariants record of an isometry (a horoball is needed for parabolics)."""
    kind: IsometryKind = classify(g)
    if kind.kind is Kind.PARABOLIC:
        if horoball is None:
            raise DomainError("a parabolic class needs a horoball normalisation")
        data = parabolic_data(g, horoball)
        return ConjClassInvariants(Kind.PARABOLIC, data.length, 0.0, iota, index, horoball)
    if kind.kind is Kind.ELLIPTIC and isinstance(g, Isometry2):
        _, angle = elliptic_data(g)
        return ConjClassInvariants(Kind.ELLIPTIC, 0.0, angle, iota, index)
    return ConjClassInvariants(kind.kind, kind.length, kind.angle, iota, index)


def _lox_factor(ell: float, theta: float) -> float:
    # |e^lambda - 1|^2 / (4 e^ell) == (cosh ell - cos theta) / 2
    return (math.cosh(ell) - math.cos(theta)) / 2.0


def _check_s(s: float) -> None:
    if not s >= 0:
        raise DomainError(f"distance to the convex set must be >= 0, got {s}")


def _check_length(ell: float) -> None:
    if not ell > 0:
        raise DomainError(f"translation length must be > 0, got {ell}")


def disp_loxo(s: float, lam: complex | float) -> float:
    """Displacement at distance ``s`` from the axis of an element with complex length ``lam``."""
    lam = complex(lam)
    ell = lam.real
    _check_length(ell)
    _check_s(s)
    if lam.imag == 0:
        return 2.0 * math.asinh(math.cosh(s) * math.sinh(ell / 2.0))
    k = abs(cmath.exp(lam) - 1) ** 2 / (4.0 * math.exp(ell))
    sh2 = math.sinh(s) ** 2 * k + math.sinh(ell / 2.0) ** 2
    return 2.0 * math.asinh(math.sqrt(sh2))


def disp_loxo_bounds(s: float, ell: float) -> tuple[float, float]:
    """Two-sided bounds valid in any CAT(-1) space; the lower one is the planar law."""
    _check_length(ell)
    _check_s(s)
    return 2.0 * math.asinh(math.cosh(s) * math.sinh(ell / 2.0)), 2.0 * s + ell


def disp_para_signed(s: float, ell: float) -> float:
    """Planar parabolic law for a signed (Busemann) distance ``s`` to the horoball."""
    _check_length(ell)
    return 2.0 * math.asinh(math.exp(s) * math.sinh(ell / 2.0))


def disp_para(s: float, ell: float) -> float:
    _check_s(s)
    return disp_para_signed(s, ell)


def disp_para_bounds(s: float, ell: float) -> tuple[float, float]:
    """Bounds at distance ``s`` from the horoball; in the plane the upper one is ``2s + ell``."""
    _check_s(s)
    _check_length(ell)
    return disp_para_signed(s, ell), 2.0 * s + ell


def disp_ell(s: float, theta: float) -> float:
    if not 0 < theta <= math.pi:
        raise DomainError(f"rotation angle must lie in (0, pi], got {theta}")
    _check_s(s)
    return 2.0 * math.asinh(math.sinh(s) * math.sin(theta / 2.0))


def displacement(inv: ConjClassInvariants, s: float) -> float:
    if inv.kind is Kind.LOXODROMIC:
        return disp_loxo(s, inv.complex_length)
    if inv.kind is Kind.PARABOLIC:
        return disp_para(s, inv.length)
    return disp_ell(s, inv.angle)


def psi_exact(inv: ConjClassInvariants, t: float) -> float:
    """Distance to the convex set of a class element displacing a point by ``t``."""
    tmin = inv.min_displacement
    if t < tmin:
        raise DomainError(f"displacement {t} is below the class minimum {tmin}")
    if inv.kind is Kind.LOXODROMIC:
        ell, theta = inv.length, inv.angle
        if theta == 0:
            return math.acosh(max(1.0, math.sinh(t / 2.0) / math.sinh(ell / 2.0)))
        sh2 = (math.sinh(t / 2.0) ** 2 - math.sinh(ell / 2.0) ** 2) / _lox_factor(ell, theta)
        return math.asinh(math.sqrt(max(0.0, sh2)))
    if inv.kind is Kind.PARABOLIC:
        return max(0.0, psi_para_signed(inv.length, t))
    return math.asinh(math.sinh(t / 2.0) / math.sin(inv.angle / 2.0))


def psi_para_signed(ell: float, t: float) -> float:
    """Signed distance to the horoball for a parabolic displacement ``t > 0``."""
    if not t > 0:
        raise DomainError("parabolic displacement must be positive")
    return math.log(math.sinh(t / 2.0) / math.sinh(ell / 2.0))


def psi_asymptotic(inv: ConjClassInvariants, t: float) -> float:
    """Leading behaviour ``t/2 - log tau`` of ``psi_exact`` for large ``t``."""
    if inv.kind is Kind.LOXODROMIC:
        return 0.5 * (t - math.log(_lox_factor(inv.length, inv.angle)))
    if inv.kind is Kind.PARABOLIC:
        return t / 2.0 - math.log(math.sinh(inv.length / 2.0)) - math.log(2.0)
    return t / 2.0 - math.log(math.sin(inv.angle / 2.0))

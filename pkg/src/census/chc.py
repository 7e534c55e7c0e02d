"""Complex hyperbolic space in Siegel-domain coordinates.

Points are homogeneous vectors ``(w0, w, wn)`` with ``w`` of length n-1.
The Hermitian form is ``<x, y> = -x0 conj(yn) + x.conj(y) - xn conj(y0)``,
interior points have ``q(x) = <x, x> < 0``, and with ``wn = 1`` the
horosphere ``H_s`` centred at infinity is ``{q = -s}``, i.e.
``re w0 = (|w|^2 + s) / 2``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .hyp_core import DomainError

UNITARY_TOL = 1e-12
HOROSPHERE_TOL = 1e-9


def _vec(w) -> np.ndarray:
    v = np.atleast_1d(np.asarray(w, dtype=complex))
    if v.ndim != 1 or len(v) == 0:
        raise DomainError("horizontal coordinate must be a nonempty complex vector")
    return v


@dataclass(frozen=True)
class CHPoint:
    w0: complex
    w: tuple
    wn: complex = 1.0

    @classmethod
    def of(cls, w0, w, wn=1.0) -> "CHPoint":
        return cls(complex(w0), tuple(complex(x) for x in _vec(w)), complex(wn))

    @property
    def dim(self) -> int:
        return len(self.w) + 1

    def vector(self) -> np.ndarray:
        return np.array([self.w0, *self.w, self.wn], dtype=complex)

    def scaled(self, lam: complex) -> "CHPoint":
        return CHPoint.of(lam * self.w0, [lam * x for x in self.w], lam * self.wn)

    def q(self) -> float:
        return hermitian(self.vector(), self.vector()).real


def hermitian(x: np.ndarray, y: np.ndarray) -> complex:
    yc = np.conjugate(y)
    return complex(-x[0] * yc[-1] + np.dot(x[1:-1], yc[1:-1]) - x[-1] * yc[0])


def _interior(p: CHPoint) -> np.ndarray:
    x = p.vector()
    scale = max(1.0, float(np.max(np.abs(x)))) ** 2
    if not p.q() < -1e-14 * scale:
        raise DomainError("point is not in the interior (q >= 0)")
    return x


def ch_dist(p: CHPoint, r: CHPoint) -> float:
    """Distance with holomorphic curvature normalised as in the Siegel model used here."""
    if p.dim != r.dim:
        raise DomainError("points live in different dimensions")
    x, y = _interior(p), _interior(r)
    ratio = (abs(hermitian(x, y)) ** 2) / (hermitian(x, x).real * hermitian(y, y).real)
    return math.acosh(max(1.0, math.sqrt(ratio)))


def horosphere_point(s: float, w, v: float = 0.0) -> CHPoint:
    """The point of ``H_s`` with horizontal coordinate ``w`` and vertical coordinate ``v``."""
    if not s > 0:
        raise DomainError("horosphere parameter must be positive")
    wv = _vec(w)
    return CHPoint.of(complex((np.vdot(wv, wv).real + s) / 2.0, v), wv)


def horosphere_parameter(p: CHPoint) -> float:
    x = p.vector() / p.wn
    return -hermitian(x, x).real


def random_horosphere_points(s: float, count: int, rng: np.random.Generator, scale: float = 1.0, dim: int = 2) -> list:
    out = []
    for _ in range(count):
        w = (rng.normal(size=dim - 1) + 1j * rng.normal(size=dim - 1)) * scale
        out.append(horosphere_point(s, w, float(rng.normal() * scale)))
    return out


@dataclass(frozen=True)
class HeisTranslation:
    """``T_Z`` with ``Z = (z0, z)``; requires ``re z0 = |z|^2 / 2``."""

    z0: complex
    z: tuple

    def __post_init__(self):
        zv = _vec(self.z)
        object.__setattr__(self, "z", tuple(complex(x) for x in zv))
        object.__setattr__(self, "z0", complex(self.z0))
        half = np.vdot(zv, zv).real / 2.0
        if abs(self.z0.real - half) > UNITARY_TOL * max(1.0, half):
            raise DomainError(f"re z0 = {self.z0.real} must equal |z|^2/2 = {half}")

    @classmethod
    def vertical(cls, v: float, dim: int = 2) -> "HeisTranslation":
        return cls(complex(0.0, v), (0j,) * (dim - 1))

    @classmethod
    def horizontal(cls, z, v: float = 0.0) -> "HeisTranslation":
        zv = _vec(z)
        return cls(complex(np.vdot(zv, zv).real / 2.0, v), tuple(zv))

    @property
    def is_vertical(self) -> bool:
        return all(x == 0 for x in self.z)

    def matrix(self) -> np.ndarray:
        zv = np.array(self.z)
        k = len(zv)
        m = np.eye(k + 2, dtype=complex)
        m[0, 1:-1] = np.conjugate(zv)
        m[0, -1] = self.z0
        m[1:-1, -1] = zv
        return m

    def compose(self, other: "HeisTranslation") -> "HeisTranslation":
        """Group law matching the matrix product ``T_self T_other``."""
        z, z2 = np.array(self.z), np.array(other.z)
        return HeisTranslation(self.z0 + other.z0 + np.vdot(z, z2), tuple(z + z2))


@dataclass(frozen=True)
class ParabolicMatrix:
    """``[[1, a*, z0], [0, A, b], [0, 0, 1]]`` with ``A`` unitary, ``A a = b`` and ``re z0 = |a|^2 / 2``."""

    A: np.ndarray
    a: np.ndarray
    b: np.ndarray
    z0: complex

    def __post_init__(self):
        A = np.atleast_2d(np.asarray(self.A, dtype=complex))
        a, b = _vec(self.a), _vec(self.b)
        k = len(a)
        if A.shape != (k, k) or len(b) != k:
            raise DomainError("inconsistent block sizes")
        if np.max(np.abs(A.conj().T @ A - np.eye(k))) > UNITARY_TOL:
            raise DomainError("A is not unitary")
        if np.max(np.abs(A @ a - b)) > UNITARY_TOL * max(1.0, float(np.max(np.abs(b)))):
            raise DomainError("A a must equal b")
        half = np.vdot(a, a).real / 2.0
        if abs(complex(self.z0).real - half) > UNITARY_TOL * max(1.0, half):
            raise DomainError("re z0 must equal |a|^2/2")
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "z0", complex(self.z0))

    @classmethod
    def rotation(cls, A, a, v: float = 0.0) -> "ParabolicMatrix":
        A = np.atleast_2d(np.asarray(A, dtype=complex))
        a = _vec(a)
        return cls(A, a, A @ a, complex(np.vdot(a, a).real / 2.0, v))

    def matrix(self) -> np.ndarray:
        k = len(self.a)
        m = np.eye(k + 2, dtype=complex)
        m[0, 1:-1] = np.conjugate(self.a)
        m[0, -1] = self.z0
        m[1:-1, 1:-1] = self.A
        m[1:-1, -1] = self.b
        return m


def heis_apply(T, p: CHPoint) -> CHPoint:
    """Apply a Heisenberg translation or a general parabolic matrix fixing infinity."""
    m = T.matrix()
    if m.shape[0] != p.dim + 1:
        raise DomainError("dimension mismatch")
    y = m @ p.vector()
    return CHPoint.of(y[0], y[1:-1], y[-1])


def displacement_on_horosphere(T, s: float, sample) -> tuple[float, float, list]:
    """``(min, max, values)`` of ``d(W, T W)`` over sample points of ``H_s``."""
    values = []
    for p in sample:
        x = p.vector() / p.wn
        scale = max(1.0, abs(x[0]))
        if abs(horosphere_parameter(p) - s) > HOROSPHERE_TOL * scale:
            raise DomainError(f"sample point is not on the horosphere H_{s}")
        values.append(ch_dist(p, heis_apply(T, p)))
    if not values:
        raise DomainError("empty sample")
    return min(values), max(values), values

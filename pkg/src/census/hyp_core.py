"""Isometries of the hyperbolic plane and 3-space in upper half-space models.

Matrices are stored up to sign.  Integer and rational entries form the exact
backend (used for group enumeration); float entries form the numeric
backend (used for geometry).
"""

from __future__ import annotations

import cmath
import enum
import math
from dataclasses import dataclass
from fractions import Fraction

NUMERIC_DET_TOL = 1e-12
PARABOLIC_BAND = 1e-9


class DomainError(ValueError):
    """Input outside the domain of a geometric operation."""


class KindError(ValueError):
    """Operation requires an isometry of a different kind."""


class ConsistencyError(ValueError):
    """Two inputs that should describe the same object disagree."""


# -- points ------------------------------------------------------------------


@dataclass(frozen=True)
class UH2Point:
    re: float
    im: float

    def __post_init__(self):
        if not self.im > 0:
            raise DomainError(f"upper half-plane point needs im > 0, got {self.im}")

    @classmethod
    def of(cls, z: complex) -> "UH2Point":
        return cls(float(z.real), float(z.imag))

    @property
    def z(self) -> complex:
        return complex(self.re, self.im)


@dataclass(frozen=True)
class UH3Point:
    horizontal: complex
    height: float

    def __post_init__(self):
        if not self.height > 0:
            raise DomainError(f"upper half-space point needs height > 0, got {self.height}")


def _as_complex(p) -> complex:
    if isinstance(p, UH2Point):
        return p.z
    z = complex(p)
    if not z.imag > 0:
        raise DomainError(f"upper half-plane point needs im > 0, got {z}")
    return z


def dist_h2(p, q) -> float:
    """Hyperbolic distance in the upper half-plane.

    Uses ``sinh(d/2) = |p - q| / (2 sqrt(im p im q))``, which is the
    cancellation-free form of ``cosh d = 1 + |p-q|^2 / (2 im p im q)``.
    """
    p, q = _as_complex(p), _as_complex(q)
    return 2.0 * math.asinh(abs(p - q) / (2.0 * math.sqrt(p.imag * q.imag)))


def dist_h3(p: UH3Point, q: UH3Point) -> float:
    dz = abs(p.horizontal - q.horizontal)
    dh = p.height - q.height
    return 2.0 * math.asinh(math.hypot(dz, dh) / (2.0 * math.sqrt(p.height * q.height)))


# -- matrices ----------------------------------------------------------------


def det_tolerance(entries) -> float:
    """Determinant tolerance; the rounding error of ``ad - bc`` scales with the squared entries."""
    return NUMERIC_DET_TOL * max(1.0, max(abs(e) for e in entries) ** 2)


def _is_exact(x) -> bool:
    return isinstance(x, (int, Fraction)) and not isinstance(x, bool)


def _canonical_sign(entries):
    for e in entries:
        if e != 0:
            if _sign_key(e) < 0:
                return tuple(-x for x in entries)
            return tuple(entries)
    raise DomainError("zero matrix")


def _sign_key(e) -> float:
    if isinstance(e, complex):
        # phase of the first nonzero entry must lie in [0, pi)
        ang = cmath.phase(e)
        return 1.0 if 0.0 <= ang < math.pi else -1.0
    return 1.0 if e > 0 else -1.0


@dataclass(frozen=True)
class Isometry2:
    """Element of PSL(2, R) acting on the upper half-plane.

    The sign is normalised so that the first nonzero entry (row-major) is
    positive; equal matrices are therefore equal isometries.
    """

    a: object
    b: object
    c: object
    d: object

    def __post_init__(self):
        entries = (self.a, self.b, self.c, self.d)
        exact = all(_is_exact(e) for e in entries)
        if not exact:
            entries = tuple(float(e) for e in entries)
        det = entries[0] * entries[3] - entries[1] * entries[2]
        if exact:
            if det != 1:
                raise DomainError(f"determinant {det} != 1")
        elif abs(det - 1.0) > det_tolerance(entries):
            raise DomainError(f"determinant {det} != 1 (tol {NUMERIC_DET_TOL} relative to entry scale)")
        a, b, c, d = _canonical_sign(entries)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "d", d)

    @classmethod
    def from_real(cls, a: float, b: float, c: float, d: float) -> "Isometry2":
        """Normalise a real matrix with positive determinant into PSL(2, R)."""
        det = a * d - b * c
        if det <= 0:
            raise DomainError("orientation-reversing or singular matrix")
        s = math.sqrt(det)
        return cls(a / s, b / s, c / s, d / s)

    @property
    def exact(self) -> bool:
        return _is_exact(self.a)

    @property
    def entries(self) -> tuple:
        return (self.a, self.b, self.c, self.d)

    def trace(self):
        return self.a + self.d

    def __matmul__(self, other: "Isometry2") -> "Isometry2":
        a, b, c, d = self.entries
        e, f, g, h = other.entries
        prod = (a * e + b * g, a * f + b * h, c * e + d * g, c * f + d * h)
        if self.exact and other.exact:
            return Isometry2(*prod)
        # both factors have det 1; renormalise away accumulated rounding
        return Isometry2.from_real(*prod)

    def inverse(self) -> "Isometry2":
        return Isometry2(self.d, -self.b, -self.c, self.a)

    def numeric(self) -> "Isometry2":
        return Isometry2(*(float(e) for e in self.entries))

    def is_identity(self) -> bool:
        return self.b == 0 and self.c == 0 and self.a == self.d

    def __call__(self, z):
        """Moebius action on a point of the closed upper half-plane (None = infinity)."""
        a, b, c, d = (float(e) for e in self.entries)
        if isinstance(z, UH2Point):
            z = z.z
        if z is None:
            return None if c == 0 else a / c
        z = complex(z)
        den = c * z + d
        if den == 0:
            return None
        n2 = den.real**2 + den.imag**2
        num = a * z + b
        re = (num.real * den.real + num.imag * den.imag) / n2
        # the imaginary part is (ad - bc) im z / |cz + d|^2; use it to avoid cancellation
        det = float(self.a * self.d - self.b * self.c)
        return complex(re, det * z.imag / n2)

    def to_complex(self) -> "Isometry3":
        return Isometry3(*(complex(float(e)) for e in self.entries))


@dataclass(frozen=True)
class Isometry3:
    """Element of PSL(2, C) acting on upper half-space by the Poincare extension."""

    a: complex
    b: complex
    c: complex
    d: complex

    def __post_init__(self):
        entries = tuple(complex(e) for e in (self.a, self.b, self.c, self.d))
        det = entries[0] * entries[3] - entries[1] * entries[2]
        if abs(det - 1.0) > det_tolerance(entries):
            raise DomainError(f"determinant {det} != 1 (tol {NUMERIC_DET_TOL} relative to entry scale)")
        a, b, c, d = _canonical_sign(entries)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "d", d)

    @classmethod
    def from_complex(cls, a, b, c, d) -> "Isometry3":
        s = cmath.sqrt(a * d - b * c)
        if s == 0:
            raise DomainError("singular matrix")
        return cls(a / s, b / s, c / s, d / s)

    @property
    def entries(self) -> tuple:
        return (self.a, self.b, self.c, self.d)

    def trace(self) -> complex:
        return self.a + self.d

    def __matmul__(self, other: "Isometry3") -> "Isometry3":
        a, b, c, d = self.entries
        e, f, g, h = other.entries
        return Isometry3.from_complex(a * e + b * g, a * f + b * h, c * e + d * g, c * f + d * h)

    def inverse(self) -> "Isometry3":
        return Isometry3(self.d, -self.b, -self.c, self.a)

    def __call__(self, p: UH3Point) -> UH3Point:
        a, b, c, d = self.entries
        z, h = p.horizontal, p.height
        w = c * z + d
        den = abs(w) ** 2 + abs(c) ** 2 * h * h
        z2 = ((a * z + b) * w.conjugate() + a * c.conjugate() * h * h) / den
        return UH3Point(z2, h / den)


# -- classification ----------------------------------------------------------


class Kind(enum.Enum):
    IDENTITY = "identity"
    ELLIPTIC = "elliptic"
    PARABOLIC = "parabolic"
    LOXODROMIC = "loxodromic"


@dataclass(frozen=True)
class IsometryKind:
    kind: Kind
    length: float = 0.0
    angle: float = 0.0
    ambiguous: bool = False

    @property
    def complex_length(self) -> complex:
        return complex(self.length, self.angle)


def _fold_angle(theta: float) -> float:
    """Reduce an angle into (-pi, pi]."""
    return math.pi - math.fmod(math.fmod(math.pi - theta, 2 * math.pi) + 2 * math.pi, 2 * math.pi)


def classify(g) -> IsometryKind:
    if isinstance(g, Isometry3):
        return _classify3(g)
    if g.is_identity():
        return IsometryKind(Kind.IDENTITY)
    tr = g.trace()
    if g.exact:
        tr2 = tr * tr
        if tr2 == 4:
            return IsometryKind(Kind.PARABOLIC)
        abs_tr = math.sqrt(float(tr2))
        ambiguous = False
    else:
        abs_tr = abs(tr)
        ambiguous = abs(abs_tr - 2.0) <= PARABOLIC_BAND
        if ambiguous:
            return IsometryKind(Kind.PARABOLIC, ambiguous=True)
    if abs_tr > 2:
        return IsometryKind(Kind.LOXODROMIC, length=2.0 * math.acosh(abs_tr / 2.0))
    return IsometryKind(Kind.ELLIPTIC, angle=2.0 * math.acos(abs_tr / 2.0))


def _classify3(g: Isometry3) -> IsometryKind:
    tr = g.trace()
    if abs(g.b) <= NUMERIC_DET_TOL and abs(g.c) <= NUMERIC_DET_TOL and abs(g.a - g.d) <= NUMERIC_DET_TOL:
        return IsometryKind(Kind.IDENTITY)
    if abs(tr.imag) <= PARABOLIC_BAND and abs(tr.real) <= 2.0 + PARABOLIC_BAND:
        if abs(abs(tr.real) - 2.0) <= PARABOLIC_BAND:
            return IsometryKind(Kind.PARABOLIC, ambiguous=abs(abs(tr.real) - 2.0) > 0)
        return IsometryKind(Kind.ELLIPTIC, angle=2.0 * math.acos(abs(tr.real) / 2.0))
    lam = complex_translation_length(g)
    return IsometryKind(Kind.LOXODROMIC, length=lam.real, angle=lam.imag)


def complex_translation_length(g: Isometry3) -> complex:
    """``ell + i theta`` with ``g`` conjugate to ``(z, r) -> e^ell (e^{i theta} z, r)``."""
    tr = g.trace()
    root = cmath.sqrt(tr * tr - 4)
    mu = max((tr + root) / 2, (tr - root) / 2, key=abs)
    if abs(mu) <= 1.0 + PARABOLIC_BAND:
        raise KindError("complex translation length needs a loxodromic element")
    lam = 2 * cmath.log(mu)
    return complex(lam.real, _fold_angle(lam.imag))


# -- axes, horoballs, fixed points --------------------------------------------


def fixed_points(g: Isometry2) -> tuple:
    """Boundary fixed points of a loxodromic or parabolic element (None = infinity)."""
    a, b, c, d = (float(e) for e in g.entries)
    if c == 0:
        if a == d:
            return (None,)
        return (b / (d - a), None)
    disc = (a + d) ** 2 - 4.0
    if classify(g).kind is Kind.PARABOLIC:
        # the discriminant is zero; its rounded value would cost half the digits
        return ((a - d) / (2 * c),)
    if disc < 0:
        raise KindError("elliptic element has no boundary fixed points")
    r = math.sqrt(disc)
    return ((a - d + r) / (2 * c), (a - d - r) / (2 * c))


def axis(g: Isometry2) -> tuple:
    if classify(g).kind is not Kind.LOXODROMIC:
        raise KindError("axis needs a loxodromic element")
    return fixed_points(g)


def dist_to_geodesic(x, ends: tuple) -> float:
    """Distance from ``x`` to the geodesic with boundary endpoints ``ends``."""
    z = _as_complex(x)
    r1, r2 = ends
    if r2 is None:
        r1, r2 = r2, r1
    if r1 is None:
        w = z - r2
    else:
        w = (z - r1) / (z - r2)
    return math.asinh(abs(w.real) / abs(w.imag))


def dist_to_axis(x, g: Isometry2) -> float:
    return dist_to_geodesic(x, axis(g))


@dataclass(frozen=True)
class Horoball:
    """Horoball at ``base`` (None = infinity).

    ``size`` is the Euclidean diameter for a finite base, or the cutoff
    height ``{im z >= size}`` when the base is infinity.
    """

    base: complex | None
    size: float

    def __post_init__(self):
        if not self.size > 0:
            raise DomainError("horoball size must be positive")

    def signed_distance(self, x) -> float:
        """Distance to the horoball, negative inside (Busemann normalisation)."""
        z = _as_complex(x)
        if self.base is None:
            return math.log(self.size / z.imag)
        xi = complex(self.base).real
        return math.log(abs(z - xi) ** 2 / (self.size * z.imag))

    def distance(self, x) -> float:
        return max(0.0, self.signed_distance(x))

    def top(self) -> complex:
        """A point of the bounding horosphere."""
        if self.base is None:
            return complex(0.0, self.size)
        return complex(complex(self.base).real, self.size)

    def moved(self, g: Isometry2) -> "Horoball":
        """Image of the horoball under ``g``."""
        gn = g.numeric()
        base = gn(self.base if self.base is None else complex(self.base).real)
        # the image horosphere passes through g(top); recover its size from that point
        y = gn(self.top())
        if base is None:
            return Horoball(None, y.imag)
        xi = complex(base).real
        return Horoball(xi, abs(y - xi) ** 2 / y.imag)


@dataclass(frozen=True)
class ParabolicData:
    fixed_point: complex | None
    length: float
    horoball: Horoball

    @property
    def sinh_half_length(self) -> float:
        return math.sinh(self.length / 2.0)

    def dist_to_horoball(self, x) -> float:
        return self.horoball.distance(x)


def _same_boundary_point(p, q, tol=1e-9) -> bool:
    if p is None or q is None:
        return p is None and q is None
    return abs(complex(p) - complex(q)) <= tol * max(1.0, abs(complex(p)))


def parabolic_data(g: Isometry2, h: Horoball) -> ParabolicData:
    if classify(g).kind is not Kind.PARABOLIC:
        raise KindError("parabolic_data needs a parabolic element")
    xi = fixed_points(g)[0]
    if not _same_boundary_point(xi, h.base):
        raise ConsistencyError(f"horoball based at {h.base}, fixed point is {xi}")
    y = h.top()
    length = dist_h2(y, g.numeric()(y))
    return ParabolicData(xi, length, h)


def elliptic_data(g: Isometry2) -> tuple[UH2Point, float]:
    """Interior fixed point and rotation angle in (0, pi], read off the derivative."""
    if classify(g).kind is not Kind.ELLIPTIC:
        raise KindError("elliptic_data needs an elliptic element")
    a, b, c, d = (float(e) for e in g.entries)
    if c == 0:
        raise KindError("elliptic element with c = 0")
    disc = complex((a + d) ** 2 - 4.0)
    p = ((a - d) + cmath.sqrt(disc)) / (2 * c)
    if p.imag < 0:
        p = p.conjugate()
    # derivative of the Moebius map at p is 1/(cp+d)^2; its argument is the rotation
    rot = abs(_fold_angle(cmath.phase(1.0 / (c * p + d) ** 2)))
    return UH2Point.of(p), rot


def tangent_angle(x0, y) -> float:
    """Direction at ``x0`` of the geodesic towards ``y``, in [0, 2 pi).

    Angles are measured in the coordinate frame of the model at ``x0``.
    """
    z0, w = _as_complex(x0), _as_complex(y)
    if z0 == w:
        raise DomainError("tangent direction undefined for coincident points")
    u = (w - z0.real) / z0.imag
    # Cayley map to the disc sends i to 0 and rotates tangents at i by -pi/2
    disc = (u - 1j) / (u + 1j)
    return (cmath.phase(disc) + math.pi / 2) % (2 * math.pi)


def orbit_displacement(x0, g: Isometry2) -> float:
    return dist_h2(x0, g.numeric()(_as_complex(x0)))

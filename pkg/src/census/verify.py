"""Randomised checks of the displacement laws against matrix-computed displacements.

Each check builds a model isometry in normal form, conjugates it by a random
isometry, places a point at a prescribed distance from the convex set, and
compares ``d(x, g x)`` measured with matrices against the closed-form law.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .displacement import disp_ell, disp_loxo, disp_loxo_bounds, disp_para_bounds, disp_para_signed
from .hyp_core import Horoball, Isometry2, Isometry3, UH3Point, dist_h2, dist_h3, parabolic_data

LAWS = ("loxodromic-plane", "loxodromic-space", "parabolic", "elliptic")


@dataclass(frozen=True)
class LawCheck:
    law: str
    samples: int
    max_rel_error: float


@dataclass(frozen=True)
class BoundsCheck:
    samples: int
    violations: int
    gap_error: float


def _rel(a: float, b: float) -> float:
    return abs(a - b) / max(abs(b), 1e-300)


def random_sl2r(rng: np.random.Generator, spread: float = 1.0) -> Isometry2:
    """Random element ``k(phi) a(r) n(x)`` with moderate entries."""
    phi = rng.uniform(0, math.pi)
    r = rng.uniform(-spread, spread)
    x = rng.uniform(-spread, spread)
    k = Isometry2.from_real(math.cos(phi), -math.sin(phi), math.sin(phi), math.cos(phi))
    a = Isometry2.from_real(math.exp(r / 2), 0.0, 0.0, math.exp(-r / 2))
    n = Isometry2.from_real(1.0, x, 0.0, 1.0)
    return k @ a @ n


def random_sl2c(rng: np.random.Generator, spread: float = 1.0) -> Isometry3:
    entries = rng.normal(size=4) * spread + 1j * rng.normal(size=4) * spread
    entries[0] += 1.0
    entries[3] += 1.0
    a, b, c, d = (complex(e) for e in entries)
    return Isometry3.from_complex(a, b, c, d)


def _conj2(h: Isometry2, g: Isometry2) -> Isometry2:
    return h @ g @ h.inverse()


def check_loxodromic_plane(rng, n: int) -> LawCheck:
    worst = 0.0
    for _ in range(n):
        ell, s = rng.uniform(0.1, 5.0), rng.uniform(0.0, 5.0)
        g = Isometry2.from_real(math.exp(ell / 2), 0.0, 0.0, math.exp(-ell / 2))
        # distance to the imaginary axis is asinh(|x| / y)
        scale = math.exp(rng.uniform(-1, 1))
        z = scale * complex(rng.choice([-1.0, 1.0]) * math.sinh(s), 1.0)
        h = random_sl2r(rng)
        w = h(z)
        worst = max(worst, _rel(disp_loxo(s, ell), dist_h2(w, _conj2(h, g)(w))))
    return LawCheck(LAWS[0], n, worst)


def check_loxodromic_space(rng, n: int) -> LawCheck:
    worst = 0.0
    for _ in range(n):
        lam = complex(rng.uniform(0.1, 5.0), rng.uniform(-math.pi, math.pi))
        s = rng.uniform(0.0, 5.0)
        mu = cmath.exp(lam / 2)
        g = Isometry3(mu, 0j, 0j, 1 / mu)
        height = math.exp(rng.uniform(-1, 1))
        p = UH3Point(height * math.sinh(s) * cmath.exp(1j * rng.uniform(0, 2 * math.pi)), height)
        h = random_sl2c(rng, 0.5)
        q = h(p)
        gq = (h @ g @ h.inverse())(q)
        worst = max(worst, _rel(disp_loxo(s, lam), dist_h3(q, gq)))
    return LawCheck(LAWS[1], n, worst)


def check_parabolic(rng, n: int) -> LawCheck:
    """Signed distances, so points inside the horoball are exercised as well."""
    worst = 0.0
    for _ in range(n):
        b = rng.uniform(0.2, 5.0) * rng.choice([-1.0, 1.0])
        H = math.exp(rng.uniform(-1, 1))
        s = rng.uniform(-2.0, 5.0)
        g = Isometry2.from_real(1.0, b, 0.0, 1.0)
        z = complex(rng.uniform(-3, 3), H * math.exp(-s))
        h = random_sl2r(rng)
        gh = _conj2(h, g)
        ball = Horoball(None, H).moved(h)
        data = parabolic_data(gh, ball)
        w = h(z)
        law = disp_para_signed(ball.signed_distance(w), data.length)
        worst = max(worst, _rel(law, dist_h2(w, gh(w))))
    return LawCheck(LAWS[2], n, worst)


def check_elliptic(rng, n: int) -> LawCheck:
    worst = 0.0
    for _ in range(n):
        theta = rng.uniform(0.05, math.pi)
        s = rng.uniform(0.05, 5.0)
        c, sn = math.cos(theta / 2), math.sin(theta / 2)
        # derivative at i is exp(i theta), so this rotates by theta about i
        g = Isometry2.from_real(c, sn, -sn, c)
        z = 1j * math.exp(s)
        h = random_sl2r(rng)
        w = h(z)
        worst = max(worst, _rel(disp_ell(s, theta), dist_h2(w, _conj2(h, g)(w))))
    return LawCheck(LAWS[3], n, worst)


def check_all_laws(seed: int = 0, n: int = 10_000) -> list[LawCheck]:
    rng = np.random.default_rng(seed)
    return [
        check_loxodromic_plane(rng, n),
        check_loxodromic_space(rng, n),
        check_parabolic(rng, n),
        check_elliptic(rng, n),
    ]


def check_bounds(seed: int = 0, n: int = 10_000, gap_s: float = 10.0) -> BoundsCheck:
    """Two-sided bounds on space displacements and the large-distance gap of the loxodromic pair."""
    rng = np.random.default_rng(seed)
    violations = 0
    for _ in range(n):
        lam = complex(rng.uniform(0.05, 6.0), rng.uniform(-math.pi, math.pi))
        s = rng.uniform(0.0, 8.0)
        mu = cmath.exp(lam / 2)
        g = Isometry3(mu, 0j, 0j, 1 / mu)
        p = UH3Point(math.sinh(s) * cmath.exp(1j * rng.uniform(0, 2 * math.pi)), 1.0)
        d = dist_h3(p, g(p))
        lo, hi = disp_loxo_bounds(s, lam.real)
        tol = 1e-9 * max(1.0, d)
        violations += int(d < lo - tol or d > hi + tol)

        ell = rng.uniform(0.05, 6.0)
        b = 2.0 * math.sinh(ell / 2)
        t = rng.uniform(0.0, 8.0)
        gp = Isometry3(1 + 0j, complex(b * math.cos(t), b * math.sin(t)), 0j, 1 + 0j)
        q = UH3Point(complex(rng.uniform(-3, 3), rng.uniform(-3, 3)), math.exp(-s))
        d = dist_h3(q, gp(q))
        lo, hi = disp_para_bounds(s, ell)
        tol = 1e-9 * max(1.0, d)
        violations += int(d < lo - tol or d > hi + tol)
    gap_err = 0.0
    for ell in np.linspace(0.25, 6.0, 24):
        lo, hi = disp_loxo_bounds(gap_s, ell)
        limit = ell - 2.0 * math.log(math.sinh(ell / 2))
        gap_err = max(gap_err, abs((hi - lo) - limit))
    return BoundsCheck(2 * n, violations, float(gap_err))

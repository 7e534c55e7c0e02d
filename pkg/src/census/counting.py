"""Counting conjugates of a fixed element inside a Fuchsian group.

Two independent engines produce ``N(t) = #{a in K : d(x0, a x0) <= t}``:

* the direct engine conjugates ``g0`` by every element of an exact orbit
  ball and deduplicates the resulting matrices;
* the geometric engine enumerates cosets of the centraliser ``<root>``
  through canonical representatives and counts those whose translate of the
  convex set of ``g0`` lies within ``psi(t)`` of the basepoint.

Both engines also count on the conjugators of radius ``R`` alone and refuse
to publish if the two enumerations differ (saturation check).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .analysis import Histogram, discrepancy_stats
from .displacement import (
    ConjClassInvariants,
    disp_para_signed,
    invariants_of,
    psi_exact,
    psi_para_signed,
)
from .groups import free
from .groups.fuchsian import (
    GroupSpec,
    OrbitBall,
    canonical_rows,
    inverse_orbit_points,
    lex_order,
    matrix_ball_enumerate,
    orbit_distances,
    orbit_points,
    row_keys,
    rows_of,
    safe_matmul,
)
from .hyp_core import (
    DomainError,
    Horoball,
    Isometry2,
    Kind,
    KindError,
    classify,
    dist_h2,
    fixed_points,
    parabolic_data,
)

THRESHOLD_TOL = 1e-9
BFS_MARGIN = 1.0
BFS_LAYERS = 3


class SaturationError(RuntimeError):
    """Counts changed when the conjugator ball was enlarged."""


class EngineMismatchError(RuntimeError):
    pass


@dataclass(frozen=True)
class CountSeries:
    thresholds: tuple
    counts: tuple
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if len(self.thresholds) != len(self.counts):
            raise ValueError("one count per threshold")
        if any(b <= a for a, b in zip(self.thresholds, self.thresholds[1:])):
            raise ValueError("thresholds must be strictly increasing")
        if any(b < a for a, b in zip(self.counts, self.counts[1:])) or any(c < 0 for c in self.counts):
            raise ValueError("counts must be nonnegative and nondecreasing")

    def at(self, t: float) -> int:
        i = int(np.searchsorted(np.asarray(self.thresholds), t + THRESHOLD_TOL, side="right")) - 1
        return 0 if i < 0 else int(self.counts[i])


@dataclass(frozen=True)
class DirectionSample:
    """Unit tangent directions at the basepoint towards ``a x0``, one per counted conjugate."""

    angles: tuple
    threshold: float
    dists: tuple = field(default=(), repr=False)

    def restrict(self, t: float) -> "DirectionSample":
        if not self.dists:
            raise ValueError("sample carries no distances")
        if t > self.threshold + THRESHOLD_TOL:
            raise ValueError("cannot extend a sample beyond its threshold")
        keep = [(a, d) for a, d in zip(self.angles, self.dists) if d <= t + THRESHOLD_TOL]
        return DirectionSample(tuple(a for a, _ in keep), t, tuple(d for _, d in keep))


def thresholds_for(t_max: float, step: float) -> np.ndarray:
    if not step > 0:
        raise ValueError("step must be positive")
    k = int(math.floor(t_max / step + 1e-9))
    return np.round(np.arange(k + 1) * step, 12)


# -- class resolution ------------------------------------------------------------


@dataclass(frozen=True)
class ResolvedClass:
    """A class representative with its primitive root, convex set and invariants."""

    g0: Isometry2
    root: Isometry2
    power: int
    inv: ConjClassInvariants
    label: str
    axis: tuple | None = None
    horoball: Horoball | None = None


def _as_element(group: GroupSpec, cls) -> tuple[Isometry2, Isometry2, int, str]:
    if isinstance(cls, str):
        word = free.parse_word(cls, group.label_map())
        if not word:
            raise DomainError("the identity class is excluded")
        g0 = group.word_matrix(word)
        if group.free_basis:
            rword, power = free.element_root(word)
            return g0, group.word_matrix(rword), power, cls
        return g0, g0, 1, cls
    if isinstance(cls, Isometry2):
        g0 = cls
    else:
        g0 = Isometry2(*(int(x) for x in cls))
    if not g0.exact:
        raise DomainError("class representative must be an exact matrix")
    # inline matrices are taken as primitive
    return g0, g0, 1, "[" + ",".join(str(e) for e in g0.entries) + "]"


def cusp_horoball(xi, root: Isometry2, sinh_half: float) -> Horoball:
    """Horoball at ``xi`` on whose boundary the primitive ``root`` has ``sinh(l/2) = sinh_half``."""
    trial = Horoball(None if xi is None else complex(xi).real, 1.0)
    s1 = math.sinh(parabolic_data(root, trial).length / 2.0)
    if xi is None:
        return Horoball(None, s1 / sinh_half)
    return Horoball(complex(xi).real, sinh_half / s1)


def resolve_class(
    group: GroupSpec,
    cls,
    *,
    horoball: Horoball | float | None = None,
    invariants: ConjClassInvariants | None = None,
    iota: int = 1,
    index: int = 1,
) -> ResolvedClass:
    """Resolve a word or matrix into the data both engines need.

    ``horoball`` may be a Horoball or a number: the latter is read as the
    target ``sinh(l/2)`` of the primitive root on the horosphere.
    """
    if not group.torsion_free:
        raise DomainError("counting is restricted to torsion-free groups")
    g0, root, power, label = _as_element(group, cls)
    kind = classify(g0).kind
    if kind is Kind.IDENTITY:
        raise DomainError("the identity class is excluded")
    if kind is Kind.ELLIPTIC:
        raise KindError("elliptic classes need a group with torsion")
    hb = None
    ends = None
    if kind is Kind.PARABOLIC:
        xi = fixed_points(g0)[0]
        if isinstance(horoball, Horoball):
            hb = horoball
        else:
            target = horoball if horoball is not None else (group.cusp_sinh_half_length or 0.5)
            hb = cusp_horoball(xi, root, float(target))
        inv = invariants_of(g0, hb, iota, index)
    else:
        ends = fixed_points(root)
        inv = invariants_of(g0, None, iota, index)
    if invariants is not None:
        if invariants.kind is not inv.kind or abs(invariants.length - inv.length) > 1e-9 * max(1.0, inv.length):
            raise KindError(
                f"supplied invariants ({invariants.kind.value}, {invariants.length}) disagree with the "
                f"representative ({inv.kind.value}, {inv.length})"
            )
    return ResolvedClass(g0, root, power, inv, label, ends, hb)


# -- geometry on arrays ----------------------------------------------------------


def _dist_to_geodesic(z: np.ndarray, ends: tuple) -> np.ndarray:
    r1, r2 = ends
    if r2 is None:
        r1, r2 = r2, r1
    x, y = z.real, z.imag
    if r1 is None:
        return np.arcsinh(np.abs(x - r2) / y)
    return np.arcsinh(np.abs((x - r1) * (x - r2) + y * y) / (y * abs(r1 - r2)))


def _signed_horo(z: np.ndarray, hb: Horoball) -> np.ndarray:
    if hb.base is None:
        return np.log(hb.size / z.imag)
    xi = complex(hb.base).real
    return np.log(np.abs(z - xi) ** 2 / (hb.size * z.imag))


def distance_to_convex(rc: ResolvedClass, z: np.ndarray) -> np.ndarray:
    """Distance to the axis, or signed distance to the horoball, of the class representative."""
    if rc.inv.kind is Kind.LOXODROMIC:
        return _dist_to_geodesic(z, rc.axis)
    return _signed_horo(z, rc.horoball)


# -- conjugator ball -----------------------------------------------------------------

_BALL_CACHE: dict = {}


def conjugator_ball(group: GroupSpec, R: float, x0: complex, workers: int = 1) -> OrbitBall:
    """Exact orbit ball, reusing a cached larger ball for the same group and basepoint."""
    key = (tuple(g.entries for g in group.generators), complex(x0))
    hit = _BALL_CACHE.get(key)
    if hit is not None and hit.radius >= R:
        return hit.within(R) if hit.radius > R else hit
    ball = matrix_ball_enumerate(group, R, basepoint=x0, margin=BFS_MARGIN, layers=BFS_LAYERS, workers=workers)
    _BALL_CACHE[key] = ball
    return ball


def clear_ball_cache() -> None:
    _BALL_CACHE.clear()


def psi_of(rc: ResolvedClass, t: float) -> float | None:
    """Largest admissible distance to the convex set at displacement ``t`` (None: nothing counts)."""
    inv = rc.inv
    if inv.kind is Kind.PARABOLIC:
        return psi_para_signed(inv.length, t) if t > 0 else None
    if t < inv.min_displacement:
        return None
    return psi_exact(inv, t)


def completeness_margin(rc: ResolvedClass, x0: complex) -> float:
    """Extra radius so that every coset meeting ``psi(t)`` has a representative in the ball."""
    root_len = classify(rc.root).length if rc.inv.kind is Kind.LOXODROMIC else 0.0
    if rc.inv.kind is Kind.LOXODROMIC:
        return float(_dist_to_geodesic(np.array([x0]), rc.axis)[0]) + root_len + 1.0
    sigma0 = float(_signed_horo(np.array([x0]), rc.horoball)[0])
    step = dist_h2(x0, rc.root.numeric()(x0))
    return abs(sigma0) + step + 1.0


def ball_radius(rc: ResolvedClass, t_max: float, x0: complex, margin: float | None) -> float:
    psi = psi_of(rc, t_max)
    base = 0.0 if psi is None else max(psi, 0.0)
    return base + (completeness_margin(rc, x0) if margin is None else margin)


# -- engines -----------------------------------------------------------------


def _group_min(keys: np.ndarray, values: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """First index and minimum of ``values`` per distinct key."""
    uniq, first, inverse = np.unique(keys, return_index=True, return_inverse=True)
    mins = np.full(len(uniq), np.inf)
    np.minimum.at(mins, inverse.ravel(), values)
    return first, mins


def _cumulative(values: np.ndarray, ts: np.ndarray, limits: np.ndarray | None = None) -> list[int]:
    if limits is None:
        limits = ts + THRESHOLD_TOL
    v = np.sort(values)
    return [int(n) for n in np.searchsorted(v, limits, side="right")]


def _saturated(full: list[int], inner: list[int], engine: str, R: float) -> None:
    if full != inner:
        bad = next(i for i, (a, b) in enumerate(zip(full, inner)) if a != b)
        raise SaturationError(
            f"{engine} counts changed at threshold index {bad} when the conjugator radius grew "
            f"from {R:.3f} to {R + 1:.3f}; pass a larger margin"
        )


def _ball_and_radius(group, rc, t_max, x0, margin, workers):
    R = ball_radius(rc, t_max, x0, margin)
    ball = conjugator_ball(group, R + 1.0, x0, workers)
    return R, ball


def _meta(engine, group, rc, x0, R, margin) -> dict:
    return {
        "engine": engine,
        "group": group.name,
        "class": rc.label,
        "kind": rc.inv.kind.value,
        "basepoint": [x0.real, x0.imag],
        "radius": R,
        "margin": margin,
        "saturation": "passed",
    }


def conj_count_direct(
    group: GroupSpec,
    cls,
    t_max: float,
    step: float = 0.5,
    *,
    basepoint: complex | None = None,
    margin: float | None = None,
    directions: bool = False,
    workers: int = 1,
    **resolve_kw,
):
    """Count conjugates by explicit conjugation over the orbit ball.

    Returns a CountSeries, or ``(series, DirectionSample)`` when ``directions``.
    """
    rc = cls if isinstance(cls, ResolvedClass) else resolve_class(group, cls, **resolve_kw)
    x0 = complex(group.basepoint if basepoint is None else basepoint)
    R, ball = _ball_and_radius(group, rc, t_max, x0, margin, workers)
    ts = thresholds_for(t_max, step)
    g0 = rows_of([rc.g0])
    inv_rows = canonical_rows(np.stack([ball.mats[:, 3], -ball.mats[:, 1], -ball.mats[:, 2], ball.mats[:, 0]], axis=1))
    conj = safe_matmul(safe_matmul(ball.mats, np.broadcast_to(g0, ball.mats.shape)), inv_rows)
    first, min_r = _group_min(row_keys(conj), ball.dists)
    alphas = conj[first]
    d = orbit_distances(alphas, x0)
    full = _cumulative(d, ts)
    inner = _cumulative(d[min_r <= R], ts)
    _saturated(full, inner, "direct", R)
    series = CountSeries(tuple(float(t) for t in ts), tuple(full), _meta("direct", group, rc, x0, R, margin))
    if not directions:
        return series
    keep = d <= ts[-1] + THRESHOLD_TOL
    sel, dsel = alphas[keep], d[keep]
    by_row = lex_order(sel)
    order = by_row[np.argsort(dsel[by_row], kind="stable")]
    angles = tangent_angles(x0, orbit_points(sel[order], x0))
    return series, DirectionSample(tuple(angles.tolist()), float(ts[-1]), tuple(dsel[order].tolist()))


def tangent_angles(x0: complex, ys: np.ndarray) -> np.ndarray:
    """Vectorised ``tangent_angle``."""
    u = (ys - x0.real) / x0.imag
    disc = (u - 1j) / (u + 1j)
    return np.mod(np.angle(disc) + math.pi / 2, 2 * math.pi)


def _rows_of_root(rc: ResolvedClass) -> np.ndarray:
    return rows_of([rc.root])


def _frob(m: np.ndarray) -> np.ndarray:
    return (m.astype(object) ** 2).sum(axis=1) if m.dtype == object else (m**2).sum(axis=1)


def _lex_min_choice(cands: list[np.ndarray], norms: list[np.ndarray]) -> np.ndarray:
    """Among candidate rows, keep the smallest norm, ties broken lexicographically."""
    best, best_n = cands[0].copy(), norms[0].copy()
    for c, n in zip(cands[1:], norms[1:]):
        better = n < best_n
        tie = n == best_n
        if tie.any():
            tie_idx = np.flatnonzero(tie)
            for i in tie_idx:
                if tuple(c[i]) < tuple(best[i]):
                    better[i] = True
        best[better] = c[better]
        best_n[better] = n[better]
    return best


def canonical_coset_reps(mats: np.ndarray, rc: ResolvedClass) -> np.ndarray:
    """The representative of ``g <root>`` with least Frobenius norm (ties: lexicographic)."""
    rho = _rows_of_root(rc)
    if rc.inv.kind is Kind.PARABOLIC:
        return _parabolic_reps(mats, rho)
    rho_inv = rows_of([rc.root.inverse()])
    cur = mats.copy()
    cur_n = _frob(cur)
    active = np.ones(len(cur), dtype=bool)
    while active.any():
        idx = np.flatnonzero(active)
        sub = cur[idx]
        up = safe_matmul(sub, np.broadcast_to(rho, sub.shape))
        dn = safe_matmul(sub, np.broadcast_to(rho_inv, sub.shape))
        nu, nd = _frob(up), _frob(dn)
        n0 = cur_n[idx]
        go_up = nu < n0
        go_dn = (nd < n0) & ~go_up
        moved = go_up | go_dn
        if cur.dtype != up.dtype:
            cur = cur.astype(object)
        nxt = np.where(go_up[:, None], up, np.where(go_dn[:, None], dn, sub))
        cur[idx] = nxt
        cur_n = cur_n.astype(object) if nu.dtype == object else cur_n
        cur_n[idx] = np.where(go_up, nu, np.where(go_dn, nd, n0))
        active[idx[~moved]] = False
    up = safe_matmul(cur, np.broadcast_to(rho, cur.shape))
    dn = safe_matmul(cur, np.broadcast_to(rho_inv, cur.shape))
    return _lex_min_choice([cur, up, dn], [cur_n, _frob(up), _frob(dn)])


def _parabolic_reps(mats: np.ndarray, rho: np.ndarray) -> np.ndarray:
    r = rho[0].astype(object)
    if r[0] + r[3] < 0:
        r = -r
    nil = np.array([r[0] - 1, r[1], r[2], r[3] - 1], dtype=object)
    m = mats.astype(object)
    a, b, c, d = (m[:, i] for i in range(4))
    # rows of g N, so that g rho^k = g + k g N
    gn = np.stack([a * nil[0] + b * nil[2], a * nil[1] + b * nil[3], c * nil[0] + d * nil[2], c * nil[1] + d * nil[3]], axis=1)
    ip = (m * gn).sum(axis=1)
    nn = (gn * gn).sum(axis=1)
    k_lo = np.array([(-x) // y for x, y in zip(ip, nn)], dtype=object)
    cands, norms = [], []
    for k in (k_lo, k_lo + 1):
        rep = m + k[:, None] * gn
        cands.append(canonical_rows(rep))
        norms.append((rep * rep).sum(axis=1))
    out = _lex_min_choice(cands, norms)
    if mats.dtype != object and all(abs(int(v)) < 2**62 for v in out.ravel()):
        return out.astype(np.int64)
    return out


def conj_count_geometric(
    group: GroupSpec,
    cls,
    t_max: float,
    step: float = 0.5,
    *,
    basepoint: complex | None = None,
    margin: float | None = None,
    workers: int = 1,
    **resolve_kw,
) -> CountSeries:
    """Count cosets ``g Z(g0)`` with ``d(x0, g C) <= psi(t)``."""
    rc = cls if isinstance(cls, ResolvedClass) else resolve_class(group, cls, **resolve_kw)
    x0 = complex(group.basepoint if basepoint is None else basepoint)
    R, ball = _ball_and_radius(group, rc, t_max, x0, margin, workers)
    ts = thresholds_for(t_max, step)
    reps = canonical_coset_reps(ball.mats, rc)
    first, min_r = _group_min(row_keys(reps), ball.dists)
    s = distance_to_convex(rc, inverse_orbit_points(reps[first], x0))
    limits = np.array([_psi_limit(rc, t) for t in ts])
    full = _cumulative(s, ts, limits)
    inner = _cumulative(s[min_r <= R], ts, limits)
    _saturated(full, inner, "geometric", R)
    return CountSeries(tuple(float(t) for t in ts), tuple(full), _meta("geometric", group, rc, x0, R, margin))


def _psi_limit(rc: ResolvedClass, t: float) -> float:
    psi = psi_of(rc, t + THRESHOLD_TOL)
    return -np.inf if psi is None else psi


def count_both(group: GroupSpec, cls, t_max: float, step: float = 0.5, **kw) -> tuple[CountSeries, CountSeries]:
    """Run both engines and insist on identical integer series."""
    directions = kw.pop("directions", False)
    resolve_kw = {k: kw.pop(k) for k in ("horoball", "invariants", "iota", "index") if k in kw}
    rc = resolve_class(group, cls, **resolve_kw)
    direct = conj_count_direct(group, rc, t_max, step, directions=directions, **kw)
    geo = conj_count_geometric(group, rc, t_max, step, **kw)
    dser = direct[0] if directions else direct
    if dser.counts != geo.counts:
        raise EngineMismatchError(f"direct {dser.counts} != geometric {geo.counts}")
    return direct, geo


# -- direction statistics -----------------------------------------------------------


def direction_measure(sample: DirectionSample, bins: int = 16) -> Histogram:
    if not sample.angles:
        raise ValueError("empty direction sample")
    if bins < 1:
        raise ValueError("need at least one bin")
    edges = np.linspace(0.0, 2 * math.pi, bins + 1)
    idx = np.minimum((np.asarray(sample.angles) / (2 * math.pi) * bins).astype(int), bins - 1)
    counts = np.bincount(idx, minlength=bins)
    return Histogram(tuple(int(c) for c in counts), tuple(float(e) for e in edges))


def direction_discrepancy(sample: DirectionSample, bins: int = 16):
    return discrepancy_stats(direction_measure(sample, bins))


# -- conjugates of a cusp subgroup ----------------------------------------------------


@dataclass(frozen=True)
class SubgroupSpec:
    """A cyclic parabolic subgroup ``<generator>`` with its horoball."""

    generators: tuple
    horoball: Horoball | None = None
    c_minus: float | None = None
    c_plus: float | None = None

    def __post_init__(self):
        if self.c_minus is not None and self.c_plus is not None and self.c_minus > self.c_plus:
            raise ValueError("c_minus must not exceed c_plus")


@dataclass(frozen=True)
class SubgroupCount:
    series: CountSeries
    min_displacements: tuple
    bound_violations: int
    matrix_check_error: float


def subgroup_conj_count(
    group: GroupSpec,
    sub: SubgroupSpec,
    t_max: float,
    step: float = 0.5,
    *,
    basepoint: complex | None = None,
    margin: float | None = None,
    workers: int = 1,
) -> SubgroupCount:
    """Count conjugate subgroups ``g G0 g^-1`` by their least displacement at ``x0``."""
    if len(sub.generators) != 1:
        raise DomainError("only cyclic cusp subgroups satisfy the verifiable translation conditions")
    if not group.torsion_free:
        raise DomainError("the ambient group must be torsion-free")
    gen = sub.generators[0]
    if isinstance(gen, str):
        gen = group.word_matrix(free.parse_word(gen, group.label_map()))
    elif not isinstance(gen, Isometry2):
        gen = Isometry2(*(int(x) for x in gen))
    if classify(gen).kind is not Kind.PARABOLIC:
        raise KindError("the subgroup generator must be parabolic")
    rc = resolve_class(group, gen, horoball=sub.horoball)
    ell = rc.inv.length
    c_minus = ell if sub.c_minus is None else sub.c_minus
    c_plus = ell if sub.c_plus is None else sub.c_plus
    if not c_minus - 1e-12 <= ell <= c_plus + 1e-12:
        raise DomainError(f"translation length {ell} on the horosphere is outside [{c_minus}, {c_plus}]")
    x0 = complex(group.basepoint if basepoint is None else basepoint)
    R, ball = _ball_and_radius(group, rc, t_max, x0, margin, workers)
    ts = thresholds_for(t_max, step)
    reps = canonical_coset_reps(ball.mats, rc)
    first, min_r = _group_min(row_keys(reps), ball.dists)
    reps = reps[first]
    sigma = distance_to_convex(rc, inverse_orbit_points(reps, x0))
    law = np.array([disp_para_signed(s, ell) for s in sigma])
    # least displacement over the nontrivial subgroup elements, attained at g gen^{+-1} g^-1
    g = rows_of([gen])
    inv_rows = canonical_rows(np.stack([reps[:, 3], -reps[:, 1], -reps[:, 2], reps[:, 0]], axis=1))
    conj = safe_matmul(safe_matmul(reps, np.broadcast_to(g, reps.shape)), inv_rows)
    direct = orbit_distances(conj, x0)
    err = float(np.max(np.abs(direct - law) / np.maximum(1.0, law))) if len(law) else 0.0
    pos = sigma > 0
    lower = 2.0 * np.arcsinh(np.cosh(sigma[pos]) * math.sinh(c_minus / 2.0))
    upper = 2.0 * sigma[pos] + c_plus
    tol = 1e-9
    violations = int(np.sum(law[pos] < lower - tol) + np.sum(law[pos] > upper + tol))
    full = _cumulative(law, ts)
    inner = _cumulative(law[min_r <= R], ts)
    _saturated(full, inner, "subgroup", R)
    keep = law <= ts[-1] + THRESHOLD_TOL
    meta = _meta("subgroup", group, rc, x0, R, margin)
    meta.update(c_minus=c_minus, c_plus=c_plus)
    series = CountSeries(tuple(float(t) for t in ts), tuple(full), meta)
    return SubgroupCount(series, tuple(np.sort(law[keep]).tolist()), violations, err)

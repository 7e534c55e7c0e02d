"""Finitely generated Fuchsian groups given by exact integer generators.

``matrix_ball_enumerate`` lists every group element moving the basepoint by
at most ``R``.  Elements are int64 rows ``(a, b, c, d)`` with the sign
normalised, so row equality is isometry equality; rows are promoted to
Python integers if an entry could overflow.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from ..hyp_core import DomainError, Isometry2

INT64_SAFE = 2**31


class SaturationError(RuntimeError):
    """The enumeration did not stabilise under the saturation check."""


class ResourceCapError(RuntimeError):
    """The ball grew past the configured cap (possibly a non-discrete group)."""


@dataclass
class GroupSpec:
    name: str
    generators: list
    labels: list
    basepoint: complex = 1j
    delta: float | None = None
    genus: int | None = None
    punctures: int | None = None
    covolume: float | None = None
    torsion_free: bool = True
    free_basis: bool = False
    cusp_sinh_half_length: float | None = None

    def __post_init__(self):
        if len(self.generators) != len(self.labels):
            raise ValueError("one label per generator")
        for g in self.generators:
            if not isinstance(g, Isometry2) or not g.exact or not all(isinstance(e, int) for e in g.entries):
                raise DomainError("generators must be exact integer matrices of determinant 1")
        if not complex(self.basepoint).imag > 0:
            raise DomainError("basepoint must lie in the upper half-plane")
        if self.genus is not None and self.punctures is not None:
            expected = 2 * math.pi * (2 * self.genus + self.punctures - 2)
            if self.covolume is None:
                self.covolume = expected
            elif abs(self.covolume - expected) > 1e-9 * expected:
                raise ValueError(f"covolume {self.covolume} violates Gauss-Bonnet ({expected})")

    @property
    def has_lattice_data(self) -> bool:
        return self.covolume is not None

    def label_map(self) -> dict:
        return {name: i + 1 for i, name in enumerate(self.labels)}

    def word_matrix(self, word) -> Isometry2:
        m = Isometry2(1, 0, 0, 1)
        for x in word:
            g = self.generators[abs(x) - 1]
            m = m @ (g if x > 0 else g.inverse())
        return m

    def with_basepoint(self, x0: complex) -> "GroupSpec":
        from dataclasses import replace

        return replace(self, basepoint=complex(x0))


def gamma2(basepoint: complex = 1j) -> GroupSpec:
    """Principal congruence subgroup of level 2 (a thrice-punctured sphere group).

    Its maximal embedded cusp neighbourhood at infinity is ``{im z >= 1/2}``,
    where the primitive translation ``z -> z + 2`` has ``sinh(l/2) = 2``.
    """
    return GroupSpec(
        name="gamma2",
        generators=[Isometry2(1, 2, 0, 1), Isometry2(1, 0, 2, 1)],
        labels=["A", "B"],
        basepoint=basepoint,
        delta=1.0,
        genus=0,
        punctures=3,
        torsion_free=True,
        free_basis=True,
        cusp_sinh_half_length=2.0,
    )


def group_from_matrices(name: str, mats: list, labels: list | None = None, **lattice) -> GroupSpec:
    gens = [Isometry2(*(int(x) for x in m)) for m in mats]
    labels = labels or [chr(ord("A") + i) for i in range(len(gens))]
    return GroupSpec(name=name, generators=gens, labels=labels, **lattice)


# -- array helpers -------------------------------------------------------------


def canonical_rows(m: np.ndarray) -> np.ndarray:
    """Flip signs so the first nonzero entry of each row is positive."""
    first = np.where(m[..., 0] != 0, m[..., 0], m[..., 1])
    flip = first < 0
    if flip.any():
        m = m.copy()
        m[flip] = -m[flip]
    return m


def matmul_rows(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Row-wise 2x2 products; broadcasts over leading axes."""
    a, b, c, d = (x[..., i] for i in range(4))
    e, f, g, h = (y[..., i] for i in range(4))
    return np.stack([a * e + b * g, a * f + b * h, c * e + d * g, c * f + d * h], axis=-1)


def inverse_rows(m: np.ndarray) -> np.ndarray:
    return canonical_rows(np.stack([m[:, 3], -m[:, 1], -m[:, 2], m[:, 0]], axis=1))


def safe_matmul(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Product with overflow escalation from int64 to Python integers."""
    if x.dtype == object or y.dtype == object or _maxabs(x) * _maxabs(y) >= INT64_SAFE**2:
        return canonical_rows(matmul_rows(x.astype(object), y.astype(object)))
    return canonical_rows(matmul_rows(x, y))


def _maxabs(m: np.ndarray) -> int:
    return int(np.abs(m).max()) if m.size else 0


def row_keys(m: np.ndarray) -> np.ndarray:
    if m.dtype == object:
        out = np.empty(len(m), dtype=object)
        out[:] = [tuple(r) for r in m.tolist()]
        return out
    return np.ascontiguousarray(m).view(np.dtype((np.void, m.dtype.itemsize * 4))).ravel()


def unique_rows(m: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Distinct rows and the index of a first occurrence of each."""
    if m.dtype == object:
        seen: dict = {}
        for i, k in enumerate(row_keys(m)):
            seen.setdefault(k, i)
        idx = np.array(sorted(seen.values(), key=lambda i: row_keys(m[i : i + 1])[0]), dtype=np.int64)
        return m[idx], idx
    _, idx = np.unique(row_keys(m), return_index=True)
    return m[idx], idx


def member_rows(m: np.ndarray, pool: np.ndarray) -> np.ndarray:
    if len(pool) == 0 or len(m) == 0:
        return np.zeros(len(m), dtype=bool)
    if m.dtype == object or pool.dtype == object:
        s = set(row_keys(pool.astype(object)).tolist())
        return np.array([k in s for k in row_keys(m.astype(object))], dtype=bool)
    return np.isin(row_keys(m), row_keys(pool))


def lex_order(m: np.ndarray) -> np.ndarray:
    if m.dtype == object:
        return np.array(sorted(range(len(m)), key=lambda i: tuple(m[i])), dtype=np.int64)
    return np.lexsort(m.T[::-1])


def orbit_points(m: np.ndarray, x0: complex) -> np.ndarray:
    """``g x0`` for each row; the imaginary part uses ``det = 1`` to avoid cancellation."""
    a, b, c, d = (m[:, i].astype(float) for i in range(4))
    num = a * x0 + b
    den = c * x0 + d
    n2 = den.real**2 + den.imag**2
    re = (num.real * den.real + num.imag * den.imag) / n2
    return re + 1j * (complex(x0).imag / n2)


def inverse_orbit_points(m: np.ndarray, x0: complex) -> np.ndarray:
    """``g^-1 x0`` for each row."""
    inv = np.stack([m[:, 3], -m[:, 1], -m[:, 2], m[:, 0]], axis=1)
    return orbit_points(inv, x0)


def orbit_distances(m: np.ndarray, x0: complex) -> np.ndarray:
    """``d(x0, g x0)`` for each row ``g`` (cancellation-free form)."""
    x0 = complex(x0)
    y = orbit_points(m, x0)
    return 2.0 * np.arcsinh(np.abs(y - x0) / (2.0 * np.sqrt(x0.imag * y.imag)))


def rows_of(gs) -> np.ndarray:
    return np.array([[int(e) for e in g.entries] for g in gs], dtype=np.int64)


# -- enumeration ---------------------------------------------------------------


@dataclass
class OrbitBall:
    mats: np.ndarray
    dists: np.ndarray
    radius: float
    basepoint: complex
    margin: float
    layers: int
    meta: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.mats)

    def within(self, r: float) -> "OrbitBall":
        keep = self.dists <= r
        return OrbitBall(self.mats[keep], self.dists[keep], r, self.basepoint, self.margin, self.layers, dict(self.meta))

    def isometries(self) -> list:
        return [Isometry2(*(int(x) for x in row)) for row in self.mats.tolist()]

    def keys(self) -> set:
        return set(map(tuple, self.mats.tolist()))


def _expand(frontier: np.ndarray, gens: np.ndarray, workers: int) -> np.ndarray:
    if workers <= 1 or len(frontier) < 4096:
        return _expand_chunk(frontier, gens)
    chunks = np.array_split(frontier, workers)
    with ThreadPoolExecutor(max_workers=workers) as pool:
        parts = list(pool.map(lambda c: _expand_chunk(c, gens), chunks))
    return np.concatenate(parts)


def _expand_chunk(frontier: np.ndarray, gens: np.ndarray) -> np.ndarray:
    prods = safe_matmul(frontier[:, None, :], gens[None, :, :])
    return prods.reshape(-1, 4)


def matrix_ball_enumerate(
    spec: GroupSpec,
    R: float,
    *,
    basepoint: complex | None = None,
    margin: float = 2.0,
    layers: int = 3,
    cap: int = 20_000_000,
    workers: int = 1,
) -> OrbitBall:
    """All ``g`` with ``d(x0, g x0) <= R``.

    Breadth-first search over words in the generators, keeping frontier
    elements within ``R + margin``.  The search stops when the frontier is
    empty or when ``layers`` consecutive spheres add nothing within ``R``;
    in the latter case one further sphere is explored and must add nothing
    either.  The result is sorted, so it does not depend on traversal order
    or on ``workers``.
    """
    if R < 0:
        raise DomainError("radius must be nonnegative")
    x0 = complex(spec.basepoint if basepoint is None else basepoint)
    gen_rows = rows_of(spec.generators)
    gens = np.concatenate([gen_rows, inverse_rows(gen_rows)])
    gens, _ = unique_rows(gens)
    ident = np.array([[1, 0, 0, 1]], dtype=np.int64)
    found = [ident]
    found_d = [np.zeros(1)]
    prev = np.empty((0, 4), dtype=np.int64)
    cur = ident
    total = 1
    quiet = 0
    depth = 0
    check_pending = False
    while len(cur):
        depth += 1
        cand = _expand(cur, gens, workers)
        cand, _ = unique_rows(cand)
        fresh = ~member_rows(cand, cur) & ~member_rows(cand, prev)
        cand = cand[fresh]
        d = orbit_distances(cand, x0)
        keep = d <= R + margin
        prev, cur = cur, cand[keep]
        inside = d <= R
        n_in = int(inside.sum())
        if n_in:
            if check_pending:
                raise SaturationError(
                    f"sphere {depth} added {n_in} elements after {layers} quiet spheres; raise `layers`"
                )
            found.append(cand[inside])
            found_d.append(d[inside])
            total += n_in
            quiet = 0
            if total > cap:
                raise ResourceCapError(f"ball of radius {R} exceeds {cap} elements")
        else:
            quiet += 1
            if check_pending:
                break
            if quiet >= layers:
                check_pending = True
    mats = np.concatenate([m.astype(object) if any(f.dtype == object for f in found) else m for m in found])
    dists = np.concatenate(found_d)
    order = lex_order(mats)
    return OrbitBall(mats[order], dists[order], R, x0, margin, layers, {"depth": depth, "group": spec.name})

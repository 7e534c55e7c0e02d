"""Integer Heisenberg groups ``A x Z`` with ``(a, z)(a', z') = (a + a', z + z' + <a, a'>)``.

Word-metric balls are computed by a layered breadth-first search that only
keeps the two most recent spheres: in a Cayley graph the neighbours of the
sphere of radius r lie in spheres r-1, r and r+1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import reduce as _fold

import numpy as np


class RankError(ValueError):
    pass


def standard_form(k: int) -> np.ndarray:
    """Standard symplectic form on Z^(2k): <e_i, e_{k+i}> = 1."""
    f = np.zeros((2 * k, 2 * k), dtype=np.int64)
    for i in range(k):
        f[i, k + i] = 1
        f[k + i, i] = -1
    return f


@dataclass(frozen=True)
class HeisElt:
    a: tuple
    z: int


@dataclass
class HeisenbergSpec:
    rank: int
    form: np.ndarray = None
    generators: list = field(default=None)

    def __post_init__(self):
        k = self.rank
        if self.form is None:
            self.form = standard_form(k)
        self.form = np.asarray(self.form, dtype=np.int64)
        if self.form.shape != (2 * k, 2 * k):
            raise RankError(f"form must be {2 * k}x{2 * k}")
        if not np.array_equal(self.form, -self.form.T):
            raise ValueError("form must be antisymmetric")
        if round(np.linalg.det(self.form.astype(float))) == 0:
            raise ValueError("form must be nondegenerate")
        if self.generators is None:
            eye = np.eye(2 * k, dtype=np.int64)
            self.generators = [HeisElt(tuple(int(x) for x in eye[i]), 0) for i in range(2 * k)]

    def pair(self, a, b) -> int:
        a, b = self._vec(a), self._vec(b)
        return int(a @ self.form @ b)

    def _vec(self, a) -> np.ndarray:
        v = np.asarray(a, dtype=np.int64)
        if v.shape != (2 * self.rank,):
            raise RankError(f"expected a vector of length {2 * self.rank}, got {v.shape}")
        return v

    def identity(self) -> HeisElt:
        return HeisElt((0,) * (2 * self.rank), 0)

    def multiply(self, g: HeisElt, h: HeisElt) -> HeisElt:
        a = self._vec(g.a) + self._vec(h.a)
        return HeisElt(tuple(int(x) for x in a), g.z + h.z + self.pair(g.a, h.a))

    def invert(self, g: HeisElt) -> HeisElt:
        # <a, a> = 0 for an antisymmetric form
        return HeisElt(tuple(-int(x) for x in self._vec(g.a)), -g.z)

    def conjugate(self, g: HeisElt, by: HeisElt) -> HeisElt:
        return self.multiply(self.multiply(by, g), self.invert(by))

    def power(self, g: HeisElt, n: int) -> HeisElt:
        base = g if n >= 0 else self.invert(g)
        return _fold(self.multiply, [base] * abs(n), self.identity())

    def commutator(self, g: HeisElt, h: HeisElt) -> HeisElt:
        return _fold(self.multiply, [g, h, self.invert(g), self.invert(h)])

    def in_class(self, g: HeisElt, g0: HeisElt) -> bool:
        """Membership in the conjugacy class ``{(a0, z0 + 2<a, a0>)}``."""
        if tuple(g.a) != tuple(g0.a):
            return False
        step = 2 * self._class_gcd(g0)
        return step == 0 and g.z == g0.z or step != 0 and (g.z - g0.z) % step == 0

    def _class_gcd(self, g0: HeisElt) -> int:
        row = self.form @ self._vec(g0.a)
        return math.gcd(*(int(x) for x in row))


class CentralElementError(ValueError):
    """The conjugacy class of a central element is a singleton."""


def _gen_arrays(spec: HeisenbergSpec):
    gens = list(spec.generators) + [spec.invert(g) for g in spec.generators]
    ga = np.array([g.a for g in gens], dtype=np.int64)
    gz = np.array([g.z for g in gens], dtype=np.int64)
    return ga, gz


class _Encoder:
    """Mixed-radix int64 key for elements of the radius-n ball."""

    def __init__(self, spec: HeisenbergSpec, n: int):
        ga, gz = _gen_arrays(spec)
        amax = int(np.abs(ga).max()) * n
        pairs = np.abs(ga @ spec.form @ ga.T)
        zmax = n * int(np.abs(gz).max()) + n * n * int(pairs.max())
        self.offsets = np.array([amax] * (2 * spec.rank) + [zmax], dtype=np.int64)
        self.radix = 2 * self.offsets + 1
        if float(np.prod(self.radix.astype(float))) >= 2.0**62:
            raise OverflowError("ball too large for int64 keys")

    def encode(self, a: np.ndarray, z: np.ndarray) -> np.ndarray:
        cols = np.concatenate([a, z[:, None]], axis=1) + self.offsets
        key = np.zeros(len(cols), dtype=np.int64)
        for j in range(cols.shape[1]):
            key = key * self.radix[j] + cols[:, j]
        return key


def word_length_layers(spec: HeisenbergSpec, n: int):
    """Yield ``(r, a, z)`` arrays for each sphere of radius r = 0..n."""
    ga, gz = _gen_arrays(spec)
    enc = _Encoder(spec, max(n, 1))
    dim = 2 * spec.rank
    cur_a = np.zeros((1, dim), dtype=np.int64)
    cur_z = np.zeros(1, dtype=np.int64)
    prev_keys = np.empty(0, dtype=np.int64)
    cur_keys = enc.encode(cur_a, cur_z)
    yield 0, cur_a, cur_z
    # <a, g> for each frontier element and generator
    gform = spec.form @ ga.T
    for r in range(1, n + 1):
        cand_a = (cur_a[:, None, :] + ga[None, :, :]).reshape(-1, dim)
        cand_z = (cur_z[:, None] + gz[None, :] + cur_a @ gform).reshape(-1)
        keys = enc.encode(cand_a, cand_z)
        keys, idx = np.unique(keys, return_index=True)
        fresh = ~np.isin(keys, cur_keys) & ~np.isin(keys, prev_keys)
        idx = idx[fresh]
        prev_keys, cur_keys = cur_keys, keys[fresh]
        cur_a, cur_z = cand_a[idx], cand_z[idx]
        yield r, cur_a, cur_z


def heis_conj_series(spec: HeisenbergSpec, g0: HeisElt, n_max: int) -> list[int]:
    """Cumulative counts ``N(n)`` for n = 0..n_max of class elements in the word ball."""
    if all(x == 0 for x in g0.a):
        raise CentralElementError("conjugacy class is a singleton")
    a0 = np.asarray(g0.a, dtype=np.int64)
    step = 2 * spec._class_gcd(g0)
    counts = []
    total = 0
    for _, a, z in word_length_layers(spec, n_max):
        hit = np.all(a == a0, axis=1) & ((z - g0.z) % step == 0)
        total += int(hit.sum())
        counts.append(total)
    return counts


def heis_conj_count(spec: HeisenbergSpec, g0: HeisElt, n: int) -> int:
    return heis_conj_series(spec, g0, n)[-1]


def ball_sizes(spec: HeisenbergSpec, n: int) -> list[int]:
    out, total = [], 0
    for _, a, _z in word_length_layers(spec, n):
        total += len(a)
        out.append(total)
    return out

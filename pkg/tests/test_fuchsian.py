import math

import numpy as np
import pytest

from census.groups.fuchsian import (
    GroupSpec,
    ResourceCapError,
    canonical_rows,
    gamma2,
    group_from_matrices,
    matrix_ball_enumerate,
    orbit_distances,
    safe_matmul,
)
from census.hyp_core import DomainError, Isometry2, dist_h2


def word_ball(spec: GroupSpec, max_len: int, R: float, x0: complex) -> set:
    """Every product of at most ``max_len`` generators, filtered by displacement (no pruning)."""
    gens = [g for g in spec.generators] + [g.inverse() for g in spec.generators]
    seen = {Isometry2(1, 0, 0, 1)}
    layer = list(seen)
    for _ in range(max_len):
        nxt = []
        for g in layer:
            for s in gens:
                h = g @ s
                if h not in seen:
                    seen.add(h)
                    nxt.append(h)
        layer = nxt
    return {g.entries for g in seen if dist_h2(x0, g(x0)) <= R}


class TestGroupSpec:
    def test_gamma2_lattice_data(self):
        g = gamma2()
        assert g.covolume == pytest.approx(2 * math.pi)
        assert g.delta == 1.0 and g.free_basis

    def test_gauss_bonnet_is_enforced(self):
        with pytest.raises(ValueError):
            group_from_matrices("bad", [(1, 2, 0, 1)], genus=0, punctures=3, covolume=1.0)

    def test_generators_must_be_integer(self):
        with pytest.raises(DomainError):
            GroupSpec("x", [Isometry2(1.0, 0.5, 0.0, 1.0)], ["A"])

    def test_word_matrix(self):
        g = gamma2()
        assert g.word_matrix((1, 2)) == Isometry2(5, 2, 2, 1)
        assert g.word_matrix((1, -1)).is_identity()


class TestArrays:
    def test_canonical_rows_on_stacked_arrays(self):
        m = np.array([[[-1, -2, 0, -1]], [[0, -1, 1, 0]]])
        out = canonical_rows(m)
        assert out[0, 0].tolist() == [1, 2, 0, 1]
        assert out[1, 0].tolist() == [0, 1, -1, 0]

    def test_overflow_promotes_to_python_integers(self):
        big = np.array([[2**40 + 1, 2**40, 1, 1]], dtype=np.int64)
        prod = safe_matmul(big, big)
        assert prod.dtype == object
        a, b, c, d = big[0].tolist()
        assert prod[0].tolist() == [a * a + b * c, a * b + b * d, c * a + d * c, c * b + d * d]

    def test_orbit_distances_match_scalar_distance(self):
        rows = np.array([[5, 2, 2, 1], [1, 2, 0, 1], [17135, -28322, 10368, -17137]])
        x0 = 0.5 + 1j
        for row, d in zip(rows, orbit_distances(rows, x0)):
            g = Isometry2(*(int(v) for v in row))
            assert d == pytest.approx(dist_h2(x0, g(x0)), rel=1e-12)


class TestBall:
    @pytest.mark.parametrize("x0", [1j, 0.5 + 1j])
    def test_matches_unpruned_word_enumeration(self, x0):
        g = gamma2()
        R = 4.5
        ball = matrix_ball_enumerate(g, R, basepoint=x0)
        brute_short = word_ball(g, 7, R, x0)
        brute_long = word_ball(g, 9, R, x0)
        assert brute_short == brute_long
        assert ball.keys() == brute_long

    def test_identity_and_radius(self):
        ball = matrix_ball_enumerate(gamma2(), 3.0)
        assert (1, 0, 0, 1) in ball.keys()
        assert np.all(ball.dists <= 3.0)
        assert len(ball.within(0.0)) == 1

    def test_pruning_margin_does_not_change_the_ball(self):
        g = gamma2()
        sizes = {m: len(matrix_ball_enumerate(g, 8.0, margin=m)) for m in (0.5, 1.0, 2.0, 3.0)}
        assert len(set(sizes.values())) == 1

    def test_output_is_sorted_and_worker_independent(self):
        g = gamma2()
        a = matrix_ball_enumerate(g, 9.0, workers=1)
        b = matrix_ball_enumerate(g, 9.0, workers=3)
        assert np.array_equal(a.mats, b.mats)

    def test_resource_cap(self):
        with pytest.raises(ResourceCapError):
            matrix_ball_enumerate(gamma2(), 8.0, cap=100)

    def test_negative_radius(self):
        with pytest.raises(DomainError):
            matrix_ball_enumerate(gamma2(), -1.0)

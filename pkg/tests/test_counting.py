import math

import numpy as np
import pytest

from census import counting
from census.counting import (
    CountSeries,
    DirectionSample,
    SubgroupSpec,
    conj_count_direct,
    conj_count_geometric,
    count_both,
    direction_discrepancy,
    direction_measure,
    resolve_class,
    subgroup_conj_count,
    thresholds_for,
)
from census.analysis import fit_growth_rate
from census.groups.fuchsian import GroupSpec, gamma2
from census.hyp_core import DomainError, Horoball, Isometry2, KindError, dist_h2


def brute_conjugates(spec: GroupSpec, g0: Isometry2, max_len: int, x0: complex, t: float) -> int:
    """Distinct ``w g0 w^-1`` over all words of length <= max_len, displacement at most t."""
    gens = list(spec.generators) + [g.inverse() for g in spec.generators]
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
    found = set()
    for w in seen:
        c = w @ g0 @ w.inverse()
        if dist_h2(x0, c(x0)) <= t + 1e-9:
            found.add(c)
    return len(found)


class TestSeries:
    def test_thresholds(self):
        assert thresholds_for(2.0, 0.5).tolist() == [0.0, 0.5, 1.0, 1.5, 2.0]
        with pytest.raises(ValueError):
            thresholds_for(1.0, 0.0)

    def test_validation_and_lookup(self):
        s = CountSeries((0.0, 1.0, 2.0), (0, 2, 5))
        assert s.at(1.0) == 2 and s.at(1.5) == 2 and s.at(-1.0) == 0
        with pytest.raises(ValueError):
            CountSeries((0.0, 1.0), (3, 2))
        with pytest.raises(ValueError):
            CountSeries((1.0, 0.0), (0, 0))

    def test_direction_sample_restriction(self):
        s = DirectionSample((0.1, 0.2, 0.3), 3.0, (1.0, 2.0, 3.0))
        assert s.restrict(2.0).angles == (0.1, 0.2)
        with pytest.raises(ValueError):
            s.restrict(4.0)


class TestResolution:
    def test_elliptic_and_identity_rejected(self, g2):
        with pytest.raises(KindError):
            resolve_class(g2, Isometry2(0, -1, 1, 0))
        with pytest.raises(DomainError):
            resolve_class(g2, "A*A^-1")

    def test_word_root(self, g2):
        rc = resolve_class(g2, "A^2")
        assert rc.power == 2 and rc.root == Isometry2(1, 2, 0, 1)

    def test_default_cusp_horoball(self, g2):
        rc = resolve_class(g2, "A")
        assert math.sinh(rc.inv.length / 2) == pytest.approx(2.0)
        assert rc.horoball.signed_distance(0.5j) == pytest.approx(0.0, abs=1e-14)

    def test_mismatched_invariants(self, g2):
        from census.displacement import ConjClassInvariants
        from census.hyp_core import Kind

        with pytest.raises(KindError):
            resolve_class(g2, "A*B", invariants=ConjClassInvariants(Kind.LOXODROMIC, 1.0))


class TestEngines:
    @pytest.mark.parametrize("cls", ["A*B", "A", "A*B^-1", "A^2", "B*A*B^-1", "A*A*B"])
    def test_engines_agree(self, g2, cls):
        direct, geo = count_both(g2, cls, 14.0, 0.5)
        assert direct.counts == geo.counts
        assert direct.counts[-1] > 0

    @pytest.mark.parametrize("cls,t", [("A*B", 6.0), ("A", 5.0), ("A*B^-1", 6.0)])
    def test_against_word_enumeration(self, g2, cls, t):
        rc = resolve_class(g2, cls)
        series = conj_count_direct(g2, cls, t, 0.5)
        assert series.counts[-1] == brute_conjugates(g2, rc.g0, 8, 1j, t)

    def test_small_counts_for_a(self, g2):
        # conjugates w A w^-1 with displacement at most 2 at i, by word enumeration
        expected = brute_conjugates(g2, Isometry2(1, 2, 0, 1), 6, 1j, 2.0)
        series = conj_count_direct(g2, "A", 2.0, 0.5)
        assert series.at(2.0) == expected
        assert series.at(1.5) == 0

    def test_below_minimum_displacement(self, g2):
        # AB moves i by 2 acosh 3 > 3.5
        assert conj_count_direct(g2, "A*B", 3.5, 0.5).counts[-1] == 0

    def test_conjugate_representative_gives_same_series(self, g2):
        a = conj_count_direct(g2, "A*B", 12.0)
        b = conj_count_direct(g2, "B*A*B*B^-1", 12.0)
        c = conj_count_direct(g2, "B^-1*A*B*B", 12.0)
        assert a.counts == b.counts == c.counts

    def test_matrix_input(self, g2):
        assert conj_count_direct(g2, Isometry2(5, 2, 2, 1), 10.0).counts == conj_count_direct(g2, "A*B", 10.0).counts

    def test_larger_margin_gives_same_counts(self, g2):
        rc = resolve_class(g2, "A*B")
        auto = counting.completeness_margin(rc, 1j)
        a = conj_count_geometric(g2, rc, 12.0, margin=auto)
        b = conj_count_geometric(g2, rc, 12.0, margin=auto + 1.0)
        assert a.counts == b.counts

    @pytest.mark.parametrize("height", [1.0, 2.0, 5.0])
    def test_horoball_choice_is_irrelevant(self, g2, height):
        base = conj_count_geometric(g2, "A", 12.0)
        other = conj_count_geometric(g2, "A", 12.0, horoball=Horoball(None, height))
        assert other.counts == base.counts

    def test_basepoint_changes_constant_not_rate(self, g2):
        a = conj_count_direct(g2, "A", 18.0)
        b = conj_count_direct(g2, "A", 18.0, basepoint=0.5 + 1j)
        sa = fit_growth_rate(a, (12.0, 18.0)).slope
        sb = fit_growth_rate(b, (12.0, 18.0)).slope
        assert abs(sa - sb) <= 0.05

    def test_workers_do_not_change_counts(self, g2):
        counting.clear_ball_cache()
        a = conj_count_direct(g2, "A*B", 12.0, workers=1)
        counting.clear_ball_cache()
        b = conj_count_direct(g2, "A*B", 12.0, workers=2)
        assert a.counts == b.counts


class TestDirections:
    def test_uniform_grid(self):
        angles = tuple(2 * math.pi * (k + 0.5) / 360 for k in range(360))
        d = direction_discrepancy(DirectionSample(angles, 1.0), bins=8)
        assert d.tv == pytest.approx(0.0, abs=1e-15)
        assert d.sup_cdf == pytest.approx(0.0, abs=1e-15)
        assert d.chi2 == pytest.approx(0.0, abs=1e-12)

    def test_point_mass(self):
        d = direction_discrepancy(DirectionSample((1.0,) * 10, 1.0), bins=8)
        assert d.tv == pytest.approx(0.875)

    def test_histogram_total(self, g2):
        series, sample = conj_count_direct(g2, "A*B", 10.0, directions=True)
        hist = direction_measure(sample, 16)
        assert hist.total == series.counts[-1]
        assert len(hist.edges) == 17


class TestSubgroup:
    def test_cusp_subgroup(self, g2):
        res = subgroup_conj_count(g2, SubgroupSpec(("A",)), 12.0)
        assert res.min_displacements[0] == pytest.approx(math.acosh(3), rel=1e-12)
        assert res.bound_violations == 0
        assert res.matrix_check_error < 1e-9

    def test_requires_parabolic_generator(self, g2):
        with pytest.raises(KindError):
            subgroup_conj_count(g2, SubgroupSpec(("A*B",)), 5.0)

    def test_requires_cyclic_subgroup(self, g2):
        with pytest.raises(DomainError):
            subgroup_conj_count(g2, SubgroupSpec(("A", "B")), 5.0)

    def test_constants_outside_range(self, g2):
        with pytest.raises(DomainError):
            subgroup_conj_count(g2, SubgroupSpec(("A",), c_minus=5.0, c_plus=6.0), 5.0)
        with pytest.raises(ValueError):
            SubgroupSpec(("A",), c_minus=2.0, c_plus=1.0)

import cmath
import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from census.displacement import (
    ConjClassInvariants,
    disp_ell,
    disp_loxo,
    disp_loxo_bounds,
    disp_para,
    disp_para_bounds,
    disp_para_signed,
    displacement,
    invariants_of,
    psi_asymptotic,
    psi_exact,
    psi_para_signed,
)
from census.hyp_core import DomainError, Horoball, Isometry2, Isometry3, Kind, UH3Point, dist_h2, dist_h3

finite = dict(allow_nan=False, allow_infinity=False)
lengths = st.floats(0.05, 6, **finite)
dists = st.floats(0, 6, **finite)
angles = st.floats(0.05, math.pi, **finite)


class TestLawsAgainstMatrices:
    @given(lengths, dists)
    def test_loxodromic_plane(self, ell, s):
        g = Isometry2.from_real(math.exp(ell / 2), 0, 0, math.exp(-ell / 2))
        z = complex(math.sinh(s), 1.0)
        assert disp_loxo(s, ell) == pytest.approx(dist_h2(z, g(z)), rel=1e-10)

    @given(lengths, st.floats(-math.pi, math.pi, **finite), dists, st.floats(0, 6.3, **finite))
    def test_loxodromic_space(self, ell, theta, s, phi):
        mu = cmath.exp(complex(ell, theta) / 2)
        g = Isometry3(mu, 0j, 0j, 1 / mu)
        p = UH3Point(math.sinh(s) * cmath.exp(1j * phi), 1.0)
        assert disp_loxo(s, complex(ell, theta)) == pytest.approx(dist_h3(p, g(p)), rel=1e-10)

    @given(st.floats(0.1, 5, **finite), st.floats(0.2, 5, **finite), st.floats(-3, 6, **finite))
    def test_parabolic_signed(self, b, H, s):
        ell = 2 * math.asinh(b / (2 * H))
        z = complex(0.3, H * math.exp(-s))
        g = Isometry2.from_real(1, b, 0, 1)
        assert disp_para_signed(s, ell) == pytest.approx(dist_h2(z, g(z)), rel=1e-10)

    @given(angles, st.floats(0.01, 6, **finite))
    def test_elliptic_uses_half_angle(self, theta, s):
        g = Isometry2.from_real(math.cos(theta / 2), math.sin(theta / 2), -math.sin(theta / 2), math.cos(theta / 2))
        z = 1j * math.exp(s)
        assert disp_ell(s, theta) == pytest.approx(dist_h2(z, g(z)), rel=1e-10)

    def test_on_axis_displacement_is_length(self):
        assert disp_loxo(0.0, 2.0) == pytest.approx(2.0)
        assert disp_ell(0.0, 1.0) == 0.0


class TestInverse:
    @given(lengths, dists)
    def test_psi_inverts_loxodromic(self, ell, s):
        inv = ConjClassInvariants(Kind.LOXODROMIC, ell)
        assert psi_exact(inv, disp_loxo(s, ell)) == pytest.approx(s, abs=1e-7)

    @given(lengths, st.floats(-3, 3, **finite).filter(lambda x: abs(x) > 0.05), st.floats(0.1, 5, **finite))
    def test_psi_inverts_rotating_loxodromic(self, ell, theta, s):
        inv = ConjClassInvariants(Kind.LOXODROMIC, ell, abs(theta))
        assert psi_exact(inv, disp_loxo(s, complex(ell, abs(theta)))) == pytest.approx(s, abs=1e-7)

    @given(lengths, st.floats(-4, 6, **finite))
    def test_psi_inverts_signed_parabolic(self, ell, s):
        assert psi_para_signed(ell, disp_para_signed(s, ell)) == pytest.approx(s, abs=1e-9)

    @given(angles, st.floats(0.01, 6, **finite))
    def test_psi_inverts_elliptic(self, theta, s):
        inv = ConjClassInvariants(Kind.ELLIPTIC, angle=theta)
        assert psi_exact(inv, disp_ell(s, theta)) == pytest.approx(s, abs=1e-9)

    def test_below_minimum_is_rejected(self):
        with pytest.raises(DomainError):
            psi_exact(ConjClassInvariants(Kind.LOXODROMIC, 2.0), 1.0)

    def test_parabolic_psi_clamps_inside_the_horoball(self):
        inv = ConjClassInvariants(Kind.PARABOLIC, 2.0)
        assert psi_exact(inv, 2.0) == 0.0

    @pytest.mark.parametrize(
        "inv",
        [
            ConjClassInvariants(Kind.LOXODROMIC, 1.3),
            ConjClassInvariants(Kind.LOXODROMIC, 1.3, 0.7),
            ConjClassInvariants(Kind.PARABOLIC, 0.8),
            ConjClassInvariants(Kind.ELLIPTIC, angle=1.9),
        ],
    )
    def test_asymptotic_form(self, inv):
        # psi(t) - (t/2 - log tau) decays like e^-t
        t = 40.0
        assert psi_exact(inv, t) - psi_asymptotic(inv, t) == pytest.approx(0.0, abs=1e-12)
        assert psi_asymptotic(inv, t) == pytest.approx(t / 2 - math.log(inv.tau), rel=1e-15)


class TestBounds:
    @given(lengths, dists)
    def test_loxodromic_sandwich(self, ell, s):
        lo, hi = disp_loxo_bounds(s, ell)
        assert lo <= hi + 1e-12

    @given(lengths, dists)
    def test_parabolic_sandwich(self, ell, s):
        lo, hi = disp_para_bounds(s, ell)
        assert lo == disp_para(s, ell)
        assert lo <= hi + 1e-12

    def test_gap_limit_at_large_distance(self):
        # 2 asinh(cosh s sinh(l/2)) = 2s + 2 log sinh(l/2) + O(e^-2s)
        for ell in (0.5, 2.0, 2 * math.acosh(3)):
            lo, hi = disp_loxo_bounds(10.0, ell)
            assert hi - lo == pytest.approx(ell - 2 * math.log(math.sinh(ell / 2)), abs=1e-7)

    def test_gap_at_length_two(self):
        lo, hi = disp_loxo_bounds(10.0, 2.0)
        assert hi - lo == pytest.approx(2.0 - 2 * math.log(math.sinh(1.0)), abs=1e-8)
        assert hi - lo > 2 * abs(math.log(math.sinh(1.0))) + 1.0


class TestInvariants:
    def test_tau_values(self):
        assert ConjClassInvariants(Kind.LOXODROMIC, 2.0).tau == pytest.approx(math.sinh(1.0))
        assert ConjClassInvariants(Kind.PARABOLIC, 2.0).tau == pytest.approx(2 * math.sinh(1.0))
        assert ConjClassInvariants(Kind.ELLIPTIC, angle=math.pi).tau == pytest.approx(1.0)

    def test_validation(self):
        with pytest.raises(DomainError):
            ConjClassInvariants(Kind.IDENTITY)
        with pytest.raises(DomainError):
            ConjClassInvariants(Kind.LOXODROMIC, 0.0)
        with pytest.raises(DomainError):
            ConjClassInvariants(Kind.ELLIPTIC, angle=4.0)
        with pytest.raises(DomainError):
            ConjClassInvariants(Kind.LOXODROMIC, 1.0, iota=3)

    def test_invariants_of_parabolic_needs_horoball(self):
        with pytest.raises(DomainError):
            invariants_of(Isometry2(1, 2, 0, 1))
        inv = invariants_of(Isometry2(1, 2, 0, 1), Horoball(None, 0.5))
        assert math.sinh(inv.length / 2) == pytest.approx(2.0)

    def test_dispatch(self):
        inv = ConjClassInvariants(Kind.ELLIPTIC, angle=1.0)
        assert displacement(inv, 1.0) == disp_ell(1.0, 1.0)

    def test_negative_distance_rejected(self):
        with pytest.raises(DomainError):
            disp_loxo(-0.1, 1.0)

import cmath
import math
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from census.hyp_core import (
    ConsistencyError,
    DomainError,
    Horoball,
    Isometry2,
    Isometry3,
    Kind,
    KindError,
    UH2Point,
    UH3Point,
    classify,
    complex_translation_length,
    dist_h2,
    dist_h3,
    dist_to_axis,
    elliptic_data,
    fixed_points,
    parabolic_data,
    tangent_angle,
)

finite = dict(allow_nan=False, allow_infinity=False)
reals = st.floats(-5, 5, **finite)
heights = st.floats(0.05, 5, **finite)
points = st.builds(complex, reals, heights)


def acosh_distance(p: complex, q: complex) -> float:
    # textbook form, used as an independent oracle away from the diagonal
    return math.acosh(1 + abs(p - q) ** 2 / (2 * p.imag * q.imag))


@st.composite
def sl2r(draw):
    # keep sin(phi) away from denormals, which send horoball bases to overflow
    phi = draw(st.just(0.0) | st.floats(1e-3, math.pi - 1e-3, **finite))
    r = draw(st.floats(-1.5, 1.5, **finite))
    x = draw(st.floats(-2, 2, **finite))
    k = Isometry2.from_real(math.cos(phi), -math.sin(phi), math.sin(phi), math.cos(phi))
    return k @ Isometry2.from_real(math.exp(r / 2), 0, 0, math.exp(-r / 2)) @ Isometry2.from_real(1, x, 0, 1)


class TestIsometry2:
    def test_sign_is_canonical(self):
        assert Isometry2(-1, -2, 0, -1) == Isometry2(1, 2, 0, 1)
        assert Isometry2(0, -1, 1, 0).entries == (0, 1, -1, 0)

    def test_exact_backend_requires_unit_determinant(self):
        with pytest.raises(DomainError):
            Isometry2(2, 0, 0, 1)
        assert Isometry2(Fraction(1, 2), 0, 0, 2).exact

    def test_numeric_backend_tolerance(self):
        Isometry2(1.0, 1e-13, 0.0, 1.0)
        with pytest.raises(DomainError):
            Isometry2(1.0 + 1e-9, 0.0, 0.0, 1.0)

    def test_from_real_rejects_orientation_reversing(self):
        with pytest.raises(DomainError):
            Isometry2.from_real(1, 0, 0, -1)

    def test_mobius_action_and_infinity(self):
        g = Isometry2(1, 2, 0, 1)
        assert g(1j) == 2 + 1j
        assert g(None) is None
        assert Isometry2(0, -1, 1, 0)(0.0) is None

    def test_inverse(self):
        g = Isometry2(5, 2, 2, 1)
        assert (g @ g.inverse()).is_identity()


class TestClassify:
    def test_trace_six_is_loxodromic(self):
        k = classify(Isometry2(5, 2, 2, 1))
        assert k.kind is Kind.LOXODROMIC
        assert k.length == pytest.approx(2 * math.acosh(3), rel=1e-15)

    def test_exact_parabolic(self):
        k = classify(Isometry2(1, 2, 0, 1))
        assert k.kind is Kind.PARABOLIC and not k.ambiguous

    def test_numeric_parabolic_band_is_flagged(self):
        k = classify(Isometry2.from_real(1.0, 2.0, 1e-11, 1.0 + 2e-11))
        assert k.kind is Kind.PARABOLIC and k.ambiguous

    def test_elliptic_angle(self):
        t = 1.1
        g = Isometry2.from_real(math.cos(t / 2), math.sin(t / 2), -math.sin(t / 2), math.cos(t / 2))
        k = classify(g)
        assert k.kind is Kind.ELLIPTIC and k.angle == pytest.approx(t, rel=1e-12)

    def test_identity(self):
        assert classify(Isometry2(1, 0, 0, 1)).kind is Kind.IDENTITY

    @given(st.floats(0.1, 5, **finite), st.floats(-3.1, 3.1, **finite))
    def test_complex_length_recovered_after_conjugation(self, ell, theta):
        mu = cmath.exp(complex(ell, theta) / 2)
        g = Isometry3(mu, 0j, 0j, 1 / mu)
        h = Isometry3.from_complex(1 + 0.3j, 0.5, -0.2j, 1.1)
        lam = complex_translation_length(h @ g @ h.inverse())
        assert lam.real == pytest.approx(ell, abs=1e-9)
        assert cmath.exp(1j * lam.imag) == pytest.approx(cmath.exp(1j * theta), abs=1e-8)

    def test_complex_length_needs_loxodromic(self):
        with pytest.raises(KindError):
            complex_translation_length(Isometry3(1, 1, 0, 1))


class TestDistances:
    @given(points, points)
    def test_stable_form_matches_textbook_form(self, p, q):
        d = dist_h2(p, q)
        if d > 1e-3:
            assert d == pytest.approx(acosh_distance(p, q), rel=1e-9)

    @settings(max_examples=60)
    @given(points, points, sl2r())
    def test_isometry_invariance(self, p, q, g):
        assert dist_h2(g(p), g(q)) == pytest.approx(dist_h2(p, q), rel=1e-9, abs=1e-12)

    def test_vertical_distance(self):
        assert dist_h2(1j, 5j) == pytest.approx(math.log(5), rel=1e-15)
        assert dist_h3(UH3Point(0, 1), UH3Point(0, math.e)) == pytest.approx(1.0, rel=1e-15)

    def test_domain(self):
        with pytest.raises(DomainError):
            UH2Point(0.0, -1.0)
        with pytest.raises(DomainError):
            dist_h2(1j, 2.0 + 0j)

    def test_axis_of_ab_passes_through_i(self):
        g = Isometry2(5, 2, 2, 1)
        ends = sorted(fixed_points(g))
        assert ends == pytest.approx([1 - math.sqrt(2), 1 + math.sqrt(2)])
        assert dist_to_axis(1j, g) == pytest.approx(0.0, abs=1e-15)

    @given(st.floats(0, 4, **finite), st.floats(0.2, 3, **finite))
    def test_distance_to_imaginary_axis(self, s, scale):
        z = scale * complex(math.sinh(s), 1)
        g = Isometry2.from_real(math.e, 0, 0, 1 / math.e)
        assert dist_to_axis(z, g) == pytest.approx(s, abs=1e-12)


class TestHoroballs:
    def test_signed_distance_at_infinity(self):
        h = Horoball(None, 2.0)
        assert h.signed_distance(2j) == 0
        assert h.signed_distance(1j) == pytest.approx(math.log(2))
        assert h.signed_distance(4j) == pytest.approx(-math.log(2))
        assert h.distance(4j) == 0.0

    @settings(max_examples=60)
    @given(points, sl2r(), st.floats(0.2, 4, **finite))
    def test_moved_horoball_is_equivariant(self, z, g, size):
        h = Horoball(None, size)
        moved = h.moved(g)
        assert moved.signed_distance(g(z)) == pytest.approx(h.signed_distance(z), abs=1e-8)

    def test_parabolic_data_horocyclic_length(self):
        # z -> z + 2 on the horocycle at height 1/2: sinh(l/2) = 2/(2 * 1/2)
        data = parabolic_data(Isometry2(1, 2, 0, 1), Horoball(None, 0.5))
        assert math.sinh(data.length / 2) == pytest.approx(2.0, rel=1e-14)

    def test_parabolic_data_rejects_wrong_base(self):
        with pytest.raises(ConsistencyError):
            parabolic_data(Isometry2(1, 2, 0, 1), Horoball(0.0, 1.0))

    def test_finite_base_parabolic(self):
        g = Isometry2(1, 0, 2, 1)
        assert fixed_points(g) == (0.0,)
        data = parabolic_data(g, Horoball(0.0, 1.0))
        assert data.length > 0


class TestElliptic:
    @given(st.floats(0.05, math.pi, **finite))
    def test_rotation_about_i(self, theta):
        g = Isometry2.from_real(math.cos(theta / 2), math.sin(theta / 2), -math.sin(theta / 2), math.cos(theta / 2))
        p, angle = elliptic_data(g)
        assert p.z == pytest.approx(1j, abs=1e-12)
        assert angle == pytest.approx(theta, abs=1e-9)


class TestTangentAngle:
    @settings(max_examples=80)
    @given(points, points)
    def test_small_step_lies_on_the_geodesic(self, x0, y):
        # a step of Euclidean length eps * im(x0) in the returned direction keeps the
        # triangle defect at second order; a rotated direction does not
        if dist_h2(x0, y) < 0.05:
            return
        phi = tangent_angle(x0, y)
        eps = 1e-5

        def defect(angle):
            p = x0 + eps * x0.imag * cmath.exp(1j * angle)
            return dist_h2(x0, p) + dist_h2(p, y) - dist_h2(x0, y)

        assert defect(phi) < 1e-8
        assert defect(phi + 0.3) > 1e-7

    def test_straight_up(self):
        assert tangent_angle(1j, 3j) == pytest.approx(math.pi / 2)

    def test_coincident_points(self):
        with pytest.raises(DomainError):
            tangent_angle(1j, 1j)

"""
Tests for the Cl(3,0) multivector algebra, directions and bivector outcomes
"""

import math

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from bellga.algebra import (
    BASIS, E1, E2, E3, E12, E23, E31, I, ONE, ORIENTATIONS, X_AXIS, Y_AXIS, Z_AXIS,
    BivectorOutcome, Direction, Multivector, Orientation, bivector, bivector_outcome,
    commutator, cross, dot, geometric_product, grade_projection, outcome_product,
    scalar, vector, wedge,
)
from bellga.common import ContractViolationError, InvalidArgumentError, InvalidInputError


coefficients = st.lists(
    st.floats(min_value=-2.0, max_value=2.0, allow_nan=False, allow_infinity=False),
    min_size=8, max_size=8,
)
multivectors = coefficients.map(Multivector)


@st.composite
def directions(draw):
    components = draw(st.tuples(*[st.floats(min_value=-1.0, max_value=1.0, allow_nan=False)] * 3))
    v = np.array(components)
    n = float(np.linalg.norm(v))
    assume(n > 0.1)
    return Direction.from_vector(v / n)


def assert_close(x, y, tol=1e-12):
    assert np.max(np.abs(x.coefficients - y.coefficients)) <= tol, f"{x!r} != {y!r}"


class TestBasisProducts:
    """Multiplication table of the basis blades"""

    def test_pseudoscalar_squares_to_minus_one(self):
        assert geometric_product(I, I) == scalar(-1.0)

    def test_vectors_square_to_one(self):
        for e in (E1, E2, E3):
            assert geometric_product(e, e) == ONE

    def test_bivectors_square_to_minus_one(self):
        for blade in (E23, E31, E12):
            assert geometric_product(blade, blade) == scalar(-1.0)

    def test_vector_products_give_oriented_bivectors(self):
        assert geometric_product(E1, E2) == E12
        assert geometric_product(E2, E3) == E23
        assert geometric_product(E3, E1) == E31
        assert geometric_product(E1, E3) == -E31

    def test_basis_vectors_anticommute(self):
        assert geometric_product(E1, E2) == -geometric_product(E2, E1)

    def test_pseudoscalar_maps_vectors_to_dual_bivectors(self):
        assert geometric_product(I, E1) == E23
        assert geometric_product(I, E2) == E31
        assert geometric_product(I, E3) == E12

    def test_ordered_triple_product_is_pseudoscalar(self):
        assert geometric_product(geometric_product(E1, E2), E3) == I

    def test_dual_basis_vectors_multiply_to_minus_e12(self):
        assert geometric_product(geometric_product(I, E1), geometric_product(I, E2)) == -E12

    def test_grade_projection_examples(self):
        assert grade_projection(scalar(3.0) + E1 * 2.0, 0) == scalar(3.0)
        assert grade_projection(E12 + I, 2) == E12
        assert grade_projection(geometric_product(E1, E1), 0) == ONE

    def test_operator_matches_function(self):
        assert E1 * E2 == geometric_product(E1, E2)
        assert 2 * E1 == vector(2.0, 0.0, 0.0)


class TestAlgebraIdentities:
    """Property tests for the algebraic identities"""

    @given(multivectors, multivectors, multivectors)
    @settings(max_examples=1000)
    def test_associativity(self, x, y, z):
        assert_close(geometric_product(geometric_product(x, y), z),
                     geometric_product(x, geometric_product(y, z)), tol=1e-10)

    @given(multivectors, multivectors, multivectors)
    @settings(max_examples=100)
    def test_left_distributivity(self, x, y, z):
        assert_close(geometric_product(x, y + z),
                     geometric_product(x, y) + geometric_product(x, z), tol=1e-10)

    @given(multivectors)
    @settings(max_examples=1000)
    def test_pseudoscalar_is_central(self, x):
        assert_close(geometric_product(I, x), geometric_product(x, I))

    @given(directions(), directions())
    @settings(max_examples=1000)
    def test_vector_product_decomposes_into_dot_and_wedge(self, a, b):
        product = geometric_product(a.as_multivector(), b.as_multivector())
        assert_close(product, scalar(dot(a, b)) + wedge(a, b))

    @given(directions(), directions())
    def test_wedge_is_dual_of_cross(self, a, b):
        assert_close(wedge(a, b), geometric_product(I, vector(*cross(a, b))))

    @given(directions(), directions())
    @settings(max_examples=1000)
    def test_dual_vectors_multiply_to_minus_vector_product(self, a, b):
        A, B = geometric_product(I, a.as_multivector()), geometric_product(I, b.as_multivector())
        assert_close(geometric_product(A, B), -geometric_product(a.as_multivector(), b.as_multivector()))

    @given(directions(), directions())
    def test_commutator_of_outcomes_is_minus_twice_wedge(self, a, b):
        for mu in ORIENTATIONS:
            A, B = bivector_outcome(mu, a), bivector_outcome(mu, b)
            assert_close(commutator(A.value, B.value), wedge(a, b) * -2.0)

    @given(multivectors)
    def test_reverse_gives_squared_norm(self, x):
        assert math.isclose(geometric_product(x, x.reverse()).scalar_part, x.norm() ** 2, abs_tol=1e-10)

    @given(multivectors)
    def test_grades_sum_to_whole(self, x):
        total = sum((grade_projection(x, k) for k in range(4)), scalar(0.0))
        assert total == x


class TestMultivector:
    """Construction, validation and accessors"""

    def test_rejects_non_finite(self):
        with pytest.raises(InvalidInputError):
            Multivector([0.0, float('nan'), 0, 0, 0, 0, 0, 0])
        with pytest.raises(InvalidInputError):
            Multivector([float('inf')] + [0.0] * 7)

    def test_rejects_wrong_shape(self):
        with pytest.raises(InvalidInputError):
            Multivector([1.0, 2.0, 3.0])

    def test_coefficients_are_read_only(self):
        x = vector(1.0, 2.0, 3.0)
        with pytest.raises(ValueError):
            x.coefficients[0] = 5.0

    def test_product_rejects_non_multivector(self):
        with pytest.raises(InvalidInputError):
            geometric_product(E1, [1, 0, 0])

    @pytest.mark.parametrize("k", [-1, 4, 2.0, True])
    def test_grade_projection_rejects_bad_grade(self, k):
        with pytest.raises(InvalidArgumentError):
            grade_projection(E1, k)

    def test_indexing_by_blade_name(self):
        x = bivector(0.5, -0.25, 0.125)
        assert x['e23'] == 0.5
        assert x['e31'] == -0.25
        assert x[6] == 0.125
        assert set(x.to_dict()) == set(BASIS)

    def test_equality_and_hash(self):
        assert vector(1, 2, 3) == vector(1.0, 2.0, 3.0)
        assert hash(vector(1, 2, 3)) == hash(vector(1.0, 2.0, 3.0))
        assert vector(1, 2, 3) != vector(1, 2, 4)

    def test_scalar_arithmetic(self):
        assert (E1 + 1.0) == Multivector([1.0, 1.0, 0, 0, 0, 0, 0, 0])
        assert (1.0 - E1) == Multivector([1.0, -1.0, 0, 0, 0, 0, 0, 0])


class TestDirection:
    """Unit analyser directions"""

    def test_rejects_non_unit(self):
        with pytest.raises(InvalidInputError, match="unit vector"):
            Direction(1.0, 1.0, 0.0)

    def test_rejects_non_finite(self):
        with pytest.raises(InvalidInputError):
            Direction(float('nan'), 0.0, 0.0)

    def test_from_angle_is_exact_on_axes(self):
        assert Direction.from_angle(0.0) == X_AXIS
        assert Direction.from_angle(90.0) == Y_AXIS
        assert Direction.from_angle(180.0) == -X_AXIS

    def test_from_angle_in_custom_plane(self):
        d = Direction.from_angle(90.0, Y_AXIS, Z_AXIS)
        assert d == Z_AXIS

    def test_from_angle_general(self):
        d = Direction.from_angle(60.0)
        assert math.isclose(d.x, 0.5, abs_tol=1e-15)
        assert math.isclose(d.y, math.sqrt(3) / 2, abs_tol=1e-15)


class TestOrientation:
    """Hidden handedness and bivector outcomes"""

    @pytest.mark.parametrize("lam", [0, 2, -2, True, 1.5])
    def test_rejects_invalid_lambda(self, lam):
        with pytest.raises(InvalidInputError):
            Orientation(lam)

    def test_mu_is_signed_pseudoscalar(self):
        assert Orientation(1).mu == I
        assert Orientation(-1).mu == -I
        assert Orientation(1).flipped() == Orientation(-1)

    @given(directions())
    def test_outcome_is_unit_bivector(self, a):
        for mu in ORIENTATIONS:
            outcome = bivector_outcome(mu, a)
            assert math.isclose(outcome.value.norm(), 1.0, abs_tol=1e-12)
            assert outcome.value.scalar_part == 0.0

    def test_outcome_flips_with_orientation(self):
        a = Direction.from_angle(30.0)
        plus, minus = (bivector_outcome(mu, a) for mu in ORIENTATIONS)
        assert minus.value == (-plus).value

    def test_outcome_coefficients_are_dual_components(self):
        outcome = bivector_outcome(Orientation(1), Direction.from_angle(90.0))
        assert outcome.coefficient(0) == 0.0
        assert outcome.coefficient(1) == 1.0
        assert outcome.coefficient(2) == 0.0

    def test_bivector_outcome_rejects_non_bivectors(self):
        with pytest.raises(InvalidInputError):
            BivectorOutcome(E1)
        with pytest.raises(InvalidInputError):
            BivectorOutcome(E12 * 2.0)


class TestOutcomeProduct:
    """Products of the two algebraic outcomes of one pair"""

    def setup_method(self):
        self.a = Direction.from_angle(0.0)
        self.b = Direction.from_angle(60.0)

    def test_standard_product_is_geometric_product(self):
        for mu in ORIENTATIONS:
            A, B = bivector_outcome(mu, self.a), bivector_outcome(mu, self.b)
            assert outcome_product(A, B, self.a, self.b, mu, 'standard') == geometric_product(A.value, B.value)

    def test_standard_product_ignores_orientation(self):
        products = [
            outcome_product(bivector_outcome(mu, self.a), bivector_outcome(mu, self.b), self.a, self.b, mu)
            for mu in ORIENTATIONS
        ]
        assert_close(products[0], products[1])

    def test_oriented_product_swaps_order_for_negative_orientation(self):
        plus, minus = ORIENTATIONS
        A, B = bivector_outcome(plus, self.a), bivector_outcome(plus, self.b)
        assert_close(outcome_product(A, B, self.a, self.b, plus, 'oriented'), geometric_product(A.value, B.value))
        A, B = bivector_outcome(minus, self.a), bivector_outcome(minus, self.b)
        assert_close(outcome_product(A, B, self.a, self.b, minus, 'oriented'), geometric_product(B.value, A.value))

    def test_scalar_part_is_minus_dot(self):
        for convention in ('standard', 'oriented'):
            for mu in ORIENTATIONS:
                A, B = bivector_outcome(mu, self.a), bivector_outcome(mu, self.b)
                product = outcome_product(A, B, self.a, self.b, mu, convention)
                assert math.isclose(product.scalar_part, -0.5, abs_tol=1e-12)

    def test_mismatched_outcome_is_contract_violation(self):
        mu = Orientation(1)
        A = bivector_outcome(mu, self.a)
        B = bivector_outcome(mu.flipped(), self.b)
        with pytest.raises(ContractViolationError):
            outcome_product(A, B, self.a, self.b, mu)

    def test_unknown_convention(self):
        mu = Orientation(1)
        A, B = bivector_outcome(mu, self.a), bivector_outcome(mu, self.b)
        with pytest.raises(InvalidArgumentError):
            outcome_product(A, B, self.a, self.b, mu, 'clifford')

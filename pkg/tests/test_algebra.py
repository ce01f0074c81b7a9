import numpy as np
import pytest
from numpy.testing import assert_array_equal

from cosetexpanders import (
    ExtensionField,
    ExtFieldElement,
    ParameterMismatchError,
    PrimeFieldElement,
    TruncatedPoly,
    find_irreducible,
    is_irreducible,
    is_prime,
)
from cosetexpanders._algebra import (
    format_modulus,
    poly_mod,
    poly_mul_array,
    truncated_convolution,
)


@pytest.mark.parametrize("n, expected", [(1, False), (2, True), (9, False), (13, True)])
def test_is_prime(n: int, expected: bool) -> None:
    assert is_prime(n) is expected


def test_prime_field_arithmetic() -> None:
    a, b = PrimeFieldElement(3, 5), PrimeFieldElement(4, 5)
    assert (a + b).value == 2
    assert (a - b).value == 4
    assert (a * b).value == 2
    assert (-a).value == 2
    assert (a * a.inverse()).value == 1


def test_prime_field_rejects_composite_modulus() -> None:
    with pytest.raises(ValueError):
        PrimeFieldElement(1, 4)


def test_prime_field_zero_has_no_inverse() -> None:
    with pytest.raises(ZeroDivisionError):
        PrimeFieldElement(0, 7).inverse()


def test_truncated_poly_drops_high_powers() -> None:
    t = TruncatedPoly.variable(2, 2)
    assert (t * t) == TruncatedPoly.zero(2, 2)
    assert TruncatedPoly.from_coeffs([1, 1, 1, 1], 2, 2).coeffs == (1, 1)


def test_truncated_poly_reduces_mod_p() -> None:
    assert TruncatedPoly.from_coeffs([5, -1], 3, 3).coeffs == (2, 2, 0)


@pytest.mark.parametrize("p, s", [(2, 1), (2, 3), (3, 2)])
def test_ring_axioms(p: int, s: int) -> None:
    elements = list(TruncatedPoly.all_elements(p, s))
    one, zero = TruncatedPoly.one(p, s), TruncatedPoly.zero(p, s)
    for a in elements:
        assert a + zero == a
        assert a * one == a
        assert a + (-a) == zero
        for b in elements:
            assert a * b == b * a
            assert (a + b) - b == a


def test_units_are_nonzero_constant_terms() -> None:
    elements = list(TruncatedPoly.all_elements(3, 2))
    one = TruncatedPoly.one(3, 2)
    for a in elements:
        has_inverse = any(a * b == one for b in elements)
        assert has_inverse is a.is_unit


def test_truncated_poly_string_form() -> None:
    a = TruncatedPoly.from_coeffs([1, 0, 2], 3, 3)
    assert str(a) == "1+2*t^2"
    assert TruncatedPoly.from_string(str(a), 3, 3) == a
    assert str(TruncatedPoly.zero(2, 3)) == "0"


def test_degree() -> None:
    assert TruncatedPoly.zero(2, 3).degree == -1
    assert TruncatedPoly.from_coeffs([1, 1], 2, 3).degree == 1


def test_mixed_rings_rejected() -> None:
    with pytest.raises(ParameterMismatchError):
        TruncatedPoly.one(2, 2) + TruncatedPoly.one(2, 3)


def test_truncated_convolution_shape() -> None:
    conv = truncated_convolution(3)
    assert conv.shape == (3, 3, 3)
    assert conv.sum() == 6


def test_poly_mul_array_matches_scalar_product() -> None:
    p, s = 3, 3
    elements = list(TruncatedPoly.all_elements(p, s))
    a = np.array([e.coeffs for e in elements])
    products = poly_mul_array(a[:, None, :], a[None, :, :], p)
    for i, x in enumerate(elements):
        for j, y in enumerate(elements):
            assert tuple(products[i, j]) == (x * y).coeffs


def test_poly_mod() -> None:
    # y^3 = y + 1 modulo y^3 + y + 1 over F_2
    assert poly_mod([0, 0, 0, 1], [1, 1, 0, 1], 2) == [1, 1]
    with pytest.raises(ZeroDivisionError):
        poly_mod([1], [0], 2)


def test_irreducibility() -> None:
    assert is_irreducible((1, 1, 0, 1), 2)
    assert not is_irreducible((1, 0, 0, 1), 2)
    assert find_irreducible(2, 1) == (0, 1)
    assert find_irreducible(2, 2) == (1, 1, 1)


def test_format_modulus() -> None:
    assert format_modulus((1, 1, 0, 1)) == "y^3+y+1"
    assert format_modulus((1, 2, 0, 1)) == "y^3+2y+1"


@pytest.mark.parametrize("p, degree", [(2, 3), (3, 3), (2, 2)])
def test_extension_field_tables(p: int, degree: int) -> None:
    field = ExtensionField(p, degree)
    q = field.q
    assert q == p**degree
    assert_array_equal(field.add[0], np.arange(q))
    assert_array_equal(field.mul[1], np.arange(q))
    assert_array_equal(field.add[np.arange(q), field.neg], np.zeros(q))
    # every nonzero row of the multiplication table is a permutation
    for a in range(1, q):
        assert sorted(field.mul[a].tolist()) == list(range(q))


def test_extension_field_inverse() -> None:
    field = ExtensionField(3, 2)
    one = field.element(1)
    for code in range(1, field.q):
        a = field.element(code)
        assert a * a.inverse() == one
    with pytest.raises(ZeroDivisionError):
        field.element(0).inverse()


def test_extension_field_rejects_reducible_modulus() -> None:
    with pytest.raises(ValueError):
        ExtensionField(2, 3, modulus=(1, 0, 0, 1))


def test_extension_element_encoding() -> None:
    field = ExtensionField(2, 3)
    for code in range(field.q):
        assert field.encode(field.element(code)) == code
    with pytest.raises(ValueError):
        ExtFieldElement((0, 1), field.modulus, 2)

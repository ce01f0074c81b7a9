import numpy as np
from numpy.testing import assert_array_equal

from cosetexpanders._np_utils import (
    fits_int64,
    groupby_array,
    pack_rows,
    sorted_membership,
    unpack_keys,
)


def test_groupby_array_orders_groups() -> None:
    values = np.array([10, 20, 30, 40])
    by = np.array([2, 1, 2, 0])
    groups = [group[0].tolist() for group in groupby_array(values, by=by)]
    assert groups == [[40], [20], [10, 30]]


def test_pack_rows_is_lexicographic() -> None:
    rows = np.array([[0, 2, 1], [1, 0, 0], [0, 2, 2]])
    keys = pack_rows(rows, 3)
    assert_array_equal(keys, [7, 9, 8])
    assert_array_equal(np.argsort(keys), [0, 2, 1])


def test_unpack_inverts_pack() -> None:
    rows = np.array([[1, 0, 2, 2], [0, 0, 0, 1]])
    assert_array_equal(unpack_keys(pack_rows(rows, 3), 4, 3), rows)


def test_wide_rows_use_exact_keys() -> None:
    assert fits_int64(63, 2)
    assert not fits_int64(64, 2)
    rows = np.ones((2, 70), dtype=np.int64)
    rows[1, 0] = 0
    keys = pack_rows(rows, 2)
    assert keys.dtype == object
    assert keys[0] == 2**70 - 1
    assert keys[0] - keys[1] == 2**69
    assert_array_equal(unpack_keys(keys, 70, 2), rows)


def test_sorted_membership() -> None:
    found, positions = sorted_membership(np.array([2, 5, 9]), np.array([5, 3, 9, 11]))
    assert_array_equal(found, [True, False, True, False])
    assert positions[0] == 1
    assert positions[2] == 2


def test_sorted_membership_empty() -> None:
    found, _ = sorted_membership(np.array([], dtype=np.int64), np.array([1, 2]))
    assert not found.any()

from __future__ import annotations
from functools import lru_cache, partial
from typing import Any, Generator, Tuple, TypeVar

import numpy as np
from numpy.typing import NDArray

_T = TypeVar("_T", bound=Any)

# Largest digit count whose packed key is guaranteed to fit in a signed int64.
_INT64_BITS = 63


def groupby_array(
    *arrays: NDArray[_T], by: NDArray[Any]
) -> Generator[Tuple[NDArray[_T], ...], None, None]:
    """Group arrays by a given array.

    Parameters
    ----------
    *arrays : array-like
        Arrays to be grouped.
    by : array-like
        Array to group by.

    Yields
    ------
    array-like
        Grouped arrays, in ascending order of `by`.

    Examples
    --------
    >>> import numpy as np
    >>> from cosetexpanders._np_utils import groupby_array
    >>> faces = np.array([[0, 4], [1, 5], [0, 6]])
    >>> for group in groupby_array(faces, by=faces[:, 0]):
    ...     print(group)
    (array([[0, 4],
           [0, 6]]),)
    (array([[1, 5]]),)

    """
    sort_keys = np.argsort(by, kind="stable")
    sorted_by = by[sort_keys]
    sorted_arrays = [array[sort_keys] for array in arrays]

    group_indexes = np.unique(sorted_by, return_index=True)[1][1:]
    splitter = partial(np.split, indices_or_sections=group_indexes)

    for group in zip(*map(splitter, sorted_arrays)):
        yield group  # type: ignore


def fits_int64(n_digits: int, base: int) -> bool:
    """Whether base**n_digits - 1 fits in a signed 64-bit integer."""
    return base**n_digits <= 2**_INT64_BITS


@lru_cache(maxsize=None)
def _place_values(n_digits: int, base: int, exact: bool) -> NDArray[Any]:
    powers = [base ** (n_digits - 1 - idx) for idx in range(n_digits)]
    if exact:
        return np.array(powers, dtype=object)
    return np.array(powers, dtype=np.int64)


def pack_rows(digits: NDArray[Any], base: int) -> NDArray[Any]:
    """Pack each row of base-`base` digits into one integer key.

    The first digit is the most significant one, so numeric order of the
    keys is lexicographic order of the rows. Keys are int64 whenever they
    fit and Python integers (object dtype) otherwise.

    Examples
    --------
    >>> import numpy as np
    >>> from cosetexpanders._np_utils import pack_rows
    >>> pack_rows(np.array([[1, 0, 1], [0, 1, 1]]), 2)
    array([5, 3])
    """
    digits = np.asarray(digits)
    n_digits = digits.shape[-1]
    if fits_int64(n_digits, base):
        return digits.astype(np.int64) @ _place_values(n_digits, base, False)
    return digits.astype(object) @ _place_values(n_digits, base, True)


def unpack_keys(keys: NDArray[Any], n_digits: int, base: int) -> NDArray[np.int64]:
    """Inverse of `pack_rows`."""
    keys = np.asarray(keys)
    exact = not fits_int64(n_digits, base)
    place = _place_values(n_digits, base, exact)
    digits = (keys[..., None] // place) % base
    return digits.astype(np.int64)


def sorted_membership(
    sorted_keys: NDArray[Any], query: NDArray[Any]
) -> Tuple[NDArray[np.bool_], NDArray[np.intp]]:
    """Locate `query` keys in an ascending key array.

    Returns
    -------
    found : NDArray[np.bool_]
        Whether each query key is present.
    positions : NDArray[np.intp]
        Index of each query key in `sorted_keys` (meaningful where found).
    """
    query = np.asarray(query)
    if len(sorted_keys) == 0:
        return np.zeros(query.shape, dtype=bool), np.zeros(query.shape, dtype=np.intp)
    positions = np.searchsorted(sorted_keys, query)
    clipped = np.minimum(positions, len(sorted_keys) - 1)
    found = sorted_keys[clipped] == query
    return np.asarray(found, dtype=bool), clipped

import pytest

from cosetexpanders import (
    CosetComplex,
    GeneratorSet,
    GroupEnumeration,
    bfs_closure,
    build_complex,
)


@pytest.fixture(scope="session")
def sl3_f2() -> GroupEnumeration:
    """SL_3(F_2), order 168."""
    return bfs_closure(GeneratorSet.for_subgroup(2, 1, 3))


@pytest.fixture(scope="session")
def sl3_f2_t2() -> GroupEnumeration:
    """SL_3(F_2[t]/<t^2>), order 43008."""
    return bfs_closure(GeneratorSet.for_subgroup(2, 2, 3))


@pytest.fixture(scope="session")
def complex_213() -> CosetComplex:
    return build_complex(2, 1, 3)


@pytest.fixture(scope="session")
def complex_223() -> CosetComplex:
    return build_complex(2, 2, 3)

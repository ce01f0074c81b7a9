from pathlib import Path

import joblib
import pytest

from cosetexpanders import GeneratorSet, GroupCache, bfs_closure


def build_sl3() -> object:
    return bfs_closure(GeneratorSet.for_subgroup(2, 1, 3))


def test_miss_then_hit(tmp_path: Path) -> None:
    cache = GroupCache(tmp_path / "groups", version="1")
    assert cache.load("G", 2, 1, 3) is None
    built = cache.get_or_build("G", 2, 1, 3, build_sl3)
    assert cache.path("G", 2, 1, 3).exists()

    def fail() -> object:
        raise AssertionError("a warm cache must not rebuild")

    warm = cache.get_or_build("G", 2, 1, 3, fail)
    assert warm.same_elements(built)


def test_versions_do_not_collide(tmp_path: Path) -> None:
    old = GroupCache(tmp_path, version="1")
    new = GroupCache(tmp_path, version="2")
    old.get_or_build("G", 2, 1, 3, build_sl3)
    assert new.load("G", 2, 1, 3) is None


def test_label_slug(tmp_path: Path) -> None:
    cache = GroupCache(tmp_path, version="0")
    assert cache.path("K_{2,3}", 3, 2, 3).name == "K_2_3-p3-s2-d3-v0.joblib"


def test_mismatched_file_rejected(tmp_path: Path) -> None:
    cache = GroupCache(tmp_path, version="0")
    joblib.dump(build_sl3(), cache.path("G", 2, 2, 3))
    with pytest.raises(ValueError):
        cache.load("G", 2, 2, 3)


def test_build_must_match_key(tmp_path: Path) -> None:
    cache = GroupCache(tmp_path, version="0")
    with pytest.raises(ValueError):
        cache.get_or_build("K_{1}", 2, 1, 3, build_sl3)
    assert not cache.path("K_{1}", 2, 1, 3).exists()


def test_no_temporary_files_left(tmp_path: Path) -> None:
    cache = GroupCache(tmp_path, version="0")
    cache.store(build_sl3())
    assert [p.suffix for p in tmp_path.iterdir()] == [".joblib"]

import math

import numpy as np
import pytest
from hypothesis import given, settings as hyp_settings, strategies as st

from latmon.core.config import settings
from latmon.core.exceptions import CapacityError, DomainError, LatmonError
from latmon.services.lattice import (
    MAX_NORM_SQ,
    ShellTable,
    build_shell_table,
    cache_path,
    cached_shell_table,
    lattice_count,
    lattice_discrepancy,
    load_shell_table,
    save_shell_table,
)


def _brute_counts(dimension: int, max_norm_sq: int) -> np.ndarray:
    r = math.isqrt(max_norm_sq)
    axis = np.arange(-r, r + 1)
    grids = np.meshgrid(*([axis] * dimension), indexing="ij")
    norms = sum(g.astype(np.int64) ** 2 for g in grids).ravel()
    counts = np.bincount(norms[norms <= max_norm_sq], minlength=max_norm_sq + 1)
    counts[0] = 0
    return counts


def test_planar_shells(shells_2d):
    expected = {0: 0, 1: 4, 2: 4, 3: 0, 4: 4, 5: 8, 25: 12, 65: 16}
    for k, r in expected.items():
        assert shells_2d.r(k) == r


def test_cubic_shells(shells_3d):
    expected = {0: 0, 1: 6, 2: 12, 3: 8, 4: 6, 5: 24, 6: 24, 7: 0, 9: 30}
    for k, r in expected.items():
        assert shells_3d.r(k) == r


def test_gauss_circle_and_sphere_counts(shells_2d, shells_3d):
    # points with |n| <= 10, origin included
    assert shells_2d.cumulative[100] + 1 == 317
    assert shells_3d.cumulative[100] + 1 == 4169


@given(st.integers(min_value=1, max_value=300), st.sampled_from([2, 3]))
@hyp_settings(max_examples=25, deadline=None)
def test_counts_match_brute_force(max_norm_sq, dimension):
    table = build_shell_table(dimension, max_norm_sq)
    np.testing.assert_array_equal(table.counts, _brute_counts(dimension, max_norm_sq))


def test_discrepancy_within_cell_bounds(shells_2d, shells_3d):
    x = np.arange(1, 401, dtype=float)
    r = np.sqrt(x)
    planar = np.abs(lattice_discrepancy(shells_2d, x))
    half_diag = math.sqrt(2) / 2
    assert np.all(planar <= math.pi * ((r + half_diag) ** 2 - np.maximum(r - half_diag, 0) ** 2))

    cubic = np.abs(lattice_discrepancy(shells_3d, x))
    half_diag = math.sqrt(3) / 2
    shell = (4.0 / 3.0) * math.pi * ((r + half_diag) ** 3 - np.maximum(r - half_diag, 0) ** 3)
    assert np.all(cubic <= shell)


def test_lattice_count_edges(shells_2d):
    assert lattice_count(shells_2d, 0) == 0
    assert lattice_discrepancy(shells_2d, 0.0) == 1.0
    assert lattice_count(shells_2d, 1.5) == 4
    with pytest.raises(DomainError):
        lattice_count(shells_2d, 401)


def test_table_is_read_only(shells_2d):
    with pytest.raises(ValueError):
        shells_2d.counts[1] = 0
    with pytest.raises(DomainError):
        shells_2d.r(401)


def test_table_shape_is_checked():
    with pytest.raises(DomainError):
        ShellTable(dimension=2, max_norm_sq=5, counts=np.zeros(3, dtype=np.uint32))


def test_capacity_limits(monkeypatch):
    with pytest.raises(CapacityError):
        build_shell_table(3, MAX_NORM_SQ[3] + 1)
    monkeypatch.setattr(settings, "SHELL_MEMORY_BUDGET_BYTES", 100)
    with pytest.raises(CapacityError):
        build_shell_table(2, 1000)


@pytest.mark.parametrize("dimension,per_shell", [(2, 20), (3, 36)])
def test_budget_counts_construction_buffers(monkeypatch, dimension, per_shell):
    # room for the final uint32 table alone is not enough
    monkeypatch.setattr(settings, "SHELL_MEMORY_BUDGET_BYTES", 8 * 1001)
    with pytest.raises(CapacityError) as info:
        build_shell_table(dimension, 1000)
    assert info.value.context["bytes"] == 1001 * per_shell
    monkeypatch.setattr(settings, "SHELL_MEMORY_BUDGET_BYTES", 1001 * per_shell)
    assert build_shell_table(dimension, 1000).max_norm_sq == 1000


def test_bad_arguments():
    with pytest.raises(DomainError):
        build_shell_table(4, 10)
    with pytest.raises(DomainError):
        build_shell_table(2, 0)


def test_binary_cache(tmp_path):
    table = build_shell_table(3, 500)
    path = save_shell_table(table, tmp_path / "t.bin")
    assert path.stat().st_size == 24 + 4 * 500

    loaded = load_shell_table(path)
    assert loaded.dimension == 3 and loaded.max_norm_sq == 500
    np.testing.assert_array_equal(loaded.counts, table.counts)


def test_binary_cache_rejects_foreign_files(tmp_path):
    bogus = tmp_path / "bogus.bin"
    bogus.write_bytes(b"NOTSHELL" + bytes(16))
    with pytest.raises(LatmonError):
        load_shell_table(bogus)

    path = save_shell_table(build_shell_table(2, 50), tmp_path / "cut.bin")
    path.write_bytes(path.read_bytes()[:-4])
    with pytest.raises(LatmonError):
        load_shell_table(path)


def test_cached_shell_table_writes_then_reads(tmp_path):
    table = cached_shell_table(2, 321, tmp_path)
    path = cache_path(tmp_path, 2, 321)
    assert path.exists()
    again = cached_shell_table(2, 321, tmp_path)
    np.testing.assert_array_equal(again.counts, table.counts)


@pytest.mark.parametrize("radius", [10, 50, 200])
def test_gauss_circle_bound(radius):
    table = build_shell_table(2, radius * radius)
    assert abs(lattice_discrepancy(table, float(radius * radius))) <= 8 * radius


@pytest.mark.parametrize("radius", [10, 30])
def test_gauss_sphere_bound(radius):
    table = build_shell_table(3, radius * radius)
    assert abs(lattice_discrepancy(table, float(radius * radius))) <= 40 * radius * radius

import pytest

from puzzleforge.dynamics.strong_regularity import classify_grid
from puzzleforge.sweep import chunk_size, run_pool


def test_chunk_size():
    assert chunk_size(100, 2) == 12
    assert chunk_size(3, 8) == 1


def test_run_pool_keeps_order():
    assert run_pool(abs, [-3, 2, -1], workers=2) == [3, 2, 1]
    assert run_pool(abs, [], workers=4) == []


def test_run_pool_rejects_zero_workers():
    with pytest.raises(ValueError):
        run_pool(abs, [1], workers=0)


def test_classification_does_not_depend_on_workers():
    grid = [-2.0 + k * 1e-5 for k in range(1, 9)]
    serial = classify_grid(grid, depth=2, order_cap=8, workers=1)
    pooled = classify_grid(grid, depth=2, order_cap=8, workers=2)
    assert [r.to_row() for r in serial] == [r.to_row() for r in pooled]

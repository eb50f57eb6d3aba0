import numpy as np
import pytest

from hemsim.errors import ModelError
from hemsim.inference import Categorical, DirichletTable, update_transition_counts


def test_delta_transition_unit_rate():
    counts = DirichletTable.uninformative((3, 3))
    update_transition_counts(
        counts, Categorical.delta(1, 3), Categorical.delta(2, 3), learning_rate=1.0
    )
    want = np.ones((3, 3))
    want[2, 1] = 2.0
    np.testing.assert_allclose(counts.concentrations, want, atol=1e-15)


def test_half_rate_adds_half_count():
    counts = DirichletTable.uninformative((2, 2))
    update_transition_counts(
        counts, Categorical.delta(0, 2), Categorical.delta(1, 2), learning_rate=0.5
    )
    assert counts.concentrations[1, 0] == pytest.approx(1.5, abs=1e-15)


def test_update_is_in_place_and_returns_same_table():
    counts = DirichletTable.uninformative((2, 2))
    out = update_transition_counts(counts, Categorical.delta(0, 2), Categorical.delta(0, 2))
    assert out is counts


def test_soft_beliefs_spread_counts_like_scalar_loops():
    rng = np.random.default_rng(7)
    prev = Categorical(rng.random(4) + 0.1)
    post = Categorical(rng.random(4) + 0.1)
    counts = DirichletTable.uninformative((4, 4, 3, 2))
    update_transition_counts(
        counts, prev, post, action=1, exogenous_parents=(2,), learning_rate=2.5
    )
    want = np.ones((4, 4, 3, 2))
    for child in range(4):
        for parent in range(4):
            want[child, parent, 2, 1] += 2.5 * post.probs[child] * prev.probs[parent]
    np.testing.assert_allclose(counts.concentrations, want, atol=1e-12)


def test_repeated_updates_sharpen_the_slice():
    counts = DirichletTable.uninformative((10, 10))
    prev = Categorical.delta(3, 10)
    post = Categorical.delta(7, 10)
    for _ in range(500):
        update_transition_counts(counts, prev, post, learning_rate=1.0)
    table = counts.as_table()
    # (1 + n) / (K + n) with K = 10 child bins and n = 500
    assert table.entries[7, 3] == pytest.approx(501 / 510, abs=1e-12)
    assert table.entries[7, 3] > 0.98
    # untouched slices stay uniform
    np.testing.assert_allclose(table.entries[:, 0], np.full(10, 0.1), atol=1e-15)


def test_learning_rate_validation():
    counts = DirichletTable.uninformative((2, 2))
    prev = Categorical.delta(0, 2)
    for bad in (0.0, -1.0, np.inf, np.nan):
        with pytest.raises(ModelError):
            update_transition_counts(counts, prev, prev, learning_rate=bad)


def test_shape_validation():
    prev = Categorical.delta(0, 2)
    with pytest.raises(ModelError):
        # rank says (child, prev) but an action axis is supplied
        update_transition_counts(DirichletTable.uninformative((2, 2)), prev, prev, action=0)
    with pytest.raises(ModelError):
        update_transition_counts(
            DirichletTable.uninformative((2, 2, 3)), prev, prev, exogenous_parents=(3,)
        )
    with pytest.raises(ModelError):
        update_transition_counts(
            DirichletTable.uninformative((2, 2, 2)), prev, prev, action=5
        )
    with pytest.raises(ModelError):
        update_transition_counts(
            DirichletTable.uninformative((3, 2)), prev, Categorical.delta(0, 2)
        )

import numpy as np
import pytest

from hemsim.errors import ModelError, NormalizationError
from hemsim.inference import (
    Categorical,
    ConditionalTable,
    DirichletTable,
    Preferences,
    blur_adjacent,
    identity_table,
    joint_identity_table,
    normalize,
    stable_softmax,
)
from oracles import oracle_softmax


def test_softmax_matches_scalar_oracle():
    rng = np.random.default_rng(7)
    for _ in range(200):
        logits = rng.normal(0, 5, rng.integers(1, 9))
        np.testing.assert_allclose(
            stable_softmax(logits), oracle_softmax(list(logits)), atol=1e-12
        )


def test_softmax_shift_invariance():
    rng = np.random.default_rng(8)
    for _ in range(100):
        logits = rng.normal(0, 3, 6)
        shifted = stable_softmax(logits + 123.456)
        np.testing.assert_allclose(stable_softmax(logits), shifted, atol=1e-12)
        assert abs(shifted.sum() - 1.0) < 1e-12


def test_softmax_handles_extreme_logits():
    probs = stable_softmax(np.array([1000.0, -1000.0, 999.0]))
    assert abs(probs.sum() - 1.0) < 1e-12
    assert probs[1] == 0.0  # flushed, not denormal


def test_softmax_neg_inf_excludes_outcome():
    probs = stable_softmax(np.array([0.0, -np.inf, 0.0]))
    np.testing.assert_allclose(probs, [0.5, 0.0, 0.5], atol=1e-15)


def test_softmax_rejects_bad_logits():
    for bad in ([np.nan, 0.0], [np.inf, 0.0], [-np.inf, -np.inf], []):
        with pytest.raises(NormalizationError):
            stable_softmax(np.array(bad, dtype=float))


def test_categorical_normalizes_and_guards():
    c = Categorical(np.array([2.0, 2.0]))
    np.testing.assert_allclose(c.probs, [0.5, 0.5], atol=1e-15)
    np.testing.assert_allclose(normalize([1, 0, 0]).probs, [1, 0, 0], atol=1e-15)
    for bad in ([0.0, 0.0], [-0.1, 1.0], [np.nan, 1.0], [np.inf, 1.0]):
        with pytest.raises(NormalizationError):
            Categorical(np.array(bad))


def test_categorical_is_immutable():
    c = Categorical(np.array([0.25, 0.75]))
    with pytest.raises(ValueError):
        c.probs[0] = 0.9


def test_categorical_helpers():
    d = Categorical.delta(2, 4)
    assert d.argmax() == 2 and d.entropy() == 0.0
    u = Categorical.uniform(5)
    assert abs(u.entropy() - np.log(5)) < 1e-12
    assert abs(u.expected_value([0, 1, 2, 3, 4]) - 2.0) < 1e-12
    # argmax ties resolve to the lowest index
    assert Categorical(np.array([0.4, 0.4, 0.2])).argmax() == 0
    with pytest.raises(NormalizationError):
        Categorical.delta(4, 4)


def test_conditional_table_slices_normalized():
    rng = np.random.default_rng(9)
    raw = rng.random((3, 4, 2)) + 0.1
    table = ConditionalTable(raw / raw.sum(axis=0))
    sums = table.entries.sum(axis=0)
    assert np.abs(sums - 1.0).max() < 1e-12
    assert table.child_cardinality == 3
    assert table.parent_cardinalities == (4, 2)


def test_conditional_table_rejects_bad_slices():
    with pytest.raises(ModelError):
        ConditionalTable(np.array([[0.5, 0.5], [0.4, 0.5]]))  # column sums 0.9, 1.0
    with pytest.raises(ModelError):
        ConditionalTable(np.array([[1.1, 0.5], [-0.1, 0.5]]))


def test_conditional_entropies_match_loops():
    rng = np.random.default_rng(10)
    raw = rng.random((4, 3)) + 0.05
    table = ConditionalTable(raw / raw.sum(axis=0))
    expected = [
        -sum(p * np.log(p) for p in table.entries[:, j] if p > 0) for j in range(3)
    ]
    np.testing.assert_allclose(table.conditional_entropies(), expected, atol=1e-12)


def test_identity_tables():
    eye = identity_table(3)
    assert eye.conditional_entropies().max() == 0.0
    joint = joint_identity_table((2, 3))
    assert joint.entries.shape == (6, 2, 3)
    # outcome index is the row-major flat index of the parent combination
    assert joint.entries[1 * 3 + 2, 1, 2] == 1.0
    assert joint.entries[:, 1, 2].sum() == 1.0


def test_blur_adjacent_mass_splits_to_neighbors():
    np.testing.assert_allclose(
        blur_adjacent(np.array([0.0, 1.0, 0.0]), 0.2), [0.1, 0.8, 0.1], atol=1e-15
    )
    # mass that would leave the grid stays in the edge bin
    np.testing.assert_allclose(
        blur_adjacent(np.array([1.0, 0.0, 0.0]), 0.2), [0.9, 0.1, 0.0], atol=1e-15
    )
    np.testing.assert_allclose(
        blur_adjacent(np.eye(3), 0.0), np.eye(3), atol=0
    )
    with pytest.raises(ModelError):
        blur_adjacent(np.eye(2), 1.5)


def test_blur_preserves_column_mass():
    rng = np.random.default_rng(11)
    raw = rng.random((6, 4))
    raw /= raw.sum(axis=0)
    blurred = blur_adjacent(raw, 0.3)
    np.testing.assert_allclose(blurred.sum(axis=0), 1.0, atol=1e-12)


def test_dirichlet_table():
    counts = DirichletTable.uninformative((3, 2))
    table = counts.as_table()
    np.testing.assert_allclose(table.entries, np.full((3, 2), 1 / 3), atol=1e-15)
    counts.concentrations[1, 0] += 1.0
    np.testing.assert_allclose(counts.as_table().entries[:, 0], [0.25, 0.5, 0.25])
    with pytest.raises(ModelError):
        DirichletTable(np.array([[1.0, -1.0], [1.0, 1.0]]))
    with pytest.raises(ModelError):
        DirichletTable(np.array([[0.0], [1.0]]))


def test_preferences():
    prefs = Preferences(np.array([0.0, -np.inf, 0.0]))
    np.testing.assert_allclose(prefs.probs, [0.5, 0.0, 0.5], atol=1e-15)
    assert prefs.log_probs[1] == -np.inf
    assert abs(prefs.distribution().probs.sum() - 1.0) < 1e-12
    flat = Preferences.flat(4)
    np.testing.assert_allclose(flat.probs, 0.25, atol=1e-15)
    with pytest.raises(ModelError):
        Preferences(np.array([0.0, np.inf]))
    with pytest.raises(ModelError):
        Preferences(np.array([-np.inf, -np.inf]))
    with pytest.raises(ModelError):
        Preferences(np.array([0.0, np.nan]))

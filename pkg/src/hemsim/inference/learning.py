"""Dirichlet count accumulation for learning a transition table from experience."""
from __future__ import annotations

from typing import Sequence

import numpy as np

from ..errors import ModelError
from .distributions import Categorical, DirichletTable


def update_transition_counts(
    counts: DirichletTable,
    prev_belief: Categorical,
    post_belief: Categorical,
    action: int | None = None,
    exogenous_parents: Sequence[int] = (),
    learning_rate: float = 1.0,
) -> DirichletTable:
    """Accumulate evidence for one observed transition, in place.

    Adds learning_rate * post[child] (x) prev[parent] to the table slice
    addressed by the observed exogenous parent indices and the action taken.
    Count axes are (child, previous-state, *exogenous parents[, action]).
    Returns the same, mutated, table.
    """
    if not np.isfinite(learning_rate) or learning_rate <= 0:
        raise ModelError("learning rate must be a positive finite number")
    shape = counts.concentrations.shape
    expected_rank = 2 + len(exogenous_parents) + (1 if action is not None else 0)
    if len(shape) != expected_rank:
        raise ModelError("count table rank does not match the supplied parents")
    if shape[0] != post_belief.cardinality:
        raise ModelError("posterior belief does not match the child axis")
    if shape[1] != prev_belief.cardinality:
        raise ModelError("previous belief does not match the parent axis")
    for axis, index in enumerate(exogenous_parents, start=2):
        if not 0 <= index < shape[axis]:
            raise ModelError(f"exogenous parent index {index} out of range on axis {axis}")
    index: tuple = (slice(None), slice(None), *exogenous_parents)
    if action is not None:
        if not 0 <= action < shape[-1]:
            raise ModelError(f"action index {action} out of range")
        index = index + (action,)
    counts.concentrations[index] += learning_rate * np.outer(
        post_belief.probs, prev_belief.probs
    )
    return counts

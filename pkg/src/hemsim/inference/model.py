"""Generative-model structure for a discrete planning agent.

A model is a set of named state factors updated once per planning step in a
fixed cascade order, a set of observation modalities scored against
preferences, and an enumerated policy space over a shared action variable.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Mapping, Union

import numpy as np

from ..errors import ModelError
from .distributions import Categorical, ConditionalTable, DirichletTable, Preferences


@dataclass(frozen=True)
class Policy:
    """A fixed-length sequence of action indices covering the planning horizon."""

    actions: tuple[int, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "actions", tuple(int(a) for a in self.actions))
        if len(self.actions) < 1:
            raise ModelError("a policy needs at least one action")
        if any(a < 0 for a in self.actions):
            raise ModelError("action indices must be non-negative")


def enumerate_policies(action_cardinality: int, horizon: int) -> tuple[Policy, ...]:
    """Every action sequence of the given length, in lexicographic order.

    The policy index is the sequence read as a base-`action_cardinality`
    number with the first action as the most significant digit, so ties in
    the policy posterior resolve toward earlier (lower-index) sequences.
    """
    if action_cardinality < 1 or horizon < 1:
        raise ModelError("need at least one action and a horizon of at least 1")
    return tuple(
        Policy(actions=seq)
        for seq in itertools.product(range(action_cardinality), repeat=horizon)
    )


@dataclass(frozen=True)
class EfeBreakdown:
    """Per-policy expected free energy decomposition, all terms in nats.

    The two decompositions describe the same quantity:
    total = risk + ambiguity = -info_gain - expected_utility.
    Lower totals are better; +inf marks an infeasible policy.
    """

    risk: float
    ambiguity: float
    info_gain: float
    expected_utility: float
    total: float


@dataclass(frozen=True)
class FactorParent:
    """A transition input read from a factor's belief.

    lag "prev" reads the belief from before the current update sweep;
    "current" reads the belief produced earlier in the same sweep, which is
    what makes the per-step update a cascade.
    """

    name: str
    lag: str = "prev"

    def __post_init__(self) -> None:
        if self.lag not in ("prev", "current"):
            raise ModelError(f"unknown parent lag {self.lag!r}")


@dataclass(frozen=True)
class ForecastParent:
    """A transition input supplied per planning step by the exogenous forecast."""

    key: str


@dataclass(frozen=True)
class Lookup:
    """Factor updated by direct lookup: each step its belief becomes a delta
    at the forecast value. Used for exogenous inputs such as weather, tariff
    flags, and messages from the other agent."""

    key: str


@dataclass(frozen=True)
class TableTransition:
    """Factor updated through a conditional table.

    Table axes are (child, *parents-in-declared-order) with an optional
    trailing action axis. The table may be a DirichletTable while the factor
    is being learned.
    """

    table: Union[ConditionalTable, DirichletTable]
    parents: tuple[Union[FactorParent, ForecastParent], ...] = ()
    action_conditioned: bool = False

    def working_table(self) -> ConditionalTable:
        """Current point estimate (normalized counts when learning)."""
        if isinstance(self.table, DirichletTable):
            return self.table.as_table()
        return self.table


@dataclass(frozen=True)
class Modality:
    """An observation channel: a likelihood over current-step parent factors
    plus log-preferences over its outcomes."""

    name: str
    likelihood: ConditionalTable
    parents: tuple[str, ...]
    preferences: Preferences


@dataclass(frozen=True)
class AgentModel:
    """A complete generative model for one agent.

    `factors` lists (name, cardinality) pairs in update order: within a
    planning step factors are refreshed in exactly this order, so a factor
    may condition on the already-updated ("current") value of any factor
    listed before it, and on the pre-step ("prev") value of any factor.
    """

    name: str
    factors: tuple[tuple[str, int], ...]
    transitions: Mapping[str, Union[Lookup, TableTransition]]
    modalities: tuple[Modality, ...]
    initial_beliefs: Mapping[str, Categorical]
    policy_prior: Categorical
    horizon: int
    action_cardinality: int
    action_labels: tuple[str, ...] = ()
    policies: tuple[Policy, ...] = field(default=())

    def __post_init__(self) -> None:
        names = [name for name, _ in self.factors]
        if len(set(names)) != len(names):
            raise ModelError("duplicate factor names")
        cards = {name: int(card) for name, card in self.factors}
        if any(card < 1 for card in cards.values()):
            raise ModelError("factor cardinalities must be positive")
        if self.horizon < 1:
            raise ModelError("horizon must be at least 1")
        if self.action_cardinality < 1:
            raise ModelError("need at least one action")
        if self.action_labels and len(self.action_labels) != self.action_cardinality:
            raise ModelError("action labels do not match the action cardinality")

        if not self.policies:
            object.__setattr__(
                self, "policies",
                enumerate_policies(self.action_cardinality, self.horizon),
            )
        expected = self.action_cardinality ** self.horizon
        if len(self.policies) != expected:
            raise ModelError(
                f"expected {expected} policies, got {len(self.policies)}"
            )
        for policy in self.policies:
            if len(policy.actions) != self.horizon:
                raise ModelError("every policy must span the full horizon")
            if any(a >= self.action_cardinality for a in policy.actions):
                raise ModelError("policy action index out of range")
        if self.policy_prior.cardinality != len(self.policies):
            raise ModelError("policy prior length does not match the policy count")

        if set(self.transitions) != set(names):
            raise ModelError("transitions must cover exactly the declared factors")
        position = {name: i for i, name in enumerate(names)}
        for name in names:
            spec = self.transitions[name]
            if isinstance(spec, Lookup):
                continue
            if not isinstance(spec, TableTransition):
                raise ModelError(f"factor {name!r} has an unknown transition kind")
            self._check_table(name, spec, cards, position)

        for modality in self.modalities:
            for parent in modality.parents:
                if parent not in cards:
                    raise ModelError(
                        f"modality {modality.name!r} reads unknown factor {parent!r}"
                    )
            expected_shape = tuple(cards[p] for p in modality.parents)
            if modality.likelihood.parent_cardinalities != expected_shape:
                raise ModelError(
                    f"modality {modality.name!r} likelihood shape does not match its parents"
                )
            if modality.preferences.cardinality != modality.likelihood.child_cardinality:
                raise ModelError(
                    f"modality {modality.name!r} preferences do not match its outcomes"
                )

        if set(self.initial_beliefs) != set(names):
            raise ModelError("initial beliefs must cover exactly the declared factors")
        for name in names:
            if self.initial_beliefs[name].cardinality != cards[name]:
                raise ModelError(f"initial belief for {name!r} has the wrong length")

    def _check_table(self, name, spec, cards, position) -> None:
        table = spec.table
        shape = (
            table.concentrations.shape
            if isinstance(table, DirichletTable)
            else table.entries.shape
        )
        expected_axes = 1 + len(spec.parents) + (1 if spec.action_conditioned else 0)
        if len(shape) != expected_axes:
            raise ModelError(f"transition table for {name!r} has the wrong rank")
        if shape[0] != cards[name]:
            raise ModelError(f"transition table for {name!r} has the wrong child axis")
        for axis, parent in enumerate(spec.parents, start=1):
            if isinstance(parent, FactorParent):
                if parent.name not in cards:
                    raise ModelError(
                        f"factor {name!r} conditions on unknown factor {parent.name!r}"
                    )
                if parent.lag == "current" and position[parent.name] >= position[name]:
                    raise ModelError(
                        f"factor {name!r} reads the current value of {parent.name!r}, "
                        "which is updated later in the sweep"
                    )
                if shape[axis] != cards[parent.name]:
                    raise ModelError(
                        f"transition table for {name!r} axis {axis} does not match "
                        f"factor {parent.name!r}"
                    )
        if spec.action_conditioned and shape[-1] != self.action_cardinality:
            raise ModelError(
                f"transition table for {name!r} action axis does not match the action count"
            )

    @property
    def update_order(self) -> tuple[str, ...]:
        return tuple(name for name, _ in self.factors)

    @property
    def factor_cardinalities(self) -> dict[str, int]:
        return {name: card for name, card in self.factors}

    def modality(self, name: str) -> Modality:
        for modality in self.modalities:
            if modality.name == name:
                return modality
        raise ModelError(f"no modality named {name!r}")

"""Discrete active-inference engine: distributions, model structure, expected
free energy, and Dirichlet learning."""
from .distributions import (
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
from .engine import (
    ambiguity,
    breakdown_from_parts,
    efe_policy,
    evaluate_policies,
    expected_observations,
    infer_states,
    policy_posterior,
    predict_states,
    risk,
    roll_beliefs_one_step,
    select_action,
    select_policy,
)
from .learning import update_transition_counts
from .model import (
    AgentModel,
    EfeBreakdown,
    FactorParent,
    ForecastParent,
    Lookup,
    Modality,
    Policy,
    TableTransition,
    enumerate_policies,
)

__all__ = [
    "AgentModel",
    "Categorical",
    "ConditionalTable",
    "DirichletTable",
    "EfeBreakdown",
    "FactorParent",
    "ForecastParent",
    "Lookup",
    "Modality",
    "Policy",
    "Preferences",
    "TableTransition",
    "ambiguity",
    "blur_adjacent",
    "breakdown_from_parts",
    "efe_policy",
    "enumerate_policies",
    "evaluate_policies",
    "expected_observations",
    "identity_table",
    "infer_states",
    "joint_identity_table",
    "normalize",
    "policy_posterior",
    "predict_states",
    "risk",
    "roll_beliefs_one_step",
    "select_action",
    "select_policy",
    "stable_softmax",
    "update_transition_counts",
]

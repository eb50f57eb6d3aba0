"""Belief updating, expected free energy, and action selection.

Policy evaluation rolls the factor cascade forward one planning step at a
time under each candidate action sequence, scoring every observation modality
for risk, ambiguity, information gain, and expected utility. The full policy
tree shares computation across common action prefixes, which keeps the
three-action, horizon-six case (729 policies) cheap enough to replan at every
simulation step.
"""
from __future__ import annotations

from typing import Mapping, Sequence

import numpy as np

from ..errors import (
    InferenceError,
    ModelError,
    NoFeasiblePolicyError,
    PlanningError,
)
from .distributions import Categorical, ConditionalTable, Preferences, stable_softmax
from .model import (
    AgentModel,
    EfeBreakdown,
    FactorParent,
    ForecastParent,
    Lookup,
    Policy,
    TableTransition,
)

Frame = Mapping[str, int]


def infer_states(prior: Categorical, likelihood: ConditionalTable, observation: int) -> Categorical:
    """Exact discrete posterior over a single factor: p(s | o) ∝ p(o | s) p(s)."""
    if likelihood.parent_cardinalities != (prior.cardinality,):
        raise ModelError("likelihood shape does not match the prior")
    if not 0 <= observation < likelihood.child_cardinality:
        raise InferenceError(f"observation index {observation} out of range")
    evidence = likelihood.entries[observation] * prior.probs
    if evidence.sum() <= 0.0:
        raise InferenceError("observation has zero probability under the prior")
    return Categorical(evidence)


def predict_states(
    belief: Categorical,
    transition: ConditionalTable,
    action: int | None = None,
    exogenous_parents: Sequence[Categorical] = (),
) -> Categorical:
    """Posterior predictive over the child of a transition table.

    Table axes are (child, belief, *exogenous parents[, action]); the belief
    and every exogenous parent are marginalized out.
    """
    arr = transition.entries
    if action is not None:
        if not 0 <= action < arr.shape[-1]:
            raise ModelError(f"action index {action} out of range")
        arr = arr[..., action]
    vectors = [belief.probs] + [c.probs for c in exogenous_parents]
    if arr.ndim != len(vectors) + 1:
        raise ModelError("transition table rank does not match the supplied parents")
    for axis, vec in enumerate(vectors, start=1):
        if arr.shape[axis] != vec.shape[0]:
            raise ModelError(f"transition table axis {axis} does not match its parent")
    for vec in reversed(vectors):
        arr = arr @ vec
    return Categorical(arr)


def expected_observations(state_belief: Categorical, likelihood: ConditionalTable) -> Categorical:
    """q(o) = sum_s p(o | s) q(s) for a single-parent likelihood."""
    if likelihood.parent_cardinalities != (state_belief.cardinality,):
        raise ModelError("likelihood shape does not match the state belief")
    return Categorical(likelihood.entries @ state_belief.probs)


def risk(predicted_obs: Categorical, preferences: Preferences) -> float:
    """KL divergence from predicted to preferred observations, in nats.

    Predicted mass on a hard-forbidden outcome (log-preference -inf) yields
    +inf, the sentinel that later excludes the policy from the posterior.
    """
    if preferences.cardinality != predicted_obs.cardinality:
        raise ModelError("preferences do not match the predicted observations")
    q = predicted_obs.probs
    log_p = preferences.log_probs
    support = q > 0
    if np.isneginf(log_p[support]).any():
        return float("inf")
    qs = q[support]
    return float((qs * (np.log(qs) - log_p[support])).sum())


def ambiguity(state_belief: Categorical, likelihood: ConditionalTable) -> float:
    """Expected conditional entropy of the observation given the state, in nats."""
    if likelihood.parent_cardinalities != (state_belief.cardinality,):
        raise ModelError("likelihood shape does not match the state belief")
    return float(state_belief.probs @ likelihood.conditional_entropies())


class _ModalityCache:
    """Flattened numeric views of one modality, precomputed once per evaluation."""

    __slots__ = ("name", "parents", "flat_likelihood", "log_likelihood",
                 "cond_entropy", "log_pref")

    def __init__(self, name, parents, likelihood: ConditionalTable, prefs: Preferences):
        self.name = name
        self.parents = parents
        entries = likelihood.entries
        self.flat_likelihood = entries.reshape(entries.shape[0], -1)
        with np.errstate(divide="ignore"):
            self.log_likelihood = np.log(self.flat_likelihood)
        self.cond_entropy = likelihood.conditional_entropies().ravel()
        self.log_pref = prefs.log_probs


class _ModelCache:
    """Per-evaluation numeric views of an agent model.

    Dirichlet transition tables are normalized here once, so a single
    evaluation sees a consistent point estimate even while counts accumulate
    between simulation steps.
    """

    __slots__ = ("order", "cards", "transitions", "modalities")

    def __init__(self, model: AgentModel):
        self.order = model.update_order
        self.cards = model.factor_cardinalities
        self.transitions = {}
        for name in self.order:
            spec = model.transitions[name]
            if isinstance(spec, Lookup):
                self.transitions[name] = spec
            else:
                self.transitions[name] = (
                    spec.working_table().entries,
                    spec.parents,
                    spec.action_conditioned,
                )
        self.modalities = [
            _ModalityCache(m.name, m.parents, m.likelihood, m.preferences)
            for m in model.modalities
        ]


def _one_hot(cardinality: int, index: int) -> np.ndarray:
    vec = np.zeros(cardinality)
    vec[index] = 1.0
    return vec


def _advance(cache: _ModelCache, prev: dict, action: int, frame: Frame) -> dict:
    """One cascaded update sweep: refresh every factor in declared order.

    Lookup factors snap to a delta at the frame value; table factors
    marginalize their parents, reading "current" parents from this sweep and
    "prev" parents from the incoming beliefs.
    """
    current: dict = {}
    for name in cache.order:
        spec = cache.transitions[name]
        if isinstance(spec, Lookup):
            try:
                index = frame[spec.key]
            except KeyError:
                raise PlanningError(
                    f"forecast frame is missing key {spec.key!r}"
                ) from None
            current[name] = _one_hot(cache.cards[name], index)
            continue
        entries, parents, action_conditioned = spec
        arr = entries[..., action] if action_conditioned else entries
        for parent in reversed(parents):
            if isinstance(parent, ForecastParent):
                try:
                    arr = arr[..., frame[parent.key]]
                except KeyError:
                    raise PlanningError(
                        f"forecast frame is missing key {parent.key!r}"
                    ) from None
            else:
                source = current if parent.lag == "current" else prev
                arr = arr @ source[parent.name]
        arr = arr / arr.sum()  # keep the 1e-12 normalization guarantee over long rolls
        current[name] = arr
    return current


def _score_step(cache: _ModelCache, current: dict) -> tuple[float, float, float, float]:
    """Risk, ambiguity, information gain, and expected utility for one step.

    Modality parent joints are outer products of the factor marginals (the
    mean-field assumption). 0 * log 0 terms are dropped throughout.
    """
    risk_sum = 0.0
    ambiguity_sum = 0.0
    info_gain_sum = 0.0
    utility_sum = 0.0
    for modality in cache.modalities:
        joint = current[modality.parents[0]]
        for parent_name in modality.parents[1:]:
            joint = np.multiply.outer(joint, current[parent_name]).ravel()
        predicted = modality.flat_likelihood @ joint
        support = predicted > 0

        log_pref = modality.log_pref
        if np.isneginf(log_pref[support]).any():
            risk_sum = float("inf")
            utility_sum = float("-inf")
        else:
            qs = predicted[support]
            log_qs = np.log(qs)
            risk_sum += float((qs * (log_qs - log_pref[support])).sum())
            utility_sum += float((qs * log_pref[support]).sum())

        ambiguity_sum += float(joint @ modality.cond_entropy)

        with np.errstate(divide="ignore", invalid="ignore"):
            weights = modality.flat_likelihood * joint
            log_predicted = np.where(support, np.log(np.where(support, predicted, 1.0)), 0.0)
            gain_terms = np.where(
                weights > 0,
                weights * (modality.log_likelihood - log_predicted[:, None]),
                0.0,
            )
        info_gain_sum += float(gain_terms.sum())
    return risk_sum, ambiguity_sum, info_gain_sum, utility_sum


def _initial_arrays(model: AgentModel, beliefs: Mapping[str, Categorical]) -> dict:
    arrays = {}
    for name, card in model.factors:
        try:
            belief = beliefs[name]
        except KeyError:
            raise ModelError(f"missing belief for factor {name!r}") from None
        if belief.cardinality != card:
            raise ModelError(f"belief for factor {name!r} has the wrong length")
        arrays[name] = np.asarray(belief.probs)
    return arrays


def _check_forecast(model: AgentModel, forecast: Sequence[Frame]) -> None:
    if len(forecast) < model.horizon:
        raise PlanningError(
            f"forecast covers {len(forecast)} steps but the horizon is {model.horizon}"
        )


def efe_policy(
    model: AgentModel,
    beliefs: Mapping[str, Categorical],
    policy: Policy,
    exogenous_forecast: Sequence[Frame],
) -> EfeBreakdown:
    """Expected free energy of a single policy.

    Beliefs roll forward through the cascade once per step; risk, ambiguity,
    information gain, and expected utility accumulate over steps and
    modalities. total = risk + ambiguity, and equivalently
    -info_gain - expected_utility.
    """
    if len(policy.actions) != model.horizon:
        raise PlanningError("policy length does not match the model horizon")
    if any(a >= model.action_cardinality for a in policy.actions):
        raise PlanningError("policy action index out of range")
    _check_forecast(model, exogenous_forecast)
    cache = _ModelCache(model)
    state = _initial_arrays(model, beliefs)
    totals = (0.0, 0.0, 0.0, 0.0)
    for step, action in enumerate(policy.actions):
        state = _advance(cache, state, action, exogenous_forecast[step])
        scores = _score_step(cache, state)
        totals = tuple(t + s for t, s in zip(totals, scores))
    risk_term, ambiguity_term, info_gain, utility = totals
    return EfeBreakdown(
        risk=risk_term,
        ambiguity=ambiguity_term,
        info_gain=info_gain,
        expected_utility=utility,
        total=risk_term + ambiguity_term,
    )


def evaluate_policies(
    model: AgentModel,
    beliefs: Mapping[str, Categorical],
    exogenous_forecast: Sequence[Frame],
) -> tuple[np.ndarray, np.ndarray]:
    """Expected free energy of every enumerated policy.

    Returns (totals, parts): totals[p] is the expected free energy of
    model.policies[p] (+inf where infeasible); parts[p] holds the
    (risk, ambiguity, info_gain, expected_utility) sums. Shares the belief
    roll across common action prefixes, matching efe_policy exactly.
    """
    _check_forecast(model, exogenous_forecast)
    cache = _ModelCache(model)
    horizon = model.horizon
    n_actions = model.action_cardinality
    parts = np.zeros((len(model.policies), 4))
    initial = _initial_arrays(model, beliefs)

    def walk(depth: int, prev: dict, acc: tuple, prefix: int) -> None:
        for action in range(n_actions):
            current = _advance(cache, prev, action, exogenous_forecast[depth])
            scores = _score_step(cache, current)
            acc2 = tuple(t + s for t, s in zip(acc, scores))
            index = prefix * n_actions + action
            if depth + 1 == horizon:
                parts[index] = acc2
            else:
                walk(depth + 1, current, acc2, index)

    walk(0, initial, (0.0, 0.0, 0.0, 0.0), 0)
    totals = parts[:, 0] + parts[:, 1]
    return totals, parts


def breakdown_from_parts(parts_row: np.ndarray) -> EfeBreakdown:
    """Rehydrate one row of evaluate_policies parts into an EfeBreakdown."""
    risk_term, ambiguity_term, info_gain, utility = (float(x) for x in parts_row)
    return EfeBreakdown(
        risk=risk_term,
        ambiguity=ambiguity_term,
        info_gain=info_gain,
        expected_utility=utility,
        total=risk_term + ambiguity_term,
    )


def roll_beliefs_one_step(
    model: AgentModel,
    beliefs: Mapping[str, Categorical],
    action: int,
    frame: Frame,
) -> dict[str, Categorical]:
    """One cascaded update sweep under a committed action.

    This is the agent's belief about the current interval once it has chosen
    what to do, used for logging expectations alongside ground truth.
    """
    if not 0 <= action < model.action_cardinality:
        raise PlanningError(f"action index {action} out of range")
    cache = _ModelCache(model)
    current = _advance(cache, _initial_arrays(model, beliefs), action, frame)
    return {name: Categorical(vec) for name, vec in current.items()}


def policy_posterior(
    efe_totals,
    policy_prior: Categorical,
    precision: float = 1.0,
) -> Categorical:
    """q(pi) = softmax(ln prior - precision * G), computed in log space.

    Policies with infinite expected free energy (or zero prior) receive
    exactly zero probability. Raises NoFeasiblePolicyError when that leaves
    nothing.
    """
    totals = np.asarray(efe_totals, dtype=float)
    if totals.shape != (policy_prior.cardinality,):
        raise ModelError("expected free energy vector does not match the policy prior")
    if np.isnan(totals).any() or np.isneginf(totals).any():
        raise InferenceError("expected free energies must be finite or +inf")
    if not np.isfinite(precision) or precision <= 0:
        raise InferenceError("precision must be a positive finite number")
    feasible = np.isfinite(totals) & (policy_prior.probs > 0)
    if not feasible.any():
        raise NoFeasiblePolicyError("every policy is excluded or infinitely costly")
    with np.errstate(divide="ignore"):
        logits = np.log(policy_prior.probs) - precision * totals
    return Categorical(stable_softmax(logits))


def select_policy(
    posterior: Categorical,
    mode: str = "deterministic",
    rng: np.random.Generator | int | None = None,
) -> int:
    """Pick a policy index from the posterior.

    Deterministic mode takes the argmax (ties resolve to the lowest index);
    sampled mode draws from the posterior using the supplied generator or
    seed.
    """
    if mode == "deterministic":
        return posterior.argmax()
    if mode == "sampled":
        if not isinstance(rng, np.random.Generator):
            rng = np.random.default_rng(rng)
        return int(rng.choice(posterior.cardinality, p=posterior.probs))
    raise InferenceError(f"unknown action selection mode {mode!r}")


def select_action(
    posterior: Categorical,
    policies: Sequence[Policy],
    mode: str = "deterministic",
    rng_seed: int | np.random.Generator | None = 0,
) -> int:
    """First action of the selected policy."""
    if len(policies) != posterior.cardinality:
        raise ModelError("posterior length does not match the policy list")
    return policies[select_policy(posterior, mode, rng_seed)].actions[0]

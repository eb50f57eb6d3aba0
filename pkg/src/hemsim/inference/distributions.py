"""Discrete probability containers used throughout the engine.

Categorical vectors, conditional tables, Dirichlet concentration counts, and
log-preference vectors. Everything is plain numpy; all returned arrays are
read-only so shared model structure cannot be mutated by accident.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import ModelError, NormalizationError

SOFTMAX_FLUSH = 1e-300


def _readonly(arr: np.ndarray) -> np.ndarray:
    arr.flags.writeable = False
    return arr


def stable_softmax(logits: np.ndarray) -> np.ndarray:
    """Softmax computed in log space with max subtraction.

    Logits of -inf map to exactly zero probability, which lets callers mark
    excluded outcomes. Probabilities below 1e-300 are flushed to zero before
    the final renormalization so that later logs never underflow to -inf
    surprises mid-computation.
    """
    logits = np.asarray(logits, dtype=float)
    if logits.ndim != 1 or logits.size == 0:
        raise NormalizationError("softmax expects a non-empty 1-D logit vector")
    if np.isnan(logits).any() or np.isposinf(logits).any():
        raise NormalizationError("softmax logits must be finite or -inf")
    finite = np.isfinite(logits)
    if not finite.any():
        raise NormalizationError("softmax logits are all -inf")
    with np.errstate(under="ignore"):
        expd = np.exp(logits - logits[finite].max())
    expd[expd < SOFTMAX_FLUSH] = 0.0
    return expd / expd.sum()


@dataclass(frozen=True)
class Categorical:
    """A normalized probability vector over one discrete variable.

    Construction normalizes the input, so the entries always sum to one up to
    machine precision. Negative, non-finite, or all-zero inputs raise.
    """

    probs: np.ndarray

    def __post_init__(self) -> None:
        probs = np.array(self.probs, dtype=float)
        if probs.ndim != 1 or probs.size == 0:
            raise NormalizationError("probability vector must be 1-D and non-empty")
        if not np.isfinite(probs).all():
            raise NormalizationError("probability vector must be finite")
        if (probs < 0).any():
            raise NormalizationError("probability vector must be non-negative")
        total = probs.sum()
        if total <= 0.0:
            raise NormalizationError("cannot normalize an all-zero vector")
        object.__setattr__(self, "probs", _readonly(probs / total))

    @property
    def cardinality(self) -> int:
        return self.probs.shape[0]

    @classmethod
    def delta(cls, index: int, cardinality: int) -> "Categorical":
        """All mass on a single outcome."""
        if not 0 <= index < cardinality:
            raise NormalizationError(
                f"delta index {index} outside [0, {cardinality})"
            )
        probs = np.zeros(cardinality)
        probs[index] = 1.0
        return cls(probs)

    @classmethod
    def uniform(cls, cardinality: int) -> "Categorical":
        if cardinality < 1:
            raise NormalizationError("cardinality must be positive")
        return cls(np.full(cardinality, 1.0 / cardinality))

    def argmax(self) -> int:
        return int(np.argmax(self.probs))

    def entropy(self) -> float:
        """Shannon entropy in nats."""
        p = self.probs[self.probs > 0]
        return float(-(p * np.log(p)).sum())

    def expected_value(self, values) -> float:
        values = np.asarray(values, dtype=float)
        if values.shape != self.probs.shape:
            raise ModelError("value vector length does not match the distribution")
        return float(self.probs @ values)


def normalize(raw) -> Categorical:
    """Normalize a non-negative vector into a Categorical.

    Raises NormalizationError on negative entries, non-finite entries, or an
    all-zero vector.
    """
    return Categorical(np.asarray(raw, dtype=float))


@dataclass(frozen=True)
class ConditionalTable:
    """p(child | parent_1, ..., parent_k) with the child along axis 0.

    Every fixed parent combination indexes a probability vector over the
    child. Construction checks each slice sums to one (loose tolerance) and
    then renormalizes exactly.
    """

    entries: np.ndarray

    def __post_init__(self) -> None:
        arr = np.array(self.entries, dtype=float)
        if arr.ndim < 1 or arr.shape[0] < 1:
            raise ModelError("conditional table needs at least a child axis")
        if not np.isfinite(arr).all() or (arr < 0).any():
            raise ModelError("conditional table entries must be finite and non-negative")
        sums = arr.sum(axis=0)
        if not np.allclose(sums, 1.0, atol=1e-6):
            raise ModelError("every child slice of a conditional table must sum to 1")
        object.__setattr__(self, "entries", _readonly(arr / sums))

    @property
    def child_cardinality(self) -> int:
        return self.entries.shape[0]

    @property
    def parent_cardinalities(self) -> tuple[int, ...]:
        return self.entries.shape[1:]

    def conditional_entropies(self) -> np.ndarray:
        """H(child | parents) for every parent combination, in nats."""
        arr = self.entries
        with np.errstate(divide="ignore", invalid="ignore"):
            terms = np.where(arr > 0, arr * np.log(arr), 0.0)
        return -terms.sum(axis=0)


def identity_table(cardinality: int) -> ConditionalTable:
    """A noiseless observation likelihood: p(o | s) = 1 iff o == s."""
    return ConditionalTable(np.eye(cardinality))


def joint_identity_table(cardinalities: tuple[int, ...]) -> ConditionalTable:
    """A deterministic likelihood whose outcome enumerates the joint parent state.

    Outcome index is the row-major flattening of the parent indices.
    """
    size = int(np.prod(cardinalities))
    return ConditionalTable(np.eye(size).reshape(size, *cardinalities))


def blur_adjacent(entries: np.ndarray, flip_p: float) -> np.ndarray:
    """Leak probability mass from each child outcome to its neighbors.

    Total leaked mass is flip_p, split evenly between the two adjacent bins
    along axis 0; mass that would fall off either end stays put. This is the
    shared kernel for observation flips and for process noise on transition
    tables, so agent models and the environment stay in exact agreement.
    """
    if not 0.0 <= flip_p <= 1.0:
        raise ModelError("flip probability must lie in [0, 1]")
    if flip_p == 0.0:
        return np.array(entries, dtype=float)
    arr = np.asarray(entries, dtype=float)
    half = flip_p / 2.0
    out = (1.0 - flip_p) * arr
    out[1:] += half * arr[:-1]
    out[:-1] += half * arr[1:]
    out[0] += half * arr[0]
    out[-1] += half * arr[-1]
    return out


@dataclass
class DirichletTable:
    """Dirichlet concentration counts with the same axis layout as a table.

    This is the one mutable model object: counts are incremented between
    simulation steps while a transition table is being learned. Normalizing
    over the child axis yields the working ConditionalTable.
    """

    concentrations: np.ndarray

    def __post_init__(self) -> None:
        arr = np.array(self.concentrations, dtype=float)
        if arr.ndim < 1:
            raise ModelError("Dirichlet counts need at least a child axis")
        if not np.isfinite(arr).all() or (arr <= 0).any():
            raise ModelError("Dirichlet concentrations must be finite and positive")
        self.concentrations = arr

    @classmethod
    def uninformative(cls, shape: tuple[int, ...]) -> "DirichletTable":
        """The flat prior: one pseudo-count everywhere."""
        return cls(np.ones(shape))

    @property
    def child_cardinality(self) -> int:
        return self.concentrations.shape[0]

    def as_table(self) -> ConditionalTable:
        return ConditionalTable(self.concentrations / self.concentrations.sum(axis=0))


@dataclass(frozen=True)
class Preferences:
    """Log-preferences over one observation modality.

    Entries of -inf mark hard-forbidden outcomes; +inf and NaN are rejected.
    The induced preferred-outcome distribution (softmax of the log-prefs) and
    its log are cached at construction.
    """

    log_prefs: np.ndarray

    def __post_init__(self) -> None:
        arr = np.array(self.log_prefs, dtype=float)
        if arr.ndim != 1 or arr.size == 0:
            raise ModelError("log-preferences must be a non-empty 1-D vector")
        if np.isnan(arr).any() or np.isposinf(arr).any():
            raise ModelError("log-preferences must be finite or -inf")
        if not np.isfinite(arr).any():
            raise ModelError("at least one outcome must have finite preference")
        object.__setattr__(self, "log_prefs", _readonly(arr))
        probs = stable_softmax(arr)
        with np.errstate(divide="ignore"):
            log_probs = np.log(probs)
        object.__setattr__(self, "_probs", _readonly(probs))
        object.__setattr__(self, "_log_probs", _readonly(log_probs))

    @property
    def cardinality(self) -> int:
        return self.log_prefs.shape[0]

    @property
    def probs(self) -> np.ndarray:
        """The preferred-outcome distribution."""
        return self._probs

    @property
    def log_probs(self) -> np.ndarray:
        """Log of the preferred-outcome distribution (-inf where excluded)."""
        return self._log_probs

    def distribution(self) -> Categorical:
        return Categorical(self._probs)

    @classmethod
    def flat(cls, cardinality: int) -> "Preferences":
        """Indifference: every outcome equally preferred."""
        return cls(np.zeros(cardinality))

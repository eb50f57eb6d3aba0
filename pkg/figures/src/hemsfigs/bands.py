"""Contiguous shading intervals computed from per-step boolean flags.

The renderers shade time regions (high tariff, occupancy, carbon-intensive
supply) as half-open step intervals. Keeping the interval logic here, away
from any plotting, makes the band/flag correspondence directly testable.
"""
from __future__ import annotations

from collections.abc import Iterable, Sequence


def flag_bands(steps: Sequence[int], flags: Sequence[bool]) -> tuple[tuple[int, int], ...]:
    """Half-open [start, end) intervals covering exactly the flagged steps.

    Steps must be strictly increasing integers. A band closes when the flag
    drops or the step sequence jumps, so the intervals never cover a step
    that is absent from the input.
    """
    bands: list[tuple[int, int]] = []
    start: int | None = None
    prev: int | None = None
    for raw_step, flag in zip(steps, flags, strict=True):
        step = int(raw_step)
        if prev is not None and step <= prev:
            raise ValueError("steps must be strictly increasing")
        if start is not None and (not flag or step != prev + 1):
            bands.append((start, prev + 1))
            start = None
        if flag and start is None:
            start = step
        prev = step
    if start is not None:
        bands.append((start, prev + 1))
    return tuple(bands)


def band_steps(bands: Iterable[tuple[int, int]]) -> frozenset[int]:
    """The set of steps a collection of [start, end) bands covers."""
    return frozenset(step for start, end in bands for step in range(start, end))

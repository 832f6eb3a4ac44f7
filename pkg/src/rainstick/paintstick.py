"""Paintstick process for Geo(p)-shifted permutations.

Each step a paintball lands on ``x ~ Geo(p)``: every site left of ``x`` is
painted red and site ``x`` is removed, shifting the sites to its right one
place left. Red sites always form an initial interval, so the state is the
number of red sites; the first block is complete when none remain.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

from .distributions import GeometricLaw
from .errors import DomainError


def paintstick_step(r: int, x: int) -> int:
    """Red count after a paintball at ``x`` with ``r`` red sites."""
    if x < 1:
        raise DomainError(f"paintball site must be >= 1, got {x}")
    if r < 0:
        raise DomainError(f"red count must be >= 0, got {r}")
    return r - 1 if x <= r else x - 1


@dataclass
class PaintState:
    red: int = 0
    steps: int = 0

    def advance(self, x: int) -> bool:
        self.red = paintstick_step(self.red, x)
        self.steps += 1
        return self.red == 0


class PaintOutcome(NamedTuple):
    k_prime: int
    capped: bool


def sample_paintstick(p: float, step_cap: int, rng) -> PaintOutcome:
    """Steps until no red sites remain, which is also the block size."""
    if not (0.0 < p < 1.0):
        raise DomainError(f"p must lie in (0, 1), got {p}")
    if step_cap < 1:
        raise DomainError(f"step_cap must be >= 1, got {step_cap}")
    law = GeometricLaw(p)
    state = PaintState()
    batch = 8
    while True:
        for x in law.sample(rng, min(batch, step_cap - state.steps)).tolist():
            if state.advance(x):
                return PaintOutcome(state.steps, False)
        if state.steps >= step_cap:
            return PaintOutcome(state.steps, True)
        batch = min(2 * batch, 4096)

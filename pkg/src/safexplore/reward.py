"""Step reward: terminal bonus, exploration shaping, or shield penalty.

Exactly one branch fires per step. A shield intervention always yields the
penalty, even on a step that reaches the coverage goal; otherwise reaching
the goal pays the terminal bonus, and an ordinary step pays the number of
newly revealed cells plus the potential-field difference.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass


class RewardBranch(enum.Enum):
    TERMINAL_BONUS = "terminal_bonus"
    SHAPED = "shaped"
    SHIELD_PENALTY = "shield_penalty"


@dataclass(frozen=True)
class RewardParams:
    rho_star: float
    r_exp: float
    r_sigma: float


@dataclass(frozen=True)
class RewardTerms:
    branch: RewardBranch
    value: float
    new_cells: int
    potential_before: float
    potential_after: float
    intervened: bool

    def to_json_dict(self) -> dict:
        return {
            "branch": self.branch.value,
            "value": self.value,
            "new_cells": self.new_cells,
            "potential_before": self.potential_before,
            "potential_after": self.potential_after,
            "intervened": self.intervened,
        }


def compute_reward(
    coverage_next: float,
    intervened: bool,
    new_cells: int,
    potential_before: float,
    potential_after: float,
    params: RewardParams,
) -> RewardTerms:
    if new_cells < 0:
        raise ValueError(f"new_cells must be nonnegative, got {new_cells}")
    for name, value in (("potential_before", potential_before),
                        ("potential_after", potential_after)):
        if not 0.0 <= value <= 1.0:
            raise ValueError(f"{name} must be in [0, 1], got {value}")

    if intervened:
        branch, value = RewardBranch.SHIELD_PENALTY, params.r_sigma
    elif coverage_next >= params.rho_star:
        branch, value = RewardBranch.TERMINAL_BONUS, params.r_exp
    else:
        branch = RewardBranch.SHAPED
        value = new_cells + potential_after - potential_before
    return RewardTerms(
        branch=branch,
        value=float(value),
        new_cells=int(new_cells),
        potential_before=float(potential_before),
        potential_after=float(potential_after),
        intervened=bool(intervened),
    )

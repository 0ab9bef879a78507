"""Priority-based clearing mechanisms as deterministic choice functions.

Both mechanisms pick the allocation with the lexicographically maximal key
over the feasible set.  The constrained-priority key is the vector of
satisfaction indicators read in priority order; the constrained-utilitarian
variant prepends the number of satisfied agents, so it first maximizes how
many agents are satisfied and only then applies the priority hierarchy.
Key ties are broken by canonical allocation order, which is sound because
key-tied allocations give every agent the same utility.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

from .core import Allocation, Market, PriorityOrder, satisfaction_profile
from .feasibility import ConstraintSet, feasible_with_profiles

MECHANISM_KINDS = ("cp", "cup")


@dataclass(frozen=True)
class MechanismSpec:
    """A mechanism is its kind, a priority order, and the feasibility constraints."""

    kind: str
    priority: PriorityOrder
    constraints: ConstraintSet

    def __post_init__(self):
        if self.kind not in MECHANISM_KINDS:
            raise ValueError(f"unknown mechanism kind {self.kind!r}")
        object.__setattr__(self, "priority", tuple(self.priority))


def check_priority(market: Market, priority: Sequence[str]) -> PriorityOrder:
    """Validate that the priority order is a permutation of the market's agents."""
    priority = tuple(priority)
    if sorted(priority) != sorted(market.agent_ids):
        raise ValueError(
            f"priority order {priority!r} is not a permutation of agents {market.agent_ids!r}"
        )
    return priority


def _key_from_profile(profile_by_id: dict[str, int], spec: MechanismSpec) -> tuple[int, ...]:
    head = (sum(profile_by_id.values()),) if spec.kind == "cup" else ()
    return head + tuple(profile_by_id[a] for a in spec.priority)


def lex_key(market: Market, allocation: Allocation, spec: MechanismSpec) -> tuple[int, ...]:
    """The maximized tuple: (u_p1, ..., u_pn) for cp, with the satisfied count
    prepended for cup."""
    check_priority(market, spec.priority)
    return _key_from_profile(satisfaction_profile(market, allocation), spec)


def choose_from(market: Market, spec: MechanismSpec, candidates: Iterable[Allocation]) -> Allocation:
    """The candidate with the lexicographically maximal key; ties go to the
    canonically first allocation regardless of the candidates' list order."""
    check_priority(market, spec.priority)
    best = None
    best_key = None
    best_canon = None
    for alloc in candidates:
        key = _key_from_profile(satisfaction_profile(market, alloc), spec)
        canon = alloc.canonical_key
        if best is None or key > best_key or (key == best_key and canon < best_canon):
            best, best_key, best_canon = alloc, key, canon
    if best is None:
        raise ValueError("empty candidate list")
    return best


def _argmax_over_profiles(
    market: Market,
    spec: MechanismSpec,
    allocations: tuple[Allocation, ...],
    profiles: tuple[tuple[int, ...], ...],
) -> Allocation:
    # allocations arrive in canonical order, so the first strict maximum is
    # also the canonical tie-break winner
    index_of = {agent_id: i for i, agent_id in enumerate(market.agent_ids)}
    order = [index_of[a] for a in spec.priority]
    cup = spec.kind == "cup"
    best = None
    best_key = None
    for alloc, profile in zip(allocations, profiles):
        key = tuple(profile[i] for i in order)
        if cup:
            key = (sum(profile),) + key
        if best is None or key > best_key:
            best, best_key = alloc, key
    if best is None:
        raise ValueError("empty candidate list")
    return best


def run_mechanism(market: Market, spec: MechanismSpec, budget: int | None = None) -> Allocation:
    """Run the mechanism over the full feasible set of its constraint set."""
    check_priority(market, spec.priority)
    allocations, profiles = feasible_with_profiles(market, spec.constraints, budget)
    return _argmax_over_profiles(market, spec, allocations, profiles)


def run_cp(
    market: Market,
    priority: Sequence[str],
    constraints: ConstraintSet,
    budget: int | None = None,
) -> Allocation:
    return run_mechanism(market, MechanismSpec("cp", tuple(priority), constraints), budget)


def run_cup(
    market: Market,
    priority: Sequence[str],
    constraints: ConstraintSet,
    budget: int | None = None,
) -> Allocation:
    return run_mechanism(market, MechanismSpec("cup", tuple(priority), constraints), budget)

"""Empirical axiom audits: strategyproofness, weak consistency, constrained Pareto.

The audits are falsifiers, not verifiers.  A "violation" verdict always comes
with concrete, independently re-checkable witnesses; "no violation found" is
always relative to the searched space, whose size is recorded in the report
summary.  Two counterexample fixtures ship with the package: the three-agent
car/painting/bike market ("example1") whose feasible set under strong
individual rationality contains an allocation satisfying everyone, and a
three-agent pairwise-trading market ("theorem5") on which every priority
mechanism that is Pareto-optimal within the pairwise/desirable feasible set
can be manipulated by a scripted demand restriction.
"""

from __future__ import annotations

import itertools
import random
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

from .core import (
    Agent,
    Allocation,
    Bundle,
    Item,
    Market,
    bundle_sort_key,
    covers,
    is_ir,
    satisfaction_profile,
    satisfies,
)
from .feasibility import (
    BUILT_IN_CONSTRAINT_SETS,
    ConstraintSet,
    enumerate_feasible,
    feasible_with_profiles,
)
from .mechanisms import MechanismSpec, check_priority, run_mechanism

VERDICT_VIOLATION = "violation"
VERDICT_CLEAN = "no violation found"


@dataclass(frozen=True)
class MisreportScenario:
    """One misreport: a sub-endowment plus an arbitrary demand set.

    `withheld` is exactly the true endowment minus the reported one; withheld
    items stay with the agent but leave the market's item pool.
    """

    agent: str
    reported_endowment: Bundle
    reported_demands: frozenset[Bundle]
    withheld: Bundle

    def __post_init__(self):
        object.__setattr__(self, "reported_endowment", frozenset(self.reported_endowment))
        object.__setattr__(
            self, "reported_demands", frozenset(frozenset(d) for d in self.reported_demands)
        )
        object.__setattr__(self, "withheld", frozenset(self.withheld))
        if self.reported_endowment & self.withheld:
            raise ValueError("reported endowment and withheld items overlap")


@dataclass(frozen=True)
class MisreportBudget:
    """Bounds on the misreport space searched per agent.

    The space always contains the truthful report, every subset misreport
    (sub-endowment plus a non-empty subset of the true demand set) and, when
    `singleton_bundle_probes` is on, every single-bundle report {b} with
    |b| <= bundle_cap over the items left in the market.  `max_scenarios`
    truncates the canonical-order list; enlarging any bound only appends.
    """

    bundle_cap: int = 3
    max_scenarios: int = 128
    singleton_bundle_probes: bool = True


@dataclass(frozen=True)
class ManipulationWitness:
    """A misreport under which a truthfully-unsatisfied agent ends up holding
    (received plus withheld items) a bundle covering one of her true demands."""

    scenario: MisreportScenario
    truthful_outcome: Allocation
    misreport_outcome: Allocation
    realized_bundle: Bundle


@dataclass
class DominationWitness:
    dominating: Allocation
    profile: dict[str, int]


@dataclass
class ConsistencyViolation:
    """A candidate-set contraction that changed some agent's satisfaction even
    though an allocation matching the original choice's profile survived."""

    superset_size: int
    subset_size: int
    superset_choice: Allocation
    subset_choice: Allocation
    matching_allocation: Allocation
    superset_profile: dict[str, int]
    subset_profile: dict[str, int]


@dataclass
class AuditReport:
    kind: str
    verdict: str
    witnesses: tuple = ()
    summary: dict[str, int] = field(default_factory=dict)

    @property
    def violation_found(self) -> bool:
        return self.verdict == VERDICT_VIOLATION


@dataclass(frozen=True)
class ConsistencyParams:
    """Subset-sampling knobs for the weak-consistency audit.

    Exhaustive over all non-empty subsets while the feasible set has at most
    `exhaustive_limit` allocations; otherwise all leave-one-out subsets plus
    `samples` seeded uniform draws.  The seed lands in the report summary.
    """

    seed: int = 0
    samples: int = 64
    exhaustive_limit: int = 12


@dataclass
class CounterexampleFixture:
    name: str
    market: Market
    constraints: ConstraintSet
    desirable_sets: dict[str, Bundle]
    scripted_misreports: dict[str, Bundle]


def _subsets_desc(sorted_elems: Sequence) -> list[tuple]:
    """All subsets, largest first, lexicographic within a size."""
    out = []
    for size in range(len(sorted_elems), -1, -1):
        out.extend(itertools.combinations(sorted_elems, size))
    return out


def _nonempty_subsets_asc(sorted_elems: Sequence) -> list[tuple]:
    out = []
    for size in range(1, len(sorted_elems) + 1):
        out.extend(itertools.combinations(sorted_elems, size))
    return out


def _misreport_stream(market: Market, agent_id: str, budget: MisreportBudget):
    """Canonical, deduplicated misreport order: the truthful report, then
    subset misreports (full participation first), then single-bundle probes
    by ascending bundle size so a larger bundle cap only appends scenarios."""
    agent = market.agent(agent_id)
    endow_subsets = _subsets_desc(sorted(agent.endowment))
    demand_subsets = _nonempty_subsets_asc(sorted(agent.demands, key=bundle_sort_key))
    seen: set[tuple[Bundle, frozenset[Bundle]]] = set()

    def make(reported_endowment, reported_demands) -> MisreportScenario | None:
        endowment = frozenset(reported_endowment)
        demands = frozenset(frozenset(d) for d in reported_demands)
        if (endowment, demands) in seen:
            return None
        seen.add((endowment, demands))
        return MisreportScenario(agent_id, endowment, demands, agent.endowment - endowment)

    yield make(agent.endowment, agent.demands)
    for reported_endowment in endow_subsets:
        for reported_demands in demand_subsets:
            scenario = make(reported_endowment, reported_demands)
            if scenario is not None:
                yield scenario
    if budget.singleton_bundle_probes:
        pool = sorted(market.item_ids)
        for size in range(0, budget.bundle_cap + 1):
            for combo in itertools.combinations(pool, size):
                probe = frozenset(combo)
                for reported_endowment in endow_subsets:
                    withheld = agent.endowment - frozenset(reported_endowment)
                    if probe & withheld:
                        continue
                    scenario = make(reported_endowment, [probe])
                    if scenario is not None:
                        yield scenario


def enumerate_misreports(
    market: Market, agent_id: str, budget: MisreportBudget | None = None
) -> list[MisreportScenario]:
    """The first `max_scenarios` scenarios of the canonical misreport order."""
    budget = budget or MisreportBudget()
    return list(itertools.islice(_misreport_stream(market, agent_id, budget), budget.max_scenarios))


def _misreports_with_truncation(
    market: Market, agent_id: str, budget: MisreportBudget
) -> tuple[list[MisreportScenario], bool]:
    scenarios = list(
        itertools.islice(_misreport_stream(market, agent_id, budget), budget.max_scenarios + 1)
    )
    truncated = len(scenarios) > budget.max_scenarios
    return scenarios[: budget.max_scenarios], truncated


def apply_misreport(market: Market, scenario: MisreportScenario) -> Market:
    """The market as the mechanism sees it after the misreport: the agent's
    report replaces her true endowment and demands, withheld items leave the
    item pool, and every other agent is untouched (demand bundles of theirs
    that mention withheld items are kept verbatim and simply become
    uncoverable)."""
    agent = market.agent(scenario.agent)
    if not scenario.reported_endowment <= agent.endowment:
        extra = sorted(scenario.reported_endowment - agent.endowment)
        raise ValueError(f"reported endowment contains items not endowed: {extra}")
    if scenario.withheld != agent.endowment - scenario.reported_endowment:
        raise ValueError("withheld items do not match endowment minus report")
    known = set(market.item_ids)
    for d in scenario.reported_demands:
        for item_id in d:
            if item_id not in known:
                raise ValueError(f"reported demand references unknown item {item_id!r}")
    items = tuple(it for it in market.items if it.id not in scenario.withheld)
    agents = tuple(
        Agent(ag.id, scenario.reported_endowment, scenario.reported_demands)
        if ag.id == scenario.agent
        else ag
        for ag in market.agents
    )
    return Market(agents, items)


def realized_bundle(misreport_allocation_bundle: Bundle, withheld: Bundle) -> Bundle:
    """What the agent actually holds after a misreported run: the bundle the
    mechanism gave her plus everything she withheld.  True satisfaction is
    always evaluated against this union and the true demand set."""
    misreport_allocation_bundle = frozenset(misreport_allocation_bundle)
    withheld = frozenset(withheld)
    if misreport_allocation_bundle & withheld:
        overlap = sorted(misreport_allocation_bundle & withheld)
        raise ValueError(f"allocated and withheld bundles overlap: {overlap}")
    return misreport_allocation_bundle | withheld


def audit_strategyproofness(
    market: Market,
    spec: MechanismSpec,
    budget: MisreportBudget | None = None,
    workers: int = 1,
    search_budget: int | None = None,
) -> AuditReport:
    """Probe every agent left unsatisfied by the truthful run with the budgeted
    misreport space.  Under dichotomous preferences a satisfied agent cannot
    strictly gain, so only unsatisfied agents are probed; the report records
    how much of the misreport space was actually searched."""
    budget = budget or MisreportBudget()
    check_priority(market, spec.priority)
    allocations, _ = feasible_with_profiles(market, spec.constraints, search_budget)
    truthful = run_mechanism(market, spec, search_budget)
    profile = satisfaction_profile(market, truthful)
    unsatisfied = [agent_id for agent_id in market.agent_ids if profile[agent_id] == 0]

    tasks: list[MisreportScenario] = []
    truncated_agents = 0
    for agent_id in unsatisfied:
        scenarios, truncated = _misreports_with_truncation(market, agent_id, budget)
        tasks.extend(scenarios)
        truncated_agents += 1 if truncated else 0

    true_demands = {ag.id: ag.demands for ag in market.agents}

    def evaluate(scenario: MisreportScenario) -> ManipulationWitness | None:
        misreported = apply_misreport(market, scenario)
        outcome = run_mechanism(misreported, spec, search_budget)
        realized = realized_bundle(outcome.bundle_of(scenario.agent), scenario.withheld)
        if covers(realized, true_demands[scenario.agent]):
            return ManipulationWitness(scenario, truthful, outcome, realized)
        return None

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(evaluate, tasks))
    else:
        results = [evaluate(scenario) for scenario in tasks]
    witnesses = tuple(w for w in results if w is not None)

    return AuditReport(
        kind="strategyproofness",
        verdict=VERDICT_VIOLATION if witnesses else VERDICT_CLEAN,
        witnesses=witnesses,
        summary={
            "agents_probed": len(unsatisfied),
            "feasible_count": len(allocations),
            "scenarios_examined": len(tasks),
            "truncated_agents": truncated_agents,
        },
    )


def _consistency_pairs(
    count: int, params: ConsistencyParams
) -> tuple[list[tuple[tuple[int, ...], tuple[int, ...]]], dict[str, int]]:
    """Build the (superset, subset) index pairs to test.

    The full feasible set is paired with every family member: all non-empty
    subsets in exhaustive mode, otherwise leave-one-outs plus seeded samples.
    Nested pairs inside the leave-one-out/sampled family are always added so
    contractions of already-contracted sets get exercised too.
    """
    everything = tuple(range(count))
    exhaustive = count <= params.exhaustive_limit

    loo_sampled: list[tuple[int, ...]] = []
    if count > 1:
        loo_sampled.extend(tuple(j for j in range(count) if j != i) for i in range(count))
    rng = random.Random(params.seed)
    drawn = 0
    seen = set(loo_sampled)
    for _ in range(params.samples):
        bits = rng.getrandbits(count)
        while bits == 0:
            bits = rng.getrandbits(count)
        subset = tuple(i for i in range(count) if bits >> i & 1)
        drawn += 1
        if subset not in seen:
            seen.add(subset)
            loo_sampled.append(subset)

    if exhaustive:
        family = [
            combo
            for size in range(1, count + 1)
            for combo in itertools.combinations(range(count), size)
        ]
    else:
        family = list(loo_sampled)

    pairs = [(everything, subset) for subset in family]
    nested = 0
    as_sets = [frozenset(s) for s in loo_sampled]
    for i, sup in enumerate(loo_sampled):
        for j, sub in enumerate(loo_sampled):
            if i != j and as_sets[j] < as_sets[i]:
                pairs.append((sup, sub))
                nested += 1
    stats = {
        "exhaustive": int(exhaustive),
        "samples_drawn": drawn,
        "nested_pairs_tested": nested,
        "pairs_tested": len(pairs),
        "seed": params.seed,
    }
    return pairs, stats


def _run_consistency_engine(
    allocations: Sequence[Allocation],
    profiles: Sequence[tuple[int, ...]],
    agent_ids: tuple[str, ...],
    choose: Callable[[tuple[int, ...]], int],
    params: ConsistencyParams,
    workers: int = 1,
) -> AuditReport:
    pairs, stats = _consistency_pairs(len(allocations), params)

    def as_profile_dict(profile: tuple[int, ...]) -> dict[str, int]:
        return dict(zip(agent_ids, profile))

    def evaluate(pair) -> ConsistencyViolation | None:
        superset, subset = pair
        chosen = choose(superset)
        target = profiles[chosen]
        match = next((i for i in subset if profiles[i] == target), None)
        if match is None:
            return None
        contracted = choose(subset)
        if profiles[contracted] == target:
            return None
        return ConsistencyViolation(
            superset_size=len(superset),
            subset_size=len(subset),
            superset_choice=allocations[chosen],
            subset_choice=allocations[contracted],
            matching_allocation=allocations[match],
            superset_profile=as_profile_dict(target),
            subset_profile=as_profile_dict(profiles[contracted]),
        )

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(evaluate, pairs))
    else:
        results = [evaluate(pair) for pair in pairs]
    witnesses = tuple(w for w in results if w is not None)
    summary = {"feasible_count": len(allocations), **stats}
    return AuditReport(
        kind="weak-consistency",
        verdict=VERDICT_VIOLATION if witnesses else VERDICT_CLEAN,
        witnesses=witnesses,
        summary=dict(sorted(summary.items())),
    )


def audit_weak_consistency(
    market: Market,
    spec: MechanismSpec,
    params: ConsistencyParams | None = None,
    workers: int = 1,
    search_budget: int | None = None,
) -> AuditReport:
    """Contract the feasible set and check that whenever some surviving
    allocation matches the original choice's satisfaction profile, the choice
    from the contracted set matches it too."""
    params = params or ConsistencyParams()
    check_priority(market, spec.priority)
    allocations, profiles = feasible_with_profiles(market, spec.constraints, search_budget)
    index_of = {agent_id: i for i, agent_id in enumerate(market.agent_ids)}
    order = [index_of[a] for a in spec.priority]
    cup = spec.kind == "cup"

    def key_of(i: int) -> tuple[int, ...]:
        key = tuple(profiles[i][j] for j in order)
        return ((sum(profiles[i]),) + key) if cup else key

    keys = [key_of(i) for i in range(len(allocations))]

    def choose(indices: tuple[int, ...]) -> int:
        return max(indices, key=lambda i: (keys[i], -i))  # ties to the canonically first

    return _run_consistency_engine(allocations, profiles, market.agent_ids, choose, params, workers)


def audit_weak_consistency_choice(
    market: Market,
    constraints: ConstraintSet,
    choice: Callable[[list[Allocation]], Allocation],
    params: ConsistencyParams | None = None,
    search_budget: int | None = None,
) -> AuditReport:
    """Weak-consistency audit of an arbitrary choice function over allocation
    lists; used to regression-test the auditor's own sensitivity against
    deliberately broken mechanisms."""
    params = params or ConsistencyParams()
    allocations = enumerate_feasible(market, constraints, search_budget)
    profiles = [tuple(satisfaction_profile(market, a).values()) for a in allocations]
    position = {alloc: i for i, alloc in enumerate(allocations)}

    def choose(indices: tuple[int, ...]) -> int:
        return position[choice([allocations[i] for i in indices])]

    return _run_consistency_engine(allocations, profiles, market.agent_ids, choose, params)


def audit_constrained_pareto(
    market: Market,
    allocation: Allocation,
    constraints: ConstraintSet,
    search_budget: int | None = None,
) -> AuditReport:
    """Report every feasible allocation that Pareto-dominates the given one."""
    allocations, profiles = feasible_with_profiles(market, constraints, search_budget)
    target = tuple(satisfaction_profile(market, allocation).values())
    witnesses = []
    for alloc, profile in zip(allocations, profiles):
        if all(p >= t for p, t in zip(profile, target)) and any(
            p > t for p, t in zip(profile, target)
        ):
            witnesses.append(DominationWitness(alloc, dict(zip(market.agent_ids, profile))))
    return AuditReport(
        kind="constrained-pareto",
        verdict=VERDICT_VIOLATION if witnesses else VERDICT_CLEAN,
        witnesses=tuple(witnesses),
        summary={"candidates_compared": len(allocations), "feasible_count": len(allocations)},
    )


def max_satisfied_oracle(
    market: Market, constraints: ConstraintSet, search_budget: int | None = None
) -> int:
    """Brute-force maximum of the satisfaction sum over the feasible set.

    Deliberately re-derives satisfaction per allocation instead of reusing any
    mechanism key machinery, so it stays an independent reference for the
    utilitarian mechanism's leading term.
    """
    best = 0
    for alloc in enumerate_feasible(market, constraints, search_budget):
        count = sum(1 for ag in market.agents if satisfies(market, alloc, ag.id))
        best = max(best, count)
    return best


def _size3_subsets(items: Iterable[str]) -> frozenset[Bundle]:
    return frozenset(frozenset(c) for c in itertools.combinations(sorted(items), 3))


def fixture(name: str) -> CounterexampleFixture:
    """Bundled benchmark instances: "example1" and "theorem5"."""
    if name == "example1":
        cars = ["c1", "c2", "c3", "c4"]
        market = Market(
            agents=(
                Agent("1", cars, [{c, "p"} for c in cars]),
                Agent("2", ["p"], [{"c1"}, {"s", "h"}]),
                Agent("3", ["s", "h"], [{"c4"}]),
            ),
            items=tuple(Item(i) for i in cars + ["h", "p", "s"]),
        )
        return CounterexampleFixture(
            name="example1",
            market=market,
            constraints=BUILT_IN_CONSTRAINT_SETS["sir"],
            desirable_sets={},
            scripted_misreports={},
        )
    if name == "theorem5":
        liked = {
            "1": frozenset({"b1", "b3", "c1", "c2", "c3"}),
            "2": frozenset({"a1", "a3", "c1", "c2", "c3"}),
            "3": frozenset({"a2", "a3", "b2", "b3"}),
        }
        scripted = {
            "1": frozenset({"b3", "c1", "c2", "c3"}),
            "2": frozenset({"a3", "c1", "c2", "c3"}),
            "3": frozenset({"a3", "b2", "b3"}),
        }
        endowments = {"1": ["a1", "a2", "a3"], "2": ["b1", "b2", "b3"], "3": ["c1", "c2", "c3"]}
        market = Market(
            agents=tuple(
                Agent(i, endowments[i], _size3_subsets(liked[i])) for i in ("1", "2", "3")
            ),
            items=tuple(Item(x) for owned in endowments.values() for x in owned),
        )
        return CounterexampleFixture(
            name="theorem5",
            market=market,
            constraints=BUILT_IN_CONSTRAINT_SETS["pairwise+desirable"],
            desirable_sets=liked,
            scripted_misreports=scripted,
        )
    raise ValueError(f"unknown fixture name {name!r}")


def scripted_misreport(fx: CounterexampleFixture, agent_id: str) -> MisreportScenario:
    """The fixture's scripted manipulation for one agent: full endowment,
    demands restricted to the size-3 subsets of her scripted desirable set."""
    agent = fx.market.agent(agent_id)
    liked = fx.scripted_misreports[agent_id]
    return MisreportScenario(
        agent=agent_id,
        reported_endowment=agent.endowment,
        reported_demands=_size3_subsets(liked),
        withheld=frozenset(),
    )


def replicate_impossibility(search_budget: int | None = None) -> AuditReport:
    """Exercise every priority order and both mechanisms on the "theorem5"
    fixture without strong individual rationality.

    For each of the 12 runs the outcome is checked to be constrained Pareto
    optimal, at least one agent must be unsatisfied, and one of the scripted
    misreports must flip an unsatisfied agent to satisfied.  The individual
    rationality predicate is also confirmed to hold on the whole feasible set
    (no agent's endowment satisfies her, so that filter cannot bite).  The
    "violation" verdict means the impossibility replicated, which is the
    expected outcome.
    """
    fx = fixture("theorem5")
    market, constraints = fx.market, fx.constraints
    allocations, _ = feasible_with_profiles(market, constraints, search_budget)
    ir_identity = all(is_ir(market, alloc) for alloc in allocations)

    witnesses = []
    runs = manipulated = pareto_ok_runs = runs_with_unsat = 0
    for kind in ("cp", "cup"):
        for priority in itertools.permutations(market.agent_ids):
            runs += 1
            spec = MechanismSpec(kind, priority, constraints)
            outcome = run_mechanism(market, spec, search_budget)
            profile = satisfaction_profile(market, outcome)
            if not audit_constrained_pareto(market, outcome, constraints, search_budget).violation_found:
                pareto_ok_runs += 1
            unsatisfied = [a for a in market.agent_ids if profile[a] == 0]
            if unsatisfied:
                runs_with_unsat += 1
            for agent_id in unsatisfied:
                scenario = scripted_misreport(fx, agent_id)
                misreported = apply_misreport(market, scenario)
                mis_outcome = run_mechanism(misreported, spec, search_budget)
                realized = realized_bundle(mis_outcome.bundle_of(agent_id), scenario.withheld)
                if covers(realized, market.agent(agent_id).demands):
                    witnesses.append(
                        ManipulationWitness(scenario, outcome, mis_outcome, realized)
                    )
                    manipulated += 1
                    break

    replicated = (
        ir_identity and manipulated == runs and pareto_ok_runs == runs and runs_with_unsat == runs
    )
    return AuditReport(
        kind="impossibility-replication",
        verdict=VERDICT_VIOLATION if replicated else VERDICT_CLEAN,
        witnesses=tuple(witnesses),
        summary={
            "feasible_count": len(allocations),
            "ir_filter_identity": int(ir_identity),
            "manipulations_found": manipulated,
            "pareto_optimal_runs": pareto_ok_runs,
            "runs": runs,
            "runs_with_unsatisfied": runs_with_unsat,
        },
    )

"""Clearing engine and axiom auditor for multi-item exchange markets."""

from .core import (
    Agent,
    Allocation,
    Bundle,
    Item,
    Market,
    PriorityOrder,
    bundle,
    covers,
    endowment_allocation,
    is_ir,
    is_sir,
    pareto_dominates,
    satisfaction_profile,
    satisfies,
    utility,
    validate_market,
    weakly_prefers,
)
from .feasibility import (
    BUILT_IN_CONSTRAINT_SETS,
    BudgetExceededError,
    Constraint,
    ConstraintSet,
    CycleDecomposition,
    DESIRABLE_ONLY,
    IR,
    PAIRWISE_ONLY,
    SIR,
    TradeGraph,
    UNRESTRICTED,
    enumerate_feasible,
    find_cycle_decomposition,
    format_constraints,
    max_cycle_agents,
    parse_constraints,
    satisfies_constraints,
    trade_graph,
)
from .mechanisms import (
    MechanismSpec,
    choose_from,
    lex_key,
    run_cp,
    run_cup,
    run_mechanism,
)
from .auditors import (
    AuditReport,
    ConsistencyParams,
    ConsistencyViolation,
    CounterexampleFixture,
    DominationWitness,
    ManipulationWitness,
    MisreportBudget,
    MisreportScenario,
    apply_misreport,
    audit_constrained_pareto,
    audit_strategyproofness,
    audit_weak_consistency,
    audit_weak_consistency_choice,
    enumerate_misreports,
    fixture,
    max_satisfied_oracle,
    realized_bundle,
    replicate_impossibility,
    scripted_misreport,
)
from .instances import (
    GeneratorConfig,
    InstanceFormatError,
    generate_instance,
    parse_allocation,
    parse_instance,
    serialize,
)

__version__ = "0.1.0"

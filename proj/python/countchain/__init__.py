"""Python bindings for the countchain protocol simulator."""

from ._countchain import (
    BAN_DISABLED,
    DishonestAction,
    ScenarioMetrics,
    ScenarioSpec,
    SweepRow,
    SystemConfig,
    binomial_interval,
    clopper_pearson,
    decision_probability,
    decision_threshold,
    expected_attack_curve,
    expected_utilities,
    hash_input_id,
    honest_equilibrium_holds,
    hypergeometric_pmf,
    mixed_strategy_utility,
    run_scenario,
    run_sweep,
    run_sybil_experiment,
    sybil_majority_probability,
    to_csv,
)

__all__ = [
    "BAN_DISABLED",
    "DishonestAction",
    "ScenarioMetrics",
    "ScenarioSpec",
    "SweepRow",
    "SystemConfig",
    "binomial_interval",
    "clopper_pearson",
    "decision_probability",
    "decision_threshold",
    "expected_attack_curve",
    "expected_utilities",
    "hash_input_id",
    "honest_equilibrium_holds",
    "hypergeometric_pmf",
    "mixed_strategy_utility",
    "run_scenario",
    "run_sweep",
    "run_sybil_experiment",
    "sybil_majority_probability",
    "to_csv",
]

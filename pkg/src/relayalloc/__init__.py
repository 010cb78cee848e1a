"""Globally optimum resource allocation for relay aided OFDMA downlinks.

The package splits the weighted sum rate maximization into the per
subcarrier relay selection closed forms (``rates``), a dual decomposition
price search (``solver``), a high power shortcut (``highpower``) and a per
subcarrier baseline (``reference``), plus channel synthesis (``channel``),
brute force verifiers (``oracle``) and an experiment CLI (``cli``).
"""

from .channel import (
    ChannelRealization,
    GainTable,
    Region,
    TapProfile,
    Topology,
    load_realization,
    place_destinations,
    save_realization,
    synthesize_realization,
    to_gains,
)
from .highpower import HighPowerReport, check_conditions, solve_high_power
from .oracle import oracle_global_wsr, oracle_relay_gain, oracle_split_optimality
from .rates import (
    MODE_DIRECT,
    MODE_RELAY,
    ModeSets,
    PerPairGains,
    RelayAidedSolution,
    classify,
    crossover_power,
    direct_rate,
    effective_gain_table,
    relay_aided_solution,
    relay_rate,
)
from .reference import ReferenceAllocation, select_per_subcarrier, solve_reference, waterfill
from .solver import (
    Allocation,
    ConvergenceError,
    DualState,
    SolverParams,
    SubcarrierAssignment,
    assignment_metric,
    initial_price,
    price_bracket,
    solve,
    solve_at_price,
    user_rates,
    weighted_sum_rate,
)

__version__ = "0.1.0"

__all__ = [
    "Allocation",
    "ChannelRealization",
    "ConvergenceError",
    "DualState",
    "GainTable",
    "HighPowerReport",
    "MODE_DIRECT",
    "MODE_RELAY",
    "ModeSets",
    "PerPairGains",
    "ReferenceAllocation",
    "Region",
    "RelayAidedSolution",
    "SolverParams",
    "SubcarrierAssignment",
    "TapProfile",
    "Topology",
    "assignment_metric",
    "check_conditions",
    "classify",
    "crossover_power",
    "direct_rate",
    "effective_gain_table",
    "initial_price",
    "load_realization",
    "oracle_global_wsr",
    "oracle_relay_gain",
    "oracle_split_optimality",
    "place_destinations",
    "price_bracket",
    "relay_aided_solution",
    "relay_rate",
    "save_realization",
    "select_per_subcarrier",
    "solve",
    "solve_at_price",
    "solve_high_power",
    "solve_reference",
    "synthesize_realization",
    "to_gains",
    "user_rates",
    "waterfill",
    "weighted_sum_rate",
    "__version__",
]

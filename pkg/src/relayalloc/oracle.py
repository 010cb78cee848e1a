"""Brute force verifiers, independent of the solver code paths.

Everything here recomputes results from first principles: relay subsets and
broadcast fractions are enumerated on grids, power is swept over a simplex
grid, and nothing is shared with the production modules beyond the plain
data containers. Orders of magnitude slower than the solvers by design;
only meant for tiny instances inside the test suite.
"""

from __future__ import annotations

import math
from itertools import combinations

import numpy as np

from .channel import GainTable
from .rates import PerPairGains
from .solver import SolverParams

__all__ = ["oracle_relay_gain", "oracle_split_optimality", "oracle_global_wsr"]


def oracle_relay_gain(g: PerPairGains, power: float, grid: int = 10_000) -> float:
    """Max-min received SNR of the relay aided slot pair by enumeration.

    Sweeps every nonempty relay subset and broadcast fraction
    psi in {0, 1/grid, ..., 1}; for each pair the achieved SNR is
    ``min(psi P min_sr, psi P g_su + (1-psi) P sum_ru)`` with the relaying
    slot power split proportionally to the relay-destination gains (the
    best split, checked separately by oracle_split_optimality).
    """
    if grid < 100:
        raise ValueError("grid must be at least 100")
    if power < 0.0:
        raise ValueError("power must be nonnegative")
    if power == 0.0:
        return 0.0
    psi = np.linspace(0.0, 1.0, grid + 1)
    n = g.num_relays
    best = 0.0
    for size in range(1, n + 1):
        for subset in combinations(range(n), size):
            idx = list(subset)
            decode = float(g.g_sr[idx].min()) * power
            combine = g.g_su * power
            miso = float(g.g_ru[idx].sum()) * power
            snr = np.minimum(psi * decode, psi * combine + (1.0 - psi) * miso)
            best = max(best, float(snr.max()))
    return best


def oracle_split_optimality(
    g: PerPairGains,
    power: float,
    relay_set: tuple,
    trials: int = 200,
    seed: int = 0,
) -> bool:
    """Check that the proportional relay power split is unbeaten.

    Draws random splits of the relaying slot power over the given set and
    verifies none beats the proportional-to-gain split's coherent sum
    ``(sum_i sqrt(p_i g_i))**2`` by more than a 1e-9 margin.
    """
    if power < 0.0:
        raise ValueError("power must be nonnegative")
    idx = list(relay_set)
    if len(idx) == 0:
        raise ValueError("relay_set must be nonempty")
    gr = g.g_ru[idx]
    closed_form = power * float(gr.sum())
    tol = 1e-9 * max(1.0, closed_form)
    rng = np.random.default_rng(seed)
    for _ in range(trials):
        split = rng.dirichlet(np.ones(len(idx))) * power
        term = float(np.sqrt(split * gr).sum()) ** 2
        if term > closed_form + tol:
            return False
    return True


def _oracle_envelope(params: SolverParams, gains: GainTable, powers: np.ndarray, psi_grid: int) -> np.ndarray:
    """Best weighted rate per (subcarrier, grid power) over all candidates."""
    kk, uu = gains.g_su.shape
    env = np.zeros((kk, powers.size))
    for k in range(kk):
        for u in range(uu):
            pair = PerPairGains.from_table(gains, k, u)
            w = float(params.weights[u])
            g_su = float(pair.g_su)
            snr_unit = oracle_relay_gain(pair, 1.0, psi_grid)
            for j, p in enumerate(powers):
                relay = w * math.log1p(snr_unit * p)
                direct = 2.0 * w * math.log1p(g_su * p / 2.0)
                cand = max(relay, direct)
                if cand > env[k, j]:
                    env[k, j] = cand
    return env


def oracle_global_wsr(
    params: SolverParams,
    gains: GainTable,
    power_grid: int = 200,
    psi_grid: int = 10_000,
) -> float:
    """Globally maximum weighted sum rate by exhaustive grid search.

    All per subcarrier destination / mode choices are crossed with every
    split of the budget over subcarriers on a simplex grid with
    ``power_grid`` points per dimension. Since the per subcarrier terms are
    independent once powers are fixed, the sweep over assignments folds
    into a per subcarrier envelope followed by a budgeted max-plus pass.
    Rejects instances larger than K = 3 subcarriers or U = 2 destinations.
    """
    kk, uu = gains.g_su.shape
    if kk > 3 or uu > 2:
        raise ValueError("oracle_global_wsr only accepts K <= 3, U <= 2 instances")
    if params.num_destinations != uu:
        raise ValueError("weights length must match the number of destinations")
    if power_grid < 2:
        raise ValueError("power_grid must be at least 2")

    powers = np.linspace(0.0, params.ptot, power_grid + 1)
    env = _oracle_envelope(params, gains, powers, psi_grid)

    # f[n] = best total over the first k subcarriers using exactly n units
    f = env[0].copy()
    for k in range(1, kk):
        nxt = np.full_like(f, -np.inf)
        for n in range(power_grid + 1):
            # spend j units on subcarrier k, n - j on the prefix
            cand = env[k, : n + 1][::-1] + f[: n + 1]
            nxt[n] = cand.max()
        f = nxt
    return float(f.max())

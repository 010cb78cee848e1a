"""Dual decomposition stage: price search and per subcarrier assignments.

For a price mu on total power, every subcarrier independently picks the
destination and mode maximizing its contribution to the Lagrangian, with a
closed form optimum power. The price is then driven to the complementary
slackness window ``0 <= Ptot - P(mu) < eps`` by a constant step subgradient
iteration, initialized from a grid between two analytic price brackets.

Because the assigned power is a step discontinuous function of the price, a
constant step can hop over the stopping window forever. Every evaluation
therefore tightens an enclosing price bracket and the update falls back to
bisection whenever the subgradient proposal leaves it (or periodically, to
bound stagnation). If the bracket collapses without reaching the window, the
total budget sits inside a power jump: no single assignment matches it
exactly. In that case the assignments seen near the critical price are
refilled to the exact budget by a fixed assignment water-filling pass and
the best one is returned, flagged with ``status="bracket_collapse"``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import rates
from .channel import GainTable
from .rates import MODE_DIRECT, MODE_RELAY, ModeSets, PerPairGains

__all__ = [
    "ConvergenceError",
    "SolverParams",
    "DualState",
    "SubcarrierAssignment",
    "Allocation",
    "assignment_metric",
    "solve_at_price",
    "price_bracket",
    "initial_price",
    "solve",
    "weighted_sum_rate",
    "user_rates",
    "time_shared_relay_rate",
    "time_shared_direct_rate",
]

STATUS_KKT = "kkt"
STATUS_GAP = "bracket_collapse"
STATUS_MAX_ITERS = "max_iters"
STATUS_CLOSED_FORM = "closed_form"

# force a bisection step this often so the bracket keeps shrinking even when
# the subgradient creeps
_BISECT_EVERY = 16


class ConvergenceError(RuntimeError):
    """No price satisfying the requested condition could be bracketed."""


@dataclass(frozen=True, eq=False)
class SolverParams:
    """Budget, priorities and knobs of the dual search.

    ``weights`` are the per destination priorities; by convention they sum
    to one, but any positive values are accepted (the optimum assignments
    are invariant to a common positive scaling). ``epsilon`` is the width of
    the stopping window in watts, or relative to ``ptot`` when
    ``epsilon_is_relative`` is set. ``delta_factor`` scales the constant
    subgradient step by the bracket width. ``highpower_factor`` is the
    margin demanded by the high power closed form checks.
    """

    ptot: float
    weights: np.ndarray
    n_grid: int = 100
    delta_factor: float = 1e-3
    epsilon: float = 0.1
    epsilon_is_relative: bool = False
    max_iters: int = 10_000
    bracket_tol: float = 1e-10
    highpower_factor: float = 100.0
    diminishing_step: bool = False

    def __post_init__(self) -> None:
        object.__setattr__(self, "weights", np.asarray(self.weights, dtype=float))
        w = self.weights
        if w.ndim != 1 or w.size < 1:
            raise ValueError("weights must be a nonempty 1-D array")
        if not np.all(np.isfinite(w)) or np.any(w <= 0.0):
            raise ValueError("weights must be positive and finite")
        if not (self.ptot > 0.0 and np.isfinite(self.ptot)):
            raise ValueError("ptot must be positive and finite")
        if self.n_grid < 2:
            raise ValueError("n_grid must be at least 2")
        if self.delta_factor <= 0.0 or self.epsilon <= 0.0 or self.bracket_tol <= 0.0:
            raise ValueError("delta_factor, epsilon and bracket_tol must be positive")
        if self.max_iters < 1:
            raise ValueError("max_iters must be at least 1")
        if self.highpower_factor < 1.0:
            raise ValueError("highpower_factor must be at least 1")

    @property
    def num_destinations(self) -> int:
        return self.weights.size

    @property
    def epsilon_watts(self) -> float:
        return self.epsilon * self.ptot if self.epsilon_is_relative else self.epsilon


@dataclass(frozen=True, eq=False)
class DualState:
    """Per subcarrier maximizers and totals at one price."""

    mu: float
    dest: np.ndarray      # (K,) chosen destination
    mode: np.ndarray      # (K,) MODE_DIRECT or MODE_RELAY
    power: np.ndarray     # (K,) total subcarrier power
    total_power: float
    lagrangian: float


@dataclass(frozen=True, eq=False)
class SubcarrierAssignment:
    """One subcarrier's destination, mode and power breakdown.

    ``broadcast_power`` is what the source spends in the broadcasting slot;
    ``relaying_power`` is what it spends in the relaying slot (zero in relay
    aided mode, where the relay set transmits instead).
    """

    k: int
    u: int
    mode: str
    sum_power: float
    broadcast_power: float
    relaying_power: float
    relay_indices: tuple = ()
    relay_powers: np.ndarray = field(default_factory=lambda: np.empty(0))


@dataclass(frozen=True, eq=False)
class Allocation:
    """Final allocation plus diagnostics of the price search."""

    assignments: list
    wsr: float
    mu_star: float
    residual: float
    iterations: int
    status: str
    mu_lower: float
    mu_upper: float

    @property
    def converged(self) -> bool:
        return self.status in (STATUS_KKT, STATUS_CLOSED_FORM)


def _inverse(arr: np.ndarray) -> np.ndarray:
    with np.errstate(divide="ignore"):
        return np.where(arr > 0.0, 1.0 / np.where(arr > 0.0, arr, 1.0), np.inf)


def _candidate_tables(mu: float, params: SolverParams, gains: GainTable, mode_sets: ModeSets):
    """Metric and power of every admissible (u, mode) candidate at price mu.

    Returns (value, power) arrays of shape (K, 2U) where candidate 2u is
    destination u in relay mode and 2u+1 is destination u in direct mode.
    Inadmissible candidates carry value -inf. The layout makes a plain
    argmax break ties toward the lowest destination and relay aided mode.
    """
    w = params.weights[None, :]
    g1 = mode_sets.g1
    g_su = gains.g_su
    relay_ok = ~mode_sets.in_direct_set
    direct_ok = ~mode_sets.in_relay_set

    p_relay = np.maximum(w / mu - _inverse(g1), 0.0)
    val_relay = w * np.log1p(g1 * p_relay) - mu * p_relay
    q = np.maximum(w / mu - _inverse(g_su), 0.0)
    val_direct = 2.0 * w * np.log1p(g_su * q) - 2.0 * mu * q

    k, u = g_su.shape
    value = np.full((k, 2 * u), -np.inf)
    power = np.zeros((k, 2 * u))
    value[:, 0::2] = np.where(relay_ok, val_relay, -np.inf)
    power[:, 0::2] = p_relay
    value[:, 1::2] = np.where(direct_ok, val_direct, -np.inf)
    power[:, 1::2] = 2.0 * q
    return value, power


def assignment_metric(
    u: int,
    mode: str,
    k: int,
    mu: float,
    params: SolverParams,
    gains: GainTable,
    mode_sets: ModeSets,
) -> float:
    """Best achievable ``w * rate - mu * power`` for one candidate.

    The maximizing total power is ``[w/mu - 1/g1]+`` in relay aided mode and
    ``2 [w/mu - 1/g_su]+`` in direct mode.
    """
    if mu <= 0.0:
        raise ValueError("mu must be positive")
    if mode == MODE_RELAY:
        if mode_sets.in_direct_set[k, u]:
            raise ValueError(f"relay mode is inadmissible for destination {u} on subcarrier {k}")
        g1 = float(mode_sets.g1[k, u])
        w = float(params.weights[u])
        p = max(w / mu - 1.0 / g1, 0.0) if g1 > 0.0 else 0.0
        return w * math.log1p(g1 * p) - mu * p
    if mode == MODE_DIRECT:
        if mode_sets.in_relay_set[k, u]:
            raise ValueError(f"direct mode is inadmissible for destination {u} on subcarrier {k}")
        g = float(gains.g_su[k, u])
        w = float(params.weights[u])
        q = max(w / mu - 1.0 / g, 0.0) if g > 0.0 else 0.0
        return 2.0 * w * math.log1p(g * q) - 2.0 * mu * q
    raise ValueError(f"unknown mode {mode!r}")


def solve_at_price(mu: float, params: SolverParams, gains: GainTable, mode_sets: ModeSets) -> DualState:
    """Per subcarrier maximization of the Lagrangian at a fixed price."""
    if mu <= 0.0:
        raise ValueError("mu must be positive")
    value, power = _candidate_tables(mu, params, gains, mode_sets)
    pick = np.argmax(value, axis=1)  # first maximum: lowest u, relay before direct
    rows = np.arange(value.shape[0])
    p = power[rows, pick]
    return DualState(
        mu=float(mu),
        dest=pick // 2,
        mode=np.where(pick % 2 == 0, MODE_RELAY, MODE_DIRECT),
        power=p,
        total_power=float(p.sum()),
        lagrangian=float(value[rows, pick].sum() + mu * params.ptot),
    )


def _envelope_terms(params: SolverParams, gains: GainTable, mode_sets: ModeSets):
    """Per subcarrier extreme inverse gain terms over admissible candidates."""
    inv_relay = _inverse(mode_sets.g1)
    inv_direct = 2.0 * _inverse(gains.g_su)
    relay_ok = ~mode_sets.in_direct_set
    direct_ok = ~mode_sets.in_relay_set
    hi = np.maximum(
        np.where(relay_ok, inv_relay, -np.inf).max(axis=1),
        np.where(direct_ok, inv_direct, -np.inf).max(axis=1),
    )
    lo = np.minimum(
        np.where(relay_ok, inv_relay, np.inf).min(axis=1),
        np.where(direct_ok, inv_direct, np.inf).min(axis=1),
    )
    return lo, hi


def _root_decreasing(fn, target: float, scale: float, rel_tol: float, side: str, what: str) -> float:
    """Root of a nonincreasing function by bracket expansion and bisection."""
    lo = scale * 1e-12
    hi = scale * 1e12
    for _ in range(200):
        if fn(hi) <= target:
            break
        hi *= 2.0
    else:
        raise ConvergenceError(f"could not bracket {what} from above")
    for _ in range(200):
        if fn(lo) >= target:
            break
        lo /= 2.0
    else:
        raise ConvergenceError(f"could not bracket {what} from below")
    while hi - lo > rel_tol * hi:
        mid = 0.5 * (lo + hi)
        if fn(mid) >= target:
            lo = mid
        else:
            hi = mid
    return lo if side == "lo" else hi


def price_bracket(params: SolverParams, gains: GainTable, mode_sets: ModeSets) -> tuple:
    """Prices (mu_lower, mu_upper) enclosing the optimum.

    mu_upper solves ``sum_k [2 max_u w_u / mu - vmin_k]+ = Ptot`` and
    mu_lower solves ``sum_k [min_u w_u / mu - vmax_k]+ = Ptot``, where vmin
    and vmax are the extreme admissible inverse gain terms per subcarrier.
    These sums bound the assigned power from above and below, so the
    optimum price lies between the roots.
    """
    v_lo, v_hi = _envelope_terms(params, gains, mode_sets)
    w_min = float(params.weights.min())
    w_max = float(params.weights.max())
    ptot = params.ptot

    def p_upper(mu: float) -> float:
        return float(np.maximum(2.0 * w_max / mu - v_lo, 0.0).sum())

    def p_lower(mu: float) -> float:
        return float(np.maximum(w_min / mu - v_hi, 0.0).sum())

    scale = w_max / ptot
    mu_upper = _root_decreasing(p_upper, ptot, scale, params.bracket_tol, "hi", "the upper price bound")
    mu_lower = _root_decreasing(p_lower, ptot, scale, params.bracket_tol, "lo", "the lower price bound")
    return min(mu_lower, mu_upper), mu_upper


def initial_price(
    mu_lower: float,
    mu_upper: float,
    params: SolverParams,
    gains: GainTable,
    mode_sets: ModeSets,
) -> float:
    """Feasible grid sample with the smallest power slack, or mu_upper.

    The grid is ``mu_lower + n (mu_upper - mu_lower) / n_grid`` for
    n = 0 .. n_grid - 1. mu_upper itself is always feasible by construction
    of the bracket, hence the fallback.
    """
    best_mu = None
    best_slack = np.inf
    for n in range(params.n_grid):
        mu = mu_lower + (mu_upper - mu_lower) * n / params.n_grid
        if mu <= 0.0:
            continue
        slack = params.ptot - solve_at_price(mu, params, gains, mode_sets).total_power
        if 0.0 <= slack < best_slack:
            best_mu, best_slack = mu, slack
    return best_mu if best_mu is not None else mu_upper


def _rate_of(mode: str, gain: float, power: float) -> float:
    if mode == MODE_RELAY:
        return math.log1p(gain * power)
    return 2.0 * math.log1p(gain * power / 2.0)


def _state_wsr(dest, mode, power, params: SolverParams, gains: GainTable, g1: np.ndarray) -> float:
    total = 0.0
    for k in range(len(dest)):
        u = int(dest[k])
        gain = float(g1[k, u]) if mode[k] == MODE_RELAY else float(gains.g_su[k, u])
        total += float(params.weights[u]) * _rate_of(str(mode[k]), gain, float(power[k]))
    return total


def _refill(dest, mode, params: SolverParams, gains: GainTable, g1: np.ndarray):
    """Exact budget water-filling for a fixed (destination, mode) choice.

    Power on subcarrier k is ``c_k [w_k/lam - 1/g_k]+`` with c_k = 1 in
    relay aided mode and 2 in direct mode; lam is set so the powers sum to
    the budget. Returns (wsr, power) or None if no subcarrier can carry
    power.
    """
    kk = len(dest)
    idx = np.arange(kk)
    w = params.weights[dest]
    g = np.where(mode == MODE_RELAY, g1[idx, dest], gains.g_su[idx, dest])
    c = np.where(mode == MODE_RELAY, 1.0, 2.0)
    live = g > 0.0
    if not np.any(live):
        return None
    inv_g = np.where(live, 1.0 / np.where(live, g, 1.0), np.inf)

    def total(lam: float) -> float:
        return float((c * np.maximum(w / lam - inv_g, 0.0)).sum())

    hi = float((w[live] * g[live]).max())
    lo = hi * 1e-30
    for _ in range(200):
        if total(lo) >= params.ptot:
            break
        lo /= 4.0
    else:
        return None
    for _ in range(400):
        if hi - lo <= 1e-14 * hi:
            break
        mid = 0.5 * (lo + hi)
        if total(mid) >= params.ptot:
            lo = mid
        else:
            hi = mid
    lam = 0.5 * (lo + hi)
    # exact polish on the active set found by bisection
    active = (w / lam - inv_g) > 0.0
    if np.any(active):
        lam_exact = float((c[active] * w[active]).sum() / (params.ptot + (c[active] * inv_g[active]).sum()))
        if lam_exact > 0.0 and abs(total(lam_exact) - params.ptot) <= 1e-9 * params.ptot:
            lam = lam_exact
    power = c * np.maximum(w / lam - inv_g, 0.0)
    ssum = power.sum()
    if ssum <= 0.0:
        return None
    power *= params.ptot / ssum
    return _state_wsr(dest, mode, power, params, gains, g1), power


def _greedy_assignment(params: SolverParams, gains: GainTable, mode_sets: ModeSets):
    """Per subcarrier best weighted gain choice, a strong refill candidate.

    Picks the destination maximizing w_u * max(g1, g_su) with the better of
    the two gains deciding the mode. Refilling this choice always reaches at
    least the baseline protocol's rates, since the direct mode here uses
    both slots.
    """
    per_dest = params.weights[None, :] * np.maximum(mode_sets.g1, gains.g_su)
    dest = np.argmax(per_dest, axis=1)
    rows = np.arange(gains.num_subcarriers)
    relay = mode_sets.g1[rows, dest] > gains.g_su[rows, dest]
    return dest, np.where(relay, MODE_RELAY, MODE_DIRECT)


def _local_improve(dest, mode, params: SolverParams, gains: GainTable, mode_sets: ModeSets):
    """Coordinate descent over single subcarrier reassignments.

    Only worth the refill cost on small instances, where the duality gap of
    the discrete assignment problem is not yet negligible.
    """
    dest = np.array(dest, dtype=int)
    mode = np.array(mode, dtype=object)
    fill = _refill(dest, mode, params, gains, mode_sets.g1)
    if fill is None:
        return None
    best_wsr, best_power = fill
    for _ in range(4):
        improved = False
        for k in range(len(dest)):
            keep_u, keep_m = int(dest[k]), str(mode[k])
            for u in range(params.num_destinations):
                for m in (MODE_RELAY, MODE_DIRECT):
                    if u == keep_u and m == keep_m:
                        continue
                    if m == MODE_RELAY and mode_sets.in_direct_set[k, u]:
                        continue
                    if m == MODE_DIRECT and mode_sets.in_relay_set[k, u]:
                        continue
                    dest[k], mode[k] = u, m
                    fill = _refill(dest, mode, params, gains, mode_sets.g1)
                    if fill is not None and fill[0] > best_wsr * (1.0 + 1e-14) + 1e-300:
                        best_wsr, best_power = fill
                        keep_u, keep_m = u, m
                        improved = True
            dest[k], mode[k] = keep_u, keep_m
        if not improved:
            break
    return best_wsr, best_power, dest, mode


def _assemble(dest, mode, power, gains: GainTable) -> list:
    rows = []
    for k in range(len(dest)):
        u = int(dest[k])
        p = float(power[k])
        if mode[k] == MODE_DIRECT:
            rows.append(SubcarrierAssignment(
                k=k, u=u, mode=MODE_DIRECT, sum_power=p,
                broadcast_power=p / 2.0, relaying_power=p / 2.0,
            ))
        else:
            sol = rates.relay_aided_solution(PerPairGains.from_table(gains, k, u), p)
            p_src = sol.source_fraction * p
            rows.append(SubcarrierAssignment(
                k=k, u=u, mode=MODE_RELAY, sum_power=p,
                broadcast_power=p_src, relaying_power=0.0,
                relay_indices=sol.relay_set,
                relay_powers=(p - p_src) * sol.relay_fractions,
            ))
    return rows


def solve(
    params: SolverParams,
    gains: GainTable,
    mode_sets: Optional[ModeSets] = None,
    trace=None,
) -> Allocation:
    """Full dual search returning the optimum allocation.

    Follows the bracket / grid init / constant step subgradient scheme with
    the bisection safeguards described in the module docstring. ``trace``,
    when given, is called with (iteration, mu, total_power, lagrangian)
    after every price evaluation.
    """
    if params.num_destinations != gains.num_destinations:
        raise ValueError("weights length must match the number of destinations")
    if mode_sets is None:
        mode_sets = rates.classify(gains, params.ptot)
    elif abs(mode_sets.ptot - params.ptot) > 1e-12 * max(params.ptot, 1.0):
        raise ValueError("mode_sets was classified at a different total power")

    mu_lower, mu_upper = price_bracket(params, gains, mode_sets)
    eps = params.epsilon_watts
    delta = params.delta_factor * (mu_upper - mu_lower)
    mu = initial_price(mu_lower, mu_upper, params, gains, mode_sets)

    lo, hi = mu_lower, mu_upper  # power(lo) >= ptot >= power(hi)
    best: Optional[DualState] = None
    seen: dict = {}
    state = None
    status = STATUS_MAX_ITERS
    iterations = 0

    for it in range(1, params.max_iters + 1):
        iterations = it
        state = solve_at_price(mu, params, gains, mode_sets)
        if trace is not None:
            trace(it, state.mu, state.total_power, state.lagrangian)
        slack = params.ptot - state.total_power
        key = (tuple(int(d) for d in state.dest), tuple(str(m) for m in state.mode))
        if len(seen) < 4096:
            seen[key] = state
        if slack >= 0.0 and (best is None or state.total_power > best.total_power):
            best = state
        if mu > 0.0 and 0.0 <= slack < eps:
            status = STATUS_KKT
            break
        if slack < 0.0:
            lo = max(lo, mu)
        else:
            hi = min(hi, mu)
        if hi - lo <= 1e-14 * max(hi, np.finfo(float).tiny):
            status = STATUS_GAP
            break
        step = delta / math.sqrt(it) if params.diminishing_step else delta
        proposal = mu - step * slack
        if not (lo < proposal < hi) or it % _BISECT_EVERY == 0:
            proposal = 0.5 * (lo + hi)
        mu = proposal

    if status == STATUS_KKT:
        # primal completion: the window may leave up to eps watts unspent,
        # so rebalance the final assignment's powers to the exact budget
        # (same assignment, never a worse WSR). residual keeps the dual
        # stopping slack Ptot - Px(mu) that the window certified.
        power = state.power
        wsr = _state_wsr(state.dest, state.mode, power, params, gains, mode_sets.g1)
        fill = _refill(state.dest, state.mode, params, gains, mode_sets.g1)
        if fill is not None and fill[0] >= wsr:
            wsr, power = fill
        return Allocation(
            assignments=_assemble(state.dest, state.mode, power, gains),
            wsr=wsr, mu_star=state.mu,
            residual=params.ptot - state.total_power,
            iterations=iterations, status=status,
            mu_lower=mu_lower, mu_upper=mu_upper,
        )

    if status == STATUS_GAP:
        # The budget falls inside a power jump at the critical price: refill
        # each assignment seen during the search to the exact budget and keep
        # the best. Both edge states of the final bracket and the greedy
        # weighted max gain choice are included as candidates.
        for edge in (lo, hi):
            st = solve_at_price(edge, params, gains, mode_sets)
            seen.setdefault((tuple(int(d) for d in st.dest), tuple(str(m) for m in st.mode)), st)
        candidates = [(st.dest, st.mode) for st in seen.values()]
        candidates.append(_greedy_assignment(params, gains, mode_sets))
        best_fill = None
        for dest, mode in candidates:
            fill = _refill(dest, mode, params, gains, mode_sets.g1)
            if fill is not None and (best_fill is None or fill[0] > best_fill[0]):
                best_fill = (fill[0], fill[1], dest, mode)
        if best_fill is not None:
            # polish small instances where single flips still matter
            if gains.num_subcarriers * 2 * params.num_destinations <= 64:
                polished = _local_improve(best_fill[2], best_fill[3], params, gains, mode_sets)
                if polished is not None and polished[0] > best_fill[0]:
                    best_fill = polished
            wsr, power, dest, mode = best_fill
            return Allocation(
                assignments=_assemble(dest, mode, power, gains),
                wsr=wsr, mu_star=0.5 * (lo + hi),
                residual=max(params.ptot - float(power.sum()), 0.0),
                iterations=iterations, status=status,
                mu_lower=mu_lower, mu_upper=mu_upper,
            )
        status = STATUS_MAX_ITERS  # nothing could carry power, fall through

    if best is None:
        best = solve_at_price(mu_upper, params, gains, mode_sets)
    wsr = _state_wsr(best.dest, best.mode, best.power, params, gains, mode_sets.g1)
    return Allocation(
        assignments=_assemble(best.dest, best.mode, best.power, gains),
        wsr=wsr, mu_star=best.mu,
        residual=params.ptot - best.total_power,
        iterations=iterations, status=status,
        mu_lower=mu_lower, mu_upper=mu_upper,
    )


def weighted_sum_rate(assignments, params: SolverParams, gains: GainTable) -> float:
    """Recompute the weighted sum rate of an assignment list from gains."""
    total = 0.0
    for a in assignments:
        if a.mode == MODE_RELAY:
            pair = PerPairGains.from_table(gains, a.k, a.u)
            gain = rates.relay_aided_solution(pair, a.sum_power).effective_gain
        else:
            gain = float(gains.g_su[a.k, a.u])
        total += float(params.weights[a.u]) * _rate_of(a.mode, gain, a.sum_power)
    return total


def user_rates(assignments, gains: GainTable) -> np.ndarray:
    """Unweighted per destination rates of an assignment list."""
    out = np.zeros(gains.num_destinations)
    for a in assignments:
        if a.mode == MODE_RELAY:
            pair = PerPairGains.from_table(gains, a.k, a.u)
            gain = rates.relay_aided_solution(pair, a.sum_power).effective_gain
        else:
            gain = float(gains.g_su[a.k, a.u])
        out[a.u] += _rate_of(a.mode, gain, a.sum_power)
    return out


def time_shared_relay_rate(share: float, energy: float, g1: float) -> float:
    """Perspective form ``share * ln(1 + g1 * energy / share)``.

    Jointly concave in (share, energy) on share >= 0; continuous extension
    at share = 0.
    """
    if share < 0.0 or energy < 0.0 or g1 < 0.0:
        raise ValueError("share, energy and g1 must be nonnegative")
    if share == 0.0:
        return 0.0
    return share * math.log1p(g1 * energy / share)


def time_shared_direct_rate(share: float, energy: float, g_su: float) -> float:
    """Perspective form ``2 share * ln(1 + g_su * energy / (2 share))``."""
    if share < 0.0 or energy < 0.0 or g_su < 0.0:
        raise ValueError("share, energy and g_su must be nonnegative")
    if share == 0.0:
        return 0.0
    return 2.0 * share * math.log1p(g_su * energy / (2.0 * share))

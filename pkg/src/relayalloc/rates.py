"""Per subcarrier rates for direct and relay aided transmission.

Each subcarrier frame is split into a broadcasting slot and a relaying slot.
In direct mode the source talks to the destination in both slots, so the
best strategy is an equal power split across the slots. In relay aided mode
the source broadcasts, a set of relays decodes, and the relays plus the
source beamform to the destination in the second slot; the decodable rate is
the minimum of the worst source-relay link and the combined second hop.

The relay aided problem has a closed form: sort relays by their source link
gain, consider suffix sets, and pick the suffix whose beamforming ratio is
largest. The result is a single effective gain so the two slot rate becomes
``ln(1 + gain * P)`` for the total subcarrier power P.

All rates are in nats per two slot frame.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .channel import GainTable

__all__ = [
    "MODE_DIRECT",
    "MODE_RELAY",
    "CASE_SOURCE_DOMINATES",
    "CASE_RELAY_SUM_WEAK",
    "CASE_BEAMFORM",
    "PerPairGains",
    "RelayAidedSolution",
    "ModeSets",
    "direct_rate",
    "relay_rate",
    "relay_aided_solution",
    "effective_gain_table",
    "crossover_power",
    "classify",
]

MODE_DIRECT = "direct"
MODE_RELAY = "relay"

# Which branch of the closed form produced the effective gain.
CASE_SOURCE_DOMINATES = "source_dominates"  # direct link beats every relay's source link
CASE_RELAY_SUM_WEAK = "relay_sum_weak"      # decodable relays too weak on the second hop
CASE_BEAMFORM = "beamform"                  # a suffix of relays beamforms with the source


@dataclass(frozen=True, eq=False)
class PerPairGains:
    """Gains seen by one (subcarrier, destination) pair."""

    g_su: float
    g_sr: np.ndarray  # (N,) source to relay
    g_ru: np.ndarray  # (N,) relay to destination

    def __post_init__(self) -> None:
        object.__setattr__(self, "g_sr", np.asarray(self.g_sr, dtype=float))
        object.__setattr__(self, "g_ru", np.asarray(self.g_ru, dtype=float))
        if self.g_sr.ndim != 1 or self.g_sr.size < 1 or self.g_sr.shape != self.g_ru.shape:
            raise ValueError("g_sr and g_ru must be 1-D arrays of equal nonzero length")
        if self.g_su < 0 or np.any(self.g_sr < 0) or np.any(self.g_ru < 0):
            raise ValueError("gains must be nonnegative")
        if not (np.isfinite(self.g_su) and np.all(np.isfinite(self.g_sr)) and np.all(np.isfinite(self.g_ru))):
            raise ValueError("gains must be finite")

    @classmethod
    def from_table(cls, gains: GainTable, k: int, u: int) -> "PerPairGains":
        return cls(g_su=float(gains.g_su[k, u]), g_sr=gains.g_sr[k, :], g_ru=gains.g_ru[k, :, u])

    @property
    def num_relays(self) -> int:
        return self.g_sr.size


@dataclass(frozen=True, eq=False)
class RelayAidedSolution:
    """Optimum relay set and power split for one (subcarrier, destination).

    ``sorted_order`` lists relay indices by increasing source link gain (ties
    by relay index). ``x_idx``/``y_idx``/``z_idx`` are 0-based positions in
    that order and are set only in the beamform case: x is the first relay
    whose source link beats the direct link, y the last suffix whose second
    hop sum still beats the direct link, z the maximizing suffix start.

    ``source_fraction`` is the share of the subcarrier power spent by the
    source in the broadcasting slot; the remainder goes to ``relay_set`` in
    proportion to ``relay_fractions`` (which sum to one).
    """

    effective_gain: float
    case_id: str
    sorted_order: np.ndarray
    x_idx: Optional[int]
    y_idx: Optional[int]
    z_idx: Optional[int]
    relay_set: tuple
    source_fraction: float
    relay_fractions: np.ndarray


def direct_rate(g_su: float, power: float) -> float:
    """Two slot rate of direct transmission with the optimum equal split."""
    if g_su < 0 or power < 0:
        raise ValueError("g_su and power must be nonnegative")
    return 2.0 * np.log1p(g_su * power / 2.0)


def relay_aided_solution(gains: PerPairGains, power: float) -> RelayAidedSolution:
    """Closed form optimum of the relay aided max-min rate problem.

    The effective gain does not depend on ``power``; the split scales
    linearly with it, so only fractions are returned.
    """
    if power < 0:
        raise ValueError("power must be nonnegative")
    g_su = float(gains.g_su)
    order = np.argsort(gains.g_sr, kind="stable")
    gs = gains.g_sr[order]
    gr = gains.g_ru[order]
    n = gs.size
    # suffix sums of second hop gains in sorted order
    t = np.cumsum(gr[::-1])[::-1]

    if g_su >= gs[-1]:
        best = int(np.argmax(gains.g_sr))
        return RelayAidedSolution(
            effective_gain=float(gs[-1]),
            case_id=CASE_SOURCE_DOMINATES,
            sorted_order=order,
            x_idx=None, y_idx=None, z_idx=None,
            relay_set=(best,),
            source_fraction=1.0,
            relay_fractions=np.array([1.0]),
        )

    x = int(np.searchsorted(gs, g_su, side="right"))  # first index with gs > g_su
    if t[x] <= g_su:
        best = int(np.argmax(gains.g_sr))
        return RelayAidedSolution(
            effective_gain=g_su,
            case_id=CASE_RELAY_SUM_WEAK,
            sorted_order=order,
            x_idx=None, y_idx=None, z_idx=None,
            relay_set=(best,),
            source_fraction=1.0,
            relay_fractions=np.array([1.0]),
        )

    y = int(np.max(np.nonzero(t > g_su)[0]))
    cand = gs[x:y + 1] * t[x:y + 1] / (t[x:y + 1] + gs[x:y + 1] - g_su)
    z = x + int(np.argmax(cand))  # first maximizer, i.e. the larger relay set
    psi = float(t[z] / (t[z] + gs[z] - g_su))
    return RelayAidedSolution(
        effective_gain=float(cand[z - x]),
        case_id=CASE_BEAMFORM,
        sorted_order=order,
        x_idx=x, y_idx=y, z_idx=z,
        relay_set=tuple(int(i) for i in order[z:]),
        source_fraction=psi,
        relay_fractions=gr[z:] / t[z],
    )


def relay_rate(gains: PerPairGains, power: float) -> float:
    """Two slot rate of optimally configured relay aided transmission."""
    if power < 0:
        raise ValueError("power must be nonnegative")
    return float(np.log1p(relay_aided_solution(gains, 0.0).effective_gain * power))


def effective_gain_table(g_su: np.ndarray, g_sr: np.ndarray, g_ru: np.ndarray) -> np.ndarray:
    """Vectorized relay aided effective gain for every (k, u) pair.

    Same result as looping relay_aided_solution over the table; kept separate
    because the classification and both protocols need the full (K, U) grid.
    """
    g_su = np.asarray(g_su, dtype=float)
    k, u = g_su.shape
    n = g_sr.shape[1]
    order = np.argsort(g_sr, axis=1, kind="stable")
    gs = np.take_along_axis(g_sr, order, axis=1)                  # (K, N)
    gr = np.take_along_axis(g_ru, order[:, :, None], axis=1)      # (K, N, U)
    t = np.flip(np.cumsum(np.flip(gr, axis=1), axis=1), axis=1)   # suffix sums

    gs_max = gs[:, -1]
    case1 = g_su >= gs_max[:, None]
    x_cnt = (gs[:, :, None] <= g_su[:, None, :]).sum(axis=1)      # (K, U) first index with gs > g_su
    x_safe = np.minimum(x_cnt, n - 1)
    t_at_x = np.take_along_axis(t, x_safe[:, None, :], axis=1)[:, 0, :]
    case2 = ~case1 & (t_at_x <= g_su)

    b = np.arange(n)[None, :, None]
    valid = (b >= x_cnt[:, None, :]) & (t > g_su[:, None, :])
    den = t + gs[:, :, None] - g_su[:, None, :]
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(valid, gs[:, :, None] * t / den, -np.inf)
    g_beam = ratio.max(axis=1)

    return np.where(case1, gs_max[:, None], np.where(case2, g_su, g_beam))


def crossover_power(g1: float, g_su: float) -> Optional[float]:
    """Total power below which relay aided mode beats direct mode.

    Returns None when there is no crossover: either the relay aided gain
    never wins (g1 <= g_su) or it always wins (g_su == 0).
    """
    if g1 < 0 or g_su < 0:
        raise ValueError("gains must be nonnegative")
    if g1 <= g_su or g_su == 0.0:
        return None
    return 4.0 * (g1 - g_su) / g_su**2


@dataclass(frozen=True, eq=False)
class ModeSets:
    """Per (subcarrier, destination) mode admissibility at a given budget.

    ``in_direct_set`` marks pairs where relay aided mode can never win, so
    only direct mode is admissible; ``in_relay_set`` marks pairs where relay
    aided mode wins for every feasible power, so only it is admissible.
    Pairs in neither set stay admissible in both modes. The crossover is in
    watts, NaN where it does not exist and +inf where relay mode always wins.
    """

    ptot: float
    g1: np.ndarray              # (K, U) relay aided effective gains
    crossover: np.ndarray       # (K, U)
    in_direct_set: np.ndarray   # (K, U) bool
    in_relay_set: np.ndarray    # (K, U) bool

    def direct_set(self, k: int) -> tuple:
        return tuple(int(u) for u in np.nonzero(self.in_direct_set[k])[0])

    def relay_set(self, k: int) -> tuple:
        return tuple(int(u) for u in np.nonzero(self.in_relay_set[k])[0])


def classify(gains: GainTable, ptot: float) -> ModeSets:
    """Split (k, u) pairs by which transmission mode can be optimal."""
    if ptot <= 0:
        raise ValueError("ptot must be positive")
    g1 = effective_gain_table(gains.g_su, gains.g_sr, gains.g_ru)
    g_su = gains.g_su
    with np.errstate(divide="ignore", invalid="ignore"):
        crossover = np.where(
            g1 > g_su,
            np.where(g_su > 0.0, 4.0 * (g1 - g_su) / g_su**2, np.inf),
            np.nan,
        )
    in_direct = g1 <= g_su
    # boundary equality keeps relay mode strictly winning at the budget
    in_relay = (g1 > g_su) & (ptot <= crossover)
    return ModeSets(ptot=float(ptot), g1=g1, crossover=crossover,
                    in_direct_set=in_direct, in_relay_set=in_relay)

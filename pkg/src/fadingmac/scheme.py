"""Slot-level transmission layouts for joint transmission and TDMA.

Both schemes tile time into pilot periods of L slots.  An active period
opens with the n_t1 + n_t2 orthogonal pilot vectors (user 1's antennas in
order, then user 2's) and carries data vectors from both users in the
remaining slots.  Guard periods - the same pilot prefix followed by silence -
run for L(T-1) slots before the first and after the last data block, and one
extra pilot group closes the frame, so that every data slot has exactly T
pilot transmissions of every (user, antenna) on each side within the
estimator window [k - TL, k + TL].

The TDMA variant gives each user its own single-user frame of this form
(the other user's antenna count set to zero) on disjoint time segments split
at roughly a beta fraction of the total length.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .config import SystemConfig

PILOT = "pilot"
DATA = "data"
SILENT = "silent"


class DivisibilityError(ValueError):
    """Data length is not a whole number of per-period data blocks."""


class PeriodTooShort(ValueError):
    """Pilot period cannot fit the pilot prefix plus at least one data slot."""


def pilot_vector(n_ts: int, t: int) -> np.ndarray:
    """Pilot vector for antenna t (1-based) of a user with n_ts antennas:
    a 1 in entry t, zeros elsewhere."""
    if not 1 <= t <= n_ts:
        raise IndexError(f"antenna index {t} outside 1..{n_ts}")
    vec = np.zeros(n_ts, dtype=complex)
    vec[t - 1] = 1.0
    return vec


@dataclass(frozen=True)
class LayoutCounts:
    """Slot bookkeeping: n' = n_p + n + n_g."""

    data: int      # n: data slots carrying codeword symbols
    pilots: int    # n_p: slots spent on pilot vectors
    guard: int     # n_g: silent slots inside guard periods
    total: int     # n': full frame length

    def __post_init__(self) -> None:
        assert self.total == self.data + self.pilots + self.guard


@dataclass(frozen=True)
class Layout:
    """A built frame: who transmits what at every slot.

    ``pilot_slots[(s, t)]`` are the absolute slots where user s sends the
    antenna-t pilot; ``data_slots[s]`` the slots carrying user s's codeword,
    in codeword order.  In the joint scheme the two users' data slots
    coincide; in a TDMA frame they are disjoint.
    """

    L: int
    T: int
    n_t: dict[int, int]
    counts: LayoutCounts
    pilot_slots: dict[tuple[int, int], np.ndarray] = field(repr=False)
    data_slots: dict[int, np.ndarray] = field(repr=False)
    offset: dict[int, int] = field(repr=False)
    pilot_prefix: dict[int, int] = field(repr=False)
    achieved_beta: float | None = None

    @property
    def n_prime(self) -> int:
        return self.counts.total

    def pilot_phase(self, s: int, t: int) -> int:
        """Phase (slot mod L, relative to the user's segment) of the (s, t)
        pilot inside each period."""
        if s not in self.pilot_prefix:
            raise KeyError(f"user {s} not in layout")
        return self.pilot_prefix[s] + (t - 1)

    def data_phases(self, s: int) -> np.ndarray:
        """Phase (relative to the user's segment) of each data slot."""
        return (self.data_slots[s] - self.offset[s]) % self.L

    def assignment(self, s: int, k: int):
        """Kind of slot k for user s: (PILOT, antenna) | (DATA, index) |
        (SILENT, None)."""
        for t in range(1, self.n_t.get(s, 0) + 1):
            hits = np.searchsorted(self.pilot_slots[(s, t)], k)
            arr = self.pilot_slots[(s, t)]
            if hits < len(arr) and arr[hits] == k:
                return (PILOT, t)
        arr = self.data_slots.get(s, np.empty(0, dtype=int))
        pos = np.searchsorted(arr, k)
        if pos < len(arr) and arr[pos] == k:
            return (DATA, int(pos))
        return (SILENT, None)

    def to_records(self) -> list[dict]:
        """JSON-ready dump: one record per (slot, user) with a transmission."""
        records = []
        for s in sorted(self.n_t):
            for t in range(1, self.n_t[s] + 1):
                for k in self.pilot_slots[(s, t)]:
                    records.append({"slot": int(k), "user": s, "kind": PILOT,
                                    "antenna_or_block": t})
            for pos, k in enumerate(self.data_slots.get(s, ())):
                records.append({"slot": int(k), "user": s, "kind": DATA,
                                "antenna_or_block": pos})
        records.sort(key=lambda r: (r["slot"], r["user"], r["kind"]))
        return records


def _single_frame(L: int, T: int, n_t: dict[int, int], n: int,
                  offset: int) -> tuple[dict, dict, LayoutCounts]:
    """Pilot/data slot maps of one frame starting at absolute slot `offset`.

    Period map: (T-1) guard periods, n / (L - sum n_t) active periods,
    (T-1) guard periods, then one closing pilot group.
    """
    nt_sum = sum(n_t.values())
    n_data_per = L - nt_sum
    if n_data_per < 1:
        raise PeriodTooShort(
            f"L={L} leaves no data slot after {nt_sum} pilots")
    if n % n_data_per:
        raise DivisibilityError(
            f"n={n} is not a multiple of L - pilots = {n_data_per}")
    blocks = n // n_data_per
    periods = blocks + 2 * (T - 1)
    total = periods * L + nt_sum

    pilot_slots = {}
    prefix = 0
    for s in sorted(n_t):
        for t in range(1, n_t[s] + 1):
            base = offset + prefix + (t - 1)
            slots = base + L * np.arange(periods + 1)
            # the closing group sits at periods*L, inside the frame
            pilot_slots[(s, t)] = slots
        prefix += n_t[s]

    active0 = T - 1
    starts = offset + (active0 + np.arange(blocks)) * L + nt_sum
    data = (starts[:, None] + np.arange(n_data_per)[None, :]).ravel()
    data_slots = {s: data for s in n_t}

    counts = LayoutCounts(
        data=n,
        pilots=(periods + 1) * nt_sum,
        guard=2 * (T - 1) * n_data_per,
        total=total,
    )
    return pilot_slots, data_slots, counts


def build_joint_layout(config: SystemConfig, n: int) -> Layout:
    """Joint-transmission frame: both users share every active period.

    n is the number of data symbols per user and must be a multiple of
    L - n_t1 - n_t2.  Counts satisfy
    n_p = (n/(L - n_t1 - n_t2) + 1 + 2(T-1)) (n_t1 + n_t2) and
    n_g = 2 (L - n_t1 - n_t2)(T - 1).
    """
    n_t = {1: config.n_t1, 2: config.n_t2}
    pilots, data, counts = _single_frame(config.L, config.T, n_t, n, 0)
    return Layout(L=config.L, T=config.T, n_t=n_t, counts=counts,
                  pilot_slots=pilots, data_slots=data,
                  offset={1: 0, 2: 0},
                  pilot_prefix={1: 0, 2: config.n_t1})


def build_tdma_layout(config: SystemConfig, n: int, beta: float) -> Layout:
    """TDMA frame: user 1's single-user frame, then user 2's.

    n is the total data budget for the frame; user 1's share beta * n is
    snapped to a whole number of its L-periods (and user 2's remainder to a
    whole number of its own), so the achieved split can differ from the
    request - the realised channel-use fraction is reported in
    ``achieved_beta``.  A user with a zero share is entirely silent and
    occupies no slots.
    """
    if not 0.0 <= beta <= 1.0:
        raise ValueError(f"beta must lie in [0, 1], got {beta}")
    cap1 = config.L - config.n_t1
    cap2 = config.L - config.n_t2
    n1 = cap1 * round(beta * n / cap1)
    n2 = max(0, cap2 * round((n - n1) / cap2))
    if beta == 1.0:
        n1, n2 = cap1 * round(n / cap1), 0
    if beta == 0.0:
        n1, n2 = 0, cap2 * round(n / cap2)
    if n1 <= 0 and n2 <= 0:
        raise DivisibilityError(
            f"n={n} too small to fill one data block for either user")

    pilot_slots: dict[tuple[int, int], np.ndarray] = {}
    data_slots: dict[int, np.ndarray] = {}
    offsets = {}
    cursor = 0
    totals = {"data": 0, "pilots": 0, "guard": 0, "total": 0}
    for s, n_ts, n_s in ((1, config.n_t1, n1), (2, config.n_t2, n2)):
        offsets[s] = cursor
        if n_s <= 0:
            for t in range(1, n_ts + 1):
                pilot_slots[(s, t)] = np.empty(0, dtype=int)
            data_slots[s] = np.empty(0, dtype=int)
            continue
        pilots, data, counts = _single_frame(
            config.L, config.T, {s: n_ts}, n_s, cursor)
        pilot_slots.update(pilots)
        data_slots[s] = data[s]
        cursor += counts.total
        totals["data"] += counts.data
        totals["pilots"] += counts.pilots
        totals["guard"] += counts.guard
        totals["total"] += counts.total

    counts = LayoutCounts(**totals)
    seg1 = offsets[2] if n2 > 0 else counts.total
    achieved = seg1 / counts.total if counts.total else 0.0
    return Layout(L=config.L, T=config.T,
                  n_t={1: config.n_t1, 2: config.n_t2}, counts=counts,
                  pilot_slots=pilot_slots, data_slots=data_slots,
                  offset=offsets, pilot_prefix={1: 0, 2: 0},
                  achieved_beta=achieved)

"""Slot-level Monte Carlo of the sampling system under an SRP.

Per slot ``n``: the source moves, the sampled action is attempted over the
channel, a delivery copies the *current* state into the estimate, the CAE
``delta[x, x_hat]`` and the action cost accrue, and the age for the next
slot resets to ``w[x_hat]`` on delivery or grows by one.

:func:`step` is the reference single-slot transition.  :func:`run` and
:func:`run_trace` drive a vectorized kernel that consumes the same
uniforms with the same comparisons, so both paths agree slot for slot.

Randomness comes from independent streams keyed by label (``source``,
``action``, ``channel``, ``delivery``, ``init``) derived from one seed, so a
change of policy leaves the source path untouched.
"""

from __future__ import annotations

import csv
import zlib
from dataclasses import dataclass, field
from typing import IO, Iterator

import numpy as np

from .analysis import JointDist
from .model import Action, SrpPolicy, SystemInstance, require_valid, stationary_distribution

BLOCK = 1 << 16
MAX_TRACE = 1_000_000
TRACE_HEADER = ("slot", "action", "delivered", "x", "x_hat", "aoi", "cae", "cost")


@dataclass(frozen=True)
class SimConfig:
    slots: int = 1_000_000
    seed: int = 0
    warmup_slots: int | None = None  # None: 1% of slots
    collect_joint: bool = True
    aoi_hist_max: int = 256
    equal_start: bool = False  # start with X_hat(0) = X(0) instead of an independent draw
    batches: int = 100  # batch-means groups for standard errors
    hist_stride: int = 1  # histogram every k-th counted slot; k > 1 decorrelates the samples

    def __post_init__(self):
        if self.slots < 1:
            raise ValueError("slots must be positive")
        if not 0 <= self.warmup < self.slots:
            raise ValueError("warmup_slots must be in [0, slots)")
        if self.aoi_hist_max < 1:
            raise ValueError("aoi_hist_max must be positive")
        if self.batches < 2:
            raise ValueError("need at least two batches")
        if self.hist_stride < 1:
            raise ValueError("hist_stride must be positive")

    @property
    def warmup(self) -> int:
        return self.slots // 100 if self.warmup_slots is None else self.warmup_slots


@dataclass(frozen=True)
class SimState:
    x: int
    x_hat: int
    aoi: int


@dataclass(frozen=True)
class SlotRecord:
    slot: int
    action: Action
    delivered: bool
    x: int
    x_hat: int
    aoi: int  # age at the start of the slot
    cae: float
    cost: float


@dataclass(frozen=True)
class SimResult:
    avg_aoi: float
    avg_cae: float
    avg_cost: float
    empirical_psi: float
    joint: JointDist | None
    aoi_counts: np.ndarray  # occupancy of ages 0..aoi_hist_max (every hist_stride-th slot)
    aoi_overflow: int
    slots_counted: int
    action_freq: tuple[float, float, float]
    stderr: dict = field(default_factory=dict)
    joint_stderr: np.ndarray | None = None

    @property
    def hist_samples(self) -> int:
        return int(self.aoi_counts.sum()) + self.aoi_overflow

    @property
    def aoi_histogram(self) -> np.ndarray:
        return self.aoi_counts / self.hist_samples

    @property
    def overflow_fraction(self) -> float:
        return self.aoi_overflow / self.hist_samples

    def to_dict(self) -> dict:
        out = {
            "avg_aoi": self.avg_aoi,
            "avg_cae": self.avg_cae,
            "avg_cost": self.avg_cost,
            "empirical_psi": self.empirical_psi,
            "slots_counted": self.slots_counted,
            "action_freq": dict(zip(("NS", "SR", "SP"), self.action_freq)),
            "stderr": dict(self.stderr),
        }
        if self.joint is not None:
            out["joint"] = self.joint.to_dict()
            out["joint_stderr"] = JointDist(self.joint_stderr).to_dict()
        out["aoi_histogram"] = [int(c) for c in self.aoi_counts]
        out["aoi_overflow"] = self.aoi_overflow
        return out


class _Params:
    """Instance constants in the layout the kernels index into."""

    def __init__(self, instance: SystemInstance):
        ch = instance.channel
        self.p01 = instance.source.p01
        self.stay1 = 1.0 - instance.source.p10
        self.p_chnl = ch.p_chnl
        # success[action][channel_good]
        self.success = np.array([[0.0, 0.0], [ch.p_r0, ch.p_r1], [ch.p_p0, ch.p_p1]])
        self.w = np.array([instance.weights.w0, instance.weights.w1], dtype=np.int64)
        self.delta = np.array(instance.penalty.matrix(), dtype=float)
        self.cost = np.array(instance.costs.as_tuple(), dtype=float)


def step(
    state: SimState,
    instance: SystemInstance,
    action: Action,
    u_source: float,
    u_channel: float,
    u_delivery: float,
) -> tuple[SimState, SlotRecord]:
    """Advance one slot.

    ``state`` holds the previous slot's source state and estimate and the age
    at the start of this slot.  The returned record carries the slot number
    0; callers that track time fill it in.
    """
    action = Action(action)
    if state.x == 0:
        x = 1 if u_source < instance.source.p01 else 0
    else:
        x = 1 if u_source < 1.0 - instance.source.p10 else 0
    ch = instance.channel
    good = u_channel < ch.p_chnl
    if action is Action.NS:
        p = 0.0
    elif action is Action.SR:
        p = ch.p_r1 if good else ch.p_r0
    else:
        p = ch.p_p1 if good else ch.p_p0
    delivered = u_delivery < p
    x_hat = x if delivered else state.x_hat
    cae = instance.penalty.matrix()[x][x_hat]
    cost = instance.costs.as_tuple()[action]
    if delivered:
        next_aoi = instance.weights.w1 if x_hat == 1 else instance.weights.w0
    else:
        next_aoi = state.aoi + 1
    record = SlotRecord(0, action, bool(delivered), x, x_hat, state.aoi, cae, cost)
    return SimState(x, x_hat, next_aoi), record


def _stream(seed: int, label: str) -> np.random.Generator:
    ss = np.random.SeedSequence(seed & 0xFFFFFFFFFFFFFFFF, spawn_key=(zlib.crc32(label.encode()),))
    return np.random.default_rng(ss)


def sample_actions(policy: SrpPolicy, u: np.ndarray) -> np.ndarray:
    """Map uniforms to actions by inverse CDF; zero-probability actions never occur."""
    probs = np.array(policy.as_tuple())
    cum = np.cumsum(probs)
    last = int(np.flatnonzero(probs > 0)[-1])
    cum[last:] = np.inf
    return np.searchsorted(cum, u, side="right").astype(np.int8)


def _source_path(x_prev: int, u: np.ndarray, a: float, b: float) -> np.ndarray:
    """Vectorized form of the per-slot rule ``x' = u < (p01 if x == 0 else 1 - p10)``.

    With ``lo, hi = sorted((a, b))``: ``u < lo`` forces 1, ``u >= hi``
    forces 0, and the band in between copies the state when ``a < b`` or
    flips it when ``a > b``.
    """
    lo, hi = min(a, b), max(a, b)
    idx = np.arange(u.size)
    set1 = u < lo
    reset = set1 | (u >= hi)
    last = np.maximum.accumulate(np.where(reset, idx, -1))
    at = np.maximum(last, 0)
    x = np.where(last >= 0, set1[at], bool(x_prev)).astype(np.int8)
    if a > b:
        flips = np.cumsum(~reset)
        since = flips - np.where(last >= 0, flips[at], 0)
        x ^= (since & 1).astype(np.int8)
    return x


def _block(p: _Params, state: SimState, actions, u_src, u_chn, u_del):
    n = actions.size
    idx = np.arange(n)
    x = _source_path(state.x, u_src, p.p01, p.stay1)
    good = (u_chn < p.p_chnl).astype(np.int8)
    delivered = u_del < p.success[actions, good]

    last_d = np.maximum.accumulate(np.where(delivered, idx, -1))
    x_hat = np.where(last_d >= 0, x[np.maximum(last_d, 0)], state.x_hat).astype(np.int8)

    prev_d = np.empty(n, dtype=np.int64)
    prev_d[0] = -1
    prev_d[1:] = last_d[:-1]
    aoi = np.where(
        prev_d >= 0,
        p.w[x_hat[np.maximum(prev_d, 0)]] + (idx - prev_d - 1),
        state.aoi + idx,
    ).astype(np.int64)

    if last_d[-1] >= 0:
        next_aoi = int(p.w[x_hat[last_d[-1]]] + (n - last_d[-1] - 1))
    else:
        next_aoi = state.aoi + n
    new_state = SimState(int(x[-1]), int(x_hat[-1]), next_aoi)
    return {"action": actions, "delivered": delivered, "x": x, "x_hat": x_hat, "aoi": aoi}, new_state


def _initial_state(instance: SystemInstance, config: SimConfig) -> SimState:
    pi1 = stationary_distribution(instance.source).pi1
    u = _stream(config.seed, "init").random(2)
    x0 = int(u[0] < pi1)
    xh0 = x0 if config.equal_start else int(u[1] < pi1)
    return SimState(x0, xh0, int(instance.weights.w0))


def _blocks(instance: SystemInstance, policy: SrpPolicy, config: SimConfig) -> Iterator[tuple[int, dict]]:
    require_valid(instance)
    p = _Params(instance)
    rngs = {k: _stream(config.seed, k) for k in ("source", "action", "channel", "delivery")}
    state = _initial_state(instance, config)
    start = 0
    while start < config.slots:
        n = min(BLOCK, config.slots - start)
        actions = sample_actions(policy, rngs["action"].random(n))
        arrays, state = _block(
            p, state, actions, rngs["source"].random(n), rngs["channel"].random(n), rngs["delivery"].random(n)
        )
        arrays["cae"] = p.delta[arrays["x"], arrays["x_hat"]]
        arrays["cost"] = p.cost[actions]
        yield start, arrays
        start += n


def _batch_se(sums: np.ndarray, counts: np.ndarray, mean: float) -> float:
    means = sums / counts
    k = means.size
    return float(np.sqrt(np.sum((means - mean) ** 2) / (k * (k - 1))))


def run(instance: SystemInstance, policy: SrpPolicy, config: SimConfig) -> SimResult:
    """Simulate ``config.slots`` slots; averages skip the warmup.

    Standard errors use batch means over ``config.batches`` contiguous
    groups, which absorbs the strong slot-to-slot correlation of the age
    and the held estimate.
    """
    warm = config.warmup
    counted = config.slots - warm
    nb = min(config.batches, counted)
    hist_len = config.aoi_hist_max + 2  # last bin is overflow
    keys = ("aoi", "cae", "cost", "delivered")
    sums = {k: np.zeros(nb) for k in keys}
    cells = np.zeros((4, nb))
    counts = np.zeros(nb)
    acts = np.zeros(3, dtype=np.int64)
    hist = np.zeros(hist_len, dtype=np.int64)

    for start, arr in _blocks(instance, policy, config):
        g = start + np.arange(arr["aoi"].size)
        keep = g >= warm
        if not keep.any():
            continue
        batch = (g[keep] - warm) * nb // counted
        counts += np.bincount(batch, minlength=nb)
        for k in keys:
            sums[k] += np.bincount(batch, weights=arr[k][keep].astype(float), minlength=nb)
        if config.collect_joint:
            cell = 2 * arr["x"][keep].astype(np.int64) + arr["x_hat"][keep]
            for c in range(4):
                cells[c] += np.bincount(batch, weights=(cell == c).astype(float), minlength=nb)
        acts += np.bincount(arr["action"][keep], minlength=3)
        sampled = keep & ((g - warm) % config.hist_stride == 0)
        hist += np.bincount(np.minimum(arr["aoi"][sampled], hist_len - 1), minlength=hist_len)

    means = {k: float(sums[k].sum() / counted) for k in keys}
    stderr = {k: _batch_se(sums[k], counts, means[k]) for k in keys}
    stderr["psi"] = stderr.pop("delivered")
    joint = joint_se = None
    if config.collect_joint:
        totals = cells.sum(axis=1) / counted
        joint = JointDist(totals.reshape(2, 2))
        joint_se = np.array([_batch_se(cells[c], counts, totals[c]) for c in range(4)]).reshape(2, 2)
    return SimResult(
        avg_aoi=means["aoi"],
        avg_cae=means["cae"],
        avg_cost=means["cost"],
        empirical_psi=means["delivered"],
        joint=joint,
        aoi_counts=hist[:-1],
        aoi_overflow=int(hist[-1]),
        slots_counted=counted,
        action_freq=tuple(float(a) / counted for a in acts),
        stderr=stderr,
        joint_stderr=joint_se,
    )


def run_trace(
    instance: SystemInstance, policy: SrpPolicy, config: SimConfig, max_records: int = MAX_TRACE
) -> list[SlotRecord]:
    """Every slot of a run (warmup included), numbered from 1."""
    if max_records > MAX_TRACE:
        raise ValueError(f"max_records may not exceed {MAX_TRACE}")
    if config.slots > max_records:
        raise ValueError(f"run of {config.slots} slots exceeds the trace cap of {max_records}")
    records = []
    for start, arr in _blocks(instance, policy, config):
        cols = zip(
            arr["action"].tolist(),
            arr["delivered"].tolist(),
            arr["x"].tolist(),
            arr["x_hat"].tolist(),
            arr["aoi"].tolist(),
            arr["cae"].tolist(),
            arr["cost"].tolist(),
        )
        for i, (a, d, x, xh, age, cae, cost) in enumerate(cols):
            records.append(SlotRecord(start + i + 1, Action(a), d, x, xh, age, cae, cost))
    return records


def write_trace_csv(records, fh: IO[str]) -> None:
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(TRACE_HEADER)
    for r in records:
        writer.writerow(
            (r.slot, r.action.name, int(r.delivered), r.x, r.x_hat, r.aoi, repr(float(r.cae)), repr(float(r.cost)))
        )

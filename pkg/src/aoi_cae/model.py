"""Domain types for one sampling-system instance and its elementary quantities.

A system instance bundles a two-state Markov source, an i.i.d. good/bad
channel, per-action transmission costs, the cost-of-actuation-error (CAE)
penalty table, the AoI reset weights and the two constraint bounds.

All types are frozen dataclasses.  Construction does not validate (so that a
bad instance can still be built and reported on); call
:func:`validate_instance` or rely on the solvers, which refuse invalid input.
"""

from __future__ import annotations

import enum
import math
from dataclasses import asdict, dataclass, field

PROB_TOL = 1e-12
SIMPLEX_TOL = 1e-9


class Action(enum.IntEnum):
    """Per-slot action: idle, send raw sample, send processed sample."""

    NS = 0
    SR = 1
    SP = 2


class InvalidInstanceError(ValueError):
    """Raised when an instance with hard validation errors is used."""

    def __init__(self, report: "ValidationReport"):
        self.report = report
        super().__init__("invalid instance: " + "; ".join(report.errors))


class DegenerateSourceError(ValueError):
    pass


@dataclass(frozen=True)
class SourceModel:
    p01: float
    p10: float


@dataclass(frozen=True)
class StationaryDist:
    pi0: float
    pi1: float


@dataclass(frozen=True)
class ChannelModel:
    p_chnl: float
    p_r1: float
    p_r0: float
    p_p1: float
    p_p0: float


@dataclass(frozen=True)
class CostModel:
    c_ns: float
    c_sr: float
    c_sp: float

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.c_ns, self.c_sr, self.c_sp)


@dataclass(frozen=True)
class CaePenalty:
    d00: float
    d01: float
    d10: float
    d11: float

    def matrix(self) -> tuple[tuple[float, float], tuple[float, float]]:
        """Penalty indexed as ``[true_state][estimate]``."""
        return ((self.d00, self.d01), (self.d10, self.d11))


@dataclass(frozen=True)
class AoiWeights:
    w0: int
    w1: int


@dataclass(frozen=True)
class Bounds:
    c0: float
    d0: float


@dataclass(frozen=True)
class SystemInstance:
    source: SourceModel
    channel: ChannelModel
    costs: CostModel
    penalty: CaePenalty
    weights: AoiWeights
    bounds: Bounds

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "SystemInstance":
        """Build an instance from the grouped JSON layout.

        Raises ``KeyError``/``TypeError`` naming the offending field path when
        a group or field is missing or not a number.
        """
        groups = {
            "source": SourceModel,
            "channel": ChannelModel,
            "costs": CostModel,
            "penalty": CaePenalty,
            "weights": AoiWeights,
            "bounds": Bounds,
        }
        if not isinstance(data, dict):
            raise TypeError("instance document must be a JSON object")
        parts = {}
        for name, kind in groups.items():
            if name not in data:
                raise KeyError(f"missing group '{name}'")
            group = data[name]
            if not isinstance(group, dict):
                raise TypeError(f"'{name}' must be an object")
            kwargs = {}
            for fname in kind.__dataclass_fields__:
                if fname not in group:
                    raise KeyError(f"missing field '{name}.{fname}'")
                value = group[fname]
                if isinstance(value, bool) or not isinstance(value, (int, float)):
                    raise TypeError(f"'{name}.{fname}' must be a number")
                kwargs[fname] = value
            unknown = set(group) - set(kind.__dataclass_fields__)
            if unknown:
                raise KeyError(f"unknown field '{name}.{sorted(unknown)[0]}'")
            parts[name] = kind(**kwargs)
        return cls(**parts)

    def replace(self, **changes) -> "SystemInstance":
        """Return a copy with dotted-path fields substituted.

        >>> inst.replace(**{"bounds.c0": 1.0, "costs.c_sp": 0.6})  # doctest: +SKIP
        """
        data = self.to_dict()
        for path, value in changes.items():
            group, _, name = path.partition(".")
            if group not in data or name not in data[group]:
                raise KeyError(path)
            data[group][name] = value
        return SystemInstance.from_dict(data)


@dataclass(frozen=True)
class SrpPolicy:
    """Stationary randomized policy: i.i.d. action probabilities per slot."""

    p_ns: float
    p_sr: float
    p_sp: float

    def __post_init__(self):
        for name in ("p_ns", "p_sr", "p_sp"):
            v = getattr(self, name)
            if not (-PROB_TOL <= v <= 1 + PROB_TOL) or math.isnan(v):
                raise ValueError(f"{name}={v} is not a probability")
        total = self.p_ns + self.p_sr + self.p_sp
        if abs(total - 1.0) > SIMPLEX_TOL:
            raise ValueError(f"policy probabilities sum to {total}, not 1")

    @classmethod
    def from_transmit(cls, p_sr: float, p_sp: float) -> "SrpPolicy":
        """Policy from the two transmit probabilities, clipping round-off."""
        p_sr = min(max(p_sr, 0.0), 1.0)
        p_sp = min(max(p_sp, 0.0), 1.0 - p_sr)
        return cls(max(0.0, 1.0 - p_sr - p_sp), p_sr, p_sp)

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.p_ns, self.p_sr, self.p_sp)


@dataclass(frozen=True)
class ValidationReport:
    errors: list[str] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.errors

    def __bool__(self) -> bool:
        # truthy when there is something to report
        return bool(self.errors or self.warnings)


def stationary_distribution(source: SourceModel) -> StationaryDist:
    total = source.p01 + source.p10
    if total <= 0:
        raise DegenerateSourceError("p01 + p10 = 0: source has no unique stationary distribution")
    return StationaryDist(pi0=source.p10 / total, pi1=source.p01 / total)


def success_probabilities(channel: ChannelModel) -> tuple[float, float]:
    """Per-slot delivery probability of a raw (mu) and a processed (nu) sample."""
    g = channel.p_chnl
    mu = channel.p_r1 * g + channel.p_r0 * (1.0 - g)
    nu = channel.p_p1 * g + channel.p_p0 * (1.0 - g)
    return mu, nu


def success_rate(policy: SrpPolicy, mu: float, nu: float) -> float:
    return mu * policy.p_sr + nu * policy.p_sp


def expected_cost(policy: SrpPolicy, costs: CostModel) -> float:
    return costs.c_ns * policy.p_ns + costs.c_sr * policy.p_sr + costs.c_sp * policy.p_sp


def _is_prob(v: float) -> bool:
    return math.isfinite(v) and -PROB_TOL <= v <= 1.0 + PROB_TOL


def validate_instance(instance: SystemInstance) -> ValidationReport:
    """Collect hard errors and soft warnings for ``instance``.

    Messages are prefixed with the JSON field path, e.g.
    ``"source.p01: probability out of range"``.
    """
    errors: list[str] = []
    warnings: list[str] = []

    src = instance.source
    for name in ("p01", "p10"):
        if not _is_prob(getattr(src, name)):
            errors.append(f"source.{name}: probability out of range")
    if _is_prob(src.p01) and _is_prob(src.p10) and src.p01 + src.p10 <= 0:
        errors.append("source: p01 + p10 must be positive")

    for name in ChannelModel.__dataclass_fields__:
        if not _is_prob(getattr(instance.channel, name)):
            errors.append(f"channel.{name}: probability out of range")

    c = instance.costs
    for name in ("c_ns", "c_sr", "c_sp"):
        v = getattr(c, name)
        if not math.isfinite(v):
            errors.append(f"costs.{name}: must be finite")
        elif v < 0:
            errors.append(f"costs.{name}: cost must be nonnegative")
    if c.c_sr < c.c_ns:
        warnings.append("costs.c_sr: cheaper than idling (c_sr < c_ns)")
    if c.c_sp < c.c_ns:
        warnings.append("costs.c_sp: cheaper than idling (c_sp < c_ns)")

    pen = instance.penalty
    for name in ("d00", "d01", "d10", "d11"):
        if not math.isfinite(getattr(pen, name)):
            errors.append(f"penalty.{name}: must be finite")
    for name in ("d01", "d10"):
        if getattr(pen, name) < 0:
            errors.append(f"penalty.{name}: off-diagonal penalty must be nonnegative")
    for name in ("d00", "d11"):
        if getattr(pen, name) > 0:
            warnings.append(f"penalty.{name}: diagonal penalty is positive (outside the usual sign convention)")
    if pen.d00 - pen.d01 - pen.d10 + pen.d11 > 0:
        warnings.append("penalty: CAE grows with the success rate (xi > 0); the CAE bound caps updates from above")

    w = instance.weights
    for name in ("w0", "w1"):
        v = getattr(w, name)
        if isinstance(v, bool) or not float(v).is_integer():
            errors.append(f"weights.{name}: must be an integer")
    if w.w0 < 1:
        errors.append("weights.w0: must be at least 1")
    if w.w1 < w.w0:
        errors.append("weights.w1: must be at least w0")

    for name in ("c0", "d0"):
        if not math.isfinite(getattr(instance.bounds, name)):
            errors.append(f"bounds.{name}: must be finite")

    return ValidationReport(errors, warnings)


def require_valid(instance: SystemInstance) -> ValidationReport:
    report = validate_instance(instance)
    if not report.ok:
        raise InvalidInstanceError(report)
    return report

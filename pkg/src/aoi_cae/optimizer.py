"""Optimal stationary randomized policy by exact 2-D vertex enumeration.

Eliminating ``p_ns = 1 - p_sr - p_sp`` leaves a polygon in ``(p_sr, p_sp)``
cut out by five half-planes (two nonnegativity edges, the simplex edge, the
cost budget and the CAE bound).  The AoI objective ``1/psi - 1 + const`` is
strictly decreasing in the linear success rate ``psi = mu p_sr + nu p_sp``,
so the optimum sits at a vertex of that polygon.
"""

from __future__ import annotations

import enum
import itertools
import math
from dataclasses import dataclass, field

from .analysis import average_aoi, cae_coefficients, expected_cae, lower_bound_value
from .model import (
    SrpPolicy,
    SystemInstance,
    expected_cost,
    require_valid,
    stationary_distribution,
    success_probabilities,
    success_rate,
)

CONSTRAINT_TOL = 1e-9
DEDUP_TOL = 1e-10
TIE_TOL = 1e-12
# success rates below this are treated as "never delivers"
PSI_FLOOR = 1e-12


class FeasibilityStatus(str, enum.Enum):
    FEASIBLE = "Feasible"
    INFEASIBLE_COST = "InfeasibleCost"
    INFEASIBLE_CAE = "InfeasibleCae"
    UNBOUNDED_AOI = "UnboundedAoi"

    def __str__(self) -> str:
        return self.value


class InfeasibleInstance(RuntimeError):
    def __init__(self, status: FeasibilityStatus):
        self.status = status
        super().__init__(f"no feasible policy with finite AoI: {status.value}")


@dataclass(frozen=True)
class HalfPlane:
    """``a[0] * p_sr + a[1] * p_sp <= b``."""

    tag: str
    a: tuple[float, float]
    b: float

    def slack(self, x: float, y: float) -> float:
        return self.b - (self.a[0] * x + self.a[1] * y)

    def scale(self) -> float:
        return max(1.0, abs(self.a[0]), abs(self.a[1]), abs(self.b))


@dataclass(frozen=True)
class SrpSolution:
    status: FeasibilityStatus
    policy: SrpPolicy | None = None
    psi_star: float = 0.0
    aoi: float | None = None
    cae: float | None = None
    cost: float | None = None
    binding: frozenset[str] = field(default_factory=frozenset)

    @property
    def feasible(self) -> bool:
        return self.status is FeasibilityStatus.FEASIBLE


def constraints(instance: SystemInstance) -> list[HalfPlane]:
    c = instance.costs
    mu, nu = success_probabilities(instance.channel)
    coeffs = cae_coefficients(instance.penalty, stationary_distribution(instance.source))
    return [
        HalfPlane("p_sr>=0", (-1.0, 0.0), 0.0),
        HalfPlane("p_sp>=0", (0.0, -1.0), 0.0),
        HalfPlane("p_ns>=0", (1.0, 1.0), 1.0),
        HalfPlane("cost", (c.c_sr - c.c_ns, c.c_sp - c.c_ns), instance.bounds.c0 - c.c_ns),
        HalfPlane("cae", (coeffs.xi * mu, coeffs.xi * nu), instance.bounds.d0 - coeffs.zeta),
    ]


def _satisfies(h: HalfPlane, x: float, y: float) -> bool:
    return h.slack(x, y) >= -CONSTRAINT_TOL * h.scale()


def feasible_vertices(instance: SystemInstance) -> list[tuple[float, float]]:
    """All vertices ``(p_sr, p_sp)`` of the feasible polygon, or ``[]``."""
    require_valid(instance)
    planes = constraints(instance)
    lines = []
    for h in planes:
        if h.a == (0.0, 0.0):
            # constant constraint: either vacuous or empties the polygon
            if h.b < -CONSTRAINT_TOL * h.scale():
                return []
            continue
        lines.append(h)

    vertices: list[tuple[float, float]] = []
    for h, g in itertools.combinations(lines, 2):
        det = h.a[0] * g.a[1] - h.a[1] * g.a[0]
        if abs(det) < 1e-14 * h.scale() * g.scale():
            continue
        x = (h.b * g.a[1] - h.a[1] * g.b) / det
        y = (h.a[0] * g.b - h.b * g.a[0]) / det
        if not all(_satisfies(p, x, y) for p in planes):
            continue
        # snap round-off onto the simplex
        x = 0.0 if x <= 0.0 else min(x, 1.0)
        y = 0.0 if y <= 0.0 else min(y, 1.0 - x)
        if any(abs(x - vx) <= DEDUP_TOL and abs(y - vy) <= DEDUP_TOL for vx, vy in vertices):
            continue
        vertices.append((x, y))
    return vertices


def _min_action_cost(instance: SystemInstance) -> float:
    return min(instance.costs.as_tuple())


def _classify(instance: SystemInstance, vertices, psi_max: float) -> FeasibilityStatus:
    if not vertices:
        if _min_action_cost(instance) > instance.bounds.c0 + CONSTRAINT_TOL * max(1.0, abs(instance.bounds.c0)):
            return FeasibilityStatus.INFEASIBLE_COST
        return FeasibilityStatus.INFEASIBLE_CAE
    if psi_max <= PSI_FLOOR:
        return FeasibilityStatus.UNBOUNDED_AOI
    return FeasibilityStatus.FEASIBLE


def classify_feasibility(instance: SystemInstance) -> FeasibilityStatus:
    return solve_srp(instance).status


def solve_srp(instance: SystemInstance) -> SrpSolution:
    """Optimal SRP for ``instance``.

    Among vertices attaining the largest success rate, the cheapest wins;
    remaining ties go to the larger ``p_sp``.
    """
    vertices = feasible_vertices(instance)
    mu, nu = success_probabilities(instance.channel)
    scored = [(mu * x + nu * y, x, y) for x, y in vertices]
    psi_max = max((s[0] for s in scored), default=0.0)
    status = _classify(instance, vertices, psi_max)
    if status is not FeasibilityStatus.FEASIBLE:
        return SrpSolution(status=status, psi_star=psi_max if vertices else 0.0)

    c = instance.costs
    best = [s for s in scored if s[0] >= psi_max - TIE_TOL]

    costs = [c.c_ns * (1 - x - y) + c.c_sr * x + c.c_sp * y for _, x, y in best]
    cheapest = min(costs)
    best = [s for s, k in zip(best, costs) if k <= cheapest + TIE_TOL]
    _, x, y = max(best, key=lambda s: s[2])
    policy = SrpPolicy.from_transmit(x, y)
    psi = success_rate(policy, mu, nu)
    dist = stationary_distribution(instance.source)
    binding = frozenset(
        h.tag for h in constraints(instance) if abs(h.slack(x, y)) <= CONSTRAINT_TOL * h.scale()
    )
    return SrpSolution(
        status=status,
        policy=policy,
        psi_star=psi,
        aoi=average_aoi(psi, instance.weights, dist.pi1),
        cae=expected_cae(cae_coefficients(instance.penalty, dist), psi),
        cost=expected_cost(policy, c),
        binding=binding,
    )


def solve_lower_bound(instance: SystemInstance) -> tuple[float, float]:
    """``(L_B*, q_hat*)`` of the throughput lower-bound problem.

    Long-run action frequencies of any admissible policy lie in the same
    polygon as the SRP probabilities, so the best throughput is the SRP
    optimum's success rate.
    """
    sol = solve_srp(instance)
    if not sol.feasible:
        raise InfeasibleInstance(sol.status)
    pi1 = stationary_distribution(instance.source).pi1
    return lower_bound_value(sol.psi_star, instance.weights, pi1), sol.psi_star


def optimality_ratio(instance: SystemInstance) -> float:
    """Optimal SRP AoI divided by the lower bound; below 2 whenever ``w0 >= 1``."""
    sol = solve_srp(instance)
    if not sol.feasible:
        raise InfeasibleInstance(sol.status)
    pi1 = stationary_distribution(instance.source).pi1
    return sol.aoi / lower_bound_value(sol.psi_star, instance.weights, pi1)


def check_solution(instance: SystemInstance, sol: SrpSolution, tol: float = CONSTRAINT_TOL) -> list[str]:
    """Constraint violations of a solved policy (empty when all hold)."""
    if not sol.feasible:
        return []
    p = sol.policy
    out = []
    for name, v in zip(("p_ns", "p_sr", "p_sp"), p.as_tuple()):
        if v < -tol:
            out.append(f"{name} negative")
    if abs(sum(p.as_tuple()) - 1.0) > tol:
        out.append("probabilities do not sum to 1")
    if expected_cost(p, instance.costs) > instance.bounds.c0 + tol:
        out.append("cost bound violated")
    if sol.cae > instance.bounds.d0 + tol:
        out.append("CAE bound violated")
    if not math.isfinite(sol.aoi):
        out.append("AoI not finite")
    return out

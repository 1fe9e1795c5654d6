"""Closed-form long-run quantities under a stationary randomized policy.

Everything here is a function of the per-slot success rate ``psi`` (the
probability that a slot ends with a delivered update) plus fixed instance
parameters.  :func:`exact_joint_stationary` is an independent check: it
solves the coupled (true state, estimate) chain directly instead of using
the independence shortcut behind :func:`closed_form_joint`.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import AoiWeights, CaePenalty, SourceModel, StationaryDist, stationary_distribution

JOINT_ORDER = ((0, 0), (0, 1), (1, 0), (1, 1))


class UnboundedAoI(ValueError):
    """AoI has no finite long-run average (no update is ever delivered)."""


class DegenerateChainError(ValueError):
    pass


@dataclass(frozen=True)
class CaeCoefficients:
    zeta: float
    xi: float


@dataclass(frozen=True)
class JointDist:
    """Distribution of (true state, estimate); ``p[i, j]`` = P(X=i, X_hat=j)."""

    p: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.p, dtype=float).reshape(2, 2)
        arr.setflags(write=False)
        object.__setattr__(self, "p", arr)

    def __getitem__(self, ij):
        return float(self.p[ij])

    @property
    def match_probability(self) -> float:
        return float(self.p[0, 0] + self.p[1, 1])

    def expectation(self, penalty: CaePenalty) -> float:
        return float(np.sum(self.p * np.array(penalty.matrix())))

    def source_marginal(self) -> np.ndarray:
        return self.p.sum(axis=1)

    def estimate_marginal(self) -> np.ndarray:
        return self.p.sum(axis=0)

    def to_dict(self) -> dict:
        return {f"{i}{j}": float(self.p[i, j]) for i, j in JOINT_ORDER}


def cae_coefficients(penalty: CaePenalty, dist: StationaryDist) -> CaeCoefficients:
    """Coefficients of the per-slot expected CAE, ``zeta + xi * psi``."""
    pi = (dist.pi0, dist.pi1)
    d = penalty.matrix()
    zeta = sum(d[i][j] * pi[i] * pi[j] for i in (0, 1) for j in (0, 1))
    xi = dist.pi0 * dist.pi1 * (penalty.d00 - penalty.d01 - penalty.d10 + penalty.d11)
    return CaeCoefficients(zeta=zeta, xi=xi)


def expected_cae(coeffs: CaeCoefficients, psi: float) -> float:
    return coeffs.zeta + coeffs.xi * psi


def _check_psi(psi: float) -> None:
    if not 0.0 <= psi <= 1.0:
        raise ValueError(f"psi={psi} is not a probability")
    if psi == 0.0:
        raise UnboundedAoI("psi = 0: no update is ever delivered")


def aoi_offset(weights: AoiWeights, pi1: float) -> float:
    """Mean reset value ``w0 + pi1 (w1 - w0)``, shared by both AoI objectives."""
    return weights.w0 + pi1 * (weights.w1 - weights.w0)


def average_aoi(psi: float, weights: AoiWeights, pi1: float) -> float:
    """Long-run average AoI of an SRP delivering with probability ``psi``.

    Raises
    ------
    UnboundedAoI
        If ``psi == 0``.
    """
    _check_psi(psi)
    return (1.0 / psi - 1.0) + aoi_offset(weights, pi1)


def lower_bound_value(q_hat: float, weights: AoiWeights, pi1: float) -> float:
    """AoI lower bound for any policy with long-run throughput ``q_hat``."""
    _check_psi(q_hat)
    return 0.5 * (1.0 / q_hat - 1.0) + aoi_offset(weights, pi1)


@dataclass(frozen=True)
class AoiDistribution:
    """Stationary AoI distribution truncated at ``k_max``.

    ``probs[i]`` is P(AoI = ``ages[i]``).  The mass and the first moment of
    the part beyond ``k_max`` are kept in closed form.
    """

    ages: np.ndarray
    probs: np.ndarray
    tail_mass: float
    tail_moment: float

    def mean(self) -> float:
        return float(np.dot(self.ages, self.probs) + self.tail_moment)

    def total_mass(self) -> float:
        return float(self.probs.sum() + self.tail_mass)


def aoi_stationary_distribution(
    psi: float, weights: AoiWeights, dist: StationaryDist, k_max: int
) -> AoiDistribution:
    """Mixture of two shifted geometrics, one per reset value.

    After a delivery the age restarts at ``w0`` (estimate 0, weight ``pi0``)
    or ``w1`` (weight ``pi1``) and then grows by one per failed slot.
    """
    _check_psi(psi)
    w0, w1 = int(weights.w0), int(weights.w1)
    if k_max < w1:
        raise ValueError(f"k_max={k_max} must be at least w1={w1}")
    theta = 1.0 - psi
    ages = np.arange(w0, k_max + 1)
    probs = np.zeros(ages.shape, dtype=float)
    tail_mass = 0.0
    tail_moment = 0.0
    s = k_max + 1
    for weight, start in ((dist.pi0, w0), (dist.pi1, w1)):
        if weight == 0.0:
            continue
        on = ages >= start
        probs[on] += weight * psi * theta ** (ages[on] - start)
        # sum_{k>=s} k psi theta^(k-start) = theta^(s-start) (s + theta/psi)
        head = theta ** (s - start)
        tail_mass += weight * head
        tail_moment += weight * head * (s + theta / psi)
    return AoiDistribution(ages=ages, probs=probs, tail_mass=tail_mass, tail_moment=tail_moment)


def closed_form_joint(dist: StationaryDist, psi: float) -> JointDist:
    """Joint (state, estimate) table obtained by treating the held estimate as
    independent of the current source state."""
    pi0, pi1 = dist.pi0, dist.pi1
    off = pi0 * pi1 * (1.0 - psi)
    return JointDist(
        np.array(
            [
                [pi0 * pi0 + pi0 * pi1 * psi, off],
                [off, pi1 * pi1 + pi0 * pi1 * psi],
            ]
        )
    )


def joint_transition_matrix(source: SourceModel, psi: float) -> np.ndarray:
    """4x4 transition matrix on (X, X_hat) in :data:`JOINT_ORDER`.

    Per slot the source moves first, then with probability ``psi`` the
    estimate copies the new state, otherwise it is held.
    """
    px = np.array([[1.0 - source.p01, source.p01], [source.p10, 1.0 - source.p10]])
    P = np.zeros((4, 4))
    for a, (x, xh) in enumerate(JOINT_ORDER):
        for b, (x2, xh2) in enumerate(JOINT_ORDER):
            move = px[x, x2]
            copy = psi if xh2 == x2 else 0.0
            hold = (1.0 - psi) if xh2 == xh else 0.0
            P[a, b] = move * (copy + hold)
    return P


def exact_joint_stationary(source: SourceModel, psi: float) -> JointDist:
    """Exact stationary distribution of the coupled (X, X_hat) chain.

    Solved as one 4x4 linear system: three balance equations plus
    normalization.

    Raises
    ------
    DegenerateChainError
        If the chain has no unique stationary distribution (for example a
        frozen source or ``psi == 0`` with the estimate never refreshed).
    """
    if not 0.0 <= psi <= 1.0:
        raise ValueError(f"psi={psi} is not a probability")
    if source.p01 + source.p10 <= 0:
        raise DegenerateChainError("source never changes state")
    P = joint_transition_matrix(source, psi)
    A = P.T - np.eye(4)
    A[-1, :] = 1.0
    rhs = np.zeros(4)
    rhs[-1] = 1.0
    # stationary distribution is unique iff the balance system has rank 3
    if np.linalg.matrix_rank(P.T - np.eye(4), tol=1e-12) < 3:
        raise DegenerateChainError("joint chain has more than one stationary distribution")
    pi = np.linalg.solve(A, rhs)
    pi = np.where(np.abs(pi) < 1e-15, 0.0, pi)
    return JointDist(pi.reshape(2, 2))


def closed_form_gap(source: SourceModel, penalty: CaePenalty, psi: float) -> dict:
    """Compare the closed-form CAE with the exact coupled-chain CAE.

    Returns a dict with both CAE values, their difference, both match
    probabilities and the largest per-cell table difference.
    """
    dist = stationary_distribution(source)
    approx = closed_form_joint(dist, psi)
    exact = exact_joint_stationary(source, psi)
    cae_approx = expected_cae(cae_coefficients(penalty, dist), psi)
    cae_exact = exact.expectation(penalty)
    return {
        "cae_closed_form": cae_approx,
        "cae_exact_chain": cae_exact,
        "cae_gap": cae_exact - cae_approx,
        "match_closed_form": approx.match_probability,
        "match_exact_chain": exact.match_probability,
        "max_cell_gap": float(np.max(np.abs(exact.p - approx.p))),
    }

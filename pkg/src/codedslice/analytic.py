"""Closed-form delay and goodput evaluators for both protocols, plus the
exact Poisson-binomial oracle used to gate the Poisson approximation.

Conventions: delays are in slots, RTT/2 is kept as a real number, and the
missing-DoF pmf is left exactly as the Poisson approximation writes it (its
small mass deficit is the Poisson tail past cutoff + k, reported by
missing_dof_total_mass).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import stats

from .protocols import harq_effective_prob

MASS_TOL = 1e-9


@dataclass(frozen=True)
class DelayPmf:
    """Delivery-delay distribution: (delay, probability) support points in
    strictly increasing delay order plus the residual failure mass."""

    support: tuple[tuple[float, float], ...]
    failure_mass: float

    def __post_init__(self):
        delays = [d for d, _ in self.support]
        if any(b <= a for a, b in zip(delays, delays[1:])):
            raise ValueError("support delays must be strictly increasing")
        if any(p < 0 for _, p in self.support) or self.failure_mass < -MASS_TOL:
            raise ValueError("negative probability mass")
        total = sum(p for _, p in self.support) + self.failure_mass
        if abs(total - 1.0) > MASS_TOL:
            raise ValueError(f"total mass {total} != 1")

    def probabilities(self) -> np.ndarray:
        return np.array([p for _, p in self.support])

    def delays(self) -> np.ndarray:
        return np.array([d for d, _ in self.support])

    def mean_delivered(self) -> float:
        """Mean delay conditioned on delivery."""
        live = 1.0 - self.failure_mass
        return float(sum(d * p for d, p in self.support) / live)


@dataclass(frozen=True)
class RlncAnalyticInputs:
    k: int
    gamma1: float
    gamma2: float
    p_bar: float
    n_links: int
    rtt: float

    def __post_init__(self):
        if not 0.0 <= self.p_bar <= 1.0:
            raise ValueError("p_bar outside [0, 1]")
        if self.gamma1 < 1.0 or self.gamma2 < 1.0:
            raise ValueError("coding rates must be >= 1")
        if self.k < 1 or self.n_links < 1:
            raise ValueError("k and n_links must be >= 1")

    @property
    def lam(self) -> float:
        return self.k * self.gamma1 * self.p_bar

    @property
    def cutoff(self) -> int:
        """Failed initial transmissions absorbed without losing a dof."""
        return math.ceil((self.gamma1 - 1.0) * self.k)


def missing_dof_pmf(inputs: RlncAnalyticInputs) -> np.ndarray:
    """Poisson approximation of the missing-DoF distribution.

    P[m=0] is the Poisson cdf at the cutoff, P[m] the pmf at cutoff + m for
    1 <= m <= k. Scipy evaluates both through log-gamma, so large lambda is
    safe. The array sums to slightly less than 1; see
    missing_dof_total_mass.
    """
    lam, c, k = inputs.lam, inputs.cutoff, inputs.k
    pmf = np.zeros(k + 1)
    pmf[0] = stats.poisson.cdf(c, lam) if lam > 0 else 1.0
    if lam > 0:
        pmf[1:] = stats.poisson.pmf(c + np.arange(1, k + 1), lam)
    return pmf


def missing_dof_total_mass(inputs: RlncAnalyticInputs) -> float:
    """Total mass of the approximation = Poisson cdf at cutoff + k."""
    if inputs.lam == 0:
        return 1.0
    return float(stats.poisson.cdf(inputs.cutoff + inputs.k, inputs.lam))


def poisson_binomial_pmf(probs) -> np.ndarray:
    """Exact pmf of a sum of independent Bernoulli(p_i), by convolving the
    probability generating function one trial at a time."""
    pmf = np.array([1.0])
    for p in probs:
        if not 0.0 <= p <= 1.0:
            raise ValueError(f"probability {p} outside [0, 1]")
        nxt = np.zeros(len(pmf) + 1)
        nxt[:-1] = pmf * (1.0 - p)
        nxt[1:] += pmf * p
        pmf = nxt
    return pmf


def missing_dof_exact(k: int, gamma1: float, link_probs) -> np.ndarray:
    """Exact missing-DoF distribution: the ceil(k*gamma1) initial
    transmissions are dealt round-robin to the links, the failure count is
    Poisson-binomial, and failures beyond the cutoff each cost one dof."""
    link_probs = list(link_probs)
    if not link_probs:
        raise ValueError("need at least one link")
    t = math.ceil(k * gamma1)
    c = t - k  # equals ceil((gamma1-1)*k) because k is an integer
    failures = poisson_binomial_pmf(
        [link_probs[i % len(link_probs)] for i in range(t)])
    out = np.zeros(k + 1)
    out[0] = failures[: c + 1].sum()
    for m in range(1, k + 1):
        if c + m < len(failures):
            out[m] = failures[c + m]
    return out


def total_variation(p: np.ndarray, q: np.ndarray) -> float:
    """TV distance between two pmfs on the same support; any mass deficit
    counts as discrepancy."""
    p, q = np.asarray(p, dtype=float), np.asarray(q, dtype=float)
    if p.shape != q.shape:
        raise ValueError("pmf shapes differ")
    return 0.5 * (float(np.abs(p - q).sum())
                  + abs((1.0 - p.sum()) - (1.0 - q.sum())))


def rlnc_expected_delay(inputs: RlncAnalyticInputs,
                        pmf: np.ndarray | None = None) -> float:
    """Average delivery delay of the block RLNC protocol.

    No-repair branch: RTT/2 + ceil(k*gamma1/|P|). Repair branch adds a full
    RTT of feedback plus the repair transmission time, whose ceiling is
    averaged term by term over the missing-DoF distribution.
    """
    if pmf is None:
        pmf = missing_dof_pmf(inputs)
    b = math.ceil(inputs.k * inputs.gamma1 / inputs.n_links)
    p0 = float(pmf[0])
    value = (inputs.rtt / 2 + b) * p0 + (3 * inputs.rtt / 2 + b) * (1.0 - p0)
    for m in range(1, inputs.k + 1):
        value += math.ceil(m * inputs.gamma2 / inputs.n_links) * float(pmf[m])
    return value


def rlnc_expected_goodput(inputs: RlncAnalyticInputs,
                          pmf: np.ndarray | None = None) -> float:
    """Average goodput: k source packets delivered per k*gamma1 + m*gamma2
    coded transmissions, carried by |P| parallel links."""
    if pmf is None:
        pmf = missing_dof_pmf(inputs)
    k, g1, g2 = inputs.k, inputs.gamma1, inputs.gamma2
    return float(sum(k / (k * g1 + m * g2) * pmf[m] for m in range(k + 1))
                 * inputs.n_links)


def arq_delay_pmf(p_bar: float, rtt: float, max_k: int = 64) -> DelayPmf:
    """Pure ARQ: geometric retry count, one RTT per retry, RTT/2 to arrive."""
    if not 0.0 <= p_bar <= 1.0:
        raise ValueError("p_bar outside [0, 1]")
    support = tuple((rtt / 2 + k * rtt, p_bar ** k * (1.0 - p_bar))
                    for k in range(max_k + 1))
    return DelayPmf(support=support, failure_mass=p_bar ** (max_k + 1))


def harq_delay_pmf(p_of_attempt, rtt: float, max_k: int = 64) -> DelayPmf:
    """HARQ: attempt i (1-based) fails with p_of_attempt(i); success after k
    failures costs RTT/2 + k*RTT. The empty product makes the k=0 term
    1 - p(1)."""
    support = []
    prefix = 1.0  # product of p(1)..p(k)
    for k in range(max_k + 1):
        p_next = p_of_attempt(k + 1)
        if not 0.0 <= p_next <= 1.0:
            raise ValueError(f"p_of_attempt({k + 1}) outside [0, 1]")
        support.append((rtt / 2 + k * rtt, (1.0 - p_next) * prefix))
        prefix *= p_next
    return DelayPmf(support=tuple(support), failure_mass=prefix)


def halving_attempt_prob(p_bar: float):
    """The halving instantiation of the per-attempt erasure probability."""
    return lambda attempt: harq_effective_prob(p_bar, attempt)


def harq_round_failure_prob(p_bar: float, max_harq_tx: int = 4,
                            p_of_attempt=None) -> float:
    """P(H_e): a whole HARQ round of max_harq_tx attempts failing."""
    p = p_of_attempt or halving_attempt_prob(p_bar)
    prod = 1.0
    for i in range(1, max_harq_tx + 1):
        prod *= p(i)
    return prod


def baseline_delay_pmf(p_bar: float, rtt: float, max_harq_tx: int = 4,
                       max_retx_threshold: int = 8,
                       p_of_attempt=None) -> DelayPmf:
    """HARQ within ARQ: total attempt index k splits into r = k // maxHARQTx
    completed rounds and k_r = k % maxHARQTx failures in the current round;
    the attempt probability restarts each round."""
    p = p_of_attempt or halving_attempt_prob(p_bar)
    p_he = harq_round_failure_prob(p_bar, max_harq_tx, p_of_attempt)
    support = []
    for k in range(max_harq_tx * max_retx_threshold):
        k_r = k % max_harq_tx
        r = k // max_harq_tx
        prob = (1.0 - p(k_r + 1)) * p_he ** r
        for i in range(1, k_r + 1):
            prob *= p(i)
        support.append((rtt / 2 + k * rtt, prob))
    return DelayPmf(support=tuple(support),
                    failure_mass=p_he ** max_retx_threshold)


def baseline_attempt_mix(p_bar: float, max_harq_tx: int = 4,
                         max_retx_threshold: int = 8,
                         p_of_attempt=None) -> np.ndarray:
    """Steady-state fraction of transmissions carrying each within-round
    attempt index (1-based -> entry 0), derived from the delay pmf by
    counting the attempts each delivery outcome consumes."""
    pmf = baseline_delay_pmf(p_bar, 1.0, max_harq_tx, max_retx_threshold,
                             p_of_attempt)
    counts = np.zeros(max_harq_tx)
    for k, (_, prob) in enumerate(pmf.support):
        r, k_r = divmod(k, max_harq_tx)
        counts[:max_harq_tx] += r * prob
        counts[: k_r + 1] += prob
    counts += pmf.failure_mass * max_retx_threshold
    return counts / counts.sum()


def baseline_expected_goodput(link_probs, attempt_mix,
                              p_scale=None) -> float:
    """Expected delivered packets per slot for a slice running the baseline:
    each link contributes its attempt-weighted success probability. p_scale
    maps (base_p, attempt) to the attempt's effective erasure probability
    and defaults to the halving model."""
    scale = p_scale or harq_effective_prob
    mix = np.asarray(attempt_mix, dtype=float)
    total = 0.0
    for p_i in link_probs:
        total += sum(frac * (1.0 - scale(p_i, a + 1))
                     for a, frac in enumerate(mix))
    return float(total)

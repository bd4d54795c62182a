"""Analytic-vs-simulation validation battery.

One check per formula: the Poisson missing-DoF approximation against the
exact Poisson-binomial (both presets), the simulated missing-DoF counts,
the ARQ / HARQ / combined delay pmfs against simulated delay histograms,
per-attempt HARQ success rates, the RLNC delay and goodput closed forms,
and the baseline goodput expectation.

Histogram checks use 3-sigma multinomial bounds per bin after merging tail
bins with expected count < 10 (a bin expecting 0.1 of a count fails on a
single stray event, which tests nothing). The RLNC delay/goodput closed
forms are checked at the high-rtt preset: their slot accounting differs
from a discrete simulator by O(1) slots per branch, which only washes out
when the RTT dominates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import analytic as an
from .engine import RunSpec, run_with_results
from .presets import resolve_config
from .protocols import BaselineConfig

MERGE_EXPECTED = 10.0


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    measured: float
    bound: float
    detail: str
    inputs: dict = field(default_factory=dict)

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"{status} {self.name}: {self.detail}"

    def record(self) -> dict:
        """JSON-ready record keyed by formula name and inputs."""
        return {"name": self.name, "inputs": self.inputs,
                "passed": self.passed, "measured": self.measured,
                "bound": self.bound, "detail": self.detail}


def merged_bin_check(counts: np.ndarray, probs: np.ndarray, n: int,
                     sigma: float = 3.0) -> tuple[bool, float, str]:
    """Multinomial per-bin check; trailing bins with expected < MERGE_EXPECTED
    are pooled. Returns (ok, worst z-score, detail)."""
    counts = np.asarray(counts, dtype=float)
    probs = np.asarray(probs, dtype=float)
    keep = int(np.searchsorted(n * probs < MERGE_EXPECTED, True))
    merged_counts = np.append(counts[:keep], counts[keep:].sum())
    merged_probs = np.append(probs[:keep], probs[keep:].sum())
    worst = 0.0
    for c, p in zip(merged_counts, merged_probs):
        sd = math.sqrt(n * p * (1.0 - p))
        if sd == 0.0:
            if c != n * p:
                return False, math.inf, "zero-variance bin mismatch"
            continue
        worst = max(worst, float(abs(c - n * p)) / sd)
    return bool(worst <= sigma), worst, (
        f"{len(merged_counts)} bins (tail merged), worst |z|={worst:.2f} "
        f"(bound {sigma})")


def _delay_counts(results, pmf: an.DelayPmf) -> tuple[np.ndarray, int]:
    delays = np.concatenate([r.ppd for r in results])
    support = pmf.delays()
    idx = np.searchsorted(support, delays - 0.25)
    counts = np.bincount(idx, minlength=len(support))
    return counts, len(delays)


def check_eq1_poisson_vs_exact(name: str, k: int, gamma1: float, p: float,
                               n_links: int, bound: float) -> CheckResult:
    inputs = an.RlncAnalyticInputs(k=k, gamma1=gamma1, gamma2=2.0, p_bar=p,
                                   n_links=n_links, rtt=16)
    tv = float(an.total_variation(an.missing_dof_pmf(inputs),
                                  an.missing_dof_exact(k, gamma1,
                                                       [p] * n_links)))
    return CheckResult(name, tv < bound, tv, bound,
                       f"TV(poisson, exact)={tv:.4f} (bound {bound})",
                       inputs={"k": k, "gamma1": gamma1, "p_bar": p,
                               "n_links": n_links})


def check_m_distribution(results, k: int, gamma1_analytic: float,
                         link_probs) -> CheckResult:
    """Simulated missing-DoF reports at the initial block boundary vs the
    exact Poisson-binomial folding."""
    m_counts = {}
    for r in results:
        for m, c in r.probes.m_reports.items():
            m_counts[m] = m_counts.get(m, 0) + c
    n = sum(m_counts.values())
    counts = np.array([m_counts.get(m, 0) for m in range(k + 1)], dtype=float)
    exact = an.missing_dof_exact(k, gamma1_analytic, link_probs)
    ok, worst, detail = merged_bin_check(counts, exact, n)
    return CheckResult("eq1_sim_missing_dof", ok, worst, 3.0,
                       f"{n} generations, {detail}",
                       inputs={"k": k, "gamma1": gamma1_analytic,
                               "link_probs": list(link_probs),
                               "generations": n})


def check_delay_histogram(name: str, results, pmf: an.DelayPmf,
                          inputs: dict | None = None) -> CheckResult:
    counts, n = _delay_counts(results, pmf)
    ok, worst, detail = merged_bin_check(counts, pmf.probabilities(), n)
    return CheckResult(name, ok, worst, 3.0, f"{n} packets, {detail}",
                       inputs={**(inputs or {}), "packets": n})


def check_attempt_frequencies(results, p_bar: float,
                              max_harq_tx: int) -> CheckResult:
    trials: dict[int, int] = {}
    successes: dict[int, int] = {}
    for r in results:
        for a, c in r.probes.attempt_trials.items():
            trials[a] = trials.get(a, 0) + c
        for a, c in r.probes.attempt_successes.items():
            successes[a] = successes.get(a, 0) + c
    worst = 0.0
    parts = []
    for a in range(1, max_harq_tx + 1):
        n = trials.get(a, 0)
        if n == 0:
            continue
        q = 1.0 - an.harq_effective_prob(p_bar, a)
        rate = successes.get(a, 0) / n
        z = abs(rate - q) / math.sqrt(q * (1.0 - q) / n)
        worst = max(worst, z)
        parts.append(f"a{a}:{rate:.4f}~{q:.4f}(n={n})")
    return CheckResult("eq5_attempt_success_rates", worst <= 3.0, worst, 3.0,
                       f"worst |z|={worst:.2f}; " + " ".join(parts),
                       inputs={"p_bar": p_bar, "max_harq_tx": max_harq_tx})


def check_relative(name: str, simulated: float, analytic: float,
                   tolerance: float, inputs: dict | None = None) -> CheckResult:
    rel = float(abs(simulated - analytic) / abs(analytic))
    return CheckResult(name, rel <= tolerance, rel, tolerance,
                       f"sim={simulated:.4f} analytic={analytic:.4f} "
                       f"rel={rel * 100:.2f}% (tol {tolerance * 100:.0f}%)",
                       inputs=inputs or {})


def run_validation(packets: int = 100_000, seed: int = 42) -> list[CheckResult]:
    checks: list[CheckResult] = []
    low = resolve_config("low-rtt-fixed")
    high = resolve_config("high-rtt")

    # Lemma 1 approximation quality, both presets
    checks.append(check_eq1_poisson_vs_exact(
        "eq1_poisson_vs_exact_low", k=5, gamma1=1.2, p=0.1, n_links=20,
        bound=0.02))
    checks.append(check_eq1_poisson_vs_exact(
        "eq1_poisson_vs_exact_high", k=50, gamma1=1.25, p=0.2, n_links=20,
        bound=0.05))

    # simulated missing-DoF distribution at the low-rtt preset
    spec = RunSpec(protocol="rlnc", channel_spec=low.channel,
                   protocol_config=low.rlnc, n_links=low.n_links,
                   slicing_index=low.n_links, n_packets=packets,
                   iterations=1, seed=seed)
    _, results = run_with_results(spec)
    checks.append(check_m_distribution(
        results, low.rlnc.generation_size_k, low.rlnc.fec_rate,
        [low.channel.erasure_mean] * low.n_links))

    # ARQ-only delay pmf: one HARQ attempt per round disables the halving
    arq_cfg = BaselineConfig(max_harq_tx=1, max_retx_threshold=32)
    spec = RunSpec(protocol="baseline", channel_spec=low.channel,
                   protocol_config=arq_cfg, n_links=low.n_links,
                   slicing_index=low.n_links, n_packets=packets,
                   iterations=1, seed=seed)
    _, results = run_with_results(spec)
    arq_pmf = an.arq_delay_pmf(low.channel.erasure_mean,
                               low.channel.rtt_mean, max_k=31)
    checks.append(check_delay_histogram(
        "eq4_arq_delay_pmf", results, arq_pmf,
        inputs={"p_bar": low.channel.erasure_mean,
                "rtt": low.channel.rtt_mean, "max_k": 31}))

    # combined baseline delay pmf and per-attempt success rates
    spec = RunSpec(protocol="baseline", channel_spec=low.channel,
                   protocol_config=low.baseline, n_links=low.n_links,
                   slicing_index=low.n_links, n_packets=packets,
                   iterations=1, seed=seed)
    _, results = run_with_results(spec)
    base_pmf = an.baseline_delay_pmf(
        low.channel.erasure_mean, low.channel.rtt_mean,
        low.baseline.max_harq_tx, low.baseline.max_retx_threshold)
    checks.append(check_delay_histogram(
        "eq6_baseline_delay_pmf", results, base_pmf,
        inputs={"p_bar": low.channel.erasure_mean,
                "rtt": low.channel.rtt_mean,
                "max_harq_tx": low.baseline.max_harq_tx,
                "max_retx_threshold": low.baseline.max_retx_threshold}))
    checks.append(check_attempt_frequencies(
        results, low.channel.erasure_mean, low.baseline.max_harq_tx))

    # baseline goodput expectation
    mix = an.baseline_attempt_mix(low.channel.erasure_mean,
                                  low.baseline.max_harq_tx,
                                  low.baseline.max_retx_threshold)
    g_analytic = an.baseline_expected_goodput(
        [low.channel.erasure_mean] * low.n_links, mix)
    metrics, _ = run_with_results(spec)
    checks.append(check_relative(
        "baseline_goodput", metrics.goodput, g_analytic, 0.03,
        inputs={"link_probs": [low.channel.erasure_mean] * low.n_links,
                "max_harq_tx": low.baseline.max_harq_tx,
                "max_retx_threshold": low.baseline.max_retx_threshold}))

    # RLNC delay / goodput closed forms at the high-rtt preset
    spec = RunSpec(protocol="rlnc", channel_spec=high.channel,
                   protocol_config=high.rlnc, n_links=high.n_links,
                   slicing_index=high.n_links, n_packets=packets,
                   iterations=1, seed=seed)
    metrics, _ = run_with_results(spec)
    inputs = an.RlncAnalyticInputs(
        k=high.rlnc.generation_size_k, gamma1=high.rlnc.fec_rate,
        gamma2=high.rlnc.fb_rate, p_bar=high.channel.erasure_mean,
        n_links=high.n_links, rtt=high.channel.rtt_mean)
    formula_inputs = {"k": inputs.k, "gamma1": inputs.gamma1,
                      "gamma2": inputs.gamma2, "p_bar": inputs.p_bar,
                      "n_links": inputs.n_links, "rtt": inputs.rtt}
    checks.append(check_relative("eq2_rlnc_delay", metrics.mean_ppd,
                                 an.rlnc_expected_delay(inputs), 0.05,
                                 inputs=formula_inputs))
    checks.append(check_relative("eq3_rlnc_goodput", metrics.goodput,
                                 an.rlnc_expected_goodput(inputs), 0.05,
                                 inputs=formula_inputs))
    return checks

"""Closed-form evaluators against independently computed values.

Frozen constants were produced with the mpmath expressions kept next to
each test; the Poisson-binomial convolution is cross-checked against the
binomial special case it must reproduce.
"""

import math

import mpmath as mp
import numpy as np
import pytest
from scipy import stats

from codedslice import analytic as an
from codedslice.protocols import harq_effective_prob


def _inputs(**kw):
    base = dict(k=5, gamma1=1.2, gamma2=2.0, p_bar=0.1, n_links=2, rtt=16)
    base.update(kw)
    return an.RlncAnalyticInputs(**base)


class TestMissingDofPmf:
    def test_low_rtt_values_match_mpmath_oracle(self):
        # sum_{f=0..1} e^-l l^f/f! and e^-l l^2/2 at l = 0.6
        pmf = an.missing_dof_pmf(_inputs())
        lam = mp.mpf(6) / 10
        p0 = float(mp.e ** -lam * (1 + lam))
        p1 = float(mp.e ** -lam * lam ** 2 / 2)
        assert pmf[0] == pytest.approx(p0, abs=1e-12)
        assert pmf[1] == pytest.approx(p1, abs=1e-12)
        assert pmf[0] == pytest.approx(0.8780986178, abs=1e-9)
        assert pmf[1] == pytest.approx(0.0987860945, abs=1e-9)

    def test_zero_erasure_is_certain_decode(self):
        pmf = an.missing_dof_pmf(_inputs(p_bar=0.0))
        assert pmf[0] == 1.0 and not pmf[1:].any()

    def test_total_mass_identity(self):
        inputs = _inputs(k=50, gamma1=1.25, p_bar=0.2, n_links=20, rtt=500)
        pmf = an.missing_dof_pmf(inputs)
        total = an.missing_dof_total_mass(inputs)
        assert pmf.sum() == pytest.approx(total, abs=1e-12)
        tail = float(stats.poisson.sf(inputs.cutoff + inputs.k, inputs.lam))
        assert 1.0 - total == pytest.approx(tail, abs=1e-12)

    def test_lambda_and_cutoff(self):
        inputs = _inputs()
        assert inputs.lam == pytest.approx(0.6)
        assert inputs.cutoff == 1


class TestMissingDofExact:
    def test_zero_erasure(self):
        out = an.missing_dof_exact(5, 1.2, [0.0, 0.0])
        assert out[0] == 1.0 and not out[1:].any()

    def test_single_bernoulli(self):
        out = an.missing_dof_exact(1, 1.0, [0.3])
        assert out[0] == pytest.approx(0.7)
        assert out[1] == pytest.approx(0.3)

    def test_homogeneous_matches_binomial_fold(self):
        out = an.missing_dof_exact(5, 1.2, [0.1] * 20)
        binom = stats.binom(6, 0.1)
        assert out[0] == pytest.approx(binom.cdf(1), abs=1e-12)
        for m in range(1, 6):
            assert out[m] == pytest.approx(binom.pmf(1 + m), abs=1e-12)
        assert out.sum() == pytest.approx(1.0, abs=1e-12)

    def test_poisson_binomial_reduces_to_binomial(self):
        pmf = an.poisson_binomial_pmf([0.3] * 12)
        assert np.allclose(pmf, stats.binom(12, 0.3).pmf(np.arange(13)),
                           atol=1e-12)

    def test_round_robin_uses_heterogeneous_links(self):
        # k=1, gamma1=2 -> transmissions on links 0 and 1
        out = an.missing_dof_exact(1, 2.0, [0.5, 0.1])
        assert out[0] == pytest.approx(1 - 0.5 * 0.1)
        assert out[1] == pytest.approx(0.05)

    def test_tv_gate_low_preset(self):
        tv = an.total_variation(an.missing_dof_pmf(_inputs()),
                                an.missing_dof_exact(5, 1.2, [0.1] * 20))
        assert tv < 0.02


class TestRlncDelayAndGoodput:
    def test_delay_no_loss_two_links(self):
        assert an.rlnc_expected_delay(_inputs(p_bar=0.0)) == 11.0

    def test_delay_no_loss_six_links(self):
        assert an.rlnc_expected_delay(_inputs(p_bar=0.0, n_links=6)) == 9.0

    def test_delay_weighted_branches(self):
        # independent evaluation from the pmf itself
        inputs = _inputs(gamma2=20 / 9)
        pmf = an.missing_dof_pmf(inputs)
        expected = (8 + 3) * pmf[0] + (24 + 3) * (1 - pmf[0])
        expected += sum(math.ceil(m * inputs.gamma2 / 2) * pmf[m]
                        for m in range(1, 6))
        assert an.rlnc_expected_delay(inputs) == pytest.approx(expected)
        assert an.rlnc_expected_delay(inputs) == pytest.approx(13.225, abs=0.05)

    def test_delay_non_increasing_in_links(self):
        values = [an.rlnc_expected_delay(_inputs(n_links=n))
                  for n in range(1, 21)]
        assert all(b <= a + 1e-12 for a, b in zip(values, values[1:]))

    def test_goodput_no_loss(self):
        assert an.rlnc_expected_goodput(
            _inputs(p_bar=0.0, n_links=6)) == pytest.approx(5.0)
        assert an.rlnc_expected_goodput(
            _inputs(p_bar=0.0, gamma1=1.0, n_links=4)) == pytest.approx(4.0)

    def test_goodput_termwise_sum(self):
        inputs = _inputs(n_links=20)
        pmf = an.missing_dof_pmf(inputs)
        expected = 20 * sum(5 / (6 + 2 * m) * pmf[m] for m in range(6))
        assert an.rlnc_expected_goodput(inputs) == pytest.approx(expected)


class TestDelayPmfs:
    def test_arq_values(self):
        pmf = an.arq_delay_pmf(0.1, 16)
        assert pmf.support[0] == (8.0, pytest.approx(0.9))
        assert pmf.support[2][0] == 40.0
        assert pmf.support[2][1] == pytest.approx(0.009)

    def test_arq_zero_loss(self):
        pmf = an.arq_delay_pmf(0.0, 16)
        assert pmf.support[0][1] == 1.0 and pmf.failure_mass == 0.0

    def test_arq_partial_sums_geometric(self):
        for max_k in (3, 10, 40):
            pmf = an.arq_delay_pmf(0.1, 16, max_k=max_k)
            assert pmf.probabilities().sum() == pytest.approx(
                1 - 0.1 ** (max_k + 1), abs=1e-15)

    def test_harq_halving_values(self):
        pmf = an.harq_delay_pmf(an.halving_attempt_prob(0.1), 16)
        assert pmf.support[0][1] == pytest.approx(0.9)
        assert pmf.support[1][1] == pytest.approx(0.1 * 0.95)
        assert pmf.support[2][1] == pytest.approx(0.1 * 0.05 * 0.975)

    def test_harq_accepts_any_attempt_model(self):
        pmf = an.harq_delay_pmf(lambda i: 0.5, 16, max_k=10)
        assert pmf.support[3][1] == pytest.approx(0.5 ** 3 * 0.5)

    def test_harq_dominates_arq(self):
        arq = an.arq_delay_pmf(0.1, 16)
        harq = an.harq_delay_pmf(an.halving_attempt_prob(0.1), 16)
        arq_cdf = np.cumsum(arq.probabilities())
        harq_cdf = np.cumsum(harq.probabilities())
        assert (harq_cdf >= arq_cdf - 1e-15).all()

    def test_round_failure_probability(self):
        assert an.harq_round_failure_prob(0.1) == pytest.approx(
            0.1 * 0.05 * 0.025 * 0.0125)

    def test_baseline_k4_restarts_round(self):
        pmf = an.baseline_delay_pmf(0.1, 16)
        p_he = 1.5625e-6
        assert pmf.support[4][1] == pytest.approx(0.9 * p_he)
        assert pmf.failure_mass == pytest.approx(p_he ** 8)
        assert len(pmf.support) == 32

    def test_baseline_zero_loss(self):
        pmf = an.baseline_delay_pmf(0.0, 16)
        assert pmf.support[0][1] == 1.0
        assert pmf.failure_mass == 0.0

    def test_baseline_mass_sums_to_one_exactly(self):
        pmf = an.baseline_delay_pmf(0.17, 500)
        total = pmf.probabilities().sum() + pmf.failure_mass
        assert total == pytest.approx(1.0, abs=1e-12)

    def test_mean_delivered(self):
        pmf = an.arq_delay_pmf(0.5, 2, max_k=1)  # 1, 3 with 0.5, 0.25
        assert pmf.mean_delivered() == pytest.approx((0.5 + 0.75) / 0.75)

    def test_validation_rejects_bad_pmfs(self):
        with pytest.raises(ValueError):
            an.DelayPmf(support=((2.0, 0.5), (1.0, 0.5)), failure_mass=0.0)
        with pytest.raises(ValueError):
            an.DelayPmf(support=((1.0, 0.5),), failure_mass=0.2)
        with pytest.raises(ValueError):
            an.DelayPmf(support=((1.0, -0.1), (2.0, 1.1)), failure_mass=0.0)


class TestBaselineGoodput:
    def test_mix_sums_to_one(self):
        mix = an.baseline_attempt_mix(0.1)
        assert mix.sum() == pytest.approx(1.0)
        assert len(mix) == 4

    def test_mix_no_loss_concentrates_on_first_attempt(self):
        mix = an.baseline_attempt_mix(0.0)
        assert mix[0] == pytest.approx(1.0)

    def test_lossless_links(self):
        mix = an.baseline_attempt_mix(0.0)
        assert an.baseline_expected_goodput([0.0] * 7, mix) == pytest.approx(7.0)

    def test_single_link_first_attempts_only(self):
        assert an.baseline_expected_goodput([0.1], [1.0]) == pytest.approx(0.9)

    def test_twenty_links_in_expected_band(self):
        mix = an.baseline_attempt_mix(0.1)
        g = an.baseline_expected_goodput([0.1] * 20, mix)
        assert 18.0 <= g <= 20.0

    def test_goodput_uses_halving_per_link(self):
        mix = [0.0, 1.0]  # all slots second attempts
        g = an.baseline_expected_goodput([0.2], mix,
                                         p_scale=harq_effective_prob)
        assert g == pytest.approx(0.9)

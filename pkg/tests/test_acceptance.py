"""Acceptance gate: one test per criterion, each printing a PASS/FAIL line.

Heavy simulations are shared through session fixtures: the full low-rtt
slicing sweep (criteria 5, 6, 8), the validation battery at 1e5 packets
(criteria 4a-4d), and the ten-seed high-rtt comparison (criterion 7).
"""

import math
from dataclasses import replace

import numpy as np
import pytest

from codedslice import gf256
from codedslice import analytic as an
from codedslice.channel import ChannelSpec
from codedslice.cli import main
from codedslice.engine import RunSpec, run_with_results
from codedslice.presets import resolve_config
from codedslice.rlnc import DecoderState, Generation, RlncCodec
from codedslice.validate import run_validation

SEED = 42


def _report(criterion: str, ok: bool, detail: str) -> bool:
    print(f"[acceptance] {'PASS' if ok else 'FAIL'} {criterion}: {detail}")
    return ok


# --- shared heavy runs -------------------------------------------------------

@pytest.fixture(scope="session")
def low_rtt_sweep():
    """Both protocols at every slicing index, 10k packets x 10 iterations,
    pinned seed; keeps compact per-index summaries."""
    cfg = resolve_config("low-rtt-fixed")
    out = {}
    for proto, pcfg in (("baseline", cfg.baseline), ("rlnc", cfg.rlnc)):
        for index in range(1, 21):
            spec = RunSpec(protocol=proto, channel_spec=cfg.channel,
                           protocol_config=pcfg, n_links=cfg.n_links,
                           slicing_index=index, n_packets=cfg.packets,
                           iterations=cfg.iterations, seed=SEED)
            metrics, results = run_with_results(spec)
            out[(proto, index)] = {
                "metrics": metrics,
                "iter_ppd_means": [float(r.ppd.mean()) for r in results],
            }
    return out


@pytest.fixture(scope="session")
def validation_results():
    return {c.name: c for c in run_validation(packets=100_000, seed=SEED)}


@pytest.fixture(scope="session")
def high_rtt_runs():
    cfg = resolve_config("high-rtt")
    runs = []
    for seed in range(10):
        pair = {}
        for proto, pcfg in (("baseline", cfg.baseline), ("rlnc", cfg.rlnc)):
            spec = RunSpec(protocol=proto, channel_spec=cfg.channel,
                           protocol_config=pcfg, n_links=cfg.n_links,
                           slicing_index=cfg.n_links, n_packets=cfg.packets,
                           iterations=1, seed=seed)
            pair[proto], _ = run_with_results(spec)
        runs.append(pair)
    return runs


# --- criterion 1: field correctness ------------------------------------------

def test_criterion1_field_correctness():
    for a in range(1, 256):
        assert gf256.gf_mul(a, gf256.gf_inv(a)) == 1
    mismatches = 0
    for a in range(256):
        row = gf256.MUL_TABLE[a]
        for b in range(256):
            if row[b] != gf256.gf_mul_shift(a, b):
                mismatches += 1
    ok = mismatches == 0
    assert _report("criterion-1 field correctness",
                   ok, f"255 inverses verified, {mismatches} of 65536 "
                       f"products disagree with shift-and-reduce")


# --- criterion 2: codec round-trip -------------------------------------------

def test_criterion2_codec_roundtrip():
    rng = np.random.default_rng(SEED)
    codec = RlncCodec(global_seed=SEED)
    failures = 0
    for trial in range(1000):
        k = int(rng.integers(1, 65))
        length = int(rng.integers(1, 1501))
        payloads = [rng.integers(0, 256, size=length,
                                 dtype=np.uint8).tobytes() for _ in range(k)]
        gen = Generation(trial, payloads)
        dec = DecoderState(codec, gen.wire_id, k, gen.payload_len)
        seq = 0
        while dec.rank < k:
            if rng.random() > 0.3:
                dec.ingest(codec.encode(gen, seq))
            seq += 1
        if dec.extract() != payloads:
            failures += 1
    assert _report("criterion-2 codec round-trip", failures == 0,
                   f"1000 generations (k in [1,64], payloads <= 1500 B), "
                   f"{failures} recovery failures")


# --- criterion 3: Lemma 1 approximation gates ---------------------------------

def test_criterion3_lemma1_gates():
    low = an.total_variation(
        an.missing_dof_pmf(an.RlncAnalyticInputs(5, 1.2, 2.0, 0.1, 20, 16)),
        an.missing_dof_exact(5, 1.2, [0.1] * 20))
    high = an.total_variation(
        an.missing_dof_pmf(an.RlncAnalyticInputs(50, 1.25, 2.5, 0.2, 20, 500)),
        an.missing_dof_exact(50, 1.25, [0.2] * 20))
    ok = low < 0.02 and high < 0.05
    assert _report("criterion-3 Lemma 1 approximation",
                   ok, f"TV low-rtt={low:.4f} (<0.02), "
                       f"high-rtt={high:.4f} (<0.05)")


# --- criterion 4: simulation vs analytic -------------------------------------

def test_criterion4a_baseline_histogram(validation_results):
    c = validation_results["eq6_baseline_delay_pmf"]
    assert _report("criterion-4a baseline PPD vs Eq.(6)", c.passed, c.detail)


def test_criterion4b_arq_histogram(validation_results):
    c = validation_results["eq4_arq_delay_pmf"]
    assert _report("criterion-4b ARQ-only PPD vs Eq.(4)", c.passed, c.detail)


def test_criterion4c_attempt_frequencies(validation_results):
    c = validation_results["eq5_attempt_success_rates"]
    assert _report("criterion-4c per-attempt HARQ success", c.passed, c.detail)


def test_criterion4d_rlnc_delay_and_goodput(validation_results):
    delay = validation_results["eq2_rlnc_delay"]
    goodput = validation_results["eq3_rlnc_goodput"]
    ok = delay.passed and goodput.passed
    assert _report("criterion-4d RLNC Eq.(2)/Eq.(3) within 5%", ok,
                   f"{delay.detail}; {goodput.detail}")


# --- criterion 5: paper highlight 1, desk scale ------------------------------

def test_criterion5_iod_means(low_rtt_sweep):
    bad = [i for i in range(2, 21)
           if not (low_rtt_sweep[("rlnc", i)]["metrics"].mean_iod
                   < low_rtt_sweep[("baseline", i)]["metrics"].mean_iod)]
    assert _report("criterion-5 NC IOD < baseline IOD (idx >= 2)",
                   not bad, f"violations at indices {bad}" if bad else
                   "all 19 indices")


def test_criterion5_iod_stddev(low_rtt_sweep):
    margins = {i: (low_rtt_sweep[("baseline", i)]["metrics"].iod_stddev
                   - low_rtt_sweep[("rlnc", i)]["metrics"].iod_stddev)
               for i in range(1, 21)}
    bad = [i for i, m in margins.items() if m <= 0]
    assert _report("criterion-5 NC IOD std-dev < baseline (every index)",
                   not bad,
                   f"violations at indices {bad} "
                   f"(margins {[round(margins[i], 3) for i in bad]})"
                   if bad else "all 20 indices")


def test_criterion5_ppd_band(low_rtt_sweep):
    cfg = resolve_config("low-rtt-fixed")
    k, g1 = cfg.rlnc.generation_size_k, cfg.rlnc.fec_rate
    bad = []
    for i in range(2, 21):
        hi = 8.0 + math.ceil(k * g1 / i) + 2
        ppd = low_rtt_sweep[("rlnc", i)]["metrics"].mean_ppd
        if not 8.0 <= ppd <= hi:
            bad.append((i, round(ppd, 2), hi))
    assert _report("criterion-5 NC PPD in [RTT/2, RTT/2+ceil(k*g1/P)+2]",
                   not bad, f"violations {bad}" if bad else "all 19 indices")


def test_criterion5_goodput_within_15pct(low_rtt_sweep):
    g_nc = np.mean([low_rtt_sweep[("rlnc", i)]["metrics"].goodput
                    for i in range(1, 21)])
    g_b = np.mean([low_rtt_sweep[("baseline", i)]["metrics"].goodput
                   for i in range(1, 21)])
    gap = abs(g_nc - g_b) / g_b
    assert _report("criterion-5 goodputs within 15% of each other",
                   gap <= 0.15,
                   f"sweep means NC={g_nc:.3f} baseline={g_b:.3f} "
                   f"gap={gap * 100:.2f}%")


# --- criterion 6: resource sensitivity ---------------------------------------

def test_criterion6_analytic_delay_non_increasing():
    values = [an.rlnc_expected_delay(
        an.RlncAnalyticInputs(5, 1 / 0.9, 2 / 0.9, 0.1, n, 16))
        for n in range(1, 21)]
    ok = all(b <= a + 1e-12 for a, b in zip(values, values[1:]))
    assert _report("criterion-6 analytic RLNC delay non-increasing in |P|",
                   ok, f"E[D] from {values[0]:.2f} down to {values[-1]:.2f}")


def test_criterion6_baseline_ppd_trendless(low_rtt_sweep):
    xs, ys = [], []
    for i in range(1, 21):
        for v in low_rtt_sweep[("baseline", i)]["iter_ppd_means"]:
            xs.append(i)
            ys.append(v)
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    xc = xs - xs.mean()
    slope = float((xc * (ys - ys.mean())).sum() / (xc ** 2).sum())
    resid = ys - ys.mean() - slope * xc
    se = math.sqrt(float((resid ** 2).sum()) / (len(ys) - 2)
                   / float((xc ** 2).sum()))
    t = slope / se
    assert _report("criterion-6 baseline PPD has no slicing trend",
                   abs(t) < 3.0,
                   f"slope={slope:.5f} slots/index, |t|={abs(t):.2f} (<3)")


# --- criterion 7: paper highlight 3, high-rtt --------------------------------

def test_criterion7_high_rtt_completion_and_goodput(high_rtt_runs):
    comp_wins = sum(r["rlnc"].completion_time < r["baseline"].completion_time
                    for r in high_rtt_runs)
    good_wins = sum(r["rlnc"].goodput > r["baseline"].goodput
                    for r in high_rtt_runs)
    ok = comp_wins >= 9 and good_wins >= 9
    assert _report("criterion-7 high-rtt completion/goodput",
                   ok, f"NC wins completion {comp_wins}/10, "
                       f"goodput {good_wins}/10 seeds")


# --- criterion 8: reliability target ------------------------------------------

def test_criterion8_reliability(low_rtt_sweep):
    total = 10_000 * 10
    frac_b = low_rtt_sweep[("baseline", 20)]["metrics"].failures / total
    frac_n = low_rtt_sweep[("rlnc", 20)]["metrics"].failures / total
    ok = frac_b <= 1e-4 and frac_n <= 1e-4
    assert _report("criterion-8 failure fraction <= 1e-4",
                   ok, f"baseline={frac_b:.2e}, rlnc={frac_n:.2e} "
                       f"over {total} packets")


# --- criterion 9: determinism --------------------------------------------------

def test_criterion9_byte_identical_csv(tmp_path):
    argv = ["run", "--scenario", "low-rtt-fixed", "--sweep", "2..3",
            "--iterations", "1", "--packets", "2000", "--seed", str(SEED)]
    out_a = tmp_path / "a.csv"
    out_b = tmp_path / "b.csv"
    assert main(argv + ["--out", str(out_a)]) == 0
    assert main(argv + ["--out", str(out_b)]) == 0
    identical = out_a.read_bytes() == out_b.read_bytes()
    assert _report("criterion-9 determinism", identical,
                   "two invocations produced byte-identical CSV")

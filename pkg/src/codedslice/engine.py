"""Deterministic slot-driven event loop and metrics collection.

Each iteration is an independent run: fresh links (randomized parameters
are redrawn), fresh packet set, disjoint RNG streams derived from
(seed, slicing_index, protocol, iteration). Within a slot the order is
fixed: deliver arrivals to the receiver, deliver feedback to the sender,
then let the sender transmit.

PPD = delivered_slot - first_tx_slot; IOD additionally waits for every
earlier packet (failed packets are skipped by the in-order gate, otherwise
one exhausted packet would block the frontier forever). Goodput divides
delivered source packets by busy slots (slots in which the slice sent at
least one packet) or, in "elapsed" mode, by completion_time + 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .channel import ChannelSpec, ConfigError, build_slices
from .protocols import (BaselineConfig, BaselineReceiver, BaselineSender,
                        IterationState, PacketRecord, RlncConfig,
                        RlncReceiver, RlncSender, RunProbes, _GenState)
from .rlnc import Generation, RlncCodec

PROTOCOLS = ("rlnc", "baseline")


class RunAbortError(RuntimeError):
    pass


@dataclass(frozen=True)
class RunSpec:
    protocol: str
    channel_spec: ChannelSpec
    protocol_config: RlncConfig | BaselineConfig
    n_links: int = 20
    slicing_index: int = 20
    run_slice: int = 1
    n_packets: int = 10_000
    iterations: int = 100
    seed: int = 0
    goodput_mode: str = "busy"  # "busy" | "elapsed"
    slot_cap: int = 10_000_000
    payload_len: int = 8

    def __post_init__(self):
        if self.protocol not in PROTOCOLS:
            raise ConfigError(f"unknown protocol {self.protocol!r}")
        if self.n_packets < 1 or self.iterations < 1:
            raise ConfigError("n_packets and iterations must be >= 1")
        if self.goodput_mode not in ("busy", "elapsed"):
            raise ConfigError(f"unknown goodput_mode {self.goodput_mode!r}")
        if self.run_slice not in (1, 2):
            raise ConfigError("run_slice must be 1 or 2")


@dataclass(frozen=True)
class MetricsRecord:
    mean_ppd: float
    mean_iod: float
    iod_stddev: float
    goodput: float
    completion_time: float
    failures: int          # total across iterations
    packets: int
    iterations: int


@dataclass
class IterationResult:
    ppd: np.ndarray        # delivered packets only, record order
    iod: np.ndarray
    completion: int
    busy_slots: int
    delivered: int
    failed: int
    probes: RunProbes
    realized_p_bar: float
    realized_rtt: int


def _proto_code(protocol: str) -> int:
    return PROTOCOLS.index(protocol)


def iteration_seed_seq(spec: RunSpec, iteration: int) -> np.random.SeedSequence:
    return np.random.SeedSequence(
        [spec.seed, spec.slicing_index, _proto_code(spec.protocol), iteration])


def build_generation_states(n_packets: int, cfg: RlncConfig,
                            payload_len: int) -> list[_GenState]:
    """Consecutive generations of size k (last one may be short); payloads
    are the packet ids so decode verification is meaningful."""
    gens = []
    k = cfg.generation_size_k
    for gen_id, start in enumerate(range(0, n_packets, k)):
        size = min(k, n_packets - start)
        payloads = [pid.to_bytes(payload_len, "big")
                    for pid in range(start, start + size)]
        gen = Generation(gen_id, payloads)
        gens.append(_GenState(gen, start, cfg.initial_count(size)))
    return gens


def run_iteration(spec: RunSpec, iteration: int) -> IterationResult:
    seed_seq = iteration_seed_seq(spec, iteration)
    channel_ss, codec_ss = seed_seq.spawn(2)
    slice_1, slice_2 = build_slices(spec.channel_spec, spec.n_links,
                                    spec.slicing_index, channel_ss)
    slice_ = slice_1 if spec.run_slice == 1 else slice_2
    if not slice_.links:
        raise ConfigError(f"slice {spec.run_slice} has no links")

    records = [PacketRecord(i) for i in range(spec.n_packets)]
    probes = RunProbes()
    state = IterationState(records, probes)

    if spec.protocol == "rlnc":
        cfg = spec.protocol_config
        if not isinstance(cfg, RlncConfig):
            raise ConfigError("rlnc protocol needs an RlncConfig")
        codec = RlncCodec(int(codec_ss.generate_state(1)[0]))
        gens = build_generation_states(spec.n_packets, cfg, spec.payload_len)
        sender = RlncSender(slice_, gens, cfg, codec, state)
        receiver = RlncReceiver(codec, state)
    else:
        cfg = spec.protocol_config
        if not isinstance(cfg, BaselineConfig):
            raise ConfigError("baseline protocol needs a BaselineConfig")
        sender = BaselineSender(slice_, spec.n_packets, cfg, state)
        receiver = BaselineReceiver(state)

    arrivals: dict[int, list] = {}
    feedback: dict[int, list] = {}
    busy = 0
    slot = 0
    while state.terminal < spec.n_packets:
        if slot > spec.slot_cap:
            raise RunAbortError(
                f"run exceeded slot cap {spec.slot_cap} "
                f"({state.terminal}/{spec.n_packets} packets terminal)")
        for outcome in arrivals.pop(slot, ()):
            for emit_link, msg in receiver.on_outcome(slot, outcome):
                feedback.setdefault(emit_link.feedback(slot), []).append(msg)
        for msg in feedback.pop(slot, ()):
            sender.on_feedback(slot, msg)
        txs = sender.transmit(slot)
        if txs:
            busy += 1
            for link, payload, p_eff in txs:
                arrival_slot, erased = link.transmit(slot, p_eff)
                arrivals.setdefault(arrival_slot, []).append(
                    (link, payload, erased))
        slot += 1

    first_tx = np.array([r.first_tx_slot for r in records], dtype=np.int64)
    delivered_slots = np.array(
        [r.delivered_slot if r.status == "delivered" else -1 for r in records],
        dtype=np.int64)
    delivered_mask = delivered_slots >= 0
    # in-order frontier over delivered packets only
    frontier = np.maximum.accumulate(
        np.where(delivered_mask, delivered_slots, -1))
    for rec, in_order in zip(records, frontier):
        if rec.status == "delivered":
            rec.in_order_slot = int(in_order)
    ppd = (delivered_slots - first_tx)[delivered_mask].astype(np.float64)
    iod = (frontier - first_tx)[delivered_mask].astype(np.float64)
    completion = int(delivered_slots.max()) if delivered_mask.any() else 0
    return IterationResult(
        ppd=ppd, iod=iod, completion=completion, busy_slots=busy,
        delivered=int(delivered_mask.sum()),
        failed=spec.n_packets - int(delivered_mask.sum()),
        probes=probes,
        realized_p_bar=slice_.avg_erasure,
        realized_rtt=slice_.rtt_slots)


def run(spec: RunSpec) -> MetricsRecord:
    record, _ = run_with_results(spec)
    return record


def run_with_results(spec: RunSpec) -> tuple[MetricsRecord, list[IterationResult]]:
    results = [run_iteration(spec, i) for i in range(spec.iterations)]
    # all-failed iterations contribute no delay samples
    ppd_means = [r.ppd.mean() for r in results if r.ppd.size]
    iod_all = np.concatenate([r.iod for r in results])
    mean_ppd = float(np.mean(ppd_means)) if ppd_means else math.nan
    mean_iod = float(np.mean([r.iod.mean() for r in results if r.iod.size])
                     ) if ppd_means else math.nan
    iod_stddev = float(iod_all.std()) if iod_all.size else math.nan
    goodputs = []
    for r in results:
        denom = r.busy_slots if spec.goodput_mode == "busy" else r.completion + 1
        goodputs.append(r.delivered / denom if denom else 0.0)
    return (MetricsRecord(
        mean_ppd=mean_ppd,
        mean_iod=mean_iod,
        iod_stddev=iod_stddev,
        goodput=float(np.mean(goodputs)),
        completion_time=float(np.mean([r.completion for r in results])),
        failures=sum(r.failed for r in results),
        packets=spec.n_packets,
        iterations=spec.iterations),
        results)


@dataclass(frozen=True)
class SweepRow:
    slicing_index: int
    protocol: str
    links_in_slice: int
    p_bar: float
    rtt: int
    metrics: MetricsRecord


def run_slicing_sweep(base: RunSpec, slicing_indices, protocols=None,
                      configs=None) -> list[SweepRow]:
    """One row per (slicing index, protocol), always for slice 1. `configs`
    maps protocol name to its config; defaults to the base spec's."""
    from dataclasses import replace

    protocols = [base.protocol] if protocols is None else list(protocols)
    rows = []
    for index in slicing_indices:
        if not 1 <= index <= base.n_links:
            raise ConfigError(f"sweep index {index} outside [1, {base.n_links}]")
        for proto in protocols:
            cfg = (configs or {}).get(proto, base.protocol_config)
            spec = replace(base, protocol=proto, protocol_config=cfg,
                           slicing_index=index, run_slice=1)
            metrics, results = run_with_results(spec)
            rows.append(SweepRow(
                slicing_index=index, protocol=proto,
                links_in_slice=index,
                p_bar=results[0].realized_p_bar,
                rtt=results[0].realized_rtt,
                metrics=metrics))
    return rows

"""Slices of time-slotted erasure links.

A link carries one packet per slot, loses it i.i.d. with its erasure
probability, and delivers survivors ceil(rtt/2) slots later. Feedback is
error-free and takes the remaining rtt - ceil(rtt/2) slots (floored at 1),
so one transmit/feedback cycle spans exactly one RTT for even RTTs.

Randomized mode draws each link's RTT from a Gaussian and its erasure
probability from a uniform interval, once at construction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


class ConfigError(ValueError):
    pass


class ContractViolation(RuntimeError):
    pass


class Link:
    """One erasure link with its own deterministic outcome stream."""

    def __init__(self, link_id: int, erasure_prob: float, rtt_slots: int,
                 rng: np.random.Generator):
        if not 0.0 <= erasure_prob <= 1.0:
            raise ConfigError(f"erasure_prob {erasure_prob} outside [0, 1]")
        if rtt_slots < 1:
            raise ConfigError(f"rtt_slots must be >= 1, got {rtt_slots}")
        self.link_id = link_id
        self.erasure_prob = erasure_prob
        self.rtt_slots = rtt_slots
        self.fwd_delay = math.ceil(rtt_slots / 2)
        self.fbk_delay = max(1, rtt_slots - self.fwd_delay)
        self._rng = rng
        self._last_tx_slot = -1

    def transmit(self, slot: int, effective_prob: float | None = None
                 ) -> tuple[int, bool]:
        """One packet this slot; returns (arrival_slot, erased)."""
        if slot <= self._last_tx_slot:
            raise ContractViolation(
                f"link {self.link_id}: second transmit in slot {slot}")
        self._last_tx_slot = slot
        p = self.erasure_prob if effective_prob is None else effective_prob
        erased = bool(self._rng.random() < p)
        return slot + self.fwd_delay, erased

    def feedback(self, slot: int) -> int:
        """Feedback sent this slot arrives error-free after the return leg."""
        return slot + self.fbk_delay

    def __repr__(self):
        return (f"Link({self.link_id}, p={self.erasure_prob:.4g}, "
                f"rtt={self.rtt_slots})")


@dataclass(frozen=True)
class Slice:
    slice_id: int
    links: tuple[Link, ...]

    @property
    def size(self) -> int:
        return len(self.links)

    @property
    def avg_erasure(self) -> float:
        if not self.links:
            raise ConfigError("empty slice has no average erasure probability")
        return sum(l.erasure_prob for l in self.links) / len(self.links)

    @property
    def rtt_slots(self) -> int:
        if not self.links:
            raise ConfigError("empty slice has no RTT")
        return max(l.rtt_slots for l in self.links)


@dataclass(frozen=True)
class ChannelSpec:
    """Link parameterization; randomized draws happen in build_slices."""

    mode: str = "fixed"  # "fixed" | "randomized"
    rtt_mean: float = 16.0
    erasure_mean: float = 0.1
    rtt_stddev: float | None = None        # randomized only; default 20% of mean
    erasure_halfwidth: float | None = None  # randomized only; default 50% of mean

    def __post_init__(self):
        if self.mode not in ("fixed", "randomized"):
            raise ConfigError(f"unknown channel mode {self.mode!r}")
        if self.rtt_mean < 1:
            raise ConfigError("rtt_mean must be >= 1")
        if not 0.0 <= self.erasure_mean <= 1.0:
            raise ConfigError("erasure_mean outside [0, 1]")

    @property
    def resolved_rtt_stddev(self) -> float:
        return 0.2 * self.rtt_mean if self.rtt_stddev is None else self.rtt_stddev

    @property
    def resolved_erasure_halfwidth(self) -> float:
        if self.erasure_halfwidth is None:
            return 0.5 * self.erasure_mean
        return self.erasure_halfwidth


def build_slices(spec: ChannelSpec, n_links: int, slicing_index: int,
                 seed_seq: np.random.SeedSequence) -> tuple[Slice, Slice]:
    """Partition n_links into (slice 1 = first slicing_index links, slice 2 =
    rest). slicing_index == n_links leaves slice 2 empty."""
    if n_links < 1:
        raise ConfigError("need at least one link")
    if not 1 <= slicing_index <= n_links:
        raise ConfigError(
            f"slicing_index {slicing_index} outside [1, {n_links}]")
    param_ss, *stream_ss = seed_seq.spawn(n_links + 1)
    param_rng = np.random.Generator(np.random.PCG64(param_ss))
    links = []
    for i in range(n_links):
        if spec.mode == "fixed":
            rtt = max(1, round(spec.rtt_mean))
            p = spec.erasure_mean
        else:
            rtt = max(1, round(param_rng.normal(spec.rtt_mean,
                                                spec.resolved_rtt_stddev)))
            hw = spec.resolved_erasure_halfwidth
            p = float(np.clip(param_rng.uniform(spec.erasure_mean - hw,
                                                spec.erasure_mean + hw),
                              0.0, 1.0))
        links.append(Link(i, p, int(rtt),
                          np.random.Generator(np.random.PCG64(stream_ss[i]))))
    return (Slice(1, tuple(links[:slicing_index])),
            Slice(2, tuple(links[slicing_index:])))

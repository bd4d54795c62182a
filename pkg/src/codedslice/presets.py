"""Scenario presets and configuration resolution.

Precedence: command-line flags override config-file values, which override
the preset defaults. The fully resolved configuration is what lands in the
JSON sidecar next to every CSV.
"""

from __future__ import annotations

import sys
from dataclasses import dataclass

from .channel import ChannelSpec, ConfigError
from .protocols import BaselineConfig, RlncConfig

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

# fec default is 1/(1-p), fb default 2/(1-p); both resolved against the
# scenario's mean erasure probability when not given explicitly
_PRESETS: dict[str, dict] = {
    "low-rtt-fixed": {
        "mode": "fixed", "rtt_mean": 16.0, "erasure_mean": 0.1,
        "generation_size_k": 5,
    },
    "low-rtt-random": {
        "mode": "randomized", "rtt_mean": 16.0, "erasure_mean": 0.1,
        "generation_size_k": 5,
    },
    "high-rtt": {
        "mode": "fixed", "rtt_mean": 500.0, "erasure_mean": 0.2,
        "generation_size_k": 50,
    },
}

_BASE_DEFAULTS = {
    "n_links": 20,
    "rtt_stddev": None,
    "erasure_halfwidth": None,
    "fec_rate": None,
    "fb_rate": None,
    "repair_rule": "paired",
    "max_harq_tx": 4,
    "max_retx_threshold": 8,
    "retransmit_any_link": False,
    "packets": 10_000,
    "iterations": 10,  # desk scale; the reference experiments used 100
    "seed": 42,
    "goodput_mode": "busy",
}

_FILE_SECTIONS = {
    "channel": ("mode", "rtt_mean", "erasure_mean", "rtt_stddev",
                "erasure_halfwidth"),
    "rlnc": ("generation_size_k", "fec_rate", "fb_rate", "repair_rule"),
    "baseline": ("max_harq_tx", "max_retx_threshold", "retransmit_any_link"),
    "run": ("n_links", "packets", "iterations", "seed", "goodput_mode"),
}


def scenario_names() -> tuple[str, ...]:
    return tuple(_PRESETS)


def load_config_file(path: str) -> dict:
    with open(path, "rb") as fh:
        data = tomllib.load(fh)
    flat: dict = {}
    for section, keys in _FILE_SECTIONS.items():
        body = data.get(section, {})
        unknown = set(body) - set(keys)
        if unknown:
            raise ConfigError(
                f"unknown keys {sorted(unknown)} in [{section}] of {path}")
        flat.update(body)
    return flat


@dataclass(frozen=True)
class ExperimentConfig:
    scenario: str
    channel: ChannelSpec
    n_links: int
    rlnc: RlncConfig
    baseline: BaselineConfig
    packets: int
    iterations: int
    seed: int
    goodput_mode: str

    def resolved_dict(self) -> dict:
        """Every final value, for the metadata sidecar."""
        ch = self.channel
        return {
            "scenario": self.scenario,
            "channel": {
                "mode": ch.mode,
                "rtt_mean": ch.rtt_mean,
                "erasure_mean": ch.erasure_mean,
                "rtt_stddev": ch.resolved_rtt_stddev,
                "erasure_halfwidth": ch.resolved_erasure_halfwidth,
            },
            "rlnc": {
                "generation_size_k": self.rlnc.generation_size_k,
                "fec_rate": self.rlnc.fec_rate,
                "fb_rate": self.rlnc.fb_rate,
                "repair_rule": self.rlnc.repair_rule,
            },
            "baseline": {
                "max_harq_tx": self.baseline.max_harq_tx,
                "max_retx_threshold": self.baseline.max_retx_threshold,
                "retransmit_any_link": self.baseline.retransmit_any_link,
            },
            "run": {
                "n_links": self.n_links,
                "packets": self.packets,
                "iterations": self.iterations,
                "seed": self.seed,
                "goodput_mode": self.goodput_mode,
            },
        }


def resolve_config(scenario: str, file_values: dict | None = None,
                   overrides: dict | None = None) -> ExperimentConfig:
    if scenario not in _PRESETS:
        raise ConfigError(
            f"unknown scenario {scenario!r}; choose one of {scenario_names()}")
    values = dict(_BASE_DEFAULTS)
    values.update(_PRESETS[scenario])
    values.update(file_values or {})
    values.update({k: v for k, v in (overrides or {}).items() if v is not None})

    p_bar = values["erasure_mean"]
    if values["fec_rate"] is None:
        values["fec_rate"] = 1.0 / (1.0 - p_bar) if p_bar < 1.0 else 2.0
    if values["fb_rate"] is None:
        values["fb_rate"] = 2.0 / (1.0 - p_bar) if p_bar < 1.0 else 4.0

    channel = ChannelSpec(
        mode=values["mode"], rtt_mean=values["rtt_mean"],
        erasure_mean=values["erasure_mean"],
        rtt_stddev=values["rtt_stddev"],
        erasure_halfwidth=values["erasure_halfwidth"])
    rlnc = RlncConfig(
        generation_size_k=values["generation_size_k"],
        fec_rate=values["fec_rate"], fb_rate=values["fb_rate"],
        repair_rule=values["repair_rule"])
    baseline = BaselineConfig(
        max_harq_tx=values["max_harq_tx"],
        max_retx_threshold=values["max_retx_threshold"],
        retransmit_any_link=values["retransmit_any_link"])
    return ExperimentConfig(
        scenario=scenario, channel=channel, n_links=values["n_links"],
        rlnc=rlnc, baseline=baseline, packets=values["packets"],
        iterations=values["iterations"], seed=values["seed"],
        goodput_mode=values["goodput_mode"])

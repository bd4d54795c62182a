"""Slot-level comparison of block RLNC erasure coding with 5G HARQ/ARQ
reliability over sliced multi-link networks: codec, channel model, protocol
state machines, closed-form delay/goodput evaluators, and a simulation CLI.
"""

__version__ = "0.1.0"

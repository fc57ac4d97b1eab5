from __future__ import annotations

import numpy as np
import pytest

from gbstflow.flowmodel import FlowKey, Label, RawPacket, build_stream

KEY = FlowKey("10.0.0.1", "10.0.0.2", 40000, 80, 6)


def make_flow(lengths, forward=None, gaps_us=None, label=Label.BENIGN, tag=None, flags=None, protocol=6):
    """Flow with the given packet lengths; directions, gaps and flags optional."""
    n = len(lengths)
    forward = [True] * n if forward is None else forward
    gaps_us = [1000] * n if gaps_us is None else gaps_us
    flags = [0] * n if flags is None else flags
    ts, raw = 1_600_000_000_000_000, []
    for i in range(n):
        if i:
            ts += gaps_us[i - 1]
        sport, dport = (KEY.src_port, KEY.dst_port) if forward[i] else (KEY.dst_port, KEY.src_port)
        raw.append(RawPacket(ts, forward[i], sport, dport, protocol, int(lengths[i]),
                             1000 + i if protocol == 6 else None, flags[i]))
    return build_stream(KEY, raw, label, tag)


def random_flows(n, seed, max_packets=12):
    rng = np.random.default_rng(seed)
    out = []
    for i in range(n):
        k = int(rng.integers(1, max_packets + 1))
        out.append(make_flow(
            rng.integers(40, 1500, k), forward=list(rng.random(k) < 0.5),
            gaps_us=list(rng.integers(1, 2_000_000, k)), flags=list(rng.integers(0, 32, k)),
            label=Label.ATTACK if rng.random() < 0.5 else Label.BENIGN,
        ))
    return out


@pytest.fixture
def rng():
    return np.random.default_rng(12345)

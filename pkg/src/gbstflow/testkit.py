"""Seeded synthetic flow streams whose labels follow a known set-level rule."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .flowmodel import (
    TCP,
    TCP_ACK,
    TCP_RST,
    TCP_SYN,
    UDP,
    FlowKey,
    FlowStream,
    Label,
    RawPacket,
    build_stream,
)

RULE_NAMES = ("forward_length_count", "prefix_signature")
_DEFAULT_PARAMS = {
    "forward_length_count": {"length": 70, "count": 5},
    "prefix_signature": {"max_length": 60, "max_gap": 1e-3},
}
SERVER_PORTS = (53, 80, 123, 389, 443, 1900, 8080)
MIN_PACKETS, MAX_PACKETS = 2, 40
P_SHORT = 0.5
P_FORWARD = 0.5


@dataclass(frozen=True)
class SynthRule:
    """A ground-truth labeling rule over whole flows.

    ``forward_length_count``: Attack iff at least `count` forward packets are
    longer than `length` bytes.  ``prefix_signature``: Attack iff the first
    packet has SYN set, is shorter than `max_length` bytes and the second
    packet follows within `max_gap` seconds.
    """

    name: str
    params: tuple[tuple[str, float], ...] = ()
    noise: float = 0.0

    def __post_init__(self):
        if self.name not in RULE_NAMES:
            raise ValueError(f"unknown synthetic rule {self.name!r}; expected one of {RULE_NAMES}")
        if not 0 <= self.noise < 0.5:
            raise ValueError("noise must lie in [0, 0.5)")
        merged = dict(_DEFAULT_PARAMS[self.name])
        for k, v in self.params:
            if k not in merged:
                raise ValueError(f"rule {self.name} has no parameter {k!r}")
            merged[k] = v
        object.__setattr__(self, "params", tuple(sorted(merged.items())))

    @classmethod
    def make(cls, name: str, noise: float = 0.0, **params) -> "SynthRule":
        return cls(name, tuple(params.items()), noise)

    def param(self, key: str) -> float:
        return dict(self.params)[key]

    def holds(self, flow: FlowStream) -> bool:
        pk = flow.packets
        if self.name == "forward_length_count":
            hits = sum(1 for p in pk if p.is_forward and p.length > self.param("length"))
            return hits >= self.param("count")
        first = pk[0]
        return (len(pk) >= 2 and first.is_syn and first.length < self.param("max_length")
                and first.iat_after < self.param("max_gap"))


def _log_uniform(rng: np.random.Generator, lo: float, hi: float) -> float:
    return float(np.exp(rng.uniform(np.log(lo), np.log(hi))))


def _random_key(rng: np.random.Generator, protocol: int) -> FlowKey:
    client = f"10.{rng.integers(0, 256)}.{rng.integers(0, 256)}.{rng.integers(1, 255)}"
    server = f"192.168.{rng.integers(0, 256)}.{rng.integers(1, 255)}"
    return FlowKey(client, server, int(rng.integers(1024, 65536)),
                   int(SERVER_PORTS[rng.integers(len(SERVER_PORTS))]), protocol)


def _flags(rng: np.random.Generator, protocol: int, p_syn: float) -> int:
    if protocol != TCP:
        return 0
    flags = 0
    if rng.random() < p_syn:
        flags |= TCP_SYN
    if rng.random() < 0.7:
        flags |= TCP_ACK
    if rng.random() < 0.05:
        flags |= TCP_RST
    return flags


def _candidate(rule: SynthRule, rng: np.random.Generator) -> tuple[FlowKey, list[RawPacket]]:
    protocol = TCP if rng.random() < 0.8 else UDP
    key = _random_key(rng, protocol)
    n = int(rng.integers(MIN_PACKETS, MAX_PACKETS + 1))
    signature = rule.name == "prefix_signature"
    ts = int(rng.integers(1_500_000_000, 1_700_000_000)) * 1_000_000
    packets = []
    for i in range(n):
        forward = True if i == 0 else bool(rng.random() < P_FORWARD)
        head = i < 2
        if signature:
            # all label signal lives in packets 0-1; later packets never mimic it
            length = int(rng.integers(40, 81)) if head else int(rng.integers(60, 1501))
            p_syn = 0.6 if head else 0.0
        else:
            length = int(rng.integers(40, 71)) if rng.random() < P_SHORT else int(rng.integers(71, 1501))
            p_syn = 0.5 if i == 0 else 0.1
        if i:
            if signature:
                gap = _log_uniform(rng, 1e-4, 1e-2) if i == 1 else _log_uniform(rng, 1e-3, 1.0)
            else:
                gap = _log_uniform(rng, 1e-5, 1.0)
            ts += max(1, int(round(gap * 1e6)))
        sport, dport = (key.src_port, key.dst_port) if forward else (key.dst_port, key.src_port)
        window = int(rng.integers(0, 65536)) if protocol == TCP else None
        packets.append(RawPacket(ts, forward, sport, dport, protocol, length, window,
                                 _flags(rng, protocol, p_syn)))
    return key, packets


def generate(rule: SynthRule, n_per_class: int, seed: int,
             attack_tag: Optional[str] = None) -> list[FlowStream]:
    """Rejection-sample `n_per_class` flows satisfying `rule` and as many violating it.

    Satisfying flows are labeled Attack (tagged with the rule name), the
    others Benign; each label is then flipped with probability ``rule.noise``.
    """
    if n_per_class < 1:
        raise ValueError("n_per_class must be >= 1")
    rng = np.random.default_rng(seed)
    tag = attack_tag or rule.name
    need = {True: n_per_class, False: n_per_class}
    out: list[FlowStream] = []
    while need[True] or need[False]:
        key, raw = _candidate(rule, rng)
        flow = build_stream(key, raw, Label.ATTACK, tag)
        positive = rule.holds(flow)
        if not need[positive]:
            continue
        need[positive] -= 1
        if rule.noise and rng.random() < rule.noise:
            positive = not positive
        label = Label.ATTACK if positive else Label.BENIGN
        out.append(FlowStream(flow.key, flow.start_ts, flow.packets, label, tag if positive else "BENIGN"))
    return out

"""Flow keys, per-packet header feature vectors and labeled flow streams."""
from __future__ import annotations

import enum
import ipaddress
import math
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, NamedTuple, Optional, Sequence

import numpy as np

TCP = 6
UDP = 17

WELL_KNOWN_PORT_MAX = 1023

TCP_FIN = 0x01
TCP_SYN = 0x02
TCP_RST = 0x04
TCP_PSH = 0x08
TCP_ACK = 0x10

IAT_TOLERANCE = 1e-9


class Label(enum.Enum):
    BENIGN = "Benign"
    ATTACK = "Attack"

    @property
    def y(self) -> int:
        return 1 if self is Label.ATTACK else 0


def binarize_label(raw_label: str) -> Label:
    """Map a dataset label string to the binary Benign/Attack label."""
    return Label.BENIGN if raw_label.strip().upper() == "BENIGN" else Label.ATTACK


@dataclass(frozen=True, order=True)
class FlowKey:
    src_ip: str
    dst_ip: str
    src_port: int
    dst_port: int
    protocol: int

    def __post_init__(self):
        # normalizes and rejects anything that is not a dotted IPv4 address
        object.__setattr__(self, "src_ip", str(ipaddress.IPv4Address(self.src_ip)))
        object.__setattr__(self, "dst_ip", str(ipaddress.IPv4Address(self.dst_ip)))
        if not (0 <= self.src_port <= 65535 and 0 <= self.dst_port <= 65535):
            raise ValueError(f"port out of range in {self}")
        if not 0 <= self.protocol <= 255:
            raise ValueError(f"protocol out of range in {self}")

    def reversed(self) -> "FlowKey":
        return FlowKey(self.dst_ip, self.src_ip, self.dst_port, self.src_port, self.protocol)

    def to_dict(self) -> dict:
        return {
            "src_ip": self.src_ip,
            "dst_ip": self.dst_ip,
            "src_port": self.src_port,
            "dst_port": self.dst_port,
            "protocol": self.protocol,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "FlowKey":
        return cls(d["src_ip"], d["dst_ip"], int(d["src_port"]), int(d["dst_port"]), int(d["protocol"]))


class PacketRecord(NamedTuple):
    """One packet's header features; field order is the model's feature order."""

    is_forward: bool
    src_port_enc: int
    dst_port_enc: int
    index: int
    timestamp_rel: float
    protocol: int
    length: int
    init_win_bytes: int
    iat_before: float
    iat_after: float
    iat_before_dir: float
    iat_after_dir: float
    is_syn: bool
    is_ack: bool
    is_rst: bool


FEATURE_NAMES: tuple[str, ...] = PacketRecord._fields
N_FEATURES = len(FEATURE_NAMES)
FEATURE_INDEX = {name: i for i, name in enumerate(FEATURE_NAMES)}

_BOOL_FIELDS = frozenset({"is_forward", "is_syn", "is_ack", "is_rst"})
_FLOAT_FIELDS = frozenset({"timestamp_rel", "iat_before", "iat_after", "iat_before_dir", "iat_after_dir"})
_CASTS = tuple(
    bool if name in _BOOL_FIELDS else float if name in _FLOAT_FIELDS else int for name in FEATURE_NAMES
)


def record_from_numbers(values: Sequence[float]) -> PacketRecord:
    if len(values) != N_FEATURES:
        raise ValueError(f"expected {N_FEATURES} packet features, got {len(values)}")
    return PacketRecord(*(cast(v) for cast, v in zip(_CASTS, values)))


def record_to_numbers(rec: PacketRecord) -> list:
    return [int(v) if isinstance(v, bool) else v for v in rec]


def encode_port(port: int) -> int:
    return port if port <= WELL_KNOWN_PORT_MAX else 0


class RawPacket(NamedTuple):
    """Header fields of one packet before per-flow feature derivation."""

    ts_us: int
    is_forward: bool
    src_port: int
    dst_port: int
    protocol: int
    length: int
    tcp_window: Optional[int] = None
    tcp_flags: int = 0


@dataclass(frozen=True)
class FlowStream:
    key: FlowKey
    start_ts: int
    packets: tuple[PacketRecord, ...]
    label: Label
    vector_tag: Optional[str] = None

    def __post_init__(self):
        if not self.packets:
            raise ValueError("a flow stream needs at least one packet")

    def __len__(self) -> int:
        return len(self.packets)

    @cached_property
    def matrix(self) -> np.ndarray:
        """Packets as a read-only (n_packets, 15) float64 array."""
        m = np.array([record_to_numbers(p) for p in self.packets], dtype=np.float64)
        m.setflags(write=False)
        return m

    def with_packets(self, packets: Iterable[PacketRecord]) -> "FlowStream":
        return FlowStream(self.key, self.start_ts, tuple(packets), self.label, self.vector_tag)

    def check(self) -> None:
        """Raise ValueError when the index/timestamp/IAT invariants do not hold."""
        pk = self.packets
        first = pk[0]
        if first.timestamp_rel != 0 or first.iat_before != 0 or first.iat_before_dir != 0:
            raise ValueError("first packet must start the flow clock")
        for i, p in enumerate(pk):
            if p.index != i:
                raise ValueError(f"packet {i} carries index {p.index}")
            if p.src_port_enc > WELL_KNOWN_PORT_MAX or p.dst_port_enc > WELL_KNOWN_PORT_MAX:
                raise ValueError(f"packet {i} has an unencoded port")
            if min(record_to_numbers(p)) < 0:
                raise ValueError(f"packet {i} has a negative feature")
            if i and not math.isclose(p.iat_before, p.timestamp_rel - pk[i - 1].timestamp_rel,
                                      rel_tol=0, abs_tol=IAT_TOLERANCE):
                raise ValueError(f"iat_before mismatch at packet {i}")
            if i + 1 < len(pk) and not math.isclose(p.iat_after, pk[i + 1].timestamp_rel - p.timestamp_rel,
                                                    rel_tol=0, abs_tol=IAT_TOLERANCE):
                raise ValueError(f"iat_after mismatch at packet {i}")
            if i and p.timestamp_rel < pk[i - 1].timestamp_rel:
                raise ValueError(f"timestamps decrease at packet {i}")
        if pk[-1].iat_after != 0 or pk[-1].iat_after_dir != 0:
            raise ValueError("final packet must have zero trailing IATs")


def build_stream(
    key: FlowKey,
    packets: Sequence[RawPacket],
    label: Label,
    vector_tag: Optional[str] = None,
) -> FlowStream:
    """Derive the 15 per-packet features for a flow from its raw packets.

    Packets are ordered by timestamp (stable, so capture order breaks ties).
    """
    if not packets:
        raise ValueError("cannot build a flow from zero packets")
    raw = sorted(packets, key=lambda p: p.ts_us)
    t0 = raw[0].ts_us
    ts = [(p.ts_us - t0) / 1e6 for p in raw]
    n = len(raw)

    before_dir = [0.0] * n
    after_dir = [0.0] * n
    last_seen: dict[bool, int] = {}
    window_seen: set[bool] = set()
    init_win = [0] * n
    for i, p in enumerate(raw):
        d = bool(p.is_forward)
        j = last_seen.get(d)
        if j is not None:
            gap = ts[i] - ts[j]
            before_dir[i] = gap
            after_dir[j] = gap
        last_seen[d] = i
        if p.protocol == TCP and d not in window_seen:
            window_seen.add(d)
            init_win[i] = p.tcp_window or 0

    records = []
    for i, p in enumerate(raw):
        records.append(PacketRecord(
            is_forward=bool(p.is_forward),
            src_port_enc=encode_port(p.src_port),
            dst_port_enc=encode_port(p.dst_port),
            index=i,
            timestamp_rel=ts[i],
            protocol=p.protocol,
            length=p.length,
            init_win_bytes=init_win[i],
            iat_before=ts[i] - ts[i - 1] if i else 0.0,
            iat_after=ts[i + 1] - ts[i] if i + 1 < n else 0.0,
            iat_before_dir=before_dir[i],
            iat_after_dir=after_dir[i],
            is_syn=bool(p.tcp_flags & TCP_SYN),
            is_ack=bool(p.tcp_flags & TCP_ACK),
            is_rst=bool(p.tcp_flags & TCP_RST),
        ))
    return FlowStream(key, t0, tuple(records), label, vector_tag)


def flow_duration(flow: FlowStream, prefix: Optional[int] = None) -> float:
    """Seconds from the first packet to the last packet considered."""
    n = len(flow.packets)
    if prefix is not None:
        if prefix < 1:
            raise ValueError(f"prefix must be >= 1, got {prefix}")
        n = min(prefix, n)
    return flow.packets[n - 1].timestamp_rel

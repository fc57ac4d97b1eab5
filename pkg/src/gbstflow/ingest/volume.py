"""Input-size comparison between flow records and per-packet headers."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

from ..flowmodel import FlowStream

FLOW_RECORD_BYTES = 150
# IPv4 and TCP headers without options
PACKET_HEADER_BYTES = 40
GIB = 2**30


@dataclass(frozen=True)
class VolumeReport:
    n_flows: int
    n_packets: int
    flow_record_bytes: int
    packet_header_bytes: int
    raw_bytes: Optional[float] = None
    flow_portion: Optional[float] = None
    packet_portion: Optional[float] = None

    def to_dict(self) -> dict:
        d = dict(self.__dict__)
        d["flow_record_gib"] = self.flow_record_bytes / GIB
        d["packet_header_gib"] = self.packet_header_bytes / GIB
        return d


def volume_from_counts(n_flows: int, n_packets: int, raw_bytes: Optional[float] = None) -> VolumeReport:
    """Portions are fractions of `raw_bytes` (the raw capture size) when given."""
    if n_flows < 0 or n_packets < 0:
        raise ValueError("counts must be >= 0")
    fb = FLOW_RECORD_BYTES * n_flows
    pb = PACKET_HEADER_BYTES * n_packets
    if raw_bytes is None:
        return VolumeReport(n_flows, n_packets, fb, pb)
    if raw_bytes <= 0:
        raise ValueError("raw_bytes must be > 0")
    return VolumeReport(n_flows, n_packets, fb, pb, raw_bytes, fb / raw_bytes, pb / raw_bytes)


def volume_report(flows: Sequence[FlowStream], raw_bytes: Optional[float] = None) -> VolumeReport:
    return volume_from_counts(len(flows), sum(len(f) for f in flows), raw_bytes)

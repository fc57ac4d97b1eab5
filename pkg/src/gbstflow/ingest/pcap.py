"""Minimal classic-pcap reader yielding IPv4 TCP/UDP header events."""
from __future__ import annotations

import logging
import socket
import struct
from dataclasses import dataclass, field
from typing import Optional

from ..flowmodel import TCP, UDP

logger = logging.getLogger(__name__)

MAGIC_US = 0xA1B2C3D4
MAGIC_NS = 0xA1B23C4D

LINKTYPE_NULL = 0
LINKTYPE_ETHERNET = 1
LINKTYPE_RAW = 101
LINKTYPE_LINUX_SLL = 113
LINKTYPE_IPV4 = 228

ETHERTYPE_IPV4 = 0x0800
ETHERTYPE_VLAN = (0x8100, 0x88A8)

GLOBAL_HEADER_LEN = 24
RECORD_HEADER_LEN = 16


class CaptureError(ValueError):
    """The capture cannot be read at all (bad or missing global header)."""


@dataclass(frozen=True)
class PacketEvent:
    ts_us: int
    src_ip: str
    dst_ip: str
    src_port: int
    dst_port: int
    protocol: int
    length: int
    tcp_flags: int = 0
    tcp_window: Optional[int] = None


@dataclass
class CaptureResult:
    events: list[PacketEvent] = field(default_factory=list)
    skipped: int = 0
    truncated: bool = False
    linktype: int = LINKTYPE_ETHERNET


def _ip_payload(linktype: int, frame: bytes) -> Optional[bytes]:
    """The IPv4 datagram inside a link-layer frame, or None if not IPv4."""
    if linktype == LINKTYPE_ETHERNET:
        if len(frame) < 14:
            return None
        off = 12
        (etype,) = struct.unpack_from("!H", frame, off)
        while etype in ETHERTYPE_VLAN and len(frame) >= off + 6:
            off += 4
            (etype,) = struct.unpack_from("!H", frame, off)
        return frame[off + 2:] if etype == ETHERTYPE_IPV4 else None
    if linktype == LINKTYPE_LINUX_SLL:
        if len(frame) < 16:
            return None
        (etype,) = struct.unpack_from("!H", frame, 14)
        return frame[16:] if etype == ETHERTYPE_IPV4 else None
    if linktype == LINKTYPE_NULL:
        if len(frame) < 4:
            return None
        # address family in host order of the capturing machine
        family = struct.unpack_from("<I", frame)[0]
        if family not in (socket.AF_INET, 0x02000000):
            return None
        return frame[4:]
    if linktype in (LINKTYPE_RAW, LINKTYPE_IPV4):
        return frame if frame and frame[0] >> 4 == 4 else None
    return None


def decode_frame(linktype: int, ts_us: int, frame: bytes, orig_len: int) -> Optional[PacketEvent]:
    """Header fields of one frame; None for anything but an unfragmented-enough IPv4 TCP/UDP packet."""
    ip = _ip_payload(linktype, frame)
    if ip is None or len(ip) < 20 or ip[0] >> 4 != 4:
        return None
    ihl = (ip[0] & 0x0F) * 4
    proto = ip[9]
    (frag,) = struct.unpack_from("!H", ip, 6)
    if ihl < 20 or proto not in (TCP, UDP) or frag & 0x1FFF:
        # non-first fragments carry no transport header
        return None
    src, dst = socket.inet_ntoa(ip[12:16]), socket.inet_ntoa(ip[16:20])
    l4 = ip[ihl:]
    if proto == TCP:
        if len(l4) < 16:
            return None
        sport, dport = struct.unpack_from("!HH", l4)
        flags = l4[13]
        (window,) = struct.unpack_from("!H", l4, 14)
        return PacketEvent(ts_us, src, dst, sport, dport, proto, orig_len, flags, window)
    if len(l4) < 4:
        return None
    sport, dport = struct.unpack_from("!HH", l4)
    return PacketEvent(ts_us, src, dst, sport, dport, proto, orig_len)


def parse_capture_bytes(data: bytes) -> CaptureResult:
    if len(data) < GLOBAL_HEADER_LEN:
        raise CaptureError("capture shorter than the 24-byte pcap global header")
    for endian in ("<", ">"):
        (magic,) = struct.unpack_from(endian + "I", data)
        if magic in (MAGIC_US, MAGIC_NS):
            break
    else:
        raise CaptureError(f"not a classic pcap file (magic 0x{data[:4].hex()})")
    nano = magic == MAGIC_NS
    linktype = struct.unpack_from(endian + "I", data, 20)[0] & 0x0FFFFFFF
    result = CaptureResult(linktype=linktype)
    rec = struct.Struct(endian + "IIII")
    off = GLOBAL_HEADER_LEN
    while off < len(data):
        if off + RECORD_HEADER_LEN > len(data):
            logger.warning("truncated record header at byte %d; stopping", off)
            result.truncated = True
            break
        sec, frac, incl, orig = rec.unpack_from(data, off)
        off += RECORD_HEADER_LEN
        if off + incl > len(data):
            logger.warning("truncated packet record at byte %d; stopping", off - RECORD_HEADER_LEN)
            result.truncated = True
            break
        frame = data[off:off + incl]
        off += incl
        ts_us = sec * 1_000_000 + (frac // 1000 if nano else frac)
        ev = decode_frame(linktype, ts_us, frame, orig)
        if ev is None:
            result.skipped += 1
        else:
            result.events.append(ev)
    return result


def parse_capture(path) -> CaptureResult:
    """Read a classic pcap file into per-packet events, in file order.

    Frames that are not IPv4 TCP/UDP are skipped and counted.  A malformed
    global header raises CaptureError; a truncated final record logs a
    warning and ends the read.
    """
    with open(path, "rb") as fh:
        data = fh.read()
    return parse_capture_bytes(data)


def write_capture(path, frames, linktype: int = LINKTYPE_ETHERNET, snaplen: int = 65535) -> None:
    """Write (ts_us, frame_bytes) pairs as a little-endian microsecond pcap."""
    with open(path, "wb") as fh:
        fh.write(struct.pack("<IHHiIII", MAGIC_US, 2, 4, 0, 0, snaplen, linktype))
        for ts_us, frame in frames:
            fh.write(struct.pack("<IIII", ts_us // 1_000_000, ts_us % 1_000_000, len(frame), len(frame)))
            fh.write(frame)

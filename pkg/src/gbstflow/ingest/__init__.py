"""Capture parsing, flow reconstruction, dataset splits and volume accounting."""
from .flows import (
    LABEL_COLUMNS,
    LabelRow,
    Reconstruction,
    flow_from_json,
    flow_to_json,
    read_flows_jsonl,
    read_labels_csv,
    reconstruct_flows,
    write_flows_jsonl,
    write_labels_csv,
)
from .pcap import CaptureError, CaptureResult, PacketEvent, decode_frame, parse_capture, write_capture
from .sampling import REFERENCE_SPLIT, SplitSpec, balance_split, holdout_split
from .volume import FLOW_RECORD_BYTES, GIB, PACKET_HEADER_BYTES, VolumeReport, volume_from_counts, volume_report

__all__ = [
    "LABEL_COLUMNS", "LabelRow", "Reconstruction", "flow_from_json", "flow_to_json",
    "read_flows_jsonl", "read_labels_csv", "reconstruct_flows", "write_flows_jsonl",
    "write_labels_csv", "CaptureError", "CaptureResult", "PacketEvent", "decode_frame",
    "parse_capture", "write_capture", "REFERENCE_SPLIT", "SplitSpec", "balance_split",
    "holdout_split", "FLOW_RECORD_BYTES", "GIB", "PACKET_HEADER_BYTES", "VolumeReport",
    "volume_from_counts", "volume_report",
]

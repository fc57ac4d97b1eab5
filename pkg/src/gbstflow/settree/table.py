"""Flat columnar packet storage for evaluating set splits over many flows at once."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from ..flowmodel import N_FEATURES, FlowStream
from .operators import SetOperator, item_support, segment_statistics, transform


@dataclass(frozen=True)
class NodeView:
    """The flows reaching a tree node, and where their packets sit in the table."""

    flows: np.ndarray          # flow indices into the table
    pos: np.ndarray            # flat packet positions of those flows, flow by flow
    seg: np.ndarray            # node-local flow number of every position in `pos`
    starts: np.ndarray         # offset of each flow's first packet within `pos`

    @property
    def n(self) -> int:
        return len(self.flows)


class PacketTable:
    """All packets of a flow collection in one (n_packets, 15) array.

    Flow i owns rows ``offsets[i]:offsets[i] + lengths[i]``.  For every feature
    the table also keeps each flow's packets sorted ascending by that feature,
    which gives set reductions a canonical accumulation order.
    """

    def __init__(self, flows: Sequence[FlowStream]):
        if not flows:
            raise ValueError("packet table needs at least one flow")
        self.lengths = np.array([len(f.packets) for f in flows], dtype=np.intp)
        self.offsets = np.concatenate(([0], np.cumsum(self.lengths)[:-1])).astype(np.intp)
        self.values = np.ascontiguousarray(np.concatenate([f.matrix for f in flows]))
        self.n_flows = len(flows)
        self.n_packets = len(self.values)
        seg = np.repeat(np.arange(self.n_flows), self.lengths)
        # order[j]: flat position of the k-th smallest feature-j value, flow by flow
        self.order = np.empty((N_FEATURES, self.n_packets), dtype=np.intp)
        self.sorted = np.empty((N_FEATURES, self.n_packets), dtype=np.float64)
        for j in range(N_FEATURES):
            o = np.lexsort((self.values[:, j], seg))
            self.order[j] = o
            self.sorted[j] = self.values[o, j]
        self._transformed: dict[str, np.ndarray] = {}

    def transformed(self, kind: str) -> np.ndarray:
        if kind not in self._transformed:
            self._transformed[kind] = np.ascontiguousarray(transform(kind, self.sorted))
        return self._transformed[kind]

    def view(self, flows: Optional[np.ndarray] = None) -> NodeView:
        if flows is None:
            flows = np.arange(self.n_flows)
        flows = np.asarray(flows, dtype=np.intp)
        lens = self.lengths[flows]
        local_starts = np.concatenate(([0], np.cumsum(lens)[:-1])).astype(np.intp)
        seg = np.repeat(np.arange(len(flows)), lens)
        pos = np.arange(int(lens.sum()), dtype=np.intp) - local_starts[seg] + self.offsets[flows][seg]
        return NodeView(flows, pos, seg, local_starts)

    def statistics(self, view: NodeView, feature: int, ops: Sequence[SetOperator],
                   mask: Optional[np.ndarray] = None) -> np.ndarray:
        """(len(ops), view.n) statistics of `feature` over each flow's input set.

        `mask` is a flat boolean array over all table packets selecting the
        input set (None = every packet of the flow).  Empty sets give NaN.
        """
        sorted_v = self.sorted[feature][view.pos]
        member = None if mask is None else mask[self.order[feature][view.pos]]
        return segment_statistics(
            ops, sorted_v, member, view.seg, view.starts, view.n,
            transformed=lambda kind: self.transformed(kind)[feature][view.pos],
        )

    def attention(self, view: NodeView, feature: int, op: SetOperator, theta: float,
                  mask: Optional[np.ndarray] = None) -> tuple[np.ndarray, np.ndarray]:
        """Flat masks of the attention set A and its complement within the input set."""
        member = np.ones(len(view.pos), dtype=bool) if mask is None else mask[view.pos]
        size = np.bincount(view.seg, weights=member, minlength=view.n)[view.seg]
        inside = member & item_support(op, theta, self.values[view.pos, feature], size)
        a = np.zeros(self.n_packets, dtype=bool)
        a_bar = np.zeros(self.n_packets, dtype=bool)
        a[view.pos] = inside
        a_bar[view.pos] = member & ~inside
        return a, a_bar

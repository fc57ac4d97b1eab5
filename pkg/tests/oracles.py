"""Reference computations coded independently of the package internals."""
from __future__ import annotations

import math

import numpy as np

from gbstflow.flowmodel import FlowKey, FlowStream, Label, PacketRecord
from gbstflow.settree import EPS, SetOperator

# the only features the instances vary
VARYING = ("timestamp_rel", "iat_before", "length")


def power_statistic(op, values):
    """|F|^-beta * sum((p_j)^alpha) for the finite-alpha operators."""
    alpha, beta = {
        SetOperator.COUNT: (0, 0), SetOperator.SUM: (1, 0), SetOperator.MEAN: (1, 1),
        SetOperator.INV_HARMONIC_MEAN: (-1, 1), SetOperator.SECOND_MOMENT_MEAN: (2, 1),
    }[op]
    shift = EPS if alpha < 0 else 0.0
    total = math.fsum(math.pow(v + shift, alpha) for v in values)
    return total / math.pow(len(values), beta)


def statistic(op, values):
    """Every operator by its definition; means are kept inside the extrema they average."""
    n = len(values)
    if op is SetOperator.COUNT:
        return float(n)
    if op is SetOperator.SUM:
        return math.fsum(values)
    if op is SetOperator.MIN:
        return min(values)
    if op is SetOperator.MAX:
        return max(values)
    f = {
        SetOperator.MEAN: lambda v: v,
        SetOperator.INV_HARMONIC_MEAN: lambda v: 1 / (v + EPS),
        SetOperator.SECOND_MOMENT_MEAN: lambda v: v * v,
        SetOperator.GEOMETRIC_MEAN: lambda v: math.log(v + EPS),
    }[op]
    terms = [f(v) for v in values]
    m = min(max(math.fsum(terms) / n, min(terms)), max(terms))
    return math.exp(m) if op is SetOperator.GEOMETRIC_MEAN else m


def gain(left, right, g, h, lam):
    gl, hl = sum(g[i] for i in left), sum(h[i] for i in left)
    gr, hr = sum(g[i] for i in right), sum(h[i] for i in right)
    gt, ht = gl + gr, hl + hr
    return gl * gl / (hl + lam) + gr * gr / (hr + lam) - gt * gt / (ht + lam)


def best_root_gain(flows, g, h, lam=1.0):
    """Max gain over every (feature, operator, threshold between distinct values)."""
    best = -math.inf
    n_features = len(PacketRecord._fields)
    for j in range(n_features):
        for op in SetOperator:
            stats = [statistic(op, [float(p[j]) for p in f.packets]) for f in flows]
            distinct = sorted(set(stats))
            for lo, hi in zip(distinct, distinct[1:]):
                theta = (lo + hi) / 2
                right = [i for i, s in enumerate(stats) if s >= theta]
                left = [i for i, s in enumerate(stats) if s < theta]
                best = max(best, gain(left, right, g, h, lam))
    return best


def random_instance(rng: np.random.Generator):
    """<= 8 flows whose packets differ only in up to 3 features; dyadic g and h keep sums exact."""
    n_flows = int(rng.integers(2, 9))
    varying = VARYING[: int(rng.integers(1, 4))]
    flows = []
    for i in range(n_flows):
        k = int(rng.integers(1, 6))
        pk = []
        for idx in range(k):
            vals = dict(is_forward=True, src_port_enc=0, dst_port_enc=80, index=0, timestamp_rel=0.0,
                        protocol=6, length=100, init_win_bytes=0, iat_before=0.0, iat_after=0.0,
                        iat_before_dir=0.0, iat_after_dir=0.0, is_syn=False, is_ack=False, is_rst=False)
            for name in varying:
                vals[name] = int(rng.integers(1, 1500)) if name == "length" else float(rng.random() * 10)
            pk.append(PacketRecord(**vals))
        flows.append(FlowStream(FlowKey("10.0.0.1", "10.0.0.2", 1000 + i, 80, 6), 0, tuple(pk), Label.BENIGN))
    g = rng.integers(-8, 9, n_flows) / 8.0
    h = rng.integers(1, 5, n_flows) / 16.0
    return flows, g, h

"""Seeded class-balanced train/validation/test sampling."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ..flowmodel import FlowStream, Label


@dataclass(frozen=True)
class SplitSpec:
    n_train_benign: int
    n_train_attack: int
    n_val_benign: int
    n_val_attack: int
    n_test_benign: int
    n_test_attack: int
    seed: int = 0

    def __post_init__(self):
        if min(self.counts(Label.BENIGN) + self.counts(Label.ATTACK)) < 0:
            raise ValueError("split counts must be >= 0")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")

    def counts(self, label: Label) -> tuple[int, int, int]:
        if label is Label.BENIGN:
            return self.n_train_benign, self.n_val_benign, self.n_test_benign
        return self.n_train_attack, self.n_val_attack, self.n_test_attack

    @property
    def balanced(self) -> bool:
        return self.counts(Label.BENIGN) == self.counts(Label.ATTACK)

    @classmethod
    def parse(cls, text: str, seed: int = 0) -> "SplitSpec":
        """Parse ``TB:TA,VB:VA,XB:XA`` (benign:attack per train, val, test)."""
        parts = text.split(",")
        if len(parts) != 3:
            raise ValueError(f"split spec {text!r} needs three benign:attack pairs")
        nums = []
        for part in parts:
            pair = part.split(":")
            if len(pair) != 2:
                raise ValueError(f"bad benign:attack pair {part!r}")
            nums.extend(int(x) for x in pair)
        return cls(*nums, seed=seed)


REFERENCE_SPLIT = SplitSpec(32_000, 31_996, 8_000, 8_000, 40_000, 39_996)


def balance_split(flows: Sequence[FlowStream], spec: SplitSpec):
    """Sample disjoint (train, val, test) lists without replacement, per class.

    Raises ValueError naming the class when the corpus holds too few flows.
    """
    rng = np.random.default_rng(spec.seed)
    parts: list[list[int]] = [[], [], []]
    for label in (Label.BENIGN, Label.ATTACK):
        pool = np.array([i for i, f in enumerate(flows) if f.label is label], dtype=np.intp)
        need = spec.counts(label)
        total = sum(need)
        if total > len(pool):
            raise ValueError(f"{label.value}: need {total} flows, corpus has {len(pool)} "
                             f"(short by {total - len(pool)})")
        picked = rng.permutation(pool)[:total]
        cut = np.cumsum((0,) + need)
        for k in range(3):
            parts[k].extend(picked[cut[k]:cut[k + 1]].tolist())
    return tuple([flows[i] for i in sorted(p)] for p in parts)


def holdout_split(flows: Sequence[FlowStream], val_fraction: float, seed: int):
    """Seeded random (train, val) partition keeping the corpus class mix."""
    if not 0 <= val_fraction < 1:
        raise ValueError("val_fraction must lie in [0, 1)")
    rng = np.random.default_rng(seed)
    perm = rng.permutation(len(flows))
    n_val = int(round(val_fraction * len(flows)))
    val = sorted(perm[:n_val].tolist())
    train = sorted(perm[n_val:].tolist())
    return [flows[i] for i in train], [flows[i] for i in val]

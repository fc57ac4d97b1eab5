"""Versioned JSON persistence for boosted Set-Tree models."""
from __future__ import annotations

import json
from dataclasses import asdict

from .boost import BoostConfig, GBSTModel
from .flowmodel import FEATURE_INDEX, FEATURE_NAMES
from .settree import Leaf, Node, Split, SplitRule, parse_operator

FORMAT_VERSION = 1


def node_to_dict(node: Node) -> dict:
    if isinstance(node, Leaf):
        return {"kind": "leaf", "value": node.value}
    r = node.rule
    return {
        "kind": "split",
        "feature": FEATURE_NAMES[r.feature],
        "op": r.op.value,
        "theta": r.theta,
        "attention_ref": r.attention_ref,
        "use_complement": r.use_complement,
        "gain": node.gain,
        "on_true": node_to_dict(node.on_true),
        "on_false": node_to_dict(node.on_false),
    }


def node_from_dict(d: dict) -> Node:
    kind = d.get("kind")
    if kind == "leaf":
        return Leaf(float(d["value"]))
    if kind != "split":
        raise ValueError(f"unknown node kind {kind!r}")
    feature = d["feature"]
    if feature not in FEATURE_INDEX:
        raise ValueError(f"unknown feature {feature!r}")
    rule = SplitRule(FEATURE_INDEX[feature], parse_operator(d["op"]), float(d["theta"]),
                     int(d["attention_ref"]), bool(d["use_complement"]))
    return Split(rule, node_from_dict(d["on_true"]), node_from_dict(d["on_false"]), float(d.get("gain", 0.0)))


def model_to_dict(model: GBSTModel) -> dict:
    cfg = asdict(model.config)
    return {
        "format_version": FORMAT_VERSION,
        "model": {
            "base_score": model.base_score,
            "learning_rate": model.learning_rate,
            "feature_names": list(model.feature_names),
            "trees": [node_to_dict(t) for t in model.trees],
        },
        "training_config": {k: v for k, v in cfg.items() if k != "seed"},
        "seed": model.config.seed,
        "val_loss": list(model.val_loss),
    }


def model_from_dict(d: dict) -> GBSTModel:
    version = d.get("format_version")
    if version != FORMAT_VERSION:
        raise ValueError(f"unsupported model format version {version!r}")
    m = d["model"]
    if tuple(m["feature_names"]) != FEATURE_NAMES:
        raise ValueError("model was trained on a different feature set")
    config = BoostConfig(**d["training_config"], seed=int(d["seed"]))
    return GBSTModel(tuple(node_from_dict(t) for t in m["trees"]), float(m["learning_rate"]),
                     float(m["base_score"]), config, FEATURE_NAMES, tuple(d.get("val_loss", ())))


def dumps(model: GBSTModel) -> str:
    return json.dumps(model_to_dict(model), indent=1, allow_nan=False) + "\n"


def loads(text: str) -> GBSTModel:
    return model_from_dict(json.loads(text))


def save_model(model: GBSTModel, path) -> None:
    with open(path, "w") as fh:
        fh.write(dumps(model))


def load_model(path) -> GBSTModel:
    with open(path) as fh:
        return loads(fh.read())

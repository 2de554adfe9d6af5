#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""
代数・状態・チャネル・測度・戦略のJSON表現

複素数は [re, im] の組で表します。チャネル行列はブロック順・ブロック内列優先の
ベクトル化規約に従います。
"""

import json
import logging
from typing import Any, Callable, Dict, List, Optional, Tuple, TypeVar

import numpy as np

from retrodictor.core.algebra import DEFAULT_FLOOR, Algebra, Element, FaithfulState
from retrodictor.core.channels import Channel, from_kraus
from retrodictor.core.errors import MalformedInputError, RetrodictionError
from retrodictor.core.retrodiction import (
    STH,
    AveragedPetz,
    Bayes,
    Convex,
    DiscardPrepare,
    Measure,
    Petz,
    PhaseRule,
    RetrodictionStrategy,
    RotatedPetz,
    SuraceScandiClassical,
)

logger = logging.getLogger("Serialization")

SCHEMA_VERSION = "1.0"

T = TypeVar("T")


def _guard(kind: str, fn: Callable[[], T]) -> T:
    """変換中の KeyError/TypeError/ValueError を MalformedInputError に変換します。"""
    try:
        return fn()
    except RetrodictionError:
        raise
    except (KeyError, TypeError, ValueError, IndexError) as err:
        logger.error(f"{kind}のJSONが不正です: {err}")
        raise MalformedInputError(f"{kind}のJSONが不正です: {err}") from err


def complex_to_json(z: complex) -> List[float]:
    return [float(z.real), float(z.imag)]


def complex_from_json(value: Any) -> complex:
    if isinstance(value, (int, float)):
        return complex(value)
    if isinstance(value, list) and len(value) == 2:
        return complex(float(value[0]), float(value[1]))
    raise ValueError(f"複素数の表現が不正です: {value!r}")


def matrix_to_json(matrix: np.ndarray) -> List[List[List[float]]]:
    return [[complex_to_json(z) for z in row] for row in np.asarray(matrix)]


def matrix_from_json(value: Any) -> np.ndarray:
    rows = [[complex_from_json(z) for z in row] for row in value]
    if rows and any(len(r) != len(rows[0]) for r in rows):
        raise ValueError("行列の行の長さが揃っていません")
    return np.array(rows, dtype=complex)


def algebra_to_json(algebra: Algebra) -> Dict[str, Any]:
    return {"blocks": list(algebra.block_dims)}


def algebra_from_json(data: Dict[str, Any]) -> Algebra:
    return _guard("代数", lambda: Algebra(tuple(int(m) for m in data["blocks"])))


def element_to_json(element: Element) -> Dict[str, Any]:
    return {
        "algebra": algebra_to_json(element.algebra),
        "blocks": [matrix_to_json(b) for b in element.blocks],
    }


def element_from_json(data: Dict[str, Any]) -> Element:
    def _load() -> Element:
        algebra = algebra_from_json(data["algebra"])
        return Element(algebra, [matrix_from_json(b) for b in data["blocks"]])

    return _guard("元", _load)


def state_to_json(state: FaithfulState) -> Dict[str, Any]:
    data = element_to_json(state.element)
    data["floor"] = state.floor
    return data


def state_from_json(data: Dict[str, Any]) -> FaithfulState:
    """
    状態を読み込みます。可換代数の場合は {"probabilities": [...]} の短縮形も受け付けます。
    """

    def _load() -> FaithfulState:
        floor = float(data.get("floor", DEFAULT_FLOOR))
        if "probabilities" in data:
            return FaithfulState.from_probabilities([float(v) for v in data["probabilities"]], floor)
        return FaithfulState(element_from_json(data), floor=floor)

    return _guard("状態", _load)


def channel_to_json(channel: Channel) -> Dict[str, Any]:
    return {
        "source": algebra_to_json(channel.source),
        "target": algebra_to_json(channel.target),
        "matrix": matrix_to_json(channel.matrix),
    }


def channel_from_json(data: Dict[str, Any]) -> Channel:
    """
    チャネルを読み込みます。"matrix" の代わりに "kraus"（密なKraus演算子のリスト）も指定できます。
    """

    def _load() -> Channel:
        source = algebra_from_json(data["source"])
        target = algebra_from_json(data["target"])
        if "kraus" in data:
            return from_kraus(source, target, [matrix_from_json(k) for k in data["kraus"]])
        return Channel(source, target, matrix_from_json(data["matrix"]))

    return _guard("チャネル", _load)


def measure_to_json(measure: Measure) -> Dict[str, Any]:
    if measure.kind == "dirac":
        return {"kind": "dirac", "t": measure.points[0][0]}
    if measure.kind == "discrete":
        return {"kind": "discrete", "points": [[t, w] for t, w in measure.points]}
    return {"kind": "jrsww", "quadrature_order": measure.quadrature_order}


def measure_from_json(data: Dict[str, Any]) -> Measure:
    def _load() -> Measure:
        kind = data["kind"]
        if kind == "dirac":
            return Measure.dirac(float(data["t"]))
        if kind == "discrete":
            return Measure.discrete([(float(t), float(w)) for t, w in data["points"]])
        if kind == "jrsww":
            if "quadrature_order" in data:
                return Measure.jrsww(int(data["quadrature_order"]))
            return Measure.jrsww()
        raise ValueError(f"未対応の測度です: {kind}")

    return _guard("測度", _load)


def strategy_to_json(strategy: RetrodictionStrategy) -> Dict[str, Any]:
    if isinstance(strategy, RotatedPetz):
        return {"kind": "rotated", "t": strategy.t}
    if isinstance(strategy, AveragedPetz):
        return {"kind": "averaged", "measure": measure_to_json(strategy.measure)}
    if isinstance(strategy, STH):
        rule = strategy.phase_rule
        return {
            "kind": "sth",
            "unitaries": {key: element_to_json(u) for key, u in sorted(strategy.unitaries.items())},
            "phase_rule": None
            if rule is None
            else {"kappa_spectral": rule.kappa_spectral, "kappa_position": rule.kappa_position},
        }
    if isinstance(strategy, Convex):
        return {
            "kind": "convex",
            "terms": [{"weight": w, "strategy": strategy_to_json(s)} for w, s in strategy.terms],
        }
    return {"kind": strategy.kind}


_SIMPLE_STRATEGIES: Dict[str, Callable[[], RetrodictionStrategy]] = {
    "petz": Petz,
    "discard": DiscardPrepare,
    "bayes": Bayes,
    "ss": SuraceScandiClassical,
}


def strategy_from_json(data: Dict[str, Any]) -> RetrodictionStrategy:
    def _load() -> RetrodictionStrategy:
        kind = data["kind"]
        if kind in _SIMPLE_STRATEGIES:
            return _SIMPLE_STRATEGIES[kind]()
        if kind == "rotated":
            return RotatedPetz(float(data["t"]))
        if kind == "averaged":
            return AveragedPetz(measure_from_json(data["measure"]))
        if kind == "sth":
            unitaries = {
                str(key): element_from_json(value)
                for key, value in data.get("unitaries", {}).items()
            }
            rule_data = data.get("phase_rule", {})
            rule = None if rule_data is None else PhaseRule(**{k: float(v) for k, v in rule_data.items()})
            return STH(unitaries, rule)
        if kind == "convex":
            return Convex(
                [(float(t["weight"]), strategy_from_json(t["strategy"])) for t in data["terms"]]
            )
        raise ValueError(f"未対応の戦略です: {kind}")

    return _guard("戦略", _load)


def instance_to_json(prior: FaithfulState, channel: Channel) -> Dict[str, Any]:
    return {"prior": state_to_json(prior), "channel": channel_to_json(channel)}


def instance_from_json(data: Dict[str, Any]) -> Tuple[FaithfulState, Channel]:
    def _load() -> Tuple[FaithfulState, Channel]:
        prior = state_from_json(data["prior"])
        channel = channel_from_json(data["channel"])
        if channel.source != prior.algebra:
            raise ValueError(f"事前状態の代数がチャネルの入力と一致しません: {prior.algebra} != {channel.source}")
        return prior, channel

    return _guard("インスタンス", _load)


def parse_strategy(text: str) -> RetrodictionStrategy:
    """コマンドライン引数の戦略JSON文字列を読み込みます。"""
    return strategy_from_json(loads(text))


def loads(text: str) -> Any:
    try:
        return json.loads(text)
    except json.JSONDecodeError as err:
        logger.error(f"JSONの解析に失敗しました: {err}")
        raise MalformedInputError(f"JSONの解析に失敗しました: {err}") from err


def dumps(payload: Dict[str, Any], indent: Optional[int] = 2) -> str:
    """
    schema_version を付けてJSON文字列にします。浮動小数点数は往復で値が変わらない最短表現です。
    """
    document = {"schema_version": SCHEMA_VERSION}
    document.update(payload)
    return json.dumps(document, indent=indent, ensure_ascii=False, sort_keys=False)


_COMPLEX = {"type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 2}
_MATRIX = {"type": "array", "items": {"type": "array", "items": _COMPLEX}}
_ALGEBRA = {
    "type": "object",
    "required": ["blocks"],
    "properties": {"blocks": {"type": "array", "items": {"type": "integer", "minimum": 1}}},
}

SCHEMAS: Dict[str, Dict[str, Any]] = {
    "algebra": _ALGEBRA,
    "element": {
        "type": "object",
        "required": ["algebra", "blocks"],
        "properties": {"algebra": _ALGEBRA, "blocks": {"type": "array", "items": _MATRIX}},
    },
    "state": {
        "type": "object",
        "description": "element + floor、または可換代数の場合は probabilities",
        "properties": {
            "algebra": _ALGEBRA,
            "blocks": {"type": "array", "items": _MATRIX},
            "probabilities": {"type": "array", "items": {"type": "number"}},
            "floor": {"type": "number"},
        },
    },
    "channel": {
        "type": "object",
        "required": ["source", "target"],
        "description": "ベクトル化: ブロック順、ブロック内は列優先",
        "properties": {
            "source": _ALGEBRA,
            "target": _ALGEBRA,
            "matrix": _MATRIX,
            "kraus": {"type": "array", "items": _MATRIX},
        },
    },
    "instance": {
        "type": "object",
        "required": ["prior", "channel"],
        "properties": {"prior": {"$ref": "#/state"}, "channel": {"$ref": "#/channel"}},
    },
    "measure": {
        "type": "object",
        "required": ["kind"],
        "properties": {
            "kind": {"enum": ["dirac", "discrete", "jrsww"]},
            "t": {"type": "number"},
            "points": {"type": "array", "items": {"type": "array", "items": {"type": "number"}}},
            "quadrature_order": {"type": "integer", "description": "パネルあたりの求積点数"},
        },
    },
    "strategy": {
        "type": "object",
        "required": ["kind"],
        "properties": {
            "kind": {"enum": ["petz", "rotated", "averaged", "sth", "discard", "bayes", "ss", "convex"]},
            "t": {"type": "number"},
            "measure": {"$ref": "#/measure"},
            "unitaries": {"type": "object", "additionalProperties": {"$ref": "#/element"}},
            "phase_rule": {"type": ["object", "null"]},
            "terms": {
                "type": "array",
                "items": {
                    "type": "object",
                    "properties": {"weight": {"type": "number"}, "strategy": {"$ref": "#/strategy"}},
                },
            },
        },
    },
}

#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""
レトロディクションの公理の検査と、戦略ごとの成立表の作成

各検査はインスタンス集合の上で偏差の最大値を求め、許容誤差を超えたインスタンスを
反例（JSONで再現可能）として記録します。
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import pandas as pd

from retrodictor.core.algebra import DEFAULT_TOL, FaithfulState
from retrodictor.core.channels import (
    Channel,
    apply,
    channel_distance,
    compose,
    identity_channel,
    invert_iso,
    predict,
    random_faithful_state,
    tensor,
)
from retrodictor.core.errors import (
    InapplicableStrategyError,
    InfeasibleInstanceError,
    MalformedInputError,
    NotCPTPError,
    NotFaithfulError,
)
from retrodictor.core.retrodiction import (
    STH,
    AveragedPetz,
    DiscardPrepare,
    Petz,
    RetrodictionStrategy,
    RotatedPetz,
    SuraceScandiClassical,
    bayes_inverse,
    evaluate,
    iterate,
)
from retrodictor.core.serialization import strategy_to_json
from retrodictor.core.suite import (
    ComposableInstance,
    Instance,
    InstanceSuite,
    SingleInstance,
    TensorInstance,
    load_instance,
)

logger = logging.getLogger("AxiomHarness")


class Axiom(str, Enum):
    STATE_PRESERVATION = "state_preservation"
    NORMALIZATION = "normalization"
    COMPOSITION_STABILIZING = "composition_stabilizing"
    COMPOSITIONALITY = "compositionality"
    TENSOR_STABILIZING = "tensor_stabilizing"
    TENSORIALITY = "tensoriality"
    INVERTING = "inverting"
    INVOLUTIVITY = "involutivity"
    BAYES_ON_CSTATES = "bayes_on_cstates"

    @property
    def label(self) -> str:
        return AXIOM_LABELS[self]


AXIOM_LABELS = {
    Axiom.STATE_PRESERVATION: "State preservation",
    Axiom.NORMALIZATION: "Normalization",
    Axiom.COMPOSITION_STABILIZING: "∘-stabilizing",
    Axiom.COMPOSITIONALITY: "Compositionality",
    Axiom.TENSOR_STABILIZING: "⊗-stabilizing",
    Axiom.TENSORIALITY: "Tensoriality",
    Axiom.INVERTING: "Inverting",
    Axiom.INVOLUTIVITY: "Involutivity",
    Axiom.BAYES_ON_CSTATES: "Bayes on CStates",
}

HOLDS = "holds"
FAILS = "fails"
OBSERVED = "observed"
NOT_APPLICABLE = "not_applicable"

_SYMBOLS = {HOLDS: "✓", FAILS: "✗", OBSERVED: "?", NOT_APPLICABLE: "-"}


@dataclass(frozen=True)
class Verdict:
    """
    検査結果

    kind は holds / fails / observed / not_applicable のいずれかです。
    fails の場合 witness に反例インスタンスのJSONを持ちます。
    """

    kind: str
    deviation: float = 0.0
    witness: Optional[Dict[str, Any]] = None

    @property
    def symbol(self) -> str:
        return _SYMBOLS[self.kind]

    def to_json(self) -> Dict[str, Any]:
        data: Dict[str, Any] = {"kind": self.kind, "deviation": self.deviation}
        if self.witness is not None:
            data["witness"] = self.witness
        return data


@dataclass
class AxiomCheck:
    axiom: Axiom
    strategy: str
    verdict: Verdict
    tolerance: float
    checked: int = 0
    skipped: int = 0

    @property
    def holds(self) -> bool:
        return self.verdict.kind == HOLDS

    def to_json(self) -> Dict[str, Any]:
        return {
            "axiom": self.axiom.value,
            "strategy": self.strategy,
            "verdict": self.verdict.to_json(),
            "tolerance": self.tolerance,
            "checked": self.checked,
            "skipped": self.skipped,
        }


# ---------------------------------------------------------------------------
# インスタンスごとの偏差
# ---------------------------------------------------------------------------


def _state_preservation(s: RetrodictionStrategy, inst: SingleInstance, tol: float) -> float:
    recovery = evaluate(s, inst.prior, inst.channel, tol)
    beta = predict(inst.channel, inst.prior)
    return (apply(recovery, beta.element) - inst.prior.element).norm()


def _normalization(s: RetrodictionStrategy, inst: SingleInstance, tol: float) -> float:
    ident = identity_channel(inst.prior.algebra)
    return channel_distance(evaluate(s, inst.prior, ident, tol), ident)


def _compositionality(s: RetrodictionStrategy, inst: ComposableInstance, tol: float) -> float:
    beta = predict(inst.first, inst.prior)
    direct = evaluate(s, inst.prior, compose(inst.second, inst.first), tol)
    composite = compose(evaluate(s, inst.prior, inst.first, tol), evaluate(s, beta, inst.second, tol))
    return channel_distance(direct, composite)


def _tensoriality(s: RetrodictionStrategy, inst: TensorInstance, tol: float) -> float:
    left, right = inst.left, inst.right
    joint = evaluate(s, left.prior.tensor(right.prior), tensor(left.channel, right.channel), tol)
    product = tensor(
        evaluate(s, left.prior, left.channel, tol), evaluate(s, right.prior, right.channel, tol)
    )
    return channel_distance(joint, product)


def _inverting(s: RetrodictionStrategy, inst: SingleInstance, tol: float) -> float:
    return channel_distance(evaluate(s, inst.prior, inst.channel, tol), invert_iso(inst.channel))


def _involutivity(s: RetrodictionStrategy, inst: SingleInstance, tol: float) -> float:
    return channel_distance(iterate(s, inst.prior, inst.channel, tol), inst.channel)


def _bayes(s: RetrodictionStrategy, inst: SingleInstance, tol: float) -> float:
    return channel_distance(
        evaluate(s, inst.prior, inst.channel, tol), bayes_inverse(inst.prior, inst.channel)
    )


DEVIATIONS: Dict[Axiom, Callable[[RetrodictionStrategy, Any, float], float]] = {
    Axiom.STATE_PRESERVATION: _state_preservation,
    Axiom.NORMALIZATION: _normalization,
    Axiom.COMPOSITIONALITY: _compositionality,
    Axiom.COMPOSITION_STABILIZING: _compositionality,
    Axiom.TENSORIALITY: _tensoriality,
    Axiom.TENSOR_STABILIZING: _tensoriality,
    Axiom.INVERTING: _inverting,
    Axiom.INVOLUTIVITY: _involutivity,
    Axiom.BAYES_ON_CSTATES: _bayes,
}


def _is_commutative(inst: Instance) -> bool:
    if isinstance(inst, SingleInstance):
        return inst.channel.source.is_commutative and inst.channel.target.is_commutative
    if isinstance(inst, ComposableInstance):
        return all(
            a.is_commutative for a in (inst.first.source, inst.first.target, inst.second.target)
        )
    return _is_commutative(inst.left) and _is_commutative(inst.right)


def _commutative_singles(suite: InstanceSuite) -> List[SingleInstance]:
    return [inst for inst in suite.singles() + suite.commutative_singles() if _is_commutative(inst)]


def _instances_for(axiom: Axiom, suite: InstanceSuite, s: RetrodictionStrategy) -> List[Any]:
    if axiom == Axiom.BAYES_ON_CSTATES:
        return _commutative_singles(suite)
    pools: Dict[Axiom, Callable[[], List[Any]]] = {
        Axiom.STATE_PRESERVATION: suite.singles,
        Axiom.NORMALIZATION: suite.singles,
        Axiom.COMPOSITIONALITY: suite.compose_pairs,
        Axiom.COMPOSITION_STABILIZING: suite.covariant_compose_pairs,
        Axiom.TENSORIALITY: suite.tensor_pairs,
        Axiom.TENSOR_STABILIZING: suite.covariant_tensor_pairs,
        Axiom.INVERTING: suite.isomorphisms,
        Axiom.INVOLUTIVITY: suite.singles,
    }
    instances = pools[axiom]()
    if s.commutative_only:
        extra = suite.commutative_singles() if axiom in (
            Axiom.STATE_PRESERVATION,
            Axiom.NORMALIZATION,
            Axiom.INVOLUTIVITY,
        ) else []
        instances = [inst for inst in instances + extra if _is_commutative(inst)]
    return instances


def _witness(axiom: Axiom, s: RetrodictionStrategy, inst: Instance, deviation: float, tol: float) -> Dict[str, Any]:
    return {
        "axiom": axiom.value,
        "strategy": strategy_to_json(s),
        "tolerance": tol,
        "deviation": deviation,
        "instance": inst.to_json(),
    }


def run_check(
    axiom: Axiom,
    s: RetrodictionStrategy,
    suite: InstanceSuite,
    tol: Optional[float] = None,
    observed: bool = False,
) -> AxiomCheck:
    """
    公理をインスタンス集合の上で検査します。

    Args:
        axiom: 検査する公理
        s: 戦略
        suite: インスタンス集合
        tol: 許容誤差（省略時は戦略に応じて suite から決定）
        observed: True の場合は成立・不成立を判定せず偏差のみを記録

    Returns:
        検査結果
    """
    tol = suite.tolerance_for(s) if tol is None else tol
    deviation_fn = DEVIATIONS[axiom]
    worst_deviation = 0.0
    worst_instance: Optional[Instance] = None
    checked = 0
    skipped = 0

    for inst in _instances_for(axiom, suite, s):
        try:
            deviation = float(deviation_fn(s, inst, tol))
        except (InapplicableStrategyError, InfeasibleInstanceError, NotCPTPError, NotFaithfulError) as err:
            skipped += 1
            logger.warning(f"{s.label} / {axiom.label}: インスタンス {inst.name} をスキップします: {err}")
            continue
        checked += 1
        logger.debug(f"{s.label} / {axiom.label}: {inst.name} 偏差 {deviation:.3e}")
        if worst_instance is None or deviation > worst_deviation:
            worst_deviation = deviation
            worst_instance = inst

    if worst_instance is None:
        verdict = Verdict(NOT_APPLICABLE)
    elif observed:
        verdict = Verdict(OBSERVED, worst_deviation)
    elif worst_deviation > tol:
        verdict = Verdict(FAILS, worst_deviation, _witness(axiom, s, worst_instance, worst_deviation, tol))
    else:
        verdict = Verdict(HOLDS, worst_deviation)

    logger.info(
        f"{s.label} / {axiom.label}: {verdict.symbol} (最大偏差 {verdict.deviation:.3e}, "
        f"検査 {checked} 件, スキップ {skipped} 件)"
    )
    return AxiomCheck(axiom, s.label, verdict, tol, checked, skipped)


def check_state_preservation(s: RetrodictionStrategy, suite: InstanceSuite, tol: Optional[float] = None) -> AxiomCheck:
    """ℛ_{α,ℰ}(ℰ(α)) = α"""
    return run_check(Axiom.STATE_PRESERVATION, s, suite, tol)


def check_normalization(s: RetrodictionStrategy, suite: InstanceSuite, tol: Optional[float] = None) -> AxiomCheck:
    """ℛ_{α,id} = id"""
    return run_check(Axiom.NORMALIZATION, s, suite, tol)


def check_compositionality(s: RetrodictionStrategy, suite: InstanceSuite, tol: Optional[float] = None) -> AxiomCheck:
    """ℛ_{α,ℱ∘ℰ} = ℛ_{α,ℰ}∘ℛ_{β,ℱ}"""
    return run_check(Axiom.COMPOSITIONALITY, s, suite, tol)


def check_tensoriality(s: RetrodictionStrategy, suite: InstanceSuite, tol: Optional[float] = None) -> AxiomCheck:
    """ℛ_{α⊗α′,ℰ⊗ℰ′} = ℛ_{α,ℰ}⊗ℛ_{α′,ℰ′}"""
    return run_check(Axiom.TENSORIALITY, s, suite, tol)


def check_stabilizing(
    s: RetrodictionStrategy, suite: InstanceSuite, tol: Optional[float] = None, mode: str = "∘"
) -> AxiomCheck:
    """
    どちらかの因子が共変な組に限った合成性（mode="∘"）またはテンソル性（mode="⊗"）

    Raises:
        ValueError: mode が不正な場合
    """
    if mode in ("∘", "compose", "composition"):
        return run_check(Axiom.COMPOSITION_STABILIZING, s, suite, tol)
    if mode in ("⊗", "tensor"):
        return run_check(Axiom.TENSOR_STABILIZING, s, suite, tol)
    logger.error(f"未対応の安定性モードです: {mode}")
    raise ValueError(f"安定性のモードは ∘ または ⊗ で指定してください: {mode}")


def check_inverting(s: RetrodictionStrategy, suite: InstanceSuite, tol: Optional[float] = None) -> AxiomCheck:
    """ℰ が *-同型なら ℛ_{α,ℰ} = ℰ⁻¹"""
    return run_check(Axiom.INVERTING, s, suite, tol)


def check_involutivity(s: RetrodictionStrategy, suite: InstanceSuite, tol: Optional[float] = None) -> AxiomCheck:
    """ℛ_{β,ℛ_{α,ℰ}} = ℰ"""
    return run_check(Axiom.INVOLUTIVITY, s, suite, tol)


def check_bayes_on_cstates(s: RetrodictionStrategy, suite: InstanceSuite, tol: Optional[float] = None) -> AxiomCheck:
    """可換代数上でベイズ逆に一致する"""
    return run_check(Axiom.BAYES_ON_CSTATES, s, suite, tol)


def replay_witness(s: RetrodictionStrategy, witness: Dict[str, Any]) -> float:
    """
    反例のJSONからインスタンスを復元し、偏差を再計算します。

    Raises:
        MalformedInputError: 反例の形式が不正な場合
    """
    try:
        axiom = Axiom(witness["axiom"])
        instance_data = witness["instance"]
    except (KeyError, TypeError, ValueError) as err:
        logger.error(f"反例のJSONが不正です: {err}")
        raise MalformedInputError(f"反例のJSONが不正です: {err}") from err
    tol = float(witness.get("tolerance", DEFAULT_TOL))
    deviation = float(DEVIATIONS[axiom](s, load_instance(instance_data), tol))
    logger.info(f"反例を再計算しました: {axiom.label} 偏差 {deviation:.3e}")
    return deviation


def prior_independence(
    s: RetrodictionStrategy, e: Channel, seeds: Sequence[int], floor_scale: float = 0.02
) -> float:
    """
    異なるランダム事前状態で評価した回復写像どうしの距離の最大値

    *-同型に対して Petz型の戦略は事前状態によらず ℰ⁻¹ になるため 0 に近くなります。
    """
    floor = floor_scale / e.source.matrix_dim
    recoveries = []
    for seed in seeds:
        prior: FaithfulState = random_faithful_state(e.source, floor, seed)
        recoveries.append(evaluate(s, prior, e))
    worst = 0.0
    for i, first in enumerate(recoveries):
        for second in recoveries[i + 1:]:
            worst = max(worst, channel_distance(first, second))
    return worst


# ---------------------------------------------------------------------------
# 成立表
# ---------------------------------------------------------------------------


TABLE_AXIOMS: List[Axiom] = list(Axiom)


def table_strategies() -> List[RetrodictionStrategy]:
    return [Petz(), RotatedPetz(0.5), AveragedPetz(), STH(), DiscardPrepare(), SuraceScandiClassical()]


def _column(
    normalization: bool,
    composition_stabilizing: bool,
    compositionality: bool,
    tensor_stabilizing: Optional[bool],
    tensoriality: Optional[bool],
    inverting: bool,
    involutivity: bool,
    bayes: bool,
) -> Dict[Axiom, Optional[bool]]:
    return {
        Axiom.STATE_PRESERVATION: True,
        Axiom.NORMALIZATION: normalization,
        Axiom.COMPOSITION_STABILIZING: composition_stabilizing,
        Axiom.COMPOSITIONALITY: compositionality,
        Axiom.TENSOR_STABILIZING: tensor_stabilizing,
        Axiom.TENSORIALITY: tensoriality,
        Axiom.INVERTING: inverting,
        Axiom.INVOLUTIVITY: involutivity,
        Axiom.BAYES_ON_CSTATES: bayes,
    }


# None は成立・不成立が知られていないセル（偏差のみ記録する）
EXPECTED_VERDICTS: Dict[str, Dict[Axiom, Optional[bool]]] = {
    "Petz": _column(True, True, True, True, True, True, True, True),
    "Rotated(t=0.5)": _column(True, True, True, True, True, True, False, True),
    "Averaged(JRSWW)": _column(True, True, False, True, False, True, False, True),
    "STH": _column(True, True, True, False, False, False, False, True),
    "DiscardPrepare": _column(False, True, True, True, True, False, False, False),
    "SS-classical": _column(True, False, False, None, None, True, False, False),
}


@dataclass
class Mismatch:
    strategy: str
    axiom: Axiom
    expected: bool
    actual: str

    def to_json(self) -> Dict[str, Any]:
        return {
            "strategy": self.strategy,
            "axiom": self.axiom.value,
            "expected": HOLDS if self.expected else FAILS,
            "actual": self.actual,
        }


@dataclass
class TableReport:
    """戦略 × 公理の検査結果"""

    strategies: List[str]
    axioms: List[Axiom]
    checks: List[AxiomCheck]
    mismatches: List[Mismatch] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.mismatches

    def cell(self, strategy: str, axiom: Axiom) -> AxiomCheck:
        for check in self.checks:
            if check.strategy == strategy and check.axiom == axiom:
                return check
        raise KeyError(f"{strategy} / {axiom.value}")

    @property
    def observed(self) -> List[AxiomCheck]:
        return [c for c in self.checks if c.verdict.kind == OBSERVED]

    def to_frame(self) -> pd.DataFrame:
        data = {
            strategy: [self.cell(strategy, axiom).verdict.symbol for axiom in self.axioms]
            for strategy in self.strategies
        }
        return pd.DataFrame(data, index=[axiom.label for axiom in self.axioms])

    def deviation_frame(self) -> pd.DataFrame:
        data = {
            strategy: [self.cell(strategy, axiom).verdict.deviation for axiom in self.axioms]
            for strategy in self.strategies
        }
        return pd.DataFrame(data, index=[axiom.label for axiom in self.axioms])

    def to_csv(self, path: str) -> None:
        frame = self.to_frame()
        frame.index.name = "axiom"
        frame.to_csv(path)
        logger.info(f"成立表をCSVファイルに出力しました: {path}")

    def to_json(self) -> Dict[str, Any]:
        return {
            "strategies": list(self.strategies),
            "axioms": [axiom.value for axiom in self.axioms],
            "cells": [check.to_json() for check in self.checks],
            "observed": [check.to_json() for check in self.observed],
            "mismatches": [m.to_json() for m in self.mismatches],
            "ok": self.ok,
        }

    def to_text(self) -> str:
        lines = [self.to_frame().to_string()]
        if self.observed:
            lines.append("")
            lines.append("観測値（判定しないセル）:")
            for check in self.observed:
                lines.append(f"  {check.strategy} / {check.axiom.label}: 最大偏差 {check.verdict.deviation:.3e}")
        lines.append("")
        if self.mismatches:
            lines.append("期待と一致しないセル:")
            for m in self.mismatches:
                expected = _SYMBOLS[HOLDS] if m.expected else _SYMBOLS[FAILS]
                lines.append(f"  {m.strategy} / {m.axiom.label}: 期待 {expected}, 結果 {_SYMBOLS[m.actual]}")
        else:
            lines.append("すべてのセルが期待と一致しました")
        return "\n".join(lines)


def _compare(check: AxiomCheck, expected: Optional[bool]) -> Optional[Mismatch]:
    if expected is None:
        return None
    actual = check.verdict.kind
    if actual == NOT_APPLICABLE or (actual == HOLDS) != expected:
        return Mismatch(check.strategy, check.axiom, expected, actual)
    return None


def build_table(
    strategies: Optional[Sequence[RetrodictionStrategy]] = None,
    suite: Optional[InstanceSuite] = None,
    workers: int = 1,
    expected: Optional[Dict[str, Dict[Axiom, Optional[bool]]]] = None,
    axioms: Optional[Sequence[Axiom]] = None,
) -> TableReport:
    """
    すべての戦略と公理の組を検査して成立表を作成します。

    結果は実行順によらず (戦略, 公理) の順に並びます。

    Args:
        strategies: 戦略のリスト（省略時は6戦略）
        suite: インスタンス集合（省略時は既定値）
        workers: 並列に実行するスレッド数
        expected: 戦略ラベルごとの期待値（None のセルは観測のみ）
        axioms: 検査する公理（省略時はすべて）

    Returns:
        成立表
    """
    strategies = list(strategies) if strategies is not None else table_strategies()
    suite = suite or InstanceSuite.default()
    expected = EXPECTED_VERDICTS if expected is None else expected
    axioms = list(axioms) if axioms is not None else TABLE_AXIOMS

    # インスタンス生成はスレッドに分ける前に済ませる
    suite.covariant_compose_pairs()
    suite.covariant_tensor_pairs()
    suite.isomorphisms()
    suite.commutative_singles()

    tasks: List[Tuple[RetrodictionStrategy, Axiom, bool]] = []
    for strategy in strategies:
        column = expected.get(strategy.label, {})
        for axiom in axioms:
            observed = axiom in column and column[axiom] is None
            tasks.append((strategy, axiom, observed))

    logger.info(f"成立表の作成を開始します: 戦略 {len(strategies)} 個 × 公理 {len(axioms)} 個")
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            checks = list(pool.map(lambda task: run_check(task[1], task[0], suite, observed=task[2]), tasks))
    else:
        checks = [run_check(axiom, strategy, suite, observed=observed) for strategy, axiom, observed in tasks]

    mismatches = []
    for check in checks:
        mismatch = _compare(check, expected.get(check.strategy, {}).get(check.axiom))
        if mismatch is not None:
            logger.error(
                f"期待と一致しないセルがあります: {check.strategy} / {check.axiom.label} ({check.verdict.kind})"
            )
            mismatches.append(mismatch)

    report = TableReport([s.label for s in strategies], axioms, checks, mismatches)
    logger.info(f"成立表の作成が完了しました: 不一致 {len(mismatches)} 件")
    return report



#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""
レトロディクション戦略（Petz回復写像とその変種）のモジュール

各戦略は (事前状態 α, チャネル ℰ) の組から逆向きのチャネル ℛ_{α,ℰ} を返します。
"""

import logging
from collections import OrderedDict
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from retrodictor.core.algebra import DEFAULT_TOL, Element, FaithfulState, element_power
from retrodictor.core.channels import (
    Channel,
    conjugation_superoperator,
    is_cptp,
    predict,
)
from retrodictor.core.errors import (
    InapplicableStrategyError,
    NonCommutingUnitaryError,
    NotCPTPError,
)
from retrodictor.core.quadrature import (
    DEFAULT_ORDER,
    characteristic_from_nodes,
    jrsww_characteristic_exact,
    jrsww_nodes,
)
from retrodictor.core.surace_scandi import surace_scandi_matrix

logger = logging.getLogger("Retrodiction")

WEIGHT_TOL = 1e-12


@dataclass(frozen=True)
class Measure:
    """
    回転パラメータ t 上の確率測度

    kind は "dirac" / "discrete" / "jrsww" のいずれかです。
    JRSWW測度の quadrature_order はパネルあたりの Gauss–Legendre 点数で、全体の点数は
    2 × quadrature_order × DEFAULT_PANELS（既定 16 × 53 × 2 = 1696 点）です。
    """

    kind: str
    points: Tuple[Tuple[float, float], ...] = ()
    quadrature_order: int = DEFAULT_ORDER

    def __post_init__(self) -> None:
        if self.kind not in ("dirac", "discrete", "jrsww"):
            raise ValueError(f"未対応の測度です: {self.kind}")
        if self.kind == "discrete":
            if not self.points:
                raise ValueError("離散測度の点が空です")
            if any(w <= 0 for _, w in self.points):
                raise ValueError("離散測度の重みは正である必要があります")
            total = sum(w for _, w in self.points)
            if abs(total - 1.0) > WEIGHT_TOL:
                raise ValueError(f"離散測度の重みの和が1ではありません: {total}")
        if self.kind == "dirac" and len(self.points) != 1:
            raise ValueError("ディラック測度は1点で指定してください")

    @classmethod
    def dirac(cls, t: float) -> "Measure":
        return cls("dirac", ((float(t), 1.0),))

    @classmethod
    def discrete(cls, points: Sequence[Tuple[float, float]]) -> "Measure":
        return cls("discrete", tuple((float(t), float(w)) for t, w in points))

    @classmethod
    def jrsww(cls, quadrature_order: int = DEFAULT_ORDER) -> "Measure":
        """
        JRSWW測度 dμ(t) = π/(cosh 2πt + 1) dt

        Args:
            quadrature_order: パネルあたりの求積点数（全点数ではありません）
        """
        return cls("jrsww", (), quadrature_order)

    def nodes(self) -> Tuple[np.ndarray, np.ndarray]:
        if self.kind == "jrsww":
            return jrsww_nodes(self.quadrature_order)
        ts = np.array([t for t, _ in self.points], dtype=float)
        ws = np.array([w for _, w in self.points], dtype=float)
        return ts, ws

    @property
    def node_count(self) -> int:
        return len(self.nodes()[0])

    def characteristic(self, omega: np.ndarray, exact: bool = False) -> np.ndarray:
        """
        特性関数 ∫e^{iωt} dμ(t)。exact=True の場合、JRSWW測度は閉形式を使います。
        """
        if exact and self.kind == "jrsww":
            return jrsww_characteristic_exact(omega).astype(complex)
        ts, ws = self.nodes()
        return characteristic_from_nodes(omega, ts, ws)

    @property
    def label(self) -> str:
        if self.kind == "dirac":
            return f"δ({self.points[0][0]:g})"
        if self.kind == "discrete":
            return "Σ" + ",".join(f"{w:g}δ({t:g})" for t, w in self.points)
        return "JRSWW"


def convolve(mu: Measure, nu: Measure) -> Measure:
    """
    離散測度同士の畳み込み μ∗ν を返します。
    """
    if mu.kind == "jrsww" or nu.kind == "jrsww":
        raise ValueError("JRSWW測度の畳み込みは離散表現を持ちません")
    merged: Dict[float, float] = OrderedDict()
    for t, w in mu.points:
        for s, v in nu.points:
            key = round(t + s, 15)
            merged[key] = merged.get(key, 0.0) + w * v
    points = sorted(merged.items())
    if len(points) == 1:
        return Measure.dirac(points[0][0])
    # 丸め誤差で重みの和が1からずれないように正規化する
    total = sum(w for _, w in points)
    return Measure.discrete([(t, w / total) for t, w in points])


def _require_cptp(e: Channel, tol: float) -> None:
    ok, message = is_cptp(e, tol)
    if not ok:
        logger.error(f"チャネルがCPTPではありません: {message}")
        raise NotCPTPError(f"チャネルがCPTPではありません: {message}")


def _petz_sandwich(alpha: FaithfulState, beta: FaithfulState, e: Channel, t: float) -> Channel:
    left = conjugation_superoperator(element_power(alpha, 0.5 - 1j * t))
    right = conjugation_superoperator(element_power(beta, -0.5 + 1j * t))
    return Channel(e.target, e.source, left @ e.matrix.conj().T @ right)


def petz(alpha: FaithfulState, e: Channel, tol: float = DEFAULT_TOL) -> Channel:
    """
    Petz回復写像 Ad_{α^{1/2}} ∘ ℰ* ∘ Ad_{β^{−1/2}}

    Raises:
        NotCPTPError: ℰ がCPTPでない場合
        NotFaithfulError: β = ℰ(α) が忠実でない場合
    """
    _require_cptp(e, tol)
    beta = predict(e, alpha)
    return _petz_sandwich(alpha, beta, e, 0.0)


def rotated_petz(alpha: FaithfulState, e: Channel, t: float, tol: float = DEFAULT_TOL) -> Channel:
    """回転Petz写像 Ad_{α^{1/2−it}} ∘ ℰ* ∘ Ad_{β^{−1/2+it}}"""
    _require_cptp(e, tol)
    beta = predict(e, alpha)
    return _petz_sandwich(alpha, beta, e, t)


def _eigenbasis(state: FaithfulState) -> Tuple[np.ndarray, np.ndarray]:
    """
    固有基底への超演算子と、各行列単位 |wᵢ⟩⟨wⱼ| のモジュラー周波数 ln λᵢ − ln λⱼ を返します。
    """
    basis = Element(state.algebra, state.eigenvectors)
    frequencies = []
    for vals in state.eigenvalues:
        logs = np.log(vals)
        # 列優先: (row, col) の順で row が速く回る
        frequencies.append(np.subtract.outer(logs, logs).reshape(-1, order="F"))
    return conjugation_superoperator(basis), np.concatenate(frequencies)


def modular_average(
    x: Channel,
    target_state: FaithfulState,
    source_state: FaithfulState,
    mu: Measure,
    exact: bool = False,
) -> Channel:
    """
    ∫ Ad_{target^{−it}} ∘ x ∘ Ad_{source^{it}} dμ(t) を計算します。

    両側の状態の固有基底では各成分が e^{it(ω_s − ω_t)} 倍されるだけなので、
    成分ごとに測度の特性関数を掛けて計算します。
    """
    s_target, freq_target = _eigenbasis(target_state)
    s_source, freq_source = _eigenbasis(source_state)
    kernel = s_target.conj().T @ x.matrix @ s_source
    omega = np.add.outer(-freq_target, freq_source)
    unique, inverse = np.unique(np.round(omega, 12), return_inverse=True)
    phases = mu.characteristic(unique, exact=exact)[inverse].reshape(omega.shape)
    matrix = s_target @ (kernel * phases) @ s_source.conj().T
    return Channel(x.source, x.target, matrix)


def averaged_petz(
    alpha: FaithfulState, e: Channel, mu: Measure, tol: float = DEFAULT_TOL, exact: bool = False
) -> Channel:
    """
    平均化回転Petz写像 ∫ ℛ^{P,t} dμ(t)

    Args:
        alpha: 事前状態
        e: チャネル
        mu: 回転パラメータの測度
        tol: CPTP判定の許容誤差
        exact: JRSWW測度で閉形式の特性関数を使う場合 True

    Returns:
        回復チャネル
    """
    if mu.kind == "dirac":
        return rotated_petz(alpha, e, mu.points[0][0], tol)
    _require_cptp(e, tol)
    beta = predict(e, alpha)
    base = _petz_sandwich(alpha, beta, e, 0.0)
    return modular_average(base, alpha, beta, mu, exact=exact)


def _check_unitary_for(state: FaithfulState, u: Element, tol: float) -> None:
    ident = Element.identity(state.algebra)
    if not (u @ u.dagger()).allclose(ident, tol):
        logger.error("STHのユニタリがユニタリではありません")
        raise NonCommutingUnitaryError("STHのユニタリがユニタリではありません")
    if not (u @ state.element @ u.dagger()).allclose(state.element, tol):
        logger.error("STHのユニタリが状態と可換ではありません")
        raise NonCommutingUnitaryError("STHのユニタリが状態を保存しません: UαU† ≠ α")


def sth(
    alpha: FaithfulState,
    e: Channel,
    u_alpha: Element,
    u_beta: Element,
    tol: float = DEFAULT_TOL,
) -> Channel:
    """STH回転Petz写像 Ad_{Uα†} ∘ ℛ^P ∘ Ad_{Uβ}"""
    _require_cptp(e, tol)
    beta = predict(e, alpha)
    _check_unitary_for(alpha, u_alpha, tol)
    _check_unitary_for(beta, u_beta, tol)
    base = _petz_sandwich(alpha, beta, e, 0.0)
    matrix = (
        conjugation_superoperator(u_alpha.dagger())
        @ base.matrix
        @ conjugation_superoperator(u_beta)
    )
    return Channel(e.target, e.source, matrix)


def discard_prepare(alpha: FaithfulState, e: Channel) -> Channel:
    """B ↦ tr(B)·α"""
    trace_row = Element.identity(e.target).vector()
    return Channel(e.target, e.source, np.outer(alpha.element.vector(), trace_row))


def _require_commutative(alpha: FaithfulState, e: Channel, name: str) -> None:
    if not (e.source.is_commutative and e.target.is_commutative):
        logger.error(f"{name}は可換代数上でのみ定義されます: {e}")
        raise InapplicableStrategyError(f"{name}は可換代数上でのみ定義されます: {e}")
    if alpha.algebra != e.source:
        raise InapplicableStrategyError("事前状態の代数がチャネルの入力と一致しません")


def bayes_inverse(p: FaithfulState, e: Channel) -> Channel:
    """ベイズ逆 Ē_{xy} = E_{yx} p_x / q_y"""
    _require_commutative(p, e, "ベイズ逆")
    q = predict(e, p)
    px = p.element.vector().real
    qy = q.element.vector().real
    matrix = np.diag(px) @ e.matrix.real.T @ np.diag(1.0 / qy)
    return Channel(e.target, e.source, matrix)


def surace_scandi_classical(p: FaithfulState, e: Channel, tol: float = DEFAULT_TOL) -> Channel:
    """古典Surace–Scandi写像"""
    _require_commutative(p, e, "古典Surace–Scandi写像")
    _require_cptp(e, tol)
    predict(e, p)
    matrix = surace_scandi_matrix(e.matrix.real, p.element.vector().real)
    return Channel(e.target, e.source, matrix)


@dataclass(frozen=True)
class PhaseRule:
    """
    明示的な割り当てのない状態に対するSTHユニタリの規則

    α の各スペクトル射影 Π_λ に位相 κ₁·λ + κ₂·tr(Π_λ N)/rank(Π_λ) を与えます
    （N はブロックごとの diag(0, 1, …)）。
    """

    kappa_spectral: float = 2.0
    kappa_position: float = 0.7

    def unitary_for(self, state: FaithfulState) -> Element:
        blocks = []
        for groups, m in zip(state.spectral_projectors(), state.algebra.block_dims):
            position = np.diag(np.arange(m, dtype=float))
            u = np.zeros((m, m), dtype=complex)
            for value, proj in groups:
                rank = np.trace(proj).real
                mean_position = np.trace(proj @ position).real / rank
                phase = self.kappa_spectral * value + self.kappa_position * mean_position
                u += np.exp(1j * phase) * proj
            blocks.append(u)
        return Element(state.algebra, blocks)


DEFAULT_PHASE_RULE = PhaseRule()


class RetrodictionStrategy:
    """レトロディクション戦略の基底クラス"""

    kind = "abstract"

    @property
    def label(self) -> str:
        return self.kind

    @property
    def approximate(self) -> bool:
        return False

    @property
    def commutative_only(self) -> bool:
        return False

    def evaluate(self, alpha: FaithfulState, e: Channel, tol: float = DEFAULT_TOL) -> Channel:
        raise NotImplementedError


class Petz(RetrodictionStrategy):
    kind = "petz"

    @property
    def label(self) -> str:
        return "Petz"

    def evaluate(self, alpha: FaithfulState, e: Channel, tol: float = DEFAULT_TOL) -> Channel:
        return petz(alpha, e, tol)


@dataclass(frozen=True)
class RotatedPetz(RetrodictionStrategy):
    t: float = 0.0
    kind = "rotated"

    @property
    def label(self) -> str:
        return f"Rotated(t={self.t:g})"

    def evaluate(self, alpha: FaithfulState, e: Channel, tol: float = DEFAULT_TOL) -> Channel:
        return rotated_petz(alpha, e, self.t, tol)


@dataclass(frozen=True)
class AveragedPetz(RetrodictionStrategy):
    measure: Measure = field(default_factory=Measure.jrsww)
    kind = "averaged"

    @property
    def label(self) -> str:
        return f"Averaged({self.measure.label})"

    @property
    def approximate(self) -> bool:
        return self.measure.kind == "jrsww"

    def evaluate(self, alpha: FaithfulState, e: Channel, tol: float = DEFAULT_TOL) -> Channel:
        return averaged_petz(alpha, e, self.measure, tol)


class STH(RetrodictionStrategy):
    """
    状態ごとに固定したユニタリを使うSTH回転Petz写像

    unitaries は状態の fingerprint をキーとする明示的な割り当てで、
    見つからない状態には phase_rule を適用します。
    """

    kind = "sth"

    def __init__(
        self,
        unitaries: Optional[Dict[str, Element]] = None,
        phase_rule: Optional[PhaseRule] = DEFAULT_PHASE_RULE,
    ):
        self.unitaries: Dict[str, Element] = dict(unitaries or {})
        self.phase_rule = phase_rule

    @classmethod
    def from_states(
        cls, assignment: Sequence[Tuple[FaithfulState, Element]], phase_rule: Optional[PhaseRule] = None
    ) -> "STH":
        return cls({state.fingerprint(): u for state, u in assignment}, phase_rule)

    @property
    def label(self) -> str:
        return "STH"

    def unitary_for(self, state: FaithfulState) -> Element:
        key = state.fingerprint()
        if key in self.unitaries:
            return self.unitaries[key]
        if self.phase_rule is None:
            logger.error(f"状態に対するSTHユニタリが登録されていません: {key}")
            raise InapplicableStrategyError(f"状態に対するSTHユニタリが登録されていません: {key}")
        return self.phase_rule.unitary_for(state)

    def evaluate(self, alpha: FaithfulState, e: Channel, tol: float = DEFAULT_TOL) -> Channel:
        beta = predict(e, alpha)
        return sth(alpha, e, self.unitary_for(alpha), self.unitary_for(beta), tol)


class DiscardPrepare(RetrodictionStrategy):
    kind = "discard"

    @property
    def label(self) -> str:
        return "DiscardPrepare"

    def evaluate(self, alpha: FaithfulState, e: Channel, tol: float = DEFAULT_TOL) -> Channel:
        return discard_prepare(alpha, e)


class Bayes(RetrodictionStrategy):
    kind = "bayes"

    @property
    def label(self) -> str:
        return "Bayes"

    @property
    def commutative_only(self) -> bool:
        return True

    def evaluate(self, alpha: FaithfulState, e: Channel, tol: float = DEFAULT_TOL) -> Channel:
        return bayes_inverse(alpha, e)


class SuraceScandiClassical(RetrodictionStrategy):
    kind = "ss"

    @property
    def label(self) -> str:
        return "SS-classical"

    @property
    def commutative_only(self) -> bool:
        return True

    @property
    def approximate(self) -> bool:
        # 最適化ソルバーの精度に依存する
        return True

    def evaluate(self, alpha: FaithfulState, e: Channel, tol: float = DEFAULT_TOL) -> Channel:
        return surace_scandi_classical(alpha, e, tol)


class Convex(RetrodictionStrategy):
    """戦略の凸結合 Σ wₖ ℛₖ"""

    kind = "convex"

    def __init__(self, terms: Sequence[Tuple[float, RetrodictionStrategy]]):
        if not terms:
            raise ValueError("凸結合の項が空です")
        if any(w <= 0 for w, _ in terms):
            raise ValueError("凸結合の重みは正である必要があります")
        total = sum(w for w, _ in terms)
        if abs(total - 1.0) > WEIGHT_TOL:
            raise ValueError(f"凸結合の重みの和が1ではありません: {total}")
        self.terms: List[Tuple[float, RetrodictionStrategy]] = [(float(w), s) for w, s in terms]

    @property
    def label(self) -> str:
        return "Convex[" + ", ".join(f"{w:g}·{s.label}" for w, s in self.terms) + "]"

    @property
    def approximate(self) -> bool:
        return any(s.approximate for _, s in self.terms)

    @property
    def commutative_only(self) -> bool:
        return any(s.commutative_only for _, s in self.terms)

    def evaluate(self, alpha: FaithfulState, e: Channel, tol: float = DEFAULT_TOL) -> Channel:
        first_weight, first = self.terms[0]
        result = first_weight * first.evaluate(alpha, e, tol)
        for w, strategy in self.terms[1:]:
            result = result + w * strategy.evaluate(alpha, e, tol)
        return result


def evaluate(
    strategy: RetrodictionStrategy, alpha: FaithfulState, e: Channel, tol: float = DEFAULT_TOL
) -> Channel:
    """戦略を (α, ℰ) で評価して回復チャネルを返します。"""
    if alpha.algebra != e.source:
        raise InapplicableStrategyError(
            f"事前状態の代数がチャネルの入力と一致しません: {alpha.algebra} != {e.source}"
        )
    return strategy.evaluate(alpha, e, tol)


def iterate(
    strategy: RetrodictionStrategy, alpha: FaithfulState, e: Channel, tol: float = DEFAULT_TOL
) -> Channel:
    """回復写像の回復写像 ℛ_{ℰ(α), ℛ_{α,ℰ}} を返します。"""
    recovery = evaluate(strategy, alpha, e, tol)
    beta = predict(e, alpha)
    return evaluate(strategy, beta, recovery, tol)

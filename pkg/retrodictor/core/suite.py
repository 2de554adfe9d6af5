#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""
公理検査に使うインスタンス集合の設定と生成

同じ設定からは常に同じインスタンス列が生成されます。
"""

import json
import logging
import math
from dataclasses import dataclass, field, fields
from typing import Any, Dict, List, Optional, Tuple, Union

import numpy as np
import yaml

from retrodictor.core.algebra import Algebra, Element, FaithfulState
from retrodictor.core.channels import (
    SIGMA_X,
    Channel,
    block_permutation,
    is_covariant,
    predict,
    random_channel,
    random_faithful_state,
    random_mixed_unitary_channel,
    random_unitary_channel,
    unitary_channel,
)
from retrodictor.core.errors import MalformedInputError
from retrodictor.core.experiments import (
    composable_bit_flip_instance,
    convex_rotated_tensor_instance,
    involution_instance,
    jrsww_tensor_instance,
    rational_ss_instance,
    rational_ss_tensor_instance,
    sth_tensor_instance,
)
from retrodictor.core.retrodiction import RetrodictionStrategy
from retrodictor.core.serialization import (
    channel_from_json,
    channel_to_json,
    instance_from_json,
    instance_to_json,
    state_from_json,
    state_to_json,
)
from retrodictor.core.surace_scandi import MAX_DIMENSION

logger = logging.getLogger("InstanceSuite")

DEFAULT_DIMS: List[Tuple[int, ...]] = [(2,), (3,), (1, 1), (1, 1, 1), (2, 1)]
DEFAULT_SEED_COUNT = 25
MIXED_UNITARY_TERMS = 3

# 乱数シード導出のための用途別キー
_KEY_TARGET = 1
_KEY_PRIOR = 2
_KEY_CHANNEL = 3
_KEY_SECOND = 4
_KEY_COVARIANT = 5


def _derive(seed: int, *keys: int) -> int:
    return int(np.random.SeedSequence([seed, *keys]).generate_state(1)[0])


def _rng(seed: int, *keys: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([seed, *keys]))


@dataclass(frozen=True)
class SingleInstance:
    """事前状態とチャネルの組"""

    name: str
    prior: FaithfulState
    channel: Channel

    def to_json(self) -> Dict[str, Any]:
        data = {"kind": "single", "name": self.name}
        data.update(instance_to_json(self.prior, self.channel))
        return data


@dataclass(frozen=True)
class ComposableInstance:
    """合成可能な組 (α, ℰ: A→B, ℱ: B→C)"""

    name: str
    prior: FaithfulState
    first: Channel
    second: Channel

    def to_json(self) -> Dict[str, Any]:
        return {
            "kind": "compose",
            "name": self.name,
            "prior": state_to_json(self.prior),
            "first": channel_to_json(self.first),
            "second": channel_to_json(self.second),
        }


@dataclass(frozen=True)
class TensorInstance:
    """テンソル積を取る2つのインスタンス"""

    name: str
    left: SingleInstance
    right: SingleInstance

    def to_json(self) -> Dict[str, Any]:
        return {
            "kind": "tensor",
            "name": self.name,
            "left": self.left.to_json(),
            "right": self.right.to_json(),
        }


Instance = Union[SingleInstance, ComposableInstance, TensorInstance]


def load_instance(data: Dict[str, Any]) -> Instance:
    """
    to_json() の出力からインスタンスを復元します。

    Raises:
        MalformedInputError: 形式が不正な場合
    """
    if not isinstance(data, dict) or "kind" not in data:
        logger.error("インスタンスのJSONに kind がありません")
        raise MalformedInputError("インスタンスのJSONに kind がありません")
    kind = data["kind"]
    name = str(data.get("name", "witness"))
    if kind == "single":
        prior, channel = instance_from_json(data)
        return SingleInstance(name, prior, channel)
    if kind == "compose":
        try:
            prior = state_from_json(data["prior"])
            first = channel_from_json(data["first"])
            second = channel_from_json(data["second"])
        except KeyError as err:
            logger.error(f"合成インスタンスのJSONにキーがありません: {err}")
            raise MalformedInputError(f"合成インスタンスのJSONにキーがありません: {err}") from err
        if first.source != prior.algebra or second.source != first.target:
            logger.error("合成インスタンスの代数が一致しません")
            raise MalformedInputError("合成インスタンスの代数が一致しません")
        return ComposableInstance(name, prior, first, second)
    if kind == "tensor":
        try:
            left = load_instance(data["left"])
            right = load_instance(data["right"])
        except KeyError as err:
            logger.error(f"テンソル積インスタンスのJSONにキーがありません: {err}")
            raise MalformedInputError(f"テンソル積インスタンスのJSONにキーがありません: {err}") from err
        if not isinstance(left, SingleInstance) or not isinstance(right, SingleInstance):
            raise MalformedInputError("テンソル積インスタンスの因子は single である必要があります")
        return TensorInstance(name, left, right)
    logger.error(f"未対応のインスタンス種別です: {kind}")
    raise MalformedInputError(f"未対応のインスタンス種別です: {kind}")


@dataclass
class InstanceSuite:
    """
    公理検査に使うインスタンス集合の設定

    Attributes:
        seeds: 乱数シードの列
        dims: 生成に使う代数のブロック次元
        covariant_fraction: 共変になるよう強制する組の割合
        tol: 公理の判定に使う許容誤差
        approximate_tol: 求積や最適化に依存する戦略に使う許容誤差
        floor_scale: ランダム状態の最小固有値の下限（全次元で割った値を使う）
        env_dim: ランダムチャネルの環境次元の最小値
        include_fixed: 手計算済みの固定インスタンスを含めるか
    """

    seeds: List[int] = field(default_factory=lambda: list(range(DEFAULT_SEED_COUNT)))
    dims: List[Tuple[int, ...]] = field(default_factory=lambda: list(DEFAULT_DIMS))
    covariant_fraction: float = 0.3
    tol: float = 1e-8
    approximate_tol: float = 1e-6
    floor_scale: float = 0.02
    env_dim: int = 2
    include_fixed: bool = True
    _cache: Dict[str, Any] = field(default_factory=dict, init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        self.dims = [tuple(int(m) for m in d) for d in self.dims]
        self.seeds = [int(s) for s in self.seeds]
        if not self.seeds:
            logger.error("シードが指定されていません")
            raise MalformedInputError("シードを1つ以上指定してください")
        if not self.dims or any(not d or min(d) < 1 for d in self.dims):
            logger.error(f"代数の次元が不正です: {self.dims}")
            raise MalformedInputError(f"代数の次元が不正です: {self.dims}")
        if not 0.0 <= self.covariant_fraction <= 1.0:
            logger.error(f"covariant_fraction が範囲外です: {self.covariant_fraction}")
            raise MalformedInputError(
                f"covariant_fraction は[0,1]の範囲で指定してください: {self.covariant_fraction}"
            )
        if self.tol <= 0 or self.approximate_tol <= 0:
            logger.error(f"許容誤差が正ではありません: {self.tol}, {self.approximate_tol}")
            raise MalformedInputError("許容誤差は正の値で指定してください")
        if self.env_dim < 1:
            logger.error(f"環境次元が不正です: {self.env_dim}")
            raise MalformedInputError(f"環境次元は1以上である必要があります: {self.env_dim}")

    # ------------------------------------------------------------------
    # 設定の読み書き
    # ------------------------------------------------------------------

    @classmethod
    def default(cls) -> "InstanceSuite":
        return cls()

    @classmethod
    def config_keys(cls) -> List[str]:
        return [f.name for f in fields(cls) if f.init]

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "InstanceSuite":
        """
        既定値に対して data のキーを上書きした設定を作成します。

        Raises:
            MalformedInputError: 未知のキーを含む場合
        """
        if data is None:
            data = {}
        if not isinstance(data, dict):
            logger.error("設定はマッピングである必要があります")
            raise MalformedInputError("設定はマッピングである必要があります")
        unknown = sorted(set(data) - set(cls.config_keys()))
        if unknown:
            logger.error(f"未知の設定キーです: {unknown}")
            raise MalformedInputError(f"未知の設定キーです: {', '.join(unknown)}")
        try:
            return cls(**data)
        except (TypeError, ValueError) as err:
            if isinstance(err, MalformedInputError):
                raise
            logger.error(f"設定値が不正です: {err}")
            raise MalformedInputError(f"設定値が不正です: {err}") from err

    def to_dict(self) -> Dict[str, Any]:
        return {
            "seeds": list(self.seeds),
            "dims": [list(d) for d in self.dims],
            "covariant_fraction": self.covariant_fraction,
            "tol": self.tol,
            "approximate_tol": self.approximate_tol,
            "floor_scale": self.floor_scale,
            "env_dim": self.env_dim,
            "include_fixed": self.include_fixed,
        }

    @classmethod
    def from_file(cls, config_file: str) -> "InstanceSuite":
        """
        YAMLまたはJSONの設定ファイルを読み込みます。

        Args:
            config_file: 設定ファイルのパス（.json / .yaml / .yml）

        Raises:
            MalformedInputError: ファイル形式や内容が不正な場合
        """
        logger.info(f"設定ファイルを読み込んでいます: {config_file}")
        try:
            if config_file.endswith(".json"):
                with open(config_file, "r", encoding="utf-8") as f:
                    config_data = json.load(f)
            elif config_file.endswith(".yaml") or config_file.endswith(".yml"):
                with open(config_file, "r", encoding="utf-8") as f:
                    config_data = yaml.safe_load(f)
            else:
                logger.error(f"サポートされていないファイル形式です: {config_file}")
                raise MalformedInputError(
                    f"サポートされていないファイル形式です: {config_file}（.json, .yaml, .yml のいずれか）"
                )
        except (json.JSONDecodeError, yaml.YAMLError) as err:
            logger.error(f"設定ファイルの解析に失敗しました: {err}")
            raise MalformedInputError(f"設定ファイルの解析に失敗しました: {err}") from err

        suite = cls.from_dict(config_data)
        logger.info(f"設定ファイルを読み込みました: シード {len(suite.seeds)} 個, 代数 {len(suite.dims)} 種")
        return suite

    def export(self, config_file: str) -> None:
        """
        現在の設定をファイルにエクスポートします。

        Raises:
            MalformedInputError: サポートされていないファイル形式の場合
        """
        config_data = self.to_dict()
        if config_file.endswith(".json"):
            with open(config_file, "w", encoding="utf-8") as f:
                json.dump(config_data, f, indent=2)
            logger.info(f"設定をJSONファイルにエクスポートしました: {config_file}")
        elif config_file.endswith(".yaml") or config_file.endswith(".yml"):
            with open(config_file, "w", encoding="utf-8") as f:
                yaml.safe_dump(config_data, f, sort_keys=False)
            logger.info(f"設定をYAMLファイルにエクスポートしました: {config_file}")
        else:
            logger.error(f"サポートされていないファイル形式です: {config_file}")
            raise MalformedInputError(
                f"サポートされていないファイル形式です: {config_file}（.json, .yaml, .yml のいずれか）"
            )

    def tolerance_for(self, strategy: RetrodictionStrategy) -> float:
        return self.approximate_tol if strategy.approximate else self.tol

    # ------------------------------------------------------------------
    # インスタンス生成
    # ------------------------------------------------------------------

    @property
    def algebras(self) -> List[Algebra]:
        return [Algebra(d) for d in self.dims]

    def _floor(self, algebra: Algebra) -> float:
        return self.floor_scale / algebra.matrix_dim

    def _state(self, algebra: Algebra, seed: int) -> FaithfulState:
        return random_faithful_state(algebra, self._floor(algebra), seed)

    def _channel(self, source: Algebra, target: Algebra, seed: int) -> Channel:
        env = max(self.env_dim, math.ceil(max(source.block_dims) / target.matrix_dim))
        return random_channel(source, target, env, seed)

    def _choose(self, rng: np.random.Generator) -> Algebra:
        return self.algebras[int(rng.integers(len(self.dims)))]

    def _cached(self, key: str, build: Any) -> Any:
        if key not in self._cache:
            self._cache[key] = build()
            logger.debug(f"インスタンスを生成しました: {key} ({len(self._cache[key])} 件)")
        return self._cache[key]

    def _covariant_single(self, algebra: Algebra, seed: int, index: int) -> Tuple[FaithfulState, Channel]:
        """最大混合状態上の混合ユニタリ、またはランダム状態上のユニタリ共役"""
        rng = _rng(seed, _KEY_COVARIANT, index)
        if rng.random() < 0.5:
            return (
                FaithfulState.maximally_mixed(algebra),
                random_mixed_unitary_channel(algebra, MIXED_UNITARY_TERMS, _derive(seed, _KEY_CHANNEL, index, 1)),
            )
        return (
            self._state(algebra, _derive(seed, _KEY_PRIOR, index, 1)),
            random_unitary_channel(algebra, _derive(seed, _KEY_CHANNEL, index, 2)),
        )

    def singles(self) -> List[SingleInstance]:
        return self._cached("singles", self._build_singles)

    def _build_singles(self) -> List[SingleInstance]:
        instances = []
        for seed in self.seeds:
            for i, source in enumerate(self.algebras):
                target = self._choose(_rng(seed, _KEY_TARGET, i))
                prior = self._state(source, _derive(seed, _KEY_PRIOR, i))
                channel = self._channel(source, target, _derive(seed, _KEY_CHANNEL, i))
                instances.append(SingleInstance(f"random-{seed}-{source}-{target}", prior, channel))
        if self.include_fixed:
            alpha, e, _ = composable_bit_flip_instance()
            instances.append(SingleInstance("convex-rotated-bit-flip", alpha, e))
            alpha, e = involution_instance()
            instances.append(SingleInstance("involution-bit-flip", alpha, e))
            alpha, e, _ = rational_ss_instance()
            instances.append(SingleInstance("rational-ss", alpha, e))
        return instances

    def commutative_singles(self) -> List[SingleInstance]:
        """可換代数上の正方（同じ代数への）インスタンス"""
        return self._cached("commutative_singles", self._build_commutative_singles)

    def _build_commutative_singles(self) -> List[SingleInstance]:
        instances = []
        for seed in self.seeds:
            for i, algebra in enumerate(self.algebras):
                if not algebra.is_commutative:
                    continue
                prior = self._state(algebra, _derive(seed, _KEY_PRIOR, i, 7))
                channel = self._channel(algebra, algebra, _derive(seed, _KEY_CHANNEL, i, 7))
                instances.append(SingleInstance(f"classical-{seed}-{algebra}", prior, channel))
        if self.include_fixed:
            alpha, e, f = rational_ss_instance()
            instances.append(SingleInstance("rational-ss-first", alpha, e))
            instances.append(SingleInstance("rational-ss-second", predict(e, alpha), f))
        return instances

    def compose_pairs(self) -> List[ComposableInstance]:
        return self._cached("compose_pairs", self._build_compose_pairs)

    def _build_compose_pairs(self) -> List[ComposableInstance]:
        instances = []
        for seed in self.seeds:
            for i, a in enumerate(self.algebras):
                rng = _rng(seed, _KEY_TARGET, i, 2)
                b = self._choose(rng)
                c = self._choose(rng)
                covariant = rng.random() < self.covariant_fraction
                if covariant and rng.random() < 0.5:
                    prior, first = self._covariant_single(a, seed, i)
                    b = first.target
                    second = self._channel(b, c, _derive(seed, _KEY_SECOND, i))
                elif covariant:
                    prior = self._state(a, _derive(seed, _KEY_PRIOR, i, 2))
                    first = self._channel(a, b, _derive(seed, _KEY_CHANNEL, i, 3))
                    second = random_unitary_channel(b, _derive(seed, _KEY_SECOND, i, 1))
                else:
                    prior = self._state(a, _derive(seed, _KEY_PRIOR, i, 2))
                    first = self._channel(a, b, _derive(seed, _KEY_CHANNEL, i, 3))
                    second = self._channel(b, c, _derive(seed, _KEY_SECOND, i, 2))
                name = f"pair-{seed}-{a}-{first.target}-{second.target}" + ("-covariant" if covariant else "")
                instances.append(ComposableInstance(name, prior, first, second))
        if self.include_fixed:
            alpha, e, f = composable_bit_flip_instance()
            instances.append(ComposableInstance("convex-rotated-bit-flips", alpha, e, f))
            alpha, e, f = rational_ss_instance()
            instances.append(ComposableInstance("rational-ss", alpha, e, f))
        return instances

    def tensor_pairs(self) -> List[TensorInstance]:
        return self._cached("tensor_pairs", self._build_tensor_pairs)

    def _build_tensor_pairs(self) -> List[TensorInstance]:
        instances = []
        for seed in self.seeds:
            for i, a in enumerate(self.algebras):
                rng = _rng(seed, _KEY_TARGET, i, 3)
                b = self._choose(rng)
                a2 = self._choose(rng)
                b2 = self._choose(rng)
                left = SingleInstance(
                    f"left-{seed}-{a}",
                    self._state(a, _derive(seed, _KEY_PRIOR, i, 3)),
                    self._channel(a, b, _derive(seed, _KEY_CHANNEL, i, 4)),
                )
                covariant = rng.random() < self.covariant_fraction
                if covariant:
                    prior2, channel2 = self._covariant_single(a2, seed, 100 + i)
                else:
                    prior2 = self._state(a2, _derive(seed, _KEY_PRIOR, i, 4))
                    channel2 = self._channel(a2, b2, _derive(seed, _KEY_CHANNEL, i, 5))
                right = SingleInstance(f"right-{seed}-{a2}", prior2, channel2)
                name = f"tensor-{seed}-{a}-{a2}" + ("-covariant" if covariant else "")
                instances.append(TensorInstance(name, left, right))
            classical = self._classical_tensor_pair(seed)
            if classical is not None:
                instances.append(classical)
        if self.include_fixed:
            for name, builder in (
                ("convex-rotated-tensor", convex_rotated_tensor_instance),
                ("jrsww-tensor", jrsww_tensor_instance),
                ("sth-tensor", sth_tensor_instance),
                ("rational-ss-tensor", rational_ss_tensor_instance),
            ):
                (alpha1, e1), (alpha2, e2) = builder()
                instances.append(
                    TensorInstance(
                        name,
                        SingleInstance(f"{name}-left", alpha1, e1),
                        SingleInstance(f"{name}-right", alpha2, e2),
                    )
                )
        return instances

    def _classical_tensor_pair(self, seed: int) -> Optional[TensorInstance]:
        """
        可換代数上の正方チャネル2つのテンソル積。

        積が MAX_DIMENSION 以下の正方行列になるよう、
        行列次元が2以下の可換代数だけを使います。
        """
        for i, algebra in enumerate(self.algebras):
            if not algebra.is_commutative or algebra.matrix_dim ** 2 > MAX_DIMENSION:
                continue
            left, right = [
                SingleInstance(
                    f"classical-{side}-{seed}-{algebra}",
                    self._state(algebra, _derive(seed, _KEY_PRIOR, i, 8, k)),
                    self._channel(algebra, algebra, _derive(seed, _KEY_CHANNEL, i, 8, k)),
                )
                for k, side in enumerate(("left", "right"))
            ]
            return TensorInstance(f"classical-tensor-{seed}-{algebra}", left, right)
        return None

    def isomorphisms(self) -> List[SingleInstance]:
        """ランダムなブロックユニタリ共役とブロック置換による *-同型"""
        return self._cached("isomorphisms", self._build_isomorphisms)

    def _build_isomorphisms(self) -> List[SingleInstance]:
        instances = []
        for seed in self.seeds:
            for i, algebra in enumerate(self.algebras):
                prior = self._state(algebra, _derive(seed, _KEY_PRIOR, i, 5))
                iso = random_unitary_channel(algebra, _derive(seed, _KEY_CHANNEL, i, 6))
                instances.append(SingleInstance(f"iso-{seed}-{algebra}", prior, iso))
        if self.include_fixed:
            qubit = Algebra.matrix(2)
            prior = FaithfulState(Element.from_diagonal([0.3, 0.7], qubit))
            instances.append(SingleInstance("sigma-x", prior, unitary_channel(Element(qubit, [SIGMA_X]))))
            bit = Algebra.classical(2)
            swap = block_permutation(bit, [1, 0])
            instances.append(SingleInstance("bit-swap", FaithfulState.from_probabilities([0.3, 0.7]), swap))
        return instances

    def covariant_compose_pairs(self) -> List[ComposableInstance]:
        """どちらかの因子が共変な合成可能な組"""

        def _build() -> List[ComposableInstance]:
            selected = []
            for inst in self.compose_pairs():
                beta = predict(inst.first, inst.prior)
                if is_covariant(inst.first, inst.prior, self.tol) or is_covariant(inst.second, beta, self.tol):
                    selected.append(inst)
            return selected

        return self._cached("covariant_compose_pairs", _build)

    def covariant_tensor_pairs(self) -> List[TensorInstance]:
        """どちらかの因子が共変なテンソル積の組"""

        def _build() -> List[TensorInstance]:
            return [
                inst
                for inst in self.tensor_pairs()
                if is_covariant(inst.left.channel, inst.left.prior, self.tol)
                or is_covariant(inst.right.channel, inst.right.prior, self.tol)
            ]

        return self._cached("covariant_tensor_pairs", _build)

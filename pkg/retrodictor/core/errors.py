#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""
レトロディクション計算で使用する例外クラス
"""


class RetrodictionError(ValueError):
    """レトロディクション関連エラーの基底クラス"""


class AlgebraMismatchError(RetrodictionError):
    """代数の形状が一致しない場合のエラー"""


class NotFaithfulError(RetrodictionError):
    """状態が忠実（正定値・トレース1）でない場合のエラー"""


class NotCPTPError(RetrodictionError):
    """チャネルがCPTPでない場合のエラー"""


class NotStarIsomorphismError(RetrodictionError):
    """チャネルが*-同型でない場合のエラー"""


class NonCommutingUnitaryError(RetrodictionError):
    """STHのユニタリが状態と可換でない場合のエラー"""


class InapplicableStrategyError(RetrodictionError):
    """戦略がインスタンスに適用できない場合のエラー（非可換代数上のBayesなど）"""


class InfeasibleInstanceError(RetrodictionError):
    """最適化問題が実行不能、または最大化元が一意でない場合のエラー"""


class MalformedInputError(RetrodictionError):
    """JSON/YAML入力の形式が不正な場合のエラー"""

"""
レトロディクション計算ツールのコアモジュール
"""

from retrodictor.core.algebra import Algebra, Element, FaithfulState
from retrodictor.core.axioms import Axiom, build_table, run_check
from retrodictor.core.channels import Channel
from retrodictor.core.retrodiction import (
    STH,
    AveragedPetz,
    Bayes,
    Convex,
    DiscardPrepare,
    Measure,
    Petz,
    RetrodictionStrategy,
    RotatedPetz,
    SuraceScandiClassical,
    evaluate,
    iterate,
)
from retrodictor.core.suite import InstanceSuite

__all__ = [
    "Algebra",
    "Element",
    "FaithfulState",
    "Channel",
    "Measure",
    "RetrodictionStrategy",
    "Petz",
    "RotatedPetz",
    "AveragedPetz",
    "STH",
    "DiscardPrepare",
    "Bayes",
    "SuraceScandiClassical",
    "Convex",
    "evaluate",
    "iterate",
    "Axiom",
    "run_check",
    "build_table",
    "InstanceSuite",
]

#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""
既定のインスタンス集合による成立表全体の統合テスト
"""

import pytest

from retrodictor.core.axioms import EXPECTED_VERDICTS, FAILS, HOLDS, Axiom, build_table, replay_witness
from retrodictor.core.retrodiction import RotatedPetz
from retrodictor.core.suite import InstanceSuite


@pytest.fixture(scope="module")
def report():
    """既定の設定で作成した成立表"""
    return build_table(suite=InstanceSuite.default(), workers=4)


@pytest.mark.slow
class TestFullTable:
    """6戦略 × 9公理の成立表"""

    def test_matches_expected(self, report):
        """すべての判定セルが期待と一致する"""
        assert report.ok, report.to_text()

    def test_every_cell_checked(self, report):
        """すべてのセルで少なくとも1つのインスタンスが検査される"""
        for check in report.checks:
            assert check.checked > 0, f"{check.strategy} / {check.axiom.value}"

    def test_observed_cells(self, report):
        """成立・不成立が知られていないセルは観測値として記録される"""
        observed = {(c.strategy, c.axiom) for c in report.observed}
        assert observed == {
            ("SS-classical", Axiom.TENSOR_STABILIZING),
            ("SS-classical", Axiom.TENSORIALITY),
        }

    def test_expected_symbols(self, report):
        """セルの記号が期待値どおり"""
        frame = report.to_frame()
        for strategy, column in EXPECTED_VERDICTS.items():
            for axiom, expected in column.items():
                if expected is None:
                    continue
                kind = report.cell(strategy, axiom).verdict.kind
                assert kind == (HOLDS if expected else FAILS)
                assert frame.loc[axiom.label, strategy] in ("✓", "✗")

    def test_witness_replays(self, report):
        """不成立セルの反例から偏差を再現できる"""
        check = report.cell("Rotated(t=0.5)", Axiom.INVOLUTIVITY)
        deviation = replay_witness(RotatedPetz(0.5), check.verdict.witness)
        assert deviation == pytest.approx(check.verdict.deviation, rel=1e-2)
        assert deviation > check.tolerance

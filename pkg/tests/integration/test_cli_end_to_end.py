#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""
コマンドラインツールの統合テスト
"""

import json

import numpy as np
import pytest
import yaml

from retrodictor.cli.retrodict import EXIT_MISMATCH, EXIT_OK, main
from retrodictor.core.algebra import Algebra
from retrodictor.core.channels import identity_channel, random_faithful_state
from retrodictor.core.serialization import channel_from_json, dumps, instance_to_json


class TestEndToEnd:
    """サブコマンドを通した処理のテスト"""

    def test_reproduce_rational(self, capsys):
        """有理数の再現計算が終了コード0で完了する"""
        assert main(["reproduce", "appendix-d"]) == EXIT_OK
        assert "[appendix-d]" in capsys.readouterr().out

    @pytest.mark.parametrize("strategy", ['{"kind": "petz"}', '{"kind": "rotated", "t": 0.5}', '{"kind": "sth"}'])
    def test_recover_identity(self, strategy, tmp_path, capsys):
        """恒等チャネルの回復写像は恒等チャネル"""
        algebra = Algebra((2, 1))
        prior = random_faithful_state(algebra, 0.01, seed=3)
        path = tmp_path / "identity.json"
        path.write_text(dumps(instance_to_json(prior, identity_channel(algebra))), encoding="utf-8")

        assert main(["recover", "--strategy", strategy, "--in", str(path), "--json"]) == EXIT_OK
        recovery = channel_from_json(json.loads(capsys.readouterr().out)["recovery"])
        assert np.allclose(recovery.matrix, np.eye(algebra.total_dim), atol=1e-10)

    def test_verify_rotated_involutivity(self, tmp_path, capsys):
        """回転Petz写像の対合性は反例付きで不成立"""
        output = tmp_path / "verify.json"
        code = main(
            [
                "verify",
                "--strategy",
                '{"kind": "rotated", "t": 0.5}',
                "--axiom",
                "involutivity",
                "--seed",
                "0",
                "--json",
                "-o",
                str(output),
            ]
        )
        assert code == EXIT_MISMATCH
        check = json.loads(output.read_text(encoding="utf-8"))["checks"][0]
        assert check["verdict"]["witness"]["axiom"] == "involutivity"

    def test_table_json_is_reproducible(self, tmp_path):
        """同じ設定とシードなら成立表のJSONはバイト単位で一致する"""
        config = tmp_path / "suite.yaml"
        config.write_text(yaml.safe_dump({"seeds": [0], "dims": [[2], [1, 1]], "include_fixed": False}), encoding="utf-8")
        outputs = []
        for run in range(2):
            output = tmp_path / f"table-{run}.json"
            main(["table", "--config", str(config), "--seed", "7", "--json", "-o", str(output)])
            outputs.append(output.read_bytes())
        assert outputs[0] == outputs[1]
        assert json.loads(outputs[0])["cells"]

    @pytest.mark.slow
    def test_reproduce_all(self, capsys):
        """すべての再現計算が成功する"""
        assert main(["reproduce", "all", "--json"]) == EXIT_OK
        document = json.loads(capsys.readouterr().out)
        assert sorted(document["experiments"]) == ["appendix-b", "appendix-c", "appendix-d", "involution"]

    @pytest.mark.slow
    def test_table_csv(self, tmp_path):
        """成立表をCSVに書き出し、すべてのセルが期待と一致する"""
        csv_path = tmp_path / "table.csv"
        assert main(["table", "--csv", str(csv_path), "--workers", "4"]) == EXIT_OK
        header = csv_path.read_text(encoding="utf-8").splitlines()[0]
        assert header.split(",")[0] == "axiom"
        assert "SS-classical" in header

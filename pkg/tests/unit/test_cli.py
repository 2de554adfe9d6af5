#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""
コマンドラインツールのテスト
"""

import json

import numpy as np
import pytest
import yaml

from retrodictor.cli.retrodict import (
    EXIT_INFEASIBLE,
    EXIT_MALFORMED,
    EXIT_MISMATCH,
    EXIT_OK,
    TOL_ENV,
    main,
    parse_arguments,
    validate_args,
)
from retrodictor.core.algebra import FaithfulState
from retrodictor.core.channels import bit_flip, stochastic_channel
from retrodictor.core.serialization import dumps, instance_to_json, matrix_from_json
from retrodictor.core.suite import InstanceSuite

PETZ = '{"kind": "petz"}'


def _verify_args(strategy, axiom, config, *extra):
    return ["verify", "--strategy", strategy, "--axiom", axiom, "--config", config, *extra]


@pytest.fixture
def bit_flip_file(tmp_path):
    """最大混合状態とビット反転チャネルのインスタンス"""
    path = tmp_path / "bit_flip.json"
    prior = FaithfulState.maximally_mixed(bit_flip(0.2).source)
    path.write_text(dumps(instance_to_json(prior, bit_flip(0.2))), encoding="utf-8")
    return str(path)


@pytest.fixture
def small_config(tmp_path):
    """小さなインスタンス集合の設定ファイル"""
    path = tmp_path / "suite.yaml"
    config = {"seeds": [0], "dims": [[2], [1, 1]], "include_fixed": False}
    path.write_text(yaml.safe_dump(config), encoding="utf-8")
    return str(path)


@pytest.fixture(autouse=True)
def clear_tolerance_env(monkeypatch):
    """環境変数の許容誤差を各テストで未設定にする"""
    monkeypatch.delenv(TOL_ENV, raising=False)


class TestArguments:
    """引数の解析と検証のテスト"""

    def test_parse_recover(self):
        """recover の引数"""
        args = parse_arguments(["recover", "--strategy", '{"kind":"petz"}', "--in", "x.json", "--json"])
        assert args.command == "recover"
        assert args.input_path == "x.json"
        assert args.json

    def test_parse_verify_axioms(self):
        """--axiom は複数指定できる"""
        args = parse_arguments(
            ["verify", "--strategy", "{}", "--axiom", "normalization", "--axiom", "involutivity"]
        )
        assert args.axiom == ["normalization", "involutivity"]

    def test_validate_missing_input(self):
        """存在しない入力ファイル"""
        args = parse_arguments(["recover", "--strategy", "{}", "--in", "/nonexistent/instance.json"])
        assert not validate_args(args)

    def test_validate_tolerance_and_workers(self):
        """許容誤差とスレッド数の範囲"""
        assert not validate_args(parse_arguments(["table", "--tol", "-1"]))
        assert not validate_args(parse_arguments(["table", "--workers", "0"]))
        assert validate_args(parse_arguments(["table", "--tol", "1e-6", "--workers", "2"]))

    def test_usage_error(self):
        """未知のサブコマンドは終了コード2"""
        assert main(["frobnicate"]) == EXIT_MALFORMED
        assert main(["recover", "--strategy", "{}"]) == EXIT_MALFORMED


class TestRecover:
    """recover サブコマンドのテスト"""

    def test_petz_json(self, bit_flip_file, capsys):
        """最大混合状態上のビット反転チャネルのPetz写像はそれ自身"""
        code = main(["recover", "--strategy", '{"kind": "petz"}', "--in", bit_flip_file, "--json"])
        assert code == EXIT_OK
        document = json.loads(capsys.readouterr().out)
        assert document["schema_version"] == "1.0"
        assert document["strategy"] == "Petz"
        recovery = matrix_from_json(document["recovery"]["matrix"])
        assert np.allclose(recovery, bit_flip(0.2).matrix, atol=1e-12)

    def test_text_output_to_file(self, bit_flip_file, tmp_path):
        """テキスト出力をファイルに書き出す"""
        output = tmp_path / "recovery.txt"
        strategy = '{"kind": "rotated", "t": 0.5}'
        code = main(["recover", "--strategy", strategy, "--in", bit_flip_file, "-o", str(output)])
        assert code == EXIT_OK
        assert output.read_text(encoding="utf-8").startswith("Rotated(t=0.5)")

    def test_malformed_instance(self, tmp_path):
        """JSONとして解析できないインスタンスは終了コード2"""
        path = tmp_path / "broken.json"
        path.write_text("{prior: ", encoding="utf-8")
        assert main(["recover", "--strategy", '{"kind": "petz"}', "--in", str(path)]) == EXIT_MALFORMED

    def test_malformed_strategy(self, bit_flip_file):
        """不正な戦略は終了コード2"""
        assert main(["recover", "--strategy", '{"kind": "magic"}', "--in", bit_flip_file]) == EXIT_MALFORMED

    def test_not_faithful_prediction(self, tmp_path):
        """予測状態が忠実でないインスタンスは終了コード3"""
        path = tmp_path / "collapse.json"
        prior = FaithfulState.from_probabilities([0.5, 0.5])
        collapse = stochastic_channel([[1.0, 1.0], [0.0, 0.0]])
        path.write_text(dumps(instance_to_json(prior, collapse)), encoding="utf-8")
        assert main(["recover", "--strategy", '{"kind": "petz"}', "--in", str(path)]) == EXIT_INFEASIBLE

    def test_inapplicable_strategy(self, bit_flip_file):
        """非可換代数へのベイズ逆は終了コード3"""
        assert main(["recover", "--strategy", '{"kind": "bayes"}', "--in", bit_flip_file]) == EXIT_INFEASIBLE


class TestVerify:
    """verify サブコマンドのテスト"""

    def test_holds(self, small_config, capsys):
        """成立する公理だけなら終了コード0"""
        code = main(_verify_args(PETZ, "state_preservation", small_config, "--json"))
        assert code == EXIT_OK
        document = json.loads(capsys.readouterr().out)
        assert document["ok"] is True
        assert document["checks"][0]["verdict"]["kind"] == "holds"

    def test_fails_with_witness(self, small_config, capsys):
        """成立しない公理があれば終了コード1で反例を出力する"""
        code = main(
            [
                "verify",
                "--strategy",
                '{"kind": "rotated", "t": 0.5}',
                "--axiom",
                "involutivity",
                "--config",
                small_config,
                "--json",
            ]
        )
        assert code == EXIT_MISMATCH
        check = json.loads(capsys.readouterr().out)["checks"][0]
        assert check["verdict"]["kind"] == "fails"
        assert check["verdict"]["witness"]["instance"]["kind"] == "single"

    def test_text_prints_witness(self, small_config, capsys):
        """テキスト出力でも不成立の公理には反例のJSONが付く"""
        code = main(_verify_args('{"kind": "rotated", "t": 0.5}', "involutivity", small_config))
        assert code == EXIT_MISMATCH
        witness_lines = [line for line in capsys.readouterr().out.splitlines() if line.startswith("  反例: ")]
        assert len(witness_lines) == 1
        witness = json.loads(witness_lines[0][len("  反例: "):])
        assert witness["axiom"] == "involutivity"
        assert witness["deviation"] > witness["tolerance"]

    def test_text_without_witness_when_holding(self, small_config, capsys):
        """成立する公理には反例を出力しない"""
        assert main(_verify_args(PETZ, "normalization", small_config)) == EXIT_OK
        assert "反例" not in capsys.readouterr().out

    def test_text_notes_expectation(self, small_config, capsys):
        """テキスト出力には期待値との一致が付く"""
        main(_verify_args('{"kind": "discard"}', "normalization", small_config))
        assert "(期待どおり)" in capsys.readouterr().out

    def test_tolerance_from_environment(self, small_config, capsys, monkeypatch):
        """環境変数で許容誤差を指定でき、--tol が優先される"""
        monkeypatch.setenv(TOL_ENV, "1e-7")
        base = _verify_args(PETZ, "normalization", small_config, "--json")
        main(base)
        assert json.loads(capsys.readouterr().out)["checks"][0]["tolerance"] == 1e-7
        main(base + ["--tol", "1e-5"])
        assert json.loads(capsys.readouterr().out)["checks"][0]["tolerance"] == 1e-5

    def test_invalid_environment_tolerance(self, small_config, monkeypatch):
        """環境変数の値が不正なら終了コード2"""
        monkeypatch.setenv(TOL_ENV, "small")
        code = main(_verify_args(PETZ, "normalization", small_config))
        assert code == EXIT_MALFORMED

    def test_seed_and_export(self, small_config, tmp_path):
        """--seed でシードが置き換わり、--export-config で有効な設定が書き出される"""
        exported = tmp_path / "effective.json"
        code = main(
            [
                "verify",
                "--strategy",
                '{"kind": "petz"}',
                "--axiom",
                "normalization",
                "--config",
                small_config,
                "--seed",
                "5",
                "--export-config",
                str(exported),
            ]
        )
        assert code == EXIT_OK
        assert InstanceSuite.from_file(str(exported)).seeds == [5]

    def test_unknown_config_key(self, tmp_path):
        """未知の設定キーは終了コード2"""
        path = tmp_path / "suite.yaml"
        path.write_text("seeds: [0]\nsize: 3\n", encoding="utf-8")
        code = main(["verify", "--strategy", '{"kind": "petz"}', "--config", str(path)])
        assert code == EXIT_MALFORMED


class TestOtherCommands:
    """schema / reproduce サブコマンドのテスト"""

    def test_schema(self, capsys):
        """すべてのスキーマを出力する"""
        assert main(["schema"]) == EXIT_OK
        document = json.loads(capsys.readouterr().out)
        assert "channel" in document["schemas"]

    def test_single_schema(self, capsys):
        """名前を指定したスキーマだけを出力する"""
        assert main(["schema", "strategy"]) == EXIT_OK
        assert list(json.loads(capsys.readouterr().out)["schemas"]) == ["strategy"]

    def test_schema_export_config(self, tmp_path):
        """schema でも既定の設定をエクスポートできる"""
        exported = tmp_path / "suite.yaml"
        assert main(["schema", "--export-config", str(exported)]) == EXIT_OK
        assert InstanceSuite.from_file(str(exported)).to_dict() == InstanceSuite.default().to_dict()

    def test_reproduce(self, capsys):
        """有理数の再現計算は成功する"""
        assert main(["reproduce", "appendix-d", "--json"]) == EXIT_OK
        document = json.loads(capsys.readouterr().out)
        assert document["ok"] is True
        assert all(r["pass"] for r in document["experiments"]["appendix-d"])

    def test_reproduce_text(self, capsys):
        """テキスト出力は実験ごとに見出しが付く"""
        assert main(["reproduce", "appendix-d"]) == EXIT_OK
        out = capsys.readouterr().out
        assert out.startswith("[appendix-d]")
        assert "NG " not in out

    def test_log_file(self, tmp_path):
        """ログをファイルにも書き出す"""
        log_file = tmp_path / "retrodictor.log"
        assert main(["schema", "algebra", "--log-file", str(log_file), "-v"]) == EXIT_OK
        assert log_file.exists()


class TestExitCodes:
    """終了コードの対応のテスト"""

    def test_table_mismatch(self, mocker, tmp_path):
        """成立表が期待と一致しなければ1を返し、CSVも書き出す"""
        report = mocker.MagicMock(ok=False)
        report.to_text.return_value = "table"
        build_table = mocker.patch("retrodictor.cli.retrodict.build_table", return_value=report)
        csv_path = str(tmp_path / "table.csv")

        assert main(["table", "--csv", csv_path, "--workers", "2"]) == EXIT_MISMATCH
        assert build_table.call_args.kwargs["workers"] == 2
        report.to_csv.assert_called_once_with(csv_path)

    def test_reproduce_mismatch(self, mocker, capsys):
        """再現値が一致しなければ1を返す"""
        result = mocker.MagicMock(passed=False)
        result.summary.return_value = "NG appendix-d"
        mocker.patch("retrodictor.cli.retrodict.run_experiments", return_value={"appendix-d": [result]})

        assert main(["reproduce", "appendix-d"]) == EXIT_MISMATCH
        assert "NG appendix-d" in capsys.readouterr().out

    def test_unexpected_error(self, mocker):
        """予期しないエラーは1を返す"""
        mocker.patch("retrodictor.cli.retrodict.run_experiments", side_effect=RuntimeError("boom"))
        assert main(["reproduce", "appendix-d"]) == EXIT_MISMATCH

#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""
回復写像の計算、公理の検査、成立表の作成、手計算値の再現を行うコマンドラインツール

終了コード:
    0: 成功
    1: 公理の検査・成立表・再現計算が期待と一致しない、または予期しないエラー
    2: JSON・設定・引数の形式が不正
    3: 実行不能なインスタンス（忠実でない予測状態、CPTPでないチャネルなど）
"""

import argparse
import dataclasses
import logging
import os
import sys
from typing import Any, Dict, List, Optional

import numpy as np

from retrodictor.core.algebra import DEFAULT_TOL
from retrodictor.core.axioms import EXPECTED_VERDICTS, FAILS, Axiom, build_table, run_check
from retrodictor.core.errors import (
    AlgebraMismatchError,
    InapplicableStrategyError,
    InfeasibleInstanceError,
    MalformedInputError,
    NonCommutingUnitaryError,
    NotCPTPError,
    NotFaithfulError,
    NotStarIsomorphismError,
)
from retrodictor.core.experiments import EXPERIMENTS, run_experiments
from retrodictor.core.retrodiction import evaluate
from retrodictor.core.serialization import (
    SCHEMAS,
    channel_to_json,
    dumps,
    instance_from_json,
    loads,
    parse_strategy,
)
from retrodictor.core.suite import InstanceSuite

logger = logging.getLogger("Retrodict")

TOL_ENV = "RETRODICTOR_TOL"

EXIT_OK = 0
EXIT_MISMATCH = 1
EXIT_MALFORMED = 2
EXIT_INFEASIBLE = 3


def _add_common_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--json", action="store_true", help="結果をJSONで出力する")
    parser.add_argument(
        "--tol",
        type=float,
        help=f"許容誤差（未指定の場合は環境変数 {TOL_ENV}、それもなければ既定値）",
    )
    parser.add_argument("--seed", type=int, help="インスタンス生成のシードの開始値")
    parser.add_argument("--config", help="インスタンス集合の設定ファイル（.yaml / .yml / .json）")
    parser.add_argument("--export-config", help="有効な設定をファイルにエクスポートする")
    parser.add_argument("-o", "--output", help="出力先ファイル（未指定の場合は標準出力）")
    parser.add_argument("--log-file", help="ログを書き出すファイル")
    parser.add_argument("-v", "--verbose", action="store_true", help="詳細なログ出力を有効にする")


def parse_arguments(args: Optional[List[str]] = None) -> argparse.Namespace:
    """
    コマンドライン引数を解析します。

    Args:
        args: コマンドライン引数のリスト（指定しない場合はsys.argvを使用）

    Returns:
        解析された引数のNamespace
    """
    parser = argparse.ArgumentParser(
        prog="retrodictor",
        description="Petz回復写像とその変種によるレトロディクションの計算・検査ツール",
    )
    subparsers = parser.add_subparsers(dest="command", required=True)

    recover = subparsers.add_parser("recover", help="インスタンスの回復写像を計算する")
    _add_common_arguments(recover)
    recover.add_argument("--strategy", required=True, help='戦略のJSON（例: \'{"kind":"petz"}\'）')
    recover.add_argument("--in", dest="input_path", required=True, help="インスタンスのJSONファイル")

    verify = subparsers.add_parser("verify", help="戦略の公理を検査する")
    _add_common_arguments(verify)
    verify.add_argument("--strategy", required=True, help="戦略のJSON")
    verify.add_argument(
        "--axiom",
        action="append",
        choices=[axiom.value for axiom in Axiom],
        help="検査する公理（複数指定可、未指定の場合はすべて）",
    )

    table = subparsers.add_parser("table", help="6戦略の公理の成立表を作成する")
    _add_common_arguments(table)
    table.add_argument("--csv", help="成立表をCSVファイルに出力する")
    table.add_argument("--workers", type=int, default=1, help="並列に実行するスレッド数")

    reproduce = subparsers.add_parser("reproduce", help="手計算済みの値を再現する")
    _add_common_arguments(reproduce)
    reproduce.add_argument("experiment", choices=sorted(EXPERIMENTS) + ["all"], help="実行する再現計算")

    schema = subparsers.add_parser("schema", help="JSONスキーマを出力する")
    _add_common_arguments(schema)
    schema.add_argument("name", nargs="?", choices=sorted(SCHEMAS), help="出力するスキーマ名")

    return parser.parse_args(args)


def validate_args(args: argparse.Namespace) -> bool:
    """
    コマンドライン引数を検証します。

    Returns:
        検証結果（True：有効な引数、False：無効な引数）
    """
    input_path = getattr(args, "input_path", None)
    if input_path and not os.path.exists(input_path):
        logger.error(f"インスタンスファイルが見つかりません: {input_path}")
        return False

    if args.config and not os.path.exists(args.config):
        logger.error(f"設定ファイルが見つかりません: {args.config}")
        return False

    if args.tol is not None and args.tol <= 0:
        logger.error(f"許容誤差は正の値で指定してください: {args.tol}")
        return False

    if getattr(args, "workers", 1) < 1:
        logger.error(f"スレッド数は1以上で指定してください: {args.workers}")
        return False

    return True


def resolve_tolerance(args: argparse.Namespace) -> Optional[float]:
    """
    --tol、環境変数 RETRODICTOR_TOL の順に許容誤差を決めます。どちらもなければ None。

    Raises:
        MalformedInputError: 環境変数の値が正の数でない場合
    """
    if args.tol is not None:
        return float(args.tol)
    value = os.environ.get(TOL_ENV)
    if value is None or value == "":
        return None
    try:
        tol = float(value)
    except ValueError as err:
        logger.error(f"環境変数 {TOL_ENV} の値が不正です: {value}")
        raise MalformedInputError(f"環境変数 {TOL_ENV} の値が不正です: {value}") from err
    if tol <= 0:
        raise MalformedInputError(f"環境変数 {TOL_ENV} は正の値である必要があります: {value}")
    return tol


def load_suite(args: argparse.Namespace, tol: Optional[float]) -> InstanceSuite:
    suite = InstanceSuite.from_file(args.config) if args.config else InstanceSuite.default()
    if args.seed is not None:
        suite = dataclasses.replace(suite, seeds=list(range(args.seed, args.seed + len(suite.seeds))))
    if tol is not None:
        suite = dataclasses.replace(suite, tol=tol)
    if args.export_config:
        suite.export(args.export_config)
    return suite


def write_output(text: str, output: Optional[str]) -> None:
    if output:
        with open(output, "w", encoding="utf-8") as f:
            f.write(text + "\n")
        logger.info(f"結果をファイルに出力しました: {output}")
    else:
        sys.stdout.write(text + "\n")


def run_recover(args: argparse.Namespace, tol: Optional[float]) -> int:
    strategy = parse_strategy(args.strategy)
    with open(args.input_path, "r", encoding="utf-8") as f:
        prior, channel = instance_from_json(loads(f.read()))
    recovery = evaluate(strategy, prior, channel, tol if tol is not None else DEFAULT_TOL)
    logger.info(f"回復写像を計算しました: {strategy.label} {recovery}")

    if args.json:
        write_output(dumps({"strategy": strategy.label, "recovery": channel_to_json(recovery)}), args.output)
    else:
        matrix = np.array2string(recovery.matrix, precision=6, suppress_small=True)
        write_output(f"{strategy.label}: {recovery}\n{matrix}", args.output)
    return EXIT_OK


def run_verify(args: argparse.Namespace, tol: Optional[float]) -> int:
    strategy = parse_strategy(args.strategy)
    suite = load_suite(args, tol)
    axioms = [Axiom(a) for a in args.axiom] if args.axiom else list(Axiom)
    checks = [run_check(axiom, strategy, suite, tol) for axiom in axioms]
    failed = [c for c in checks if c.verdict.kind == FAILS]

    if args.json:
        write_output(
            dumps({"strategy": strategy.label, "checks": [c.to_json() for c in checks], "ok": not failed}),
            args.output,
        )
    else:
        expected = EXPECTED_VERDICTS.get(strategy.label, {})
        lines = []
        for c in checks:
            note = ""
            if c.axiom in expected and expected[c.axiom] is not None:
                note = " (期待どおり)" if expected[c.axiom] == c.holds else " (期待と異なる)"
            lines.append(
                f"{c.verdict.symbol} {c.axiom.label}: 最大偏差 {c.verdict.deviation:.3e} "
                f"(許容 {c.tolerance:g}, 検査 {c.checked} 件){note}"
            )
            if c.verdict.witness is not None:
                lines.append(f"  反例: {dumps(c.verdict.witness, indent=None)}")
        write_output("\n".join(lines), args.output)

    if failed:
        logger.warning(f"成立しない公理があります: {', '.join(c.axiom.label for c in failed)}")
        return EXIT_MISMATCH
    return EXIT_OK


def run_table(args: argparse.Namespace, tol: Optional[float]) -> int:
    suite = load_suite(args, tol)
    report = build_table(suite=suite, workers=args.workers)
    if args.csv:
        report.to_csv(args.csv)
    write_output(dumps(report.to_json()) if args.json else report.to_text(), args.output)
    return EXIT_OK if report.ok else EXIT_MISMATCH


def run_reproduce(args: argparse.Namespace) -> int:
    results = run_experiments(args.experiment)
    all_passed = all(r.passed for group in results.values() for r in group)
    if args.json:
        payload: Dict[str, Any] = {
            name: [r.to_json() for r in group] for name, group in results.items()
        }
        write_output(dumps({"experiments": payload, "ok": all_passed}), args.output)
    else:
        lines = []
        for name, group in results.items():
            lines.append(f"[{name}]")
            lines.extend(f"  {r.summary()}" for r in group)
        write_output("\n".join(lines), args.output)
    if not all_passed:
        logger.error("手計算値と一致しない結果があります")
        return EXIT_MISMATCH
    return EXIT_OK


def run_schema(args: argparse.Namespace, tol: Optional[float]) -> int:
    if args.export_config:
        load_suite(args, tol)
    schemas = {args.name: SCHEMAS[args.name]} if args.name else SCHEMAS
    write_output(dumps({"schemas": schemas}), args.output)
    return EXIT_OK


def main(args: Optional[List[str]] = None) -> int:
    """
    メイン関数

    Args:
        args: コマンドライン引数のリスト（指定しない場合はsys.argvを使用）

    Returns:
        終了コード
    """
    try:
        parsed_args = parse_arguments(args)
    except SystemExit as err:
        return int(err.code) if isinstance(err.code, int) else EXIT_MALFORMED

    # ロギングの設定（標準出力は結果専用）
    log_level = logging.DEBUG if parsed_args.verbose else logging.INFO
    handlers: List[logging.Handler] = [logging.StreamHandler(sys.stderr)]
    if parsed_args.log_file:
        handlers.append(logging.FileHandler(parsed_args.log_file))
    logging.basicConfig(
        level=log_level,
        format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
        handlers=handlers,
        force=True,
    )

    if not validate_args(parsed_args):
        return EXIT_MALFORMED

    try:
        tol = resolve_tolerance(parsed_args)
        if parsed_args.command == "recover":
            return run_recover(parsed_args, tol)
        if parsed_args.command == "verify":
            return run_verify(parsed_args, tol)
        if parsed_args.command == "table":
            return run_table(parsed_args, tol)
        if parsed_args.command == "reproduce":
            return run_reproduce(parsed_args)
        return run_schema(parsed_args, tol)

    except (MalformedInputError, AlgebraMismatchError) as e:
        logger.error(f"入力の形式が不正です: {str(e)}")
        return EXIT_MALFORMED
    except (
        InfeasibleInstanceError,
        InapplicableStrategyError,
        NotFaithfulError,
        NotCPTPError,
        NotStarIsomorphismError,
        NonCommutingUnitaryError,
    ) as e:
        logger.error(f"インスタンスを処理できません: {str(e)}")
        return EXIT_INFEASIBLE
    except Exception as e:
        logger.error(f"実行中にエラーが発生しました: {str(e)}")
        return EXIT_MISMATCH


if __name__ == "__main__":
    sys.exit(main())

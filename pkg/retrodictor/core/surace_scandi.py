#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""
古典（可換）Surace–Scandi写像の計算モジュール

制約条件:
    (a) E が置換なら逆置換
    (b) 詳細釣り合い: (R·E)·diag(p) が対称
    (c) R·E の固有値が非負
    R(q) = p, R は列確率行列
の下で det(R·E) を最大化します。
"""

import logging
from fractions import Fraction
from typing import Any, Dict, List, Sequence, Union

import cvxpy as cp
import numpy as np

from retrodictor.core.errors import InapplicableStrategyError, InfeasibleInstanceError

logger = logging.getLogger("SuraceScandi")

MAX_DIMENSION = 4
SINGULAR_TOL = 1e-12
SOLVER_EPS = 1e-10

Number = Union[float, Fraction]


def is_permutation(e: np.ndarray, tol: float = 1e-12) -> bool:
    e = np.asarray(e, dtype=float)
    if e.shape[0] != e.shape[1]:
        return False
    if not np.all((np.abs(e) <= tol) | (np.abs(e - 1.0) <= tol)):
        return False
    return bool(np.allclose(e.sum(axis=0), 1.0) and np.allclose(e.sum(axis=1), 1.0))


def surace_scandi_2x2(e: Sequence[Sequence[Number]], p: Sequence[Number]) -> List[List[Number]]:
    """
    2×2 の閉形式解。Fraction を渡すと厳密な有理数で計算されます。

    R = [[a, b], [1−a, 1−b]] は R(q) = p から a = (p₀ − b·q₁)/q₀ となり、
    det(R·E) = det(E)·(p₀ − b)/q₀ は b の一次式なので区間の端点で最大になります。
    2状態では詳細釣り合いは R(q) = p から自動的に従います。

    Args:
        e: 列確率行列 e[y][x]
        p: 事前分布

    Returns:
        回復写像の列確率行列
    """
    p0, p1 = p
    q0 = e[0][0] * p0 + e[0][1] * p1
    q1 = e[1][0] * p0 + e[1][1] * p1
    det = e[0][0] * e[1][1] - e[0][1] * e[1][0]
    if det == 0 or abs(det) < SINGULAR_TOL:
        logger.error("det(E) = 0 のため最大化元が一意に定まりません")
        raise InfeasibleInstanceError("det(E) = 0 のためSurace–Scandi写像が一意に定まりません")

    if det > 0:
        b = max(0, (p0 - q0) / q1)
    else:
        b = min(1, p0 / q1)
    a = (p0 - b * q1) / q0
    return [[a, b], [1 - a, 1 - b]]


def _solver_options() -> Dict[str, Any]:
    installed = cp.installed_solvers()
    if "CLARABEL" in installed:
        return {"solver": cp.CLARABEL}
    if "SCS" in installed:
        return {"solver": cp.SCS, "eps_abs": SOLVER_EPS, "eps_rel": SOLVER_EPS, "max_iters": 200000}
    return {}


def _solve_log_det(e: np.ndarray, p: np.ndarray) -> np.ndarray:
    n = e.shape[0]
    q = e @ p
    r = cp.Variable((n, n), nonneg=True)
    s = cp.Variable((n, n), symmetric=True)
    constraints = [
        cp.sum(r, axis=0) == 1,
        r @ q == p,
        s == r @ (e @ np.diag(p)),
    ]
    # det(S) = det(R·E)·det(diag(p)) なので log det(S) の最大化と同値
    problem = cp.Problem(cp.Maximize(cp.log_det(s)), constraints)
    try:
        problem.solve(**_solver_options())
    except cp.error.SolverError as err:
        logger.error(f"最適化ソルバーでエラーが発生しました: {err}")
        raise InfeasibleInstanceError(f"最適化ソルバーでエラーが発生しました: {err}") from err

    if problem.status not in (cp.OPTIMAL, cp.OPTIMAL_INACCURATE):
        logger.error(f"Surace–Scandi最適化が実行不能です: status={problem.status}")
        raise InfeasibleInstanceError(f"Surace–Scandi最適化が実行不能です: {problem.status}")
    if problem.status == cp.OPTIMAL_INACCURATE:
        logger.warning("Surace–Scandi最適化の解の精度が低い可能性があります")
    logger.debug(f"Surace–Scandi最適化が完了しました: log det = {problem.value:.6g}")
    return np.clip(np.asarray(r.value, dtype=float), 0.0, 1.0)


def surace_scandi_matrix(e: np.ndarray, p: np.ndarray) -> np.ndarray:
    """
    浮動小数点の列確率行列 e と事前分布 p から回復写像の列確率行列を計算します。

    Raises:
        InapplicableStrategyError: 次元が4を超える、または正方でない場合
        InfeasibleInstanceError: det(E) = 0 または最適化が実行不能な場合
    """
    e = np.asarray(e, dtype=float)
    p = np.asarray(p, dtype=float)
    n = e.shape[0]
    if e.shape != (n, n) or n > MAX_DIMENSION:
        raise InapplicableStrategyError(
            f"古典Surace–Scandi写像は{MAX_DIMENSION}次以下の正方行列のみ対応しています: {e.shape}"
        )
    if is_permutation(e):
        return np.round(e.T)
    if abs(np.linalg.det(e)) < SINGULAR_TOL:
        logger.error("det(E) = 0 のため最大化元が一意に定まりません")
        raise InfeasibleInstanceError("det(E) = 0 のためSurace–Scandi写像が一意に定まりません")
    if n == 1:
        return np.ones((1, 1))
    if n == 2:
        return np.array(surace_scandi_2x2(e.tolist(), p.tolist()), dtype=float)
    return _solve_log_det(e, p)

#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""
JRSWW測度 π/(cosh(2πt)+1) dt の求積モジュール

累積分布関数 F(t) = (1+tanh(πt))/2 の逆関数で u ∈ (0,1) に変数変換し、
u 上で Gauss–Legendre 求積を行います。被積分関数 e^{iωt(u)} は u = 0, 1 で
振動的な特異性を持つため、端点に向けて2進的に細かくなるパネルに分割します。
"""

import functools
import logging
from typing import Tuple

import numpy as np
from numpy.polynomial.legendre import leggauss

logger = logging.getLogger("Quadrature")

DEFAULT_ORDER = 16
DEFAULT_PANELS = 53
MASS_TOLERANCE = 1e-13
_CHUNK = 256


def density(t: np.ndarray) -> np.ndarray:
    return np.pi / (np.cosh(2.0 * np.pi * np.asarray(t, dtype=float)) + 1.0)


def cdf(t: np.ndarray) -> np.ndarray:
    return (1.0 + np.tanh(np.pi * np.asarray(t, dtype=float))) / 2.0


def inverse_cdf(u: np.ndarray) -> np.ndarray:
    """t = artanh(2u−1)/π を u の小さい側でも桁落ちしない形で計算します。"""
    u = np.asarray(u, dtype=float)
    return (np.log(u) - np.log1p(-u)) / (2.0 * np.pi)


@functools.lru_cache(maxsize=None)
def jrsww_nodes(order: int = DEFAULT_ORDER, panels: int = DEFAULT_PANELS) -> Tuple[np.ndarray, np.ndarray]:
    """
    JRSWW測度の求積点と重みを返します。

    u ∈ [2^{-k-1}, 2^{-k}] (k = 1..panels) の各パネルに order 点の Gauss–Legendre 則を置き、
    u ↦ 1−u の対称性で右半分を作ります。取りこぼす質量は 2^{-panels}。

    Args:
        order: パネルあたりの求積点数
        panels: 片側のパネル数

    Returns:
        (求積点 t, 重み) の組
    """
    if order < 1 or panels < 1:
        raise ValueError(f"求積の次数とパネル数は1以上である必要があります: {order}, {panels}")
    x, w = leggauss(order)
    u_nodes = []
    u_weights = []
    for k in range(1, panels + 1):
        lo, hi = 2.0 ** (-k - 1), 2.0 ** (-k)
        half = (hi - lo) / 2.0
        u_nodes.append(lo + half * (x + 1.0))
        u_weights.append(half * w)
    u_left = np.concatenate(u_nodes)
    w_left = np.concatenate(u_weights)
    t_left = inverse_cdf(u_left)
    nodes = np.concatenate([t_left, -t_left[::-1]])
    weights = np.concatenate([w_left, w_left[::-1]])
    logger.debug(f"JRSWW求積点を生成しました: {len(nodes)} 点 (order={order}, panels={panels})")
    return nodes, weights


def mass_error(order: int = DEFAULT_ORDER, panels: int = DEFAULT_PANELS) -> float:
    """定数1の積分の誤差 |Σwᵢ − 1|"""
    _, weights = jrsww_nodes(order, panels)
    return abs(float(np.sum(weights)) - 1.0)


def self_test(order: int = DEFAULT_ORDER, panels: int = DEFAULT_PANELS) -> bool:
    error = mass_error(order, panels)
    if error > MASS_TOLERANCE:
        logger.error(f"JRSWW求積の質量自己検査に失敗しました: 誤差 {error:.3e}")
        return False
    return True


def characteristic_from_nodes(omega: np.ndarray, nodes: np.ndarray, weights: np.ndarray) -> np.ndarray:
    """Σᵢ wᵢ e^{iωtᵢ} を ω の各成分について計算します。"""
    omega = np.asarray(omega, dtype=float)
    flat = omega.reshape(-1)
    out = np.empty(flat.shape[0], dtype=complex)
    for start in range(0, flat.shape[0], _CHUNK):
        chunk = flat[start:start + _CHUNK]
        out[start:start + _CHUNK] = np.exp(1j * np.multiply.outer(chunk, nodes)) @ weights
    return out.reshape(omega.shape)


def jrsww_characteristic_exact(omega: np.ndarray) -> np.ndarray:
    """
    閉形式の特性関数 ∫e^{iωt} dμ(t) = (ω/2)/sinh(ω/2)
    """
    half = np.asarray(omega, dtype=float) / 2.0
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        value = np.where(np.abs(half) < 1e-8, 1.0 - half**2 / 6.0, half / np.sinh(half))
    return np.nan_to_num(value, nan=0.0)

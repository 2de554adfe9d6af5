#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""
代数間のCPTP超演算子（チャネル）のモジュール

チャネルはベクトル化された元に作用する行列 (target.total_dim × source.total_dim) で保持します。
行列単位はHilbert–Schmidt内積で正規直交なので、HS随伴は行列の共役転置になります。
"""

import logging
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
import scipy.linalg

from retrodictor.core.algebra import (
    DEFAULT_FLOOR,
    DEFAULT_TOL,
    Algebra,
    Element,
    FaithfulState,
)
from retrodictor.core.errors import (
    AlgebraMismatchError,
    NotFaithfulError,
    NotStarIsomorphismError,
)

logger = logging.getLogger("Channels")

CONDITION_CAP = 1e10

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
E01 = np.array([[0, 1], [0, 0]], dtype=complex)


class Channel:
    """
    2つの代数の間の線形超演算子
    """

    def __init__(self, source: Algebra, target: Algebra, matrix: np.ndarray):
        """
        Args:
            source: 入力側の代数
            target: 出力側の代数
            matrix: ベクトル化された元に作用する行列
        """
        arr = np.array(matrix, dtype=complex)
        if arr.shape != (target.total_dim, source.total_dim):
            raise AlgebraMismatchError(
                f"チャネル行列の形状が不正です: {arr.shape} "
                f"(期待値: {(target.total_dim, source.total_dim)})"
            )
        self.source = source
        self.target = target
        self.matrix = arr
        # tol -> (判定結果, 診断メッセージ)
        self._cptp_cache: Dict[float, Tuple[bool, str]] = {}

    @property
    def cptp_status(self) -> str:
        """CPTP判定のキャッシュ状態: unknown / verified / failed"""
        if not self._cptp_cache:
            return "unknown"
        return "verified" if all(ok for ok, _ in self._cptp_cache.values()) else "failed"

    def __call__(self, a: Element) -> Element:
        return apply(self, a)

    def __add__(self, other: "Channel") -> "Channel":
        _check_same_signature(self, other)
        return Channel(self.source, self.target, self.matrix + other.matrix)

    def __mul__(self, scalar: float) -> "Channel":
        return Channel(self.source, self.target, scalar * self.matrix)

    __rmul__ = __mul__

    def allclose(self, other: "Channel", tol: float = DEFAULT_TOL) -> bool:
        return channel_distance(self, other) <= tol

    def __repr__(self) -> str:
        return f"Channel({self.source} -> {self.target})"


class StatePair:
    """
    事前状態と予測状態の組（ℰ(α) = β を満たす射の両端）
    """

    def __init__(self, prior: FaithfulState, prediction: FaithfulState):
        self.prior = prior
        self.prediction = prediction

    @classmethod
    def from_channel(
        cls, prior: FaithfulState, channel: Channel, floor: float = DEFAULT_FLOOR
    ) -> "StatePair":
        return cls(prior, predict(channel, prior, floor))

    def is_attached(self, channel: Channel, tol: float = DEFAULT_TOL) -> bool:
        """channel(prior) = prediction であるかを判定します。"""
        if channel.source != self.prior.algebra or channel.target != self.prediction.algebra:
            return False
        return apply(channel, self.prior.element).allclose(self.prediction.element, tol)


def _check_same_signature(e: Channel, f: Channel) -> None:
    if e.source != f.source or e.target != f.target:
        raise AlgebraMismatchError(
            f"チャネルの入出力代数が一致しません: {e} と {f}"
        )


def apply(e: Channel, a: Element) -> Element:
    if a.algebra != e.source:
        raise AlgebraMismatchError(f"入力の代数がチャネルと一致しません: {a.algebra} != {e.source}")
    return Element.from_vector(e.target, e.matrix @ a.vector())


def predict(e: Channel, alpha: FaithfulState, floor: float = DEFAULT_FLOOR) -> FaithfulState:
    """
    予測状態 β = ℰ(α) を忠実な状態として返します。

    Raises:
        NotFaithfulError: 予測状態が忠実でない場合
    """
    beta = apply(e, alpha.element)
    try:
        return FaithfulState(beta, floor=floor)
    except NotFaithfulError as err:
        logger.error(f"予測状態が忠実ではありません: {err}")
        raise


def compose(f: Channel, e: Channel) -> Channel:
    """合成 f∘e を返します。"""
    if e.target != f.source:
        raise AlgebraMismatchError(f"合成できないチャネルです: {e.target} != {f.source}")
    return Channel(e.source, f.target, f.matrix @ e.matrix)


def _tensor_permutation(a: Algebra, b: Algebra) -> np.ndarray:
    """
    kron(vec(A), vec(B)) の各成分がテンソル積代数のベクトル化で占める位置を返します。
    """
    ab = a.tensor(b)
    ab_offsets = ab.offsets
    perm = np.empty(a.total_dim * b.total_dim, dtype=int)
    a_units = list(a.matrix_units())
    b_units = list(b.matrix_units())
    for ia, (x, i, j) in enumerate(a_units):
        for ib, (y, k, l) in enumerate(b_units):
            n = b.block_dims[y]
            size = a.block_dims[x] * n
            block = x * len(b.block_dims) + y
            row = i * n + k
            col = j * n + l
            perm[ia * b.total_dim + ib] = ab_offsets[block] + col * size + row
    return perm


def _permutation_matrix(perm: np.ndarray) -> np.ndarray:
    mat = np.zeros((len(perm), len(perm)))
    mat[perm, np.arange(len(perm))] = 1.0
    return mat


def tensor(e: Channel, e2: Channel) -> Channel:
    """テンソル積チャネル e⊗e2 を返します（ブロック順はx優先）。"""
    p_src = _permutation_matrix(_tensor_permutation(e.source, e2.source))
    p_tgt = _permutation_matrix(_tensor_permutation(e.target, e2.target))
    matrix = p_tgt @ np.kron(e.matrix, e2.matrix) @ p_src.T
    return Channel(e.source.tensor(e2.source), e.target.tensor(e2.target), matrix)


def hs_adjoint(e: Channel) -> Channel:
    return Channel(e.target, e.source, e.matrix.conj().T)


def choi_blocks(e: Channel) -> List[np.ndarray]:
    """
    入力ブロックごとのChoi行列 Σᵢⱼ Eᵢⱼ ⊗ ℰ(Eᵢⱼ) を返します。

    出力側は全ブロックを並べたブロック対角行列として埋め込みます。
    """
    result = []
    n_target = e.target.matrix_dim
    for x, m in enumerate(e.source.block_dims):
        choi = np.zeros((m * n_target, m * n_target), dtype=complex)
        offset = e.source.offsets[x]
        for col in range(m):
            for row in range(m):
                image = Element.from_vector(e.target, e.matrix[:, offset + col * m + row])
                choi[row * n_target:(row + 1) * n_target, col * n_target:(col + 1) * n_target] = (
                    image.dense()
                )
        result.append(choi)
    return result


def is_cptp(e: Channel, tol: float = DEFAULT_TOL) -> Tuple[bool, str]:
    """
    Choi行列の半正定値性とトレース保存性を検証します。結果はチャネルにキャッシュされます。

    Returns:
        (判定結果, 診断メッセージ)
    """
    if tol in e._cptp_cache:
        return e._cptp_cache[tol]

    ok, message = True, "CPTP"
    for x, choi in enumerate(choi_blocks(e)):
        scale = 1.0 + float(np.linalg.norm(choi, 2))
        if np.linalg.norm(choi - choi.conj().T, 2) > tol * scale:
            ok, message = False, f"ブロック {x} のChoi行列がエルミートではありません"
            break
        smallest = float(np.linalg.eigvalsh((choi + choi.conj().T) / 2)[0])
        if smallest < -tol * scale:
            ok, message = False, f"ブロック {x} のChoi行列に負の固有値があります: {smallest:.3e}"
            break

    if ok:
        trace_src = Element.identity(e.source).vector()
        trace_tgt = Element.identity(e.target).vector()
        residual = float(np.max(np.abs(trace_tgt @ e.matrix - trace_src)))
        if residual > tol:
            ok, message = False, f"トレースが保存されていません: 残差 {residual:.3e}"

    if not ok:
        logger.debug(f"CPTP判定に失敗しました: {message}")
    e._cptp_cache[tol] = (ok, message)
    return ok, message


def _multiplication_superoperator(left: Element, right: Element) -> np.ndarray:
    """X ↦ left·X·right のベクトル化表現"""
    blocks = [np.kron(r.T, lft) for lft, r in zip(left.blocks, right.blocks)]
    return scipy.linalg.block_diag(*blocks)


def conjugation_superoperator(v: Element) -> np.ndarray:
    """Ad_v: X ↦ v X v† のベクトル化表現"""
    return _multiplication_superoperator(v, v.dagger())


def commutator_superoperator(h: Element) -> np.ndarray:
    """X ↦ [h, X] のベクトル化表現"""
    ident = Element.identity(h.algebra)
    return _multiplication_superoperator(h, ident) - _multiplication_superoperator(ident, h)


def is_covariant(e: Channel, alpha: FaithfulState, tol: float = DEFAULT_TOL) -> bool:
    """
    生成子条件 e([log α, X]) = [log β, e(X)] でモジュラー流との共変性を判定します。

    Raises:
        NotFaithfulError: 予測状態が忠実でない場合
    """
    beta = predict(e, alpha)
    lhs = e.matrix @ commutator_superoperator(alpha.log())
    rhs = commutator_superoperator(beta.log()) @ e.matrix
    deviation = float(np.linalg.norm(lhs - rhs, 2))
    return deviation <= tol * (1.0 + float(np.linalg.norm(lhs, 2)))


def is_star_isomorphism(e: Channel, tol: float = DEFAULT_TOL) -> bool:
    """
    可逆性、乗法性、*-保存性を基底上で検証します。
    """
    if e.source.total_dim != e.target.total_dim or e.source.matrix_dim != e.target.matrix_dim:
        return False
    if np.linalg.cond(e.matrix) > CONDITION_CAP:
        return False

    n = e.source.total_dim
    basis = [e.source.basis_element(k) for k in range(n)]
    images = [Element.from_vector(e.target, e.matrix[:, k]) for k in range(n)]
    for u, eu in zip(basis, images):
        if not apply(e, u.dagger()).allclose(eu.dagger(), tol):
            return False
        for v, ev in zip(basis, images):
            if not apply(e, u @ v).allclose(eu @ ev, tol):
                return False
    return True


def invert_iso(e: Channel, tol: float = DEFAULT_TOL) -> Channel:
    if not is_star_isomorphism(e, tol):
        logger.error(f"*-同型ではないチャネルは逆写像を持ちません: {e}")
        raise NotStarIsomorphismError(f"*-同型ではないチャネルです: {e}")
    return Channel(e.target, e.source, np.linalg.inv(e.matrix))


def channel_distance(e: Channel, f: Channel) -> float:
    """超演算子行列の差の作用素ノルムを入力次元で割った偏差"""
    _check_same_signature(e, f)
    return float(np.linalg.norm(e.matrix - f.matrix, 2)) / e.source.total_dim


def channel_from_function(
    source: Algebra, target: Algebra, fn: Callable[[Element], Element]
) -> Channel:
    """基底上の値から線形写像を組み立てます。"""
    columns = [fn(source.basis_element(k)).vector() for k in range(source.total_dim)]
    return Channel(source, target, np.stack(columns, axis=1))


def identity_channel(algebra: Algebra) -> Channel:
    return Channel(algebra, algebra, np.eye(algebra.total_dim))


def unitary_channel(u: Element) -> Channel:
    """Ad_U"""
    return Channel(u.algebra, u.algebra, conjugation_superoperator(u))


def _compress(dense: np.ndarray, target: Algebra) -> Element:
    """密行列の対角ブロックを取り出して出力代数の元にします。"""
    blocks = []
    start = 0
    for m in target.block_dims:
        blocks.append(dense[start:start + m, start:start + m])
        start += m
    return Element(target, blocks)


def from_kraus(source: Algebra, target: Algebra, kraus: Sequence[np.ndarray]) -> Channel:
    """
    Kraus演算子 (target.matrix_dim × source.matrix_dim) からチャネルを作成します。
    出力は対象代数のブロック対角部分に圧縮されます。
    """
    ops = [np.asarray(k, dtype=complex) for k in kraus]
    expected = (target.matrix_dim, source.matrix_dim)
    for k in ops:
        if k.shape != expected:
            raise AlgebraMismatchError(f"Kraus演算子の形状が不正です: {k.shape} (期待値: {expected})")

    def _fn(a: Element) -> Element:
        dense = a.dense()
        return _compress(sum(k @ dense @ k.conj().T for k in ops), target)

    return channel_from_function(source, target, _fn)


def stochastic_channel(matrix: Sequence[Sequence[float]]) -> Channel:
    """列確率行列 E (E[y][x] = P(y|x)) を可換代数間のチャネルにします。"""
    arr = np.asarray(matrix, dtype=float)
    if np.any(arr < 0) or not np.allclose(arr.sum(axis=0), 1.0):
        raise ValueError("列確率行列ではありません")
    return Channel(Algebra.classical(arr.shape[1]), Algebra.classical(arr.shape[0]), arr)


def block_permutation(algebra: Algebra, perm: Sequence[int]) -> Channel:
    """ブロック x をブロック perm[x] へ移す *-同型"""
    if sorted(perm) != list(range(len(algebra.block_dims))):
        raise ValueError(f"置換が不正です: {list(perm)}")
    if any(algebra.block_dims[x] != algebra.block_dims[perm[x]] for x in range(len(perm))):
        raise ValueError("次元の異なるブロックは入れ替えられません")

    def _fn(a: Element) -> Element:
        blocks: List[Optional[np.ndarray]] = [None] * len(perm)
        for x, block in enumerate(a.blocks):
            blocks[perm[x]] = block
        return Element(algebra, blocks)  # type: ignore[arg-type]

    return channel_from_function(algebra, algebra, _fn)


def trace_channel(algebra: Algebra) -> Channel:
    """ℂ への部分トレース（全トレース）"""
    return Channel(algebra, Algebra((1,)), Element.identity(algebra).vector().reshape(1, -1))


def transpose_map(m: int) -> Channel:
    """転置写像（完全正値ではない）"""
    algebra = Algebra.matrix(m)
    return channel_from_function(
        algebra, algebra, lambda a: Element(algebra, [a.blocks[0].T])
    )


def bit_flip(p: float) -> Channel:
    """(1−p)·id + p·Ad_{σx}"""
    if not 0.0 <= p <= 1.0:
        logger.error(f"ビット反転確率が範囲外です: {p}")
        raise ValueError(f"ビット反転確率は[0,1]の範囲で指定してください: {p}")
    algebra = Algebra.matrix(2)
    flip = unitary_channel(Element(algebra, [SIGMA_X]))
    return (1.0 - p) * identity_channel(algebra) + p * flip


def _rng(seed: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed))


def random_isometry(rows: int, cols: int, rng: np.random.Generator) -> np.ndarray:
    """ガウス行列のQR分解による一様ランダム等長写像"""
    gauss = rng.standard_normal((rows, cols)) + 1j * rng.standard_normal((rows, cols))
    q, r = np.linalg.qr(gauss)
    phases = np.diag(r) / np.abs(np.diag(r))
    return q * phases


def random_unitary_element(algebra: Algebra, rng: np.random.Generator) -> Element:
    return Element(algebra, [random_isometry(m, m, rng) for m in algebra.block_dims])


def random_channel(source: Algebra, target: Algebra, env_dim: int, seed: int) -> Channel:
    """
    ブロックごとのランダムStinespring拡大（環境次元 env_dim）によるCPTPチャネルを作成します。

    Args:
        source: 入力側の代数
        target: 出力側の代数
        env_dim: 環境の次元
        seed: 乱数シード

    Returns:
        CPTPチャネル
    """
    if env_dim < 1:
        logger.error(f"環境次元が不正です: {env_dim}")
        raise ValueError(f"環境次元は1以上である必要があります: {env_dim}")
    n_target = target.matrix_dim
    dilation = n_target * env_dim
    if dilation < max(source.block_dims):
        raise ValueError(
            f"環境次元が小さすぎます: {n_target}×{env_dim} < {max(source.block_dims)}"
        )

    rng = _rng(seed)
    isometries = [random_isometry(dilation, m, rng) for m in source.block_dims]

    def _fn(a: Element) -> Element:
        dense = np.zeros((n_target, n_target), dtype=complex)
        for v, block in zip(isometries, a.blocks):
            big = (v @ block @ v.conj().T).reshape(n_target, env_dim, n_target, env_dim)
            dense += np.trace(big, axis1=1, axis2=3)
        return _compress(dense, target)

    channel = channel_from_function(source, target, _fn)
    logger.debug(f"ランダムチャネルを生成しました: {channel} (seed={seed}, env_dim={env_dim})")
    return channel


def random_unitary_channel(algebra: Algebra, seed: int, permute_blocks: bool = True) -> Channel:
    """
    ランダムなブロックユニタリ共役（同じ次元のブロックはランダムに置換）による *-同型
    """
    rng = _rng(seed)
    iso = unitary_channel(random_unitary_element(algebra, rng))
    if not permute_blocks:
        return iso
    perm = list(range(len(algebra.block_dims)))
    for m in sorted(set(algebra.block_dims)):
        same = [x for x in perm if algebra.block_dims[x] == m]
        shuffled = [same[k] for k in rng.permutation(len(same))]
        for x, y in zip(same, shuffled):
            perm[x] = y
    return compose(block_permutation(algebra, perm), iso)


def random_mixed_unitary_channel(algebra: Algebra, n_terms: int, seed: int) -> Channel:
    """ランダムユニタリ共役の凸結合（単位的チャネル）"""
    rng = _rng(seed)
    weights = rng.dirichlet(np.ones(n_terms))
    matrix = sum(
        w * conjugation_superoperator(random_unitary_element(algebra, rng)) for w in weights
    )
    return Channel(algebra, algebra, matrix)


def random_faithful_state(a: Algebra, floor: float, seed: int) -> FaithfulState:
    """
    ブロックごとに G G† を作り、(1−N·floor)·ρ + floor·I の形に正規化した状態を返します。
    """
    n = a.matrix_dim
    if not 0.0 < floor < 1.0 / n:
        logger.error(f"下限値が実現できません: {floor} (次元 {n})")
        raise ValueError(f"下限値は 0 < floor < 1/{n} を満たす必要があります: {floor}")
    rng = _rng(seed)
    blocks = []
    for m in a.block_dims:
        g = rng.standard_normal((m, m)) + 1j * rng.standard_normal((m, m))
        blocks.append(g @ g.conj().T)
    raw = Element(a, blocks)
    total = sum(np.trace(b).real for b in raw.blocks)
    state = raw * ((1.0 - n * floor) / total) + Element.identity(a) * floor
    state = (state + state.dagger()) * 0.5
    return FaithfulState(state, floor=floor * (1.0 - 1e-9))

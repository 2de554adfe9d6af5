#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""
有限次元C*-代数（行列ブロックの直和）とその元、状態、行列関数のモジュール

ベクトル化の規約: ブロック順に並べ、各ブロック内は列優先（column-stacking）で展開する。
"""

import hashlib
import logging
from dataclasses import dataclass
from typing import Iterator, List, Optional, Sequence, Tuple, Union

import numpy as np

from retrodictor.core.errors import AlgebraMismatchError, NotFaithfulError

logger = logging.getLogger("Algebra")

DEFAULT_TOL = 1e-9
DEFAULT_FLOOR = 1e-12

Scalar = Union[int, float, complex]


@dataclass(frozen=True)
class Algebra:
    """
    ブロック次元のリスト ⊕ₓ M_{mₓ} で表される有限次元C*-代数
    """

    block_dims: Tuple[int, ...]

    def __post_init__(self) -> None:
        dims = tuple(int(m) for m in self.block_dims)
        if not dims:
            raise ValueError("ブロック次元のリストが空です")
        if any(m < 1 for m in dims):
            raise ValueError(f"ブロック次元は1以上である必要があります: {list(dims)}")
        object.__setattr__(self, "block_dims", dims)

    @classmethod
    def matrix(cls, m: int) -> "Algebra":
        """単一ブロック M_m を返します。"""
        return cls((m,))

    @classmethod
    def classical(cls, n: int) -> "Algebra":
        """可換代数 ℂⁿ を返します。"""
        return cls((1,) * n)

    @property
    def total_dim(self) -> int:
        """ベクトル空間としての次元 Σ mₓ²"""
        return sum(m * m for m in self.block_dims)

    @property
    def matrix_dim(self) -> int:
        """行列としての全次元 Σ mₓ"""
        return sum(self.block_dims)

    @property
    def is_commutative(self) -> bool:
        return all(m == 1 for m in self.block_dims)

    @property
    def offsets(self) -> List[int]:
        """各ブロックのベクトル化オフセット"""
        result = []
        offset = 0
        for m in self.block_dims:
            result.append(offset)
            offset += m * m
        return result

    def tensor(self, other: "Algebra") -> "Algebra":
        """
        テンソル積代数 ⊕_{x,y} M_{mₓ·n_y} を返します（ブロック順はx優先）。
        """
        return Algebra(tuple(m * n for m in self.block_dims for n in other.block_dims))

    def matrix_units(self) -> Iterator[Tuple[int, int, int]]:
        """
        ベクトル化順に行列単位 (block, row, col) を列挙します。
        """
        for x, m in enumerate(self.block_dims):
            for col in range(m):
                for row in range(m):
                    yield x, row, col

    def basis_element(self, index: int) -> "Element":
        vec = np.zeros(self.total_dim, dtype=complex)
        vec[index] = 1.0
        return Element.from_vector(self, vec)

    def __str__(self) -> str:
        return "⊕".join(f"M{m}" for m in self.block_dims)


class Element:
    """
    代数の元（ブロックごとの複素正方行列）
    """

    __slots__ = ("algebra", "blocks")

    def __init__(self, algebra: Algebra, blocks: Sequence[np.ndarray]):
        if len(blocks) != len(algebra.block_dims):
            raise AlgebraMismatchError(
                f"ブロック数が代数と一致しません: {len(blocks)} != {len(algebra.block_dims)}"
            )
        converted = []
        for m, block in zip(algebra.block_dims, blocks):
            arr = np.array(block, dtype=complex)
            if arr.shape != (m, m):
                raise AlgebraMismatchError(
                    f"ブロックの形状が不正です: {arr.shape} (期待値: {(m, m)})"
                )
            converted.append(arr)
        self.algebra = algebra
        self.blocks = converted

    @classmethod
    def identity(cls, algebra: Algebra) -> "Element":
        return cls(algebra, [np.eye(m, dtype=complex) for m in algebra.block_dims])

    @classmethod
    def zeros(cls, algebra: Algebra) -> "Element":
        return cls(algebra, [np.zeros((m, m), dtype=complex) for m in algebra.block_dims])

    @classmethod
    def from_matrix(cls, matrix: np.ndarray) -> "Element":
        """単一ブロック代数 M_m の元を作成します。"""
        arr = np.asarray(matrix, dtype=complex)
        return cls(Algebra.matrix(arr.shape[0]), [arr])

    @classmethod
    def from_diagonal(cls, values: Sequence[Scalar], algebra: Optional[Algebra] = None) -> "Element":
        """
        対角元を作成します。algebraを省略した場合は可換代数 ℂⁿ 上の元になります。

        単一ブロック代数を指定した場合はそのブロックの対角行列になります。
        """
        vals = np.asarray(values, dtype=complex)
        if algebra is None:
            algebra = Algebra.classical(len(vals))
        if algebra.matrix_dim != len(vals):
            raise AlgebraMismatchError(
                f"対角成分の数が代数の次元と一致しません: {len(vals)} != {algebra.matrix_dim}"
            )
        blocks = []
        start = 0
        for m in algebra.block_dims:
            blocks.append(np.diag(vals[start:start + m]))
            start += m
        return cls(algebra, blocks)

    @classmethod
    def from_vector(cls, algebra: Algebra, vec: np.ndarray) -> "Element":
        vec = np.asarray(vec, dtype=complex).reshape(-1)
        if vec.shape[0] != algebra.total_dim:
            raise AlgebraMismatchError(
                f"ベクトルの長さが代数の次元と一致しません: {vec.shape[0]} != {algebra.total_dim}"
            )
        blocks = []
        for offset, m in zip(algebra.offsets, algebra.block_dims):
            blocks.append(vec[offset:offset + m * m].reshape((m, m), order="F"))
        return cls(algebra, blocks)

    def vector(self) -> np.ndarray:
        if not self.blocks:
            return np.zeros(0, dtype=complex)
        return np.concatenate([b.reshape(-1, order="F") for b in self.blocks])

    def dense(self) -> np.ndarray:
        """ブロック対角の密行列として返します。"""
        size = self.algebra.matrix_dim
        out = np.zeros((size, size), dtype=complex)
        start = 0
        for block in self.blocks:
            m = block.shape[0]
            out[start:start + m, start:start + m] = block
            start += m
        return out

    def _check_same(self, other: "Element") -> None:
        if self.algebra != other.algebra:
            raise AlgebraMismatchError(
                f"代数が一致しません: {self.algebra} と {other.algebra}"
            )

    def __add__(self, other: "Element") -> "Element":
        self._check_same(other)
        return Element(self.algebra, [a + b for a, b in zip(self.blocks, other.blocks)])

    def __sub__(self, other: "Element") -> "Element":
        self._check_same(other)
        return Element(self.algebra, [a - b for a, b in zip(self.blocks, other.blocks)])

    def __neg__(self) -> "Element":
        return Element(self.algebra, [-a for a in self.blocks])

    def __mul__(self, scalar: Scalar) -> "Element":
        return Element(self.algebra, [scalar * a for a in self.blocks])

    __rmul__ = __mul__

    def __matmul__(self, other: "Element") -> "Element":
        self._check_same(other)
        return Element(self.algebra, [a @ b for a, b in zip(self.blocks, other.blocks)])

    def dagger(self) -> "Element":
        return Element(self.algebra, [a.conj().T for a in self.blocks])

    def tensor(self, other: "Element") -> "Element":
        """x優先のブロック順でテンソル積を返します。"""
        blocks = [np.kron(a, b) for a in self.blocks for b in other.blocks]
        return Element(self.algebra.tensor(other.algebra), blocks)

    def norm(self) -> float:
        """作用素ノルム（各ブロックの最大特異値の最大値）"""
        return max(float(np.linalg.norm(b, 2)) if b.size else 0.0 for b in self.blocks)

    def is_hermitian(self, tol: float = DEFAULT_TOL) -> bool:
        return (self - self.dagger()).norm() <= tol

    def allclose(self, other: "Element", tol: float = DEFAULT_TOL) -> bool:
        self._check_same(other)
        return (self - other).norm() <= tol

    def __repr__(self) -> str:
        return f"Element({self.algebra}, {[b.tolist() for b in self.blocks]})"


def _hermitian_eigh(block: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    # 丸め誤差を吸収するため対称化してから分解する
    sym = (block + block.conj().T) / 2
    return np.linalg.eigh(sym)


class FaithfulState:
    """
    忠実な状態（正定値・トレース1の元）。ブロックごとの固有値分解をキャッシュします。
    """

    def __init__(
        self,
        element: Element,
        floor: float = DEFAULT_FLOOR,
        tol: float = DEFAULT_TOL,
    ):
        """
        Args:
            element: 状態を表す元
            floor: 最小固有値の下限（忠実性の閾値）
            tol: エルミート性とトレースの許容誤差
        """
        if not element.is_hermitian(tol):
            logger.error("状態がエルミートではありません")
            raise NotFaithfulError("状態がエルミートではありません")
        tr = trace(element)
        if abs(tr - 1.0) > tol:
            logger.error(f"状態のトレースが1ではありません: {tr}")
            raise NotFaithfulError(f"状態のトレースが1ではありません: {tr.real:.6g}")

        self.element = element
        self.floor = floor
        self.eigenvalues: List[np.ndarray] = []
        self.eigenvectors: List[np.ndarray] = []
        for block in element.blocks:
            vals, vecs = _hermitian_eigh(block)
            self.eigenvalues.append(vals)
            self.eigenvectors.append(vecs)

        smallest = self.min_eigenvalue
        if smallest < floor:
            logger.error(f"状態が忠実ではありません: 最小固有値 {smallest:.3e} < {floor:.3e}")
            raise NotFaithfulError(
                f"状態が忠実ではありません: 最小固有値 {smallest:.3e} が下限 {floor:.3e} を下回っています"
            )

    @classmethod
    def from_probabilities(cls, probabilities: Sequence[float], floor: float = DEFAULT_FLOOR) -> "FaithfulState":
        """可換代数 ℂⁿ 上の確率ベクトルから状態を作成します。"""
        return cls(Element.from_diagonal(probabilities), floor=floor)

    @classmethod
    def maximally_mixed(cls, algebra: Algebra) -> "FaithfulState":
        return cls(Element.identity(algebra) * (1.0 / algebra.matrix_dim))

    @property
    def algebra(self) -> Algebra:
        return self.element.algebra

    @property
    def min_eigenvalue(self) -> float:
        return float(min(np.min(v) for v in self.eigenvalues))

    def power(self, z: Scalar) -> Element:
        return element_power(self, z)

    def log(self) -> Element:
        blocks = [
            vecs @ np.diag(np.log(vals).astype(complex)) @ vecs.conj().T
            for vals, vecs in zip(self.eigenvalues, self.eigenvectors)
        ]
        return Element(self.algebra, blocks)

    def spectral_projectors(self, tol: float = DEFAULT_TOL) -> List[List[Tuple[float, np.ndarray]]]:
        """
        ブロックごとに (固有値, スペクトル射影) のリストを返します。縮退した固有値はまとめます。
        """
        result = []
        for vals, vecs in zip(self.eigenvalues, self.eigenvectors):
            groups: List[Tuple[float, np.ndarray]] = []
            start = 0
            while start < len(vals):
                stop = start + 1
                while stop < len(vals) and vals[stop] - vals[start] <= tol:
                    stop += 1
                v = vecs[:, start:stop]
                groups.append((float(np.mean(vals[start:stop])), v @ v.conj().T))
                start = stop
            result.append(groups)
        return result

    def tensor(self, other: "FaithfulState") -> "FaithfulState":
        return FaithfulState(
            self.element.tensor(other.element), floor=min(self.floor, other.floor) ** 2
        )

    def fingerprint(self, digits: int = 10) -> str:
        """
        状態の識別子（丸めた行列成分のハッシュ）。STHのユニタリ割り当てのキーに使用します。
        """
        payload = [str(self.algebra.block_dims)]
        for block in self.element.blocks:
            rounded = np.round(block, digits) + 0.0  # -0.0 を正規化
            payload.append(np.array2string(rounded.real, precision=digits))
            payload.append(np.array2string(rounded.imag, precision=digits))
        return hashlib.sha1("|".join(payload).encode("utf-8")).hexdigest()[:16]  # noqa: S324

    def __repr__(self) -> str:
        return f"FaithfulState({self.element!r})"


def trace(a: Element) -> complex:
    """Σₓ tr(blockₓ) を返します。"""
    return complex(sum(np.trace(b) for b in a.blocks))


def hs_inner(a: Element, b: Element) -> complex:
    """Hilbert–Schmidt内積 tr(a† b)"""
    a._check_same(b)
    return complex(np.vdot(a.vector(), b.vector()))


def kms_inner(alpha: FaithfulState, a: Element, b: Element) -> complex:
    """KMS内積 tr(a† α^{-1/2} b α^{-1/2})"""
    a._check_same(b)
    a._check_same(alpha.element)
    inv_sqrt = element_power(alpha, -0.5)
    return trace(a.dagger() @ inv_sqrt @ b @ inv_sqrt)


def element_power(s: FaithfulState, z: Scalar) -> Element:
    """
    キャッシュ済み固有値分解を用いて s^z = U diag(λ^z) U† を計算します。

    Args:
        s: 忠実な状態
        z: 複素指数

    Returns:
        s^z を表す元
    """
    blocks = []
    for vals, vecs in zip(s.eigenvalues, s.eigenvectors):
        powered = np.exp(complex(z) * np.log(vals))
        blocks.append((vecs * powered) @ vecs.conj().T)
    return Element(s.algebra, blocks)


def ad(v: Element, a: Element) -> Element:
    """Ad_v(a) = v a v†"""
    v._check_same(a)
    return v @ a @ v.dagger()


def commutator(a: Element, b: Element) -> Element:
    return a @ b - b @ a


def is_positive(a: Element, tol: float = DEFAULT_TOL) -> bool:
    """
    エルミートかつブロックごとの固有値がすべて -tol 以上であれば True を返します。
    """
    if not a.is_hermitian(tol):
        return False
    for block in a.blocks:
        vals, _ = _hermitian_eigh(block)
        if vals.size and vals[0] < -tol:
            return False
    return True


def tensor_elements(a: Element, b: Element) -> Element:
    return a.tensor(b)


def tensor_states(alpha: FaithfulState, beta: FaithfulState) -> FaithfulState:
    """積状態 α⊗β（下限は両者の下限の積）"""
    return alpha.tensor(beta)


def maximally_mixed_state(algebra: Algebra) -> FaithfulState:
    return FaithfulState.maximally_mixed(algebra)

#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""
有限次元C*-代数・元・状態のテスト
"""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from retrodictor.core.algebra import (
    Algebra,
    Element,
    FaithfulState,
    element_power,
    hs_inner,
    is_positive,
    kms_inner,
    maximally_mixed_state,
    tensor_elements,
    tensor_states,
    trace,
)
from retrodictor.core.errors import AlgebraMismatchError, NotFaithfulError

MATRIX_DIMENSION = 3
SHIFT = 0.1


def _state_from_gaussian(real: np.ndarray, imag: np.ndarray) -> FaithfulState:
    g = real + 1j * imag
    rho = g @ g.conj().T + SHIFT * np.eye(g.shape[0])
    return FaithfulState(Element.from_matrix(rho / np.trace(rho).real))


gaussian = arrays(
    np.float64,
    (MATRIX_DIMENSION, MATRIX_DIMENSION),
    elements=st.floats(min_value=-1.0, max_value=1.0),
)


class TestAlgebra:
    """Algebraクラスのテスト"""

    def test_dimensions(self):
        """ベクトル空間としての次元と行列としての次元"""
        algebra = Algebra((2, 1))
        assert algebra.total_dim == 5
        assert algebra.matrix_dim == 3
        assert algebra.offsets == [0, 4]

    def test_commutative(self):
        """すべてのブロックが1次元のときだけ可換"""
        assert Algebra.classical(3).is_commutative
        assert not Algebra((2, 1)).is_commutative
        assert not Algebra.matrix(2).is_commutative

    @pytest.mark.parametrize("dims", [(), (0,), (2, -1)])
    def test_invalid_dimensions(self, dims):
        """空のリストや1未満の次元は拒否される"""
        with pytest.raises(ValueError):
            Algebra(dims)

    def test_tensor_block_order(self):
        """テンソル積のブロックは左因子優先で並ぶ"""
        assert Algebra((2, 1)).tensor(Algebra((1, 3))).block_dims == (2, 6, 1, 3)

    def test_matrix_units_follow_vectorization(self):
        """行列単位の列挙順が列優先のベクトル化と一致する"""
        algebra = Algebra((2, 1))
        for index, (x, row, col) in enumerate(algebra.matrix_units()):
            unit = algebra.basis_element(index)
            assert unit.blocks[x][row, col] == 1.0
            assert trace(unit @ unit.dagger()) == pytest.approx(1.0)


class TestElement:
    """Elementクラスのテスト"""

    def test_trace_examples(self):
        """単位元、最大混合状態、古典分布のトレース"""
        assert trace(Element.identity(Algebra.matrix(2))) == pytest.approx(2.0)
        assert trace(Element.from_matrix(np.diag([0.5, 0.5]))) == pytest.approx(1.0)
        assert trace(Element.from_diagonal([1 / 5, 4 / 5])) == pytest.approx(1.0)

    def test_wrong_block_shape(self):
        """ブロックの形状が代数と一致しない場合はエラー"""
        with pytest.raises(AlgebraMismatchError):
            Element(Algebra((2, 1)), [np.eye(2), np.eye(2)])
        with pytest.raises(AlgebraMismatchError):
            Element(Algebra((2, 1)), [np.eye(2)])

    def test_mixed_algebras_rejected(self):
        """異なる代数の元どうしの演算はエラー"""
        with pytest.raises(AlgebraMismatchError):
            Element.identity(Algebra.matrix(2)) + Element.identity(Algebra.classical(2))

    def test_vector_round_trip(self):
        """ベクトル化と復元で元が変わらない"""
        algebra = Algebra((2, 1))
        element = Element(algebra, [np.array([[1, 2j], [3, 4]]), np.array([[5]])])
        restored = Element.from_vector(algebra, element.vector())
        assert restored.allclose(element, 0.0)
        # 列優先: 2番目の成分は (1, 0)
        assert element.vector()[1] == 3

    def test_dense_is_block_diagonal(self):
        """密行列表現はブロック対角"""
        algebra = Algebra((2, 1))
        dense = Element.identity(algebra).dense()
        assert np.allclose(dense, np.eye(3))

    def test_tensor_trace_multiplies(self):
        """tr(a⊗b) = tr(a)·tr(b)"""
        a = Element(Algebra((2, 1)), [np.array([[1, 1j], [-1j, 2]]), np.array([[3]])])
        b = Element.from_diagonal([0.25, 0.75])
        assert trace(a.tensor(b)) == pytest.approx(trace(a) * trace(b))

    def test_hs_inner_conjugate_linear(self):
        """Hilbert–Schmidt内積は第1引数について共役線形"""
        a = Element.from_matrix(np.array([[1, 2], [3, 4j]]))
        b = Element.from_matrix(np.array([[0, 1], [1j, 1]]))
        assert hs_inner(a * 1j, b) == pytest.approx(-1j * hs_inner(a, b))
        assert hs_inner(a, a).real > 0

    def test_is_positive(self):
        """半正定値性の判定"""
        assert is_positive(Element.from_matrix(np.diag([1.0, 0.0])))
        assert not is_positive(Element.from_matrix(np.diag([1.0, -0.1])))
        assert not is_positive(Element.from_matrix(np.array([[1.0, 1.0], [0.0, 1.0]])))


class TestFaithfulState:
    """FaithfulStateクラスのテスト"""

    def test_not_hermitian(self):
        """エルミートでない元は状態ではない"""
        with pytest.raises(NotFaithfulError, match="エルミート"):
            FaithfulState(Element.from_matrix(np.array([[0.5, 0.1], [0.0, 0.5]])))

    def test_not_normalized(self):
        """トレースが1でない元は状態ではない"""
        with pytest.raises(NotFaithfulError, match="トレース"):
            FaithfulState(Element.from_matrix(np.diag([0.5, 0.6])))

    def test_not_faithful(self):
        """固有値が下限を下回る状態は忠実ではない"""
        with pytest.raises(NotFaithfulError, match="忠実"):
            FaithfulState(Element.from_matrix(np.diag([1.0, 0.0])))
        with pytest.raises(NotFaithfulError):
            FaithfulState.from_probabilities([0.999, 0.001], floor=0.01)

    def test_maximally_mixed(self):
        """最大混合状態は I / Σmₓ"""
        state = maximally_mixed_state(Algebra((2, 1)))
        assert state.min_eigenvalue == pytest.approx(1 / 3)
        assert trace(state.element) == pytest.approx(1.0)

    def test_tensor_state(self):
        """積状態の固有値は因子の固有値の積"""
        state = tensor_states(
            FaithfulState.from_probabilities([0.2, 0.8]), FaithfulState.from_probabilities([0.5, 0.5])
        )
        assert state.algebra.block_dims == (1, 1, 1, 1)
        assert state.min_eigenvalue == pytest.approx(0.1)

    def test_tensor_elements_trace(self):
        """tr(a⊗b) = tr(a)·tr(b)"""
        a = Element.from_matrix(np.array([[1.0, 2.0], [3.0, 4.0]]))
        b = Element.from_matrix(np.array([[0.5, 1j], [-1j, 2.0]]))
        product = tensor_elements(a, b)
        assert product.algebra.total_dim == 16
        assert trace(product) == pytest.approx(trace(a) * trace(b))

    def test_spectral_projectors_merge_degenerate(self):
        """縮退した固有値の射影はまとめられる"""
        state = FaithfulState(Element.from_matrix(np.diag([0.25, 0.25, 0.5])))
        groups = state.spectral_projectors()[0]
        assert [value for value, _ in groups] == pytest.approx([0.25, 0.5])
        assert np.trace(groups[0][1]).real == pytest.approx(2.0)

    def test_fingerprint(self):
        """同じ状態は同じ識別子、異なる状態は異なる識別子"""
        first = FaithfulState.from_probabilities([0.3, 0.7])
        second = FaithfulState.from_probabilities([0.3, 0.7])
        third = FaithfulState.from_probabilities([0.7, 0.3])
        assert first.fingerprint() == second.fingerprint()
        assert first.fingerprint() != third.fingerprint()

    def test_log(self):
        """log α は固有値の対数"""
        state = FaithfulState(Element.from_matrix(np.diag([0.25, 0.75])))
        assert np.allclose(state.log().blocks[0], np.diag(np.log([0.25, 0.75])))


class TestFunctionalCalculus:
    """固有値分解による行列関数の性質テスト"""

    @settings(max_examples=50, deadline=None)
    @given(real=gaussian, imag=gaussian)
    def test_square_root_squares_back(self, real, imag):
        """α^{1/2}·α^{1/2} = α"""
        state = _state_from_gaussian(real, imag)
        root = element_power(state, 0.5)
        assert (root @ root).allclose(state.element, 1e-10)

    @settings(max_examples=50, deadline=None)
    @given(real=gaussian, imag=gaussian, z=st.complex_numbers(max_magnitude=2.0))
    def test_power_inverse(self, real, imag, z):
        """α^z·α^{−z} = I"""
        state = _state_from_gaussian(real, imag)
        product = element_power(state, z) @ element_power(state, -z)
        assert product.allclose(Element.identity(state.algebra), 1e-8)

    @settings(max_examples=50, deadline=None)
    @given(real=gaussian, imag=gaussian, t=st.floats(min_value=-5.0, max_value=5.0))
    def test_imaginary_power_is_unitary(self, real, imag, t):
        """α^{it} はユニタリ"""
        state = _state_from_gaussian(real, imag)
        u = element_power(state, 1j * t)
        assert (u @ u.dagger()).allclose(Element.identity(state.algebra), 1e-10)

    @settings(max_examples=50, deadline=None)
    @given(real=gaussian, imag=gaussian, other=gaussian)
    def test_kms_inner_is_positive(self, real, imag, other):
        """KMS内積 ⟨a, a⟩_α は非負の実数"""
        state = _state_from_gaussian(real, imag)
        a = Element.from_matrix(other + 0j)
        value = kms_inner(state, a, a)
        assert abs(value.imag) <= 1e-9 * (1.0 + abs(value.real))
        assert value.real >= -1e-12

    def test_power_of_blockwise_state(self):
        """ブロックごとに冪が計算される"""
        state = FaithfulState(Element(Algebra((2, 1)), [np.diag([0.2, 0.3]), np.array([[0.5]])]))
        half = element_power(state, 0.5)
        assert np.allclose(half.blocks[0], np.diag(np.sqrt([0.2, 0.3])))
        assert np.allclose(half.blocks[1], [[np.sqrt(0.5)]])

#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""
インスタンス集合の設定と生成のテスト
"""

import json
import os
import tempfile
from pathlib import Path

import numpy as np
import pytest
import yaml

from retrodictor.core.channels import is_covariant, predict, tensor
from retrodictor.core.errors import MalformedInputError
from retrodictor.core.retrodiction import AveragedPetz, Measure, Petz
from retrodictor.core.suite import (
    ComposableInstance,
    InstanceSuite,
    TensorInstance,
    load_instance,
)

REPOSITORY_CONFIG = Path(__file__).resolve().parents[2] / "suite_config.yaml"


class TestInstanceSuiteConfig:
    """InstanceSuiteの設定の読み書きのテスト"""

    @pytest.fixture
    def config_json(self):
        """設定ファイル（JSON）を作成するフィクスチャ"""
        with tempfile.NamedTemporaryFile(mode="w", delete=False, suffix=".json") as f:
            json.dump({"seeds": [7, 8], "dims": [[1, 1]], "tol": 1e-7}, f)

        yield f.name
        os.unlink(f.name)

    @pytest.fixture
    def config_yaml(self):
        """設定ファイル（YAML）を作成するフィクスチャ"""
        with tempfile.NamedTemporaryFile(mode="w", delete=False, suffix=".yaml") as f:
            yaml.dump({"seeds": [3], "dims": [[2], [2, 1]], "include_fixed": False}, f)

        yield f.name
        os.unlink(f.name)

    def test_load_json(self, config_json):
        """JSONの設定は既定値を上書きする"""
        suite = InstanceSuite.from_file(config_json)
        assert suite.seeds == [7, 8]
        assert suite.dims == [(1, 1)]
        assert suite.tol == 1e-7
        assert suite.approximate_tol == InstanceSuite().approximate_tol

    def test_load_yaml(self, config_yaml):
        """YAMLの設定"""
        suite = InstanceSuite.from_file(config_yaml)
        assert suite.dims == [(2,), (2, 1)]
        assert not suite.include_fixed

    def test_repository_config_is_default(self):
        """リポジトリ同梱の設定ファイルは既定値と同じ"""
        assert InstanceSuite.from_file(str(REPOSITORY_CONFIG)).to_dict() == InstanceSuite.default().to_dict()

    def test_unknown_key(self):
        """未知のキーはエラー"""
        with pytest.raises(MalformedInputError, match="未知の設定キー"):
            InstanceSuite.from_dict({"seeds": [1], "sedes": [2]})

    @pytest.mark.parametrize(
        "data",
        [
            {"seeds": []},
            {"dims": [[0]]},
            {"covariant_fraction": 1.5},
            {"tol": 0.0},
            {"env_dim": 0},
            {"seeds": "abc"},
        ],
    )
    def test_invalid_values(self, data):
        """不正な設定値はエラー"""
        with pytest.raises(MalformedInputError):
            InstanceSuite.from_dict(data)

    def test_unsupported_extension(self):
        """サポートされていない形式"""
        with pytest.raises(MalformedInputError):
            InstanceSuite.from_file("suite.toml")
        with pytest.raises(MalformedInputError):
            InstanceSuite().export("suite.toml")

    @pytest.mark.parametrize("suffix", [".json", ".yaml"])
    def test_export(self, suffix):
        """エクスポートした設定を読み込むと同じ設定になる"""
        suite = InstanceSuite(seeds=[5, 6], dims=[(3,)], covariant_fraction=0.5)
        with tempfile.TemporaryDirectory() as temp_dir:
            path = os.path.join(temp_dir, f"exported{suffix}")
            suite.export(path)
            assert InstanceSuite.from_file(path).to_dict() == suite.to_dict()

    def test_tolerance_for(self):
        """近似的な戦略には緩い許容誤差を使う"""
        suite = InstanceSuite(tol=1e-9, approximate_tol=1e-5)
        assert suite.tolerance_for(Petz()) == 1e-9
        assert suite.tolerance_for(AveragedPetz(Measure.jrsww())) == 1e-5
        assert suite.tolerance_for(AveragedPetz(Measure.dirac(0.5))) == 1e-9


class TestInstanceGeneration:
    """インスタンス生成のテスト"""

    @pytest.fixture
    def suite(self):
        """小さなインスタンス集合"""
        return InstanceSuite(seeds=[0, 1], dims=[(2,), (1, 1), (2, 1)], include_fixed=False)

    def test_deterministic(self, suite):
        """同じ設定からは同じインスタンス列"""
        other = InstanceSuite(seeds=[0, 1], dims=[(2,), (1, 1), (2, 1)], include_fixed=False)
        for first, second in zip(suite.singles(), other.singles()):
            assert first.name == second.name
            assert np.array_equal(first.channel.matrix, second.channel.matrix)
            assert first.prior.element.allclose(second.prior.element, 0.0)

    def test_seeds_change_instances(self, suite):
        """シードが異なれば異なるインスタンス"""
        other = InstanceSuite(seeds=[2, 3], dims=suite.dims, include_fixed=False)
        assert not np.allclose(suite.singles()[0].channel.matrix, other.singles()[0].channel.matrix)

    def test_singles(self, suite):
        """シードと代数の組ごとに1つ、事前状態はチャネルの入力上"""
        singles = suite.singles()
        assert len(singles) == 2 * 3
        for inst in singles:
            assert inst.prior.algebra == inst.channel.source
            predict(inst.channel, inst.prior)

    def test_fixed_instances(self):
        """固定インスタンスを含める"""
        suite = InstanceSuite(seeds=[0], dims=[(2,)])
        names = [inst.name for inst in suite.singles()]
        assert "rational-ss" in names
        assert "involution-bit-flip" in names
        iso_names = [inst.name for inst in suite.isomorphisms()]
        assert "sigma-x" in iso_names
        assert "bit-swap" in iso_names

    def test_commutative_singles(self, suite):
        """可換代数上の同じ代数へのチャネルだけ"""
        for inst in suite.commutative_singles():
            assert inst.channel.source.is_commutative
            assert inst.channel.source == inst.channel.target

    def test_compose_pairs_chain(self, suite):
        """合成可能な組は ℰ の出力が ℱ の入力"""
        pairs = suite.compose_pairs()
        assert len(pairs) == 2 * 3
        for inst in pairs:
            assert isinstance(inst, ComposableInstance)
            assert inst.first.source == inst.prior.algebra
            assert inst.second.source == inst.first.target

    def test_covariant_subsets(self):
        """共変な部分集合の各組にはどちらかに共変な因子がある"""
        suite = InstanceSuite(seeds=[0, 1, 2], dims=[(2,), (2, 1)], covariant_fraction=1.0, include_fixed=False)
        pairs = suite.covariant_compose_pairs()
        assert pairs
        for inst in pairs:
            beta = predict(inst.first, inst.prior)
            assert is_covariant(inst.first, inst.prior, suite.tol) or is_covariant(inst.second, beta, suite.tol)
        tensors = suite.covariant_tensor_pairs()
        assert tensors
        for inst in tensors:
            assert is_covariant(inst.left.channel, inst.left.prior, suite.tol) or is_covariant(
                inst.right.channel, inst.right.prior, suite.tol
            )

    def test_classical_tensor_pairs(self, suite):
        """可換代数の正方チャネル2つのテンソル積が各シードに1つあり、積は4×4"""
        classical = [inst for inst in suite.tensor_pairs() if inst.name.startswith("classical-tensor")]
        assert len(classical) == len(suite.seeds)
        for inst in classical:
            product = tensor(inst.left.channel, inst.right.channel)
            assert product.source.is_commutative
            assert product.source == product.target
            assert product.matrix.shape == (4, 4)

    def test_no_classical_tensor_pairs_without_small_classical_algebra(self):
        """行列次元2以下の可換代数がなければ作らない"""
        suite = InstanceSuite(seeds=[0], dims=[(2,), (1, 1, 1)], include_fixed=False)
        assert not [inst for inst in suite.tensor_pairs() if inst.name.startswith("classical-tensor")]

    def test_fixed_rational_tensor_pair(self):
        """有理数の固定インスタンスのテンソル積を含める"""
        suite = InstanceSuite(seeds=[0], dims=[(2,)])
        fixed = {inst.name: inst for inst in suite.tensor_pairs()}["rational-ss-tensor"]
        assert fixed.left.channel.matrix.shape == (2, 2)
        assert "rational-ss-tensor" in [inst.name for inst in suite.covariant_tensor_pairs()]

    def test_isomorphisms(self, suite):
        """*-同型のインスタンスは同じ代数の間の写像"""
        for inst in suite.isomorphisms():
            assert inst.channel.source == inst.channel.target

    def test_cached(self, suite):
        """同じ生成器は同じリストを返す"""
        assert suite.tensor_pairs() is suite.tensor_pairs()


class TestLoadInstance:
    """証拠インスタンスの復元のテスト"""

    @pytest.fixture
    def suite(self):
        return InstanceSuite(seeds=[0], dims=[(2,), (2, 1)], include_fixed=False)

    def test_compose_round_trip(self, suite):
        """合成インスタンスの書き出しと読み込み"""
        inst = suite.compose_pairs()[0]
        restored = load_instance(json.loads(json.dumps(inst.to_json())))
        assert isinstance(restored, ComposableInstance)
        assert restored.name == inst.name
        assert np.array_equal(restored.second.matrix, inst.second.matrix)

    def test_tensor_round_trip(self, suite):
        """テンソル積インスタンスの書き出しと読み込み"""
        inst = suite.tensor_pairs()[0]
        restored = load_instance(inst.to_json())
        assert isinstance(restored, TensorInstance)
        assert np.array_equal(restored.right.channel.matrix, inst.right.channel.matrix)

    @pytest.mark.parametrize("data", [{}, {"kind": "triple"}, {"kind": "tensor", "left": {}}, [1]])
    def test_invalid(self, data):
        """不正な形式はエラー"""
        with pytest.raises(MalformedInputError):
            load_instance(data)

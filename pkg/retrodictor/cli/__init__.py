"""
レトロディクション計算ツールのコマンドラインインターフェース
"""

from retrodictor.cli.retrodict import main

__all__ = ["main"]

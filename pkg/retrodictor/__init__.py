"""
有限次元C*-代数上のレトロディクション（Petz回復写像）数値計算ライブラリ
"""

__version__ = "0.1.0"

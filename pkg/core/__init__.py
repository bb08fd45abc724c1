"""
LieGauss 核心模块
"""

__version__ = "0.1.0"

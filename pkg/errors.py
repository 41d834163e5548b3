"""例外定義モジュール"""

from typing import Any, Optional


class DomainError(ValueError):
    """引数が関数の定義域外"""


class UnsupportedMethodError(ValueError):
    """指定した評価法ではこのパラメータを扱えない"""


class EvaluationError(ArithmeticError):
    """積分点で被積分関数が有限の実数にならなかった"""

    def __init__(self, message: str, location: Optional[Any] = None):
        super().__init__(message)
        self.location = location

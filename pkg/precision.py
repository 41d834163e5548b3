"""
任意精度演算コンテキストと特殊関数モジュール

全ての数値計算は mpmath の可変精度浮動小数点で行う。
mpmath の精度はグローバル状態なので、各関数は PrecisionContext.workdps()
の中で計算し、結果の mpf をそのまま返す。
"""

import dataclasses
import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

import mpmath

from config import Config
from errors import DomainError

logger = logging.getLogger(__name__)

KINDS = ("P", "Q")


@dataclass(frozen=True)
class PrecisionContext:
    """作業精度・目標精度・分割上限をまとめた不変コンテキスト"""

    working_digits: int = 50
    target_digits: int = 25
    max_recursion: int = 35
    series_rel_cutoff: float = 0.0  # 0 なら 10^(-working_digits)
    max_subdivisions: int = 4000
    rule_points: int = 7

    def __post_init__(self):
        if self.target_digits < 1:
            raise DomainError(f"目標桁数は1以上が必要です: {self.target_digits}")
        if self.working_digits < self.target_digits + Config.GUARD_DIGITS:
            raise DomainError(
                f"作業桁数 {self.working_digits} は目標桁数 {self.target_digits} + "
                f"{Config.GUARD_DIGITS} 以上が必要です"
            )
        if self.max_recursion < 1:
            raise DomainError(f"max_recursion は1以上が必要です: {self.max_recursion}")
        if self.max_subdivisions < 1:
            raise DomainError(
                f"max_subdivisions は1以上が必要です: {self.max_subdivisions}"
            )
        if self.rule_points < 1:
            raise DomainError(f"rule_points は1以上が必要です: {self.rule_points}")
        if self.series_rel_cutoff < 0:
            raise DomainError(
                f"series_rel_cutoff は正の値が必要です: {self.series_rel_cutoff}"
            )
        if self.series_rel_cutoff == 0:
            object.__setattr__(
                self, "series_rel_cutoff", 10.0 ** (-self.working_digits)
            )

    @classmethod
    def from_config(cls, **overrides) -> "PrecisionContext":
        """Config（環境変数）から既定コンテキストを作成"""
        values = {
            "working_digits": Config.WORKING_DIGITS,
            "target_digits": Config.TARGET_DIGITS,
            "max_recursion": Config.MAX_RECURSION,
            "max_subdivisions": Config.MAX_SUBDIVISIONS,
            "rule_points": Config.RULE_POINTS,
        }
        values.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**values)

    def with_digits(self, working_digits: int) -> "PrecisionContext":
        """作業桁数だけ変えたコピー"""
        return dataclasses.replace(self, working_digits=working_digits)

    def workdps(self):
        """作業精度で計算するコンテキストマネージャ"""
        return mpmath.workdps(self.working_digits)

    @property
    def epsilon(self) -> mpmath.mpf:
        return mpmath.mpf(10) ** (-self.working_digits)

    @property
    def rel_tol(self) -> mpmath.mpf:
        """適応積分の既定相対許容誤差"""
        tol = mpmath.mpf(10) ** (-(self.target_digits + 3))
        floor = mpmath.mpf(10) ** (-self.working_digits + 8)
        return max(tol, floor)


def default_context() -> PrecisionContext:
    return PrecisionContext.from_config()


def to_mpf(value) -> mpmath.mpf:
    """
    数値を現在の精度の mpf に変換

    文字列は10進表記のまま現在精度で丸めるので、"2.3" のような入力は
    倍精度を経由しない。
    """
    if isinstance(value, Fraction):
        return mpmath.mpf(value.numerator) / value.denominator
    if isinstance(value, str):
        return mpmath.mpf(value.replace(" ", ""))
    return mpmath.mpf(value)


def is_integer(value) -> bool:
    return bool(mpmath.isint(to_mpf(value)))


def check_kind(kind: str) -> str:
    kind = str(kind).upper()
    if kind not in KINDS:
        raise DomainError(f"kind は P または Q です: {kind}")
    return kind


def gamma(z, ctx: Optional[PrecisionContext] = None) -> mpmath.mpf:
    """
    ガンマ関数 Γ(z)

    Args:
        z: 正の実数
        ctx: 精度コンテキスト

    Returns:
        Γ(z)
    """
    ctx = ctx or default_context()
    with ctx.workdps():
        z = to_mpf(z)
        if z <= 0:
            raise DomainError(f"gamma の引数は正である必要があります: {z}")
        return mpmath.gamma(z)


def _q_integer_shape(n: int, x: mpmath.mpf) -> mpmath.mpf:
    """整数の形状 n に対する Q[n,x] = e^(-x) Σ_{k<n} x^k/k!"""
    term = mpmath.mpf(1)
    total = mpmath.mpf(1)
    for k in range(1, n):
        term = term * x / k
        total += term
    return mpmath.exp(-x) * total


def reg_gamma(kind: str, a, x, ctx: Optional[PrecisionContext] = None) -> mpmath.mpf:
    """
    正規化不完全ガンマ関数 P[a,x] = γ(a,x)/Γ(a), Q[a,x] = Γ(a,x)/Γ(a)

    x < a+1 では P を級数で、それ以外では Q を連分数で求め、
    もう一方は P + Q = 1 から得る。

    Args:
        kind: "P" または "Q"
        a: 形状パラメータ (> 0)
        x: 引数 (>= 0)
        ctx: 精度コンテキスト

    Returns:
        [0, 1] の値
    """
    kind = check_kind(kind)
    ctx = ctx or default_context()
    with ctx.workdps():
        a = to_mpf(a)
        x = to_mpf(x)
        if a <= 0:
            raise DomainError(f"不完全ガンマ関数の形状は正である必要があります: a={a}")
        if x < 0:
            raise DomainError(
                f"不完全ガンマ関数の引数が負です: x={x}（reg_gamma_signed を使用）"
            )
        if x == 0:
            return mpmath.mpf(0) if kind == "P" else mpmath.mpf(1)

        with mpmath.extradps(10):
            if x < a + 1:
                lower = mpmath.gammainc(a, 0, x, regularized=True)
                value = lower if kind == "P" else 1 - lower
            else:
                if mpmath.isint(a) and a < 10 * ctx.working_digits:
                    upper = _q_integer_shape(int(a), x)
                else:
                    upper = mpmath.gammainc(a, x, mpmath.inf, regularized=True)
                value = upper if kind == "Q" else 1 - upper
        return +value


def reg_gamma_signed(
    kind: str, a, x, ctx: Optional[PrecisionContext] = None
) -> mpmath.mpf:
    """
    負の引数まで拡張した正規化不完全ガンマ関数

    x < 0 では整数形状のみ実数値になるので、有限和
    Q[n,x] = e^(-x) Σ_{k<n} x^k/k! で評価する。
    """
    kind = check_kind(kind)
    ctx = ctx or default_context()
    with ctx.workdps():
        a = to_mpf(a)
        x = to_mpf(x)
        if x >= 0:
            return reg_gamma(kind, a, x, ctx)
        if not mpmath.isint(a) or a < 1:
            raise DomainError(
                f"負の引数 x={x} は整数形状でのみ実数値です: a={a}"
            )
        with mpmath.extradps(10):
            upper = _q_integer_shape(int(a), x)
            value = upper if kind == "Q" else 1 - upper
        return +value


def pochhammer(a, n: int, ctx: Optional[PrecisionContext] = None) -> mpmath.mpf:
    """
    ポッホハマー記号 (a)_n = a(a+1)…(a+n-1)

    n < 0 は (a)_n = 1/((a-1)(a-2)…(a-|n|)) と解釈する。
    """
    ctx = ctx or default_context()
    with ctx.workdps():
        a = to_mpf(a)
        n = int(n)
        if n >= 0:
            return mpmath.fprod(a + k for k in range(n)) if n else mpmath.mpf(1)
        denominator = mpmath.fprod(a - k for k in range(1, -n + 1))
        if denominator == 0:
            raise DomainError(f"(a)_n の分母が0です: a={a}, n={n}")
        return 1 / denominator


def inverse_pochhammer(a, n: int, ctx: Optional[PrecisionContext] = None) -> mpmath.mpf:
    """1/(a)_n（0 除算になる場合は DomainError）"""
    ctx = ctx or default_context()
    with ctx.workdps():
        a = to_mpf(a)
        n = int(n)
        if n < 0:
            return mpmath.fprod(a - k for k in range(1, -n + 1))
        value = pochhammer(a, n, ctx)
        if value == 0:
            raise DomainError(f"(a)_n が0のため逆数を取れません: a={a}, n={n}")
        return 1 / value


def generalized_binomial(N, k: int, ctx: Optional[PrecisionContext] = None) -> mpmath.mpf:
    """一般化二項係数 F_k(N) = Γ(N+1)/(Γ(k+1)Γ(N-k+1))、k < 0 では 0"""
    if k < 0:
        return mpmath.mpf(0)
    ctx = ctx or default_context()
    with ctx.workdps():
        # mpmath.binomial はガンマ関数の極を極限として扱う
        return mpmath.binomial(to_mpf(N), k)


def binomial_F(m: int, s: int, N2, N3, ctx: Optional[PrecisionContext] = None) -> mpmath.mpf:
    """
    二項係数の畳み込み F_m^s(N2, N3) = Σ_{σ=0}^{s} (-1)^σ F_{m-σ}(N2) F_σ(N3)

    (μ+ν)^N2 (μ-ν)^N3 の展開係数に現れる。
    """
    if s < 0:
        raise DomainError(f"s は0以上が必要です: {s}")
    ctx = ctx or default_context()
    with ctx.workdps():
        total = mpmath.mpf(0)
        for sigma in range(0, min(s, m) + 1):
            term = generalized_binomial(N2, m - sigma, ctx) * generalized_binomial(
                N3, sigma, ctx
            )
            total += -term if sigma % 2 else term
        return total

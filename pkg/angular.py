"""
角度係数モジュール

規格化ルジャンドル陪関数、実球面調和関数の積の線形化係数
（一般化 Gaunt 係数 C^{L|M|} と φ 部分の係数 A^M）、
および二中心のルジャンドル積を楕円座標の単項式基底
(μν)^q (μ+ν)^(-α) (μ-ν)^(-β) に展開する係数 g^q_{αβ} を扱う。

ルジャンドル陪関数は Condon-Shortley 位相を含まない正の規約
P_{lm}(x) = (1-x^2)^{m/2} d^m P_l(x)/dx^m を用いる。
"""

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Dict, List, Optional, Tuple

import mpmath
import sympy
from sympy.physics.wigner import wigner_3j

from errors import DomainError
from precision import PrecisionContext, default_context, to_mpf

logger = logging.getLogger(__name__)


def _check_lm(l: int, m: int):
    if l < 0 or abs(m) > l:
        raise DomainError(f"量子数が不正です: l={l}, m={m}（|m| <= l が必要）")


def assoc_legendre(l: int, m: int, x, ctx: Optional[PrecisionContext] = None) -> mpmath.mpf:
    """
    ルジャンドル陪関数 P_{lm}(x)（Condon-Shortley 位相なし）

    P_mm から始めて l 方向に漸化式で上げる。

    Args:
        l: 次数 (>= 0)
        m: 位数 (0 <= m <= l)
        x: [-1, 1] の実数

    Returns:
        P_{lm}(x)
    """
    if m < 0 or m > l:
        raise DomainError(f"assoc_legendre は 0 <= m <= l が必要です: l={l}, m={m}")
    ctx = ctx or default_context()
    with ctx.workdps():
        x = to_mpf(x)
        if abs(x) > 1:
            raise DomainError(f"assoc_legendre の引数は |x| <= 1 が必要です: x={x}")

        pmm = mpmath.mpf(1)
        if m > 0:
            sin_part = mpmath.sqrt((1 - x) * (1 + x))
            odd = 1
            for _ in range(m):
                pmm *= odd * sin_part
                odd += 2
        if l == m:
            return pmm

        pmmp1 = x * (2 * m + 1) * pmm
        for ll in range(m + 2, l + 1):
            pll = (x * (2 * ll - 1) * pmmp1 - (ll + m - 1) * pmm) / (ll - m)
            pmm, pmmp1 = pmmp1, pll
        return pmmp1


def legendre_norm(l: int, m: int, ctx: Optional[PrecisionContext] = None) -> mpmath.mpf:
    """[-1,1] で規格化する係数 sqrt((2l+1)/2 · (l-m)!/(l+m)!)"""
    _check_lm(l, m)
    m = abs(m)
    ctx = ctx or default_context()
    with ctx.workdps():
        return mpmath.sqrt(
            mpmath.mpf(2 * l + 1) / 2 * mpmath.factorial(l - m) / mpmath.factorial(l + m)
        )


def phi_function(m: int, phi, ctx: Optional[PrecisionContext] = None) -> mpmath.mpf:
    """実の方位関数 Φ_m: cos(mφ)/√π (m>0), sin(|m|φ)/√π (m<0), 1/√(2π) (m=0)"""
    ctx = ctx or default_context()
    with ctx.workdps():
        phi = to_mpf(phi)
        if m == 0:
            return 1 / mpmath.sqrt(2 * mpmath.pi)
        if m > 0:
            return mpmath.cos(m * phi) / mpmath.sqrt(mpmath.pi)
        return mpmath.sin(-m * phi) / mpmath.sqrt(mpmath.pi)


def real_harmonic(l: int, m: int, theta, phi, ctx: Optional[PrecisionContext] = None) -> mpmath.mpf:
    """実球面調和関数 S_{lm}(θ, φ)"""
    _check_lm(l, m)
    ctx = ctx or default_context()
    with ctx.workdps():
        x = mpmath.cos(to_mpf(theta))
        return (
            legendre_norm(l, m, ctx)
            * assoc_legendre(l, abs(m), x, ctx)
            * phi_function(m, phi, ctx)
        )


def cos_theta_a(mu, nu):
    """中心 a から見た cosθ = (1+μν)/(μ+ν)"""
    return (1 + mu * nu) / (mu + nu)


def cos_theta_b(mu, nu):
    """中心 b から見た cosθ = (1-μν)/(μ-ν)（b の z 軸は a を向く）"""
    return (1 - mu * nu) / (mu - nu)


# ---------------------------------------------------------------------------
# Gaunt 係数
# ---------------------------------------------------------------------------


@lru_cache(maxsize=None)
def _gaunt_exact(L: int, M: int, l1: int, m1: int, l2: int, m2: int) -> Tuple[int, Fraction]:
    """
    C^{LM}(l1 m1, l2 m2)（m は全て非負）を (符号, 二乗値) の厳密値で返す

    C = sqrt(2/(2L+1)) ∫ P̄_{l1m1} P̄_{l2m2} P̄_{LM} dx を
    Wigner 3j 記号の積で表す。
    """
    if not abs(l1 - l2) <= L <= l1 + l2 or (l1 + l2 + L) % 2:
        return 0, Fraction(0)
    if m1 > l1 or m2 > l2 or M > L:
        return 0, Fraction(0)

    if M == m1 + m2:
        phase = (-1) ** M
        coupling = wigner_3j(l1, l2, L, m1, m2, -M)
    elif M == m1 - m2:
        phase = (-1) ** m1
        coupling = wigner_3j(l1, l2, L, m1, -m2, -M)
    elif M == m2 - m1:
        phase = (-1) ** m2
        coupling = wigner_3j(l2, l1, L, m2, -m1, -M)
    else:
        return 0, Fraction(0)

    expr = (
        phase
        * sympy.sqrt((2 * l1 + 1) * (2 * l2 + 1))
        * wigner_3j(l1, l2, L, 0, 0, 0)
        * coupling
    )
    if expr == 0:
        return 0, Fraction(0)
    square = sympy.nsimplify(sympy.expand(expr**2))
    if not square.is_Rational:
        raise ArithmeticError(f"Gaunt 係数の二乗が有理数になりません: {square}")
    sign = 1 if expr > 0 else -1
    return sign, Fraction(int(square.p), int(square.q))


def gaunt_coeff(
    L: int, M: int, l1: int, m1: int, l2: int, m2: int, ctx: Optional[PrecisionContext] = None
) -> mpmath.mpf:
    """
    一般化 Gaunt 係数 C^{L|M|}(l1 m1, l2 m2)

    選択則（三角条件・パリティ・|M| = |m1| ± |m2|）を満たさない場合は厳密に 0。
    (l1,m1) と (l2,m2) の交換に対して対称。
    """
    _check_lm(l1, m1)
    _check_lm(l2, m2)
    ctx = ctx or default_context()
    sign, square = _gaunt_exact(L, abs(M), l1, abs(m1), l2, abs(m2))
    with ctx.workdps():
        if sign == 0:
            return mpmath.mpf(0)
        return sign * mpmath.sqrt(to_mpf(square))


def a_coeff(M: int, m1: int, m2: int, ctx: Optional[PrecisionContext] = None) -> mpmath.mpf:
    """
    方位関数の積の係数 A^M_{m1 m2}

    Φ_{m1}Φ_{m2} = (1/√(2π)) Σ_M A^M Φ_M で定義する。
    符号付き M: 正は cos 型、負は sin 型、0 は定数。
    """
    ctx = ctx or default_context()
    table = _phi_product(m1, m2)
    with ctx.workdps():
        value = table.get(M)
        if value is None:
            return mpmath.mpf(0)
        sign, square = value
        return sign * mpmath.sqrt(to_mpf(square))


@lru_cache(maxsize=None)
def _phi_product(m1: int, m2: int) -> Dict[int, Tuple[int, Fraction]]:
    half = Fraction(1, 2)
    if m1 == 0 or m2 == 0:
        return {m1 + m2: (1, Fraction(1))}

    a, b = abs(m1), abs(m2)
    result: Dict[int, Tuple[int, Fraction]] = {}
    if m1 > 0 and m2 > 0:
        result[a + b] = (1, half)
        if a == b:
            result[0] = (1, Fraction(1))
        else:
            result[abs(a - b)] = (1, half)
    elif m1 < 0 and m2 < 0:
        result[a + b] = (-1, half)
        if a == b:
            result[0] = (1, Fraction(1))
        else:
            result[abs(a - b)] = (1, half)
    else:
        # cos(aφ)·sin(bφ) の形にそろえる
        cos_m, sin_m = (a, b) if m1 > 0 else (b, a)
        result[-(a + b)] = (1, half)
        if sin_m > cos_m:
            result[-(sin_m - cos_m)] = (1, half)
        elif cos_m > sin_m:
            result[-(cos_m - sin_m)] = (-1, half)
    return result


def product_expansion(
    l1: int, m1: int, l2: int, m2: int, ctx: Optional[PrecisionContext] = None
) -> List[Tuple[int, int, mpmath.mpf]]:
    """
    実球面調和関数の積の線形化

    S_{l1m1} S_{l2m2} = Σ_{L,M} sqrt((2L+1)/4π) · A^M · C^{L|M|} · S_{LM}

    Returns:
        (L, 符号付き M, A^M·C^{L|M|}) のリスト（L, M の昇順）
    """
    _check_lm(l1, m1)
    _check_lm(l2, m2)
    ctx = ctx or default_context()
    terms = []
    with ctx.workdps():
        for M in sorted(_phi_product(m1, m2)):
            a_value = a_coeff(M, m1, m2, ctx)
            for L in range(abs(l1 - l2), l1 + l2 + 1):
                if L < abs(M):
                    continue
                c_value = gaunt_coeff(L, M, l1, m1, l2, m2, ctx)
                if c_value == 0:
                    continue
                terms.append((L, M, a_value * c_value))
    terms.sort(key=lambda item: (item[0], item[1]))
    return terms


# ---------------------------------------------------------------------------
# 楕円座標でのルジャンドル積の展開
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GExpansion:
    """P_{L1λ}(cosθa)·P_{L2λ}(cosθb) = Σ g^q_{αβ} (μν)^q (μ+ν)^(-α) (μ-ν)^(-β)"""

    L1: int
    L2: int
    lam: int
    coefficients: Dict[Tuple[int, int, int], Fraction] = field(default_factory=dict)

    def items(self):
        """(α, β, q) の昇順で係数を返す"""
        return sorted(self.coefficients.items())

    def evaluate(self, mu, nu, ctx: Optional[PrecisionContext] = None) -> mpmath.mpf:
        """展開から値を再構成"""
        ctx = ctx or default_context()
        with ctx.workdps():
            mu, nu = to_mpf(mu), to_mpf(nu)
            total = mpmath.mpf(0)
            for (alpha, beta, q), coefficient in self.items():
                total += (
                    to_mpf(coefficient)
                    * (mu * nu) ** q
                    * (mu + nu) ** (-alpha)
                    * (mu - nu) ** (-beta)
                )
            return total


_S, _U, _W, _X = sympy.symbols("s u w x")


def _legendre_derivative(L: int, lam: int):
    return sympy.diff(sympy.legendre(L, _X), _X, lam)


@lru_cache(maxsize=None)
def _g_expansion_exact(L1: int, L2: int, lam: int) -> Tuple[Tuple[Tuple[int, int, int], Fraction], ...]:
    # s = μν, u = μ+ν, w = μ-ν
    s, u, w = _S, _U, _W
    da = _legendre_derivative(L1, lam).subs(_X, (1 + s) / u)
    db = _legendre_derivative(L2, lam).subs(_X, (1 - s) / w)

    # (1-x_a^2)(1-x_b^2) = T^2/(u^2 w^2), T = u^2-(1+s)^2 = w^2-(1-s)^2
    half = lam // 2
    sin_part = ((u**2 - (1 + s) ** 2) / u**2) ** half * ((w**2 - (1 - s) ** 2) / w**2) ** half
    if lam % 2:
        sin_part *= (u**2 - (1 + s) ** 2) / (u * w)

    numer, denom = sympy.fraction(
        sympy.cancel(da * db * sin_part * u ** (L1 + 1) * w ** (L2 + 1))
    )
    if denom.free_symbols:
        raise ArithmeticError(f"g 展開が多項式になりません: L1={L1}, L2={L2}, λ={lam}")

    poly = sympy.Poly(sympy.expand(numer / denom), s, u, w)
    result = []
    for (q, a, b), coefficient in poly.terms():
        coefficient = sympy.Rational(coefficient)
        result.append(
            ((L1 + 1 - a, L2 + 1 - b, q), Fraction(int(coefficient.p), int(coefficient.q)))
        )
    return tuple(sorted(result))


def g_expansion(L1: int, L2: int, lam: int) -> GExpansion:
    """
    二中心ルジャンドル積の展開係数 g^q_{αβ}

    cosθa, cosθb を楕円座標で表して代入し、厳密な有理数演算で
    (μν)^q (μ+ν)^(-α) (μ-ν)^(-β) の係数を読み取る。
    奇数の λ では sinθa·sinθb = ((μ^2-1)(1-ν^2))/((μ+ν)(μ-ν)) を使うので
    全て多項式のまま扱える。

    Args:
        L1, L2: 次数
        lam: 共通の位数 λ (<= min(L1, L2))

    Returns:
        GExpansion
    """
    if lam < 0 or lam > min(L1, L2):
        raise DomainError(f"λ は 0 <= λ <= min(L1, L2) が必要です: L1={L1}, L2={L2}, λ={lam}")
    coefficients = dict(_g_expansion_exact(L1, L2, lam))
    logger.debug(f"g 展開 L1={L1}, L2={L2}, λ={lam}: {len(coefficients)} 項")
    return GExpansion(L1=L1, L2=L2, lam=lam, coefficients=coefficients)

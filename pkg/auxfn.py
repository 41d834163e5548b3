"""
分子補助関数モジュール

二変数の補助関数 ^{Pi}G / ^{Qi}G と一変数の ^{Pi}J / ^{Qi}J を
3つの方法（大域適応積分・漸化式・級数展開）で評価する。

    G^{N1,q}_{N2,N3,N4}(p1,p2,p3)
      = p1^N1/(N4-N1)_{N1} ∫_1^∞ dμ ∫_{-1}^{1} dν (μν)^q (μ+ν)^N2 (μ-ν)^N3
        × {P|Q}[N4-N1, p1·x_i] e^{-p2μ-p3ν}
    x_1 = μ+ν, x_2 = μ-ν, x_3 = μν

    J^{N1,q}_{N2,N3,N4}(p1,p3)
      = p1^N1/(N4-N1)_{N1-1} ∫_{-1}^{1} dν ν^q (1+ν)^N2 (1-ν)^N3
        × {P|Q}[N4-N1, p1·y_i] e^{-p3ν}
    y_1 = 1+ν, y_2 = 1-ν, y_3 = ν

漸化式は係数付きの項 (Term) のリストとして返し、evaluate_terms で評価する。
"""

import logging
from dataclasses import dataclass, field, replace
from functools import lru_cache
from typing import Callable, Dict, List, Optional, Tuple, Union

import mpmath

from config import Config
from errors import DomainError, UnsupportedMethodError
from precision import (
    PrecisionContext,
    check_kind,
    default_context,
    inverse_pochhammer,
    reg_gamma,
    reg_gamma_signed,
    to_mpf,
)
from quadrature import (
    QuadratureOutcome,
    Region2D,
    adaptive_integrate_1d,
    adaptive_integrate_2d,
    combine_outcomes,
)

logger = logging.getLogger(__name__)

VARIANTS = (1, 2, 3)
STRATEGIES = ("adaptive", "recurrence", "series", "auto")

# 級数の打ち切り判定に使う連続項数
_SMALL_TERMS_TO_STOP = 3
# Mulliken 和・漸化式の桁落ち対策に足す桁数
_EXTRA_DIGITS = 20


def _is_nonnegative_integer(value) -> bool:
    return bool(mpmath.isint(value)) and value >= 0


# ---------------------------------------------------------------------------
# パラメータ型
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class AuxParams:
    """二変数補助関数 G のパラメータ"""

    N1: int
    q: int
    N2: object
    N3: object
    N4: object
    p1: object
    p2: object
    p3: object
    variant: int = 1
    kind: str = "P"

    def __post_init__(self):
        object.__setattr__(self, "kind", check_kind(self.kind))
        _validate_common(self)
        if to_mpf(self.p2) <= 0:
            raise DomainError(f"p2 は正である必要があります（積分が発散）: p2={self.p2}")

    @property
    def shape(self):
        """不完全ガンマ関数の形状 N4-N1"""
        return to_mpf(self.N4) - self.N1

    def resolved(self) -> "AuxParams":
        """実数フィールドを現在の精度の mpf にしたコピー"""
        return replace(self, **{name: to_mpf(getattr(self, name)) for name in _G_REAL_FIELDS})

    def with_(self, **changes) -> "AuxParams":
        return replace(self, **changes)

    def prefactor(self, ctx: PrecisionContext) -> mpmath.mpf:
        """p1^N1/(N4-N1)_{N1}"""
        return to_mpf(self.p1) ** self.N1 * inverse_pochhammer(self.shape, self.N1, ctx)


@dataclass(frozen=True)
class JParams:
    """一変数補助関数 J のパラメータ"""

    N1: int
    q: int
    N2: object
    N3: object
    N4: object
    p1: object
    p3: object
    variant: int = 1
    kind: str = "P"

    def __post_init__(self):
        object.__setattr__(self, "kind", check_kind(self.kind))
        _validate_common(self)

    @property
    def shape(self):
        return to_mpf(self.N4) - self.N1

    def resolved(self) -> "JParams":
        return replace(self, **{name: to_mpf(getattr(self, name)) for name in _J_REAL_FIELDS})

    def with_(self, **changes) -> "JParams":
        return replace(self, **changes)

    def prefactor(self, ctx: PrecisionContext) -> mpmath.mpf:
        """p1^N1/(N4-N1)_{N1-1}"""
        return to_mpf(self.p1) ** self.N1 * inverse_pochhammer(self.shape, self.N1 - 1, ctx)


_G_REAL_FIELDS = ("N2", "N3", "N4", "p1", "p2", "p3")
_J_REAL_FIELDS = ("N2", "N3", "N4", "p1", "p3")


def _validate_common(p):
    if not isinstance(p.N1, int) or p.N1 < 0:
        raise DomainError(f"N1 は0以上の整数が必要です: N1={p.N1}")
    if not isinstance(p.q, int) or p.q < 0:
        raise DomainError(f"q は0以上の整数が必要です: q={p.q}")
    if p.variant not in VARIANTS:
        raise DomainError(f"variant は 1, 2, 3 のいずれかです: {p.variant}")
    shape = to_mpf(p.N4) - p.N1
    if shape <= 0:
        raise DomainError(f"N4-N1 は正である必要があります: N4={p.N4}, N1={p.N1}")
    if to_mpf(p.N3) < 0:
        raise DomainError(f"N3 は0以上が必要です: N3={p.N3}")
    if to_mpf(p.p1) < 0:
        raise DomainError(f"p1 は0以上が必要です: p1={p.p1}")
    if p.variant == 3 and not mpmath.isint(shape):
        # p1·μν が負になる領域で P[a, x] が実数にならない
        raise DomainError(f"variant 3 は整数の N4-N1 が必要です: N4-N1={shape}")


@dataclass(frozen=True)
class ReducedG:
    """
    ガンマ関数を含まない二変数積分

    ∫_1^∞ dμ ∫_{-1}^{1} dν (μν)^q ν^k (μ+ν)^N2 (μ-ν)^N3 e^{-p2μ-p3ν-cμν}
    （k = nu_power, c = mixed_rate）。前置係数は含まない。
    """

    q: object
    N2: object
    N3: object
    p2: object
    p3: object
    nu_power: int = 0
    mixed_rate: object = 0


@dataclass(frozen=True)
class ReducedJ:
    """ガンマ関数を含まない一変数積分 ∫_{-1}^{1} ν^q (1+ν)^N2 (1-ν)^N3 e^{-p3ν} dν"""

    q: object
    N2: object
    N3: object
    p3: object


Target = Union[AuxParams, JParams, ReducedG, ReducedJ, None]


@dataclass(frozen=True)
class Term:
    """線形結合の1項（target が None なら定数項）"""

    coefficient: mpmath.mpf
    target: Target = None


@dataclass(frozen=True)
class MethodChoice:
    """評価法の選択"""

    strategy: str = "adaptive"
    series_limit: int = 250

    def __post_init__(self):
        if self.strategy not in STRATEGIES:
            raise DomainError(f"未知の評価法です: {self.strategy}")
        if self.series_limit < 1:
            raise DomainError(f"series_limit は1以上が必要です: {self.series_limit}")

    @classmethod
    def from_config(cls, **overrides) -> "MethodChoice":
        values = {"strategy": Config.METHOD, "series_limit": Config.SERIES_LIMIT}
        values.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**values)


@dataclass(frozen=True)
class SeriesOutcome:
    """級数展開の結果"""

    value: mpmath.mpf
    terms_used: int
    converged: bool
    diverged: bool
    critical_ns: int
    partial_sums: Tuple[mpmath.mpf, ...] = field(default=(), repr=False)
    last_term: mpmath.mpf = mpmath.mpf(0)


def _merge(terms: List[Term]) -> List[Term]:
    """同じ target の係数をまとめ、0 の項を落とす（出現順を保つ）"""
    merged: Dict[Target, mpmath.mpf] = {}
    for term in terms:
        merged[term.target] = merged.get(term.target, mpmath.mpf(0)) + term.coefficient
    return [Term(c, t) for t, c in merged.items() if c != 0]


# ---------------------------------------------------------------------------
# 被積分関数
# ---------------------------------------------------------------------------


def _gamma_factor(kind: str, shape, x, ctx: PrecisionContext) -> mpmath.mpf:
    if x < 0:
        return reg_gamma_signed(kind, shape, x, ctx)
    return reg_gamma(kind, shape, x, ctx)


def _g_value(p: AuxParams, mu, nu, ctx: PrecisionContext) -> mpmath.mpf:
    if p.variant == 1:
        argument = mu + nu
    elif p.variant == 2:
        argument = mu - nu
    else:
        argument = mu * nu
    difference = mu - nu
    if difference < 0 and not mpmath.isint(p.N3):
        raise DomainError(f"μ-ν < 0 で N3 が整数ではありません: μ={mu}, ν={nu}")
    gamma_part = _gamma_factor(p.kind, p.N4 - p.N1, p.p1 * argument, ctx)
    return (
        (mu * nu) ** p.q
        * (mu + nu) ** p.N2
        * difference**p.N3
        * gamma_part
        * mpmath.exp(-p.p2 * mu - p.p3 * nu)
    )


def g_integrand(p: AuxParams, mu, nu, ctx: Optional[PrecisionContext] = None) -> mpmath.mpf:
    """
    G の被積分関数（前置係数なし）

    (μν)^q (μ+ν)^N2 (μ-ν)^N3 {P|Q}[N4-N1, p1·x_i] e^{-p2μ-p3ν}
    """
    ctx = ctx or default_context()
    with ctx.workdps():
        mu, nu = to_mpf(mu), to_mpf(nu)
        if mu < 1 or abs(nu) > 1:
            raise DomainError(f"(μ, ν) が積分領域外です: μ={mu}, ν={nu}")
        return _g_value(p.resolved(), mu, nu, ctx)


def _j_value(p: JParams, nu, ctx: PrecisionContext) -> mpmath.mpf:
    if p.variant == 1:
        argument = 1 + nu
    elif p.variant == 2:
        argument = 1 - nu
    else:
        argument = nu
    gamma_part = _gamma_factor(p.kind, p.N4 - p.N1, p.p1 * argument, ctx)
    return (
        nu**p.q
        * (1 + nu) ** p.N2
        * (1 - nu) ** p.N3
        * gamma_part
        * mpmath.exp(-p.p3 * nu)
    )


def j_integrand(p: JParams, nu, ctx: Optional[PrecisionContext] = None) -> mpmath.mpf:
    """J の被積分関数（前置係数なし）"""
    ctx = ctx or default_context()
    with ctx.workdps():
        nu = to_mpf(nu)
        if abs(nu) > 1:
            raise DomainError(f"ν が積分区間外です: ν={nu}")
        return _j_value(p.resolved(), nu, ctx)


# ---------------------------------------------------------------------------
# Mulliken 関数と簡約積分
# ---------------------------------------------------------------------------


def _mulliken_A_values(m_max: int, p) -> List[mpmath.mpf]:
    """A_0..A_{m_max}（上向き漸化式、全項正）"""
    decay = mpmath.exp(-p)
    values = [decay / p]
    for m in range(1, m_max + 1):
        values.append((decay + m * values[-1]) / p)
    return values


def _mulliken_A_real(m, p) -> mpmath.mpf:
    """実数次数の A_m(p) = p^{-m-1} Γ(m+1, p)"""
    return p ** (-m - 1) * mpmath.gammainc(m + 1, p)


def _mulliken_B_series(m: int, p) -> mpmath.mpf:
    eps = mpmath.eps
    total = mpmath.mpf(0)
    term = mpmath.mpf(1)
    j = 0
    while True:
        if (m + j) % 2 == 0:
            total += 2 * term / (m + j + 1)
        if j > abs(p) and abs(term) <= eps * abs(total):
            break
        j += 1
        term *= -p / j
        if j > 100000:
            raise ArithmeticError(f"B_{m}({p}) の級数が収束しません")
    return total


def _mulliken_B_values(m_max: int, p) -> List[mpmath.mpf]:
    """B_0..B_{m_max}（m < |p| は漸化式、それ以外は級数）"""
    if p == 0:
        return [mpmath.mpf(2) / (m + 1) if m % 2 == 0 else mpmath.mpf(0) for m in range(m_max + 1)]
    values = []
    upward = min(m_max, int(mpmath.floor(abs(p))) - 1)
    if upward >= 0:
        grow, decay = mpmath.exp(p), mpmath.exp(-p)
        values.append((grow - decay) / p)
        for m in range(1, upward + 1):
            sign = 1 if m % 2 == 0 else -1
            values.append((sign * grow - decay + m * values[-1]) / p)
    for m in range(len(values), m_max + 1):
        values.append(_mulliken_B_series(m, p))
    return values


def mulliken_A(m, p, ctx: Optional[PrecisionContext] = None) -> mpmath.mpf:
    """
    Mulliken 関数 A_m(p) = ∫_1^∞ μ^m e^{-pμ} dμ

    整数 m は有限和、実数 m は上側不完全ガンマ関数で評価する。
    """
    ctx = ctx or default_context()
    with ctx.workdps():
        p = to_mpf(p)
        m = to_mpf(m)
        if p <= 0:
            raise DomainError(f"A_m(p) は p > 0 でのみ収束します: p={p}")
        with mpmath.extradps(15):
            if _is_nonnegative_integer(m):
                value = _mulliken_A_values(int(m), p)[-1]
            else:
                value = _mulliken_A_real(m, p)
        return +value


def mulliken_B(m: int, p, ctx: Optional[PrecisionContext] = None) -> mpmath.mpf:
    """Mulliken 関数 B_m(p) = ∫_{-1}^{1} ν^m e^{-pν} dν"""
    if int(m) != m or m < 0:
        raise DomainError(f"B_m は0以上の整数 m が必要です: m={m}")
    ctx = ctx or default_context()
    with ctx.workdps():
        p = to_mpf(p)
        with mpmath.extradps(15):
            value = _mulliken_B_values(int(m), p)[-1]
        return +value


def _binomial_row(N, count: int) -> List[mpmath.mpf]:
    """F_0(N)..F_{count-1}(N)（F_{k+1} = F_k (N-k)/(k+1)）"""
    row = [mpmath.mpf(1)]
    for k in range(count - 1):
        row.append(row[-1] * (N - k) / (k + 1))
    return row


def _expansion_coefficients(N2, N3, count: int) -> List[mpmath.mpf]:
    """(μ+ν)^N2 (μ-ν)^N3 = Σ_k F_k^k(N2,N3) μ^{N2+N3-k} ν^k の係数"""
    row2 = _binomial_row(N2, count)
    row3 = _binomial_row(N3, count)
    coefficients = []
    for k in range(count):
        total = mpmath.mpf(0)
        for sigma in range(k + 1):
            if row3[sigma] == 0:
                continue
            term = row2[k - sigma] * row3[sigma]
            total += -term if sigma % 2 else term
        coefficients.append(total)
    return coefficients


def _exact_reduced_g_supported(rg: ReducedG) -> bool:
    return (
        _is_nonnegative_integer(rg.N2)
        and _is_nonnegative_integer(rg.N3)
        and _is_nonnegative_integer(rg.q)
        and rg.mixed_rate == 0
    )


def _with_cancellation_guard(compute: Callable[[], Tuple[mpmath.mpf, mpmath.mpf]], digits: int):
    """
    compute() -> (和, 最大項) を桁落ちに応じて精度を上げながら評価

    最大項と和の比から失われた桁数を見積もり、足りなければ再計算する。
    """
    work = digits + _EXTRA_DIGITS
    limit = 4 * digits + 200
    while True:
        with mpmath.workdps(work):
            total, largest = compute()
            if largest == 0:
                return total
            lost = work if total == 0 else int(mpmath.ceil(mpmath.log10(largest / abs(total))))
            if lost + digits + 5 <= work or work >= limit:
                if work >= limit:
                    logger.warning(f"桁落ちが大きく精度上限 {limit} 桁に達しました（推定 {lost} 桁）")
                return total
        logger.debug(f"桁落ち {lost} 桁のため {work} 桁から再計算します")
        work = min(limit, digits + lost + _EXTRA_DIGITS)


def _reduced_g_exact(rg: ReducedG, ctx: PrecisionContext, limit: Optional[int] = None) -> mpmath.mpf:
    """
    簡約 G を Mulliken 関数の積の和で評価

    N2, N3 が0以上の整数なら有限和で厳密、それ以外は二項展開を limit 項で打ち切る。
    """
    q, N2, N3 = rg.q, rg.N2, rg.N3
    finite = _is_nonnegative_integer(N2) and _is_nonnegative_integer(N3)
    if finite:
        count = int(N2 + N3) + 1
    elif limit is None:
        raise UnsupportedMethodError(f"非整数の指数には展開の打ち切り数が必要です: N2={N2}, N3={N3}")
    else:
        count = limit + 1
    integer_mu = finite and _is_nonnegative_integer(q)

    def compute():
        p2, p3 = +rg.p2, +rg.p3
        coefficients = _expansion_coefficients(N2, N3, count)
        b_values = _mulliken_B_values(int(q) + rg.nu_power + count - 1, p3)
        top = q + N2 + N3
        if integer_mu:
            a_values = _mulliken_A_values(int(top), p2)
        terms = []
        for k, coefficient in enumerate(coefficients):
            if coefficient == 0:
                continue
            index = top - k
            a_value = a_values[int(index)] if integer_mu else _mulliken_A_real(index, p2)
            terms.append(coefficient * a_value * b_values[int(q) + rg.nu_power + k])
        if not terms:
            return mpmath.mpf(0), mpmath.mpf(0)
        return mpmath.fsum(terms), max(abs(t) for t in terms)

    return _with_cancellation_guard(compute, ctx.working_digits)


def _reduced_g_adaptive(rg: ReducedG, ctx: PrecisionContext) -> QuadratureOutcome:
    def integrand(mu, nu):
        return (
            (mu * nu) ** rg.q
            * nu**rg.nu_power
            * (mu + nu) ** rg.N2
            * (mu - nu) ** rg.N3
            * mpmath.exp(-rg.p2 * mu - rg.p3 * nu - rg.mixed_rate * mu * nu)
        )

    return adaptive_integrate_2d(integrand, Region2D(), ctx)


@lru_cache(maxsize=8192)
def _reduced_g_outcome(rg: ReducedG, ctx: PrecisionContext) -> QuadratureOutcome:
    if rg.p2 <= 0:
        raise DomainError(f"簡約 G は p2 > 0 が必要です（積分が発散）: p2={rg.p2}")
    if _exact_reduced_g_supported(rg):
        value = _reduced_g_exact(rg, ctx)
        return QuadratureOutcome(+value, abs(value) * ctx.epsilon, 0, 0, True)
    return _reduced_g_adaptive(rg, ctx)


def _resolve_reduced_g(q, N2, N3, p2, p3, nu_power, mixed_rate) -> ReducedG:
    return ReducedG(
        q=to_mpf(q),
        N2=to_mpf(N2),
        N3=to_mpf(N3),
        p2=to_mpf(p2),
        p3=to_mpf(p3),
        nu_power=int(nu_power),
        mixed_rate=to_mpf(mixed_rate),
    )


def g_reduced(
    q,
    N2,
    N3,
    p2,
    p3,
    ctx: Optional[PrecisionContext] = None,
    nu_power: int = 0,
    mixed_rate=0,
    method: str = "auto",
) -> mpmath.mpf:
    """
    簡約 G（ガンマ関数を含まない二変数積分）

    N2, N3 が0以上の整数なら Mulliken 関数の有限和、それ以外は適応積分。

    Args:
        q, N2, N3, p2, p3: パラメータ（p2 > 0）
        ctx: 精度コンテキスト
        nu_power: 追加の ν のべき
        mixed_rate: e^{-cμν} の c
        method: "auto"（上の規則）, "series"（Mulliken 和）, "adaptive"

    Returns:
        積分値
    """
    ctx = ctx or default_context()
    with ctx.workdps():
        rg = _resolve_reduced_g(q, N2, N3, p2, p3, nu_power, mixed_rate)
        if rg.p2 <= 0:
            raise DomainError(f"簡約 G は p2 > 0 が必要です（積分が発散）: p2={rg.p2}")
        if method == "adaptive":
            return _reduced_g_adaptive(rg, ctx).value
        if method == "series":
            if rg.mixed_rate != 0:
                raise UnsupportedMethodError("μν の指数因子を含む簡約 G は級数で評価できません")
            return _reduced_g_exact(rg, ctx, limit=MethodChoice.from_config().series_limit)
        return _reduced_g_outcome(rg, ctx).value


def _reduced_j_exact(rj: ReducedJ, ctx: PrecisionContext) -> mpmath.mpf:
    count = int(rj.N2 + rj.N3) + 1

    def compute():
        coefficients = _expansion_coefficients(rj.N2, rj.N3, count)
        b_values = _mulliken_B_values(int(rj.q) + count - 1, +rj.p3)
        terms = [c * b_values[int(rj.q) + k] for k, c in enumerate(coefficients) if c != 0]
        if not terms:
            return mpmath.mpf(0), mpmath.mpf(0)
        return mpmath.fsum(terms), max(abs(t) for t in terms)

    return _with_cancellation_guard(compute, ctx.working_digits)


@lru_cache(maxsize=8192)
def _reduced_j_outcome(rj: ReducedJ, ctx: PrecisionContext) -> QuadratureOutcome:
    if (
        _is_nonnegative_integer(rj.N2)
        and _is_nonnegative_integer(rj.N3)
        and _is_nonnegative_integer(rj.q)
    ):
        value = _reduced_j_exact(rj, ctx)
        return QuadratureOutcome(+value, abs(value) * ctx.epsilon, 0, 0, True)

    def integrand(nu):
        return nu**rj.q * (1 + nu) ** rj.N2 * (1 - nu) ** rj.N3 * mpmath.exp(-rj.p3 * nu)

    return adaptive_integrate_1d(integrand, -1, 1, ctx)


def j_reduced(q, N2, N3, p3, ctx: Optional[PrecisionContext] = None) -> mpmath.mpf:
    """簡約 J = ∫_{-1}^{1} ν^q (1+ν)^N2 (1-ν)^N3 e^{-p3ν} dν"""
    ctx = ctx or default_context()
    with ctx.workdps():
        rj = ReducedJ(to_mpf(q), to_mpf(N2), to_mpf(N3), to_mpf(p3))
        return _reduced_j_outcome(rj, ctx).value


# ---------------------------------------------------------------------------
# 漸化式
# ---------------------------------------------------------------------------


def _sign(kind: str) -> int:
    return 1 if kind == "P" else -1


def _shifted_reduced_g(p: AuxParams, exponent, **extra) -> ReducedG:
    """e^{-p1 x_i} と x_i^e を吸収した簡約 G"""
    if p.variant == 1:
        return ReducedG(p.q, p.N2 + exponent, p.N3, p.p2 + p.p1, p.p3 + p.p1, **extra)
    if p.variant == 2:
        return ReducedG(p.q, p.N2, p.N3 + exponent, p.p2 + p.p1, p.p3 - p.p1, **extra)
    return ReducedG(p.q + exponent, p.N2, p.N3, p.p2, p.p3, mixed_rate=p.p1, **extra)


def g_q_reduce(p: AuxParams, order: int = 1, ctx: Optional[PrecisionContext] = None) -> List[Term]:
    """
    q を下げる恒等式

    order=1: μν = ((μ+ν)^2 - (μ-ν)^2)/4 から
        G^q = (G^{q-1}_{N2+2} - G^{q-1}_{N3+2})/4
    order=2: (μν)^2 = ((μ+ν)^4 - 2(μ+ν)^2(μ-ν)^2 + (μ-ν)^4)/16 から q-2 の3項
    """
    if order not in (1, 2):
        raise DomainError(f"order は 1 または 2 です: {order}")
    if p.q < order:
        raise DomainError(f"q={p.q} は {order} 下げられません")
    ctx = ctx or default_context()
    with ctx.workdps():
        p = p.resolved()
        if order == 1:
            quarter = mpmath.mpf(1) / 4
            return [
                Term(quarter, p.with_(q=p.q - 1, N2=p.N2 + 2)),
                Term(-quarter, p.with_(q=p.q - 1, N3=p.N3 + 2)),
            ]
        sixteenth = mpmath.mpf(1) / 16
        return [
            Term(sixteenth, p.with_(q=p.q - 2, N2=p.N2 + 4)),
            Term(-2 * sixteenth, p.with_(q=p.q - 2, N2=p.N2 + 2, N3=p.N3 + 2)),
            Term(sixteenth, p.with_(q=p.q - 2, N3=p.N3 + 4)),
        ]


def g_shift_N4(p: AuxParams, direction: str, ctx: Optional[PrecisionContext] = None) -> List[Term]:
    """
    N4 方向の漸化式（1段）

    P[a,x] - P[a+1,x] = x^a e^{-x}/Γ(a+1) を被積分関数に代入したもの。
    上向き: G_{N4} = c·G_{N4+1} ± pref·p1^a/Γ(a+1)·簡約G
    下向き: G_{N4} = c·G_{N4-1} ∓ pref·p1^{a-1}/Γ(a)·簡約G
    c は前置係数の比。補正項の引数は variant ごとに
    1: (N2+e; p2+p1, p3+p1), 2: (N3+e; p2+p1, p3-p1), 3: (q+e; e^{-p1μν})。
    """
    if direction not in ("up", "down"):
        raise DomainError(f"direction は up または down です: {direction}")
    ctx = ctx or default_context()
    with ctx.workdps():
        p = p.resolved()
        shape = p.shape
        sign = _sign(p.kind)
        if direction == "up":
            neighbour = p.with_(N4=p.N4 + 1)
            exponent = shape
            correction_sign = sign
        else:
            if shape - 1 <= 0:
                raise DomainError(f"下向き漸化式は N4-N1-1 > 0 が必要です: N4-N1={shape}")
            neighbour = p.with_(N4=p.N4 - 1)
            exponent = shape - 1
            correction_sign = -sign

        ratio = inverse_pochhammer(shape, p.N1, ctx) / inverse_pochhammer(
            neighbour.shape, p.N1, ctx
        )
        correction = (
            correction_sign
            * p.prefactor(ctx)
            * p.p1**exponent
            / mpmath.gamma(exponent + 1)
        )
        return _merge(
            [Term(ratio, neighbour), Term(correction, _shifted_reduced_g(p, exponent))]
        )


def g_shift_N2N3(p: AuxParams, ctx: Optional[PrecisionContext] = None) -> List[Term]:
    """
    N2, N3 方向の漸化式（μ についての部分積分）

    G = (1/p2){ e^{-p2}·(前置係数比)·J^q + N2·G_{N2-1} + N3·G_{N3-1}
                + (q/2)(G^{q-1}_{N2+1} - G^{q-1}_{N3+1})
                ± pref·p1^a/Γ(a)·簡約G }
    J は μ=1 での境界項。q の項は ∂(μν)^q/∂μ = q(μν)^{q-1}ν と
    ν = ((μ+ν) - (μ-ν))/2 から。
    """
    ctx = ctx or default_context()
    with ctx.workdps():
        p = p.resolved()
        if p.p2 == 0:
            raise DomainError("p2 = 0 では N2, N3 方向の漸化式が特異です")
        if p.N2 < 0:
            raise DomainError(f"N2, N3 方向の漸化式は N2 >= 0 が必要です: N2={p.N2}")
        shape = p.shape
        if shape + p.N1 - 1 == 0:
            raise DomainError("N4 = 1 では境界項の係数比が定義できません")

        inverse_p2 = 1 / p.p2
        terms = []

        boundary = JParams(p.N1, p.q, p.N2, p.N3, p.N4, p.p1, p.p3, p.variant, p.kind)
        # (a)_{N1-1}/(a)_{N1} = 1/(a+N1-1)
        terms.append(Term(inverse_p2 * mpmath.exp(-p.p2) / (shape + p.N1 - 1), boundary))
        if p.N2 != 0:
            terms.append(Term(p.N2 * inverse_p2, p.with_(N2=p.N2 - 1)))
        if p.N3 != 0:
            terms.append(Term(p.N3 * inverse_p2, p.with_(N3=p.N3 - 1)))
        if p.q != 0:
            half = p.q * inverse_p2 / 2
            terms.append(Term(half, p.with_(q=p.q - 1, N2=p.N2 + 1)))
            terms.append(Term(-half, p.with_(q=p.q - 1, N3=p.N3 + 1)))

        correction = (
            _sign(p.kind) * inverse_p2 * p.prefactor(ctx) * p.p1**shape / mpmath.gamma(shape)
        )
        if p.variant == 1:
            reduced = ReducedG(p.q, p.N2 + shape - 1, p.N3, p.p2 + p.p1, p.p3 + p.p1)
        elif p.variant == 2:
            reduced = ReducedG(p.q, p.N2, p.N3 + shape - 1, p.p2 + p.p1, p.p3 - p.p1)
        else:
            # ∂(p1μν)/∂μ = p1ν
            reduced = ReducedG(
                p.q + shape - 1, p.N2, p.N3, p.p2, p.p3, nu_power=1, mixed_rate=p.p1
            )
        terms.append(Term(correction, reduced))
        return _merge(terms)


def _shifted_reduced_j(p: JParams, exponent) -> Tuple[ReducedJ, mpmath.mpf]:
    """(簡約 J, e^{-p1} 因子)"""
    if p.variant == 1:
        return ReducedJ(p.q, p.N2 + exponent, p.N3, p.p3 + p.p1), mpmath.exp(-p.p1)
    if p.variant == 2:
        return ReducedJ(p.q, p.N2, p.N3 + exponent, p.p3 - p.p1), mpmath.exp(-p.p1)
    return ReducedJ(p.q + exponent, p.N2, p.N3, p.p3 + p.p1), mpmath.mpf(1)


def j_boundary(p: Union[AuxParams, JParams], ctx: Optional[PrecisionContext] = None) -> mpmath.mpf:
    """
    ν についての部分積分で現れる境界係数

    pref·[h(1)e^{-p3} - h(-1)e^{p3}]、pref = p1^N1/(N4-N1)_{N1}、
    h(ν) = ν^q (1+ν)^N2 (1-ν)^N3 {P|Q}[N4-N1, p1·y_i(ν)]。
    h(1) は N3 = 0、h(-1) は N2 = 0 のときだけ残る。
    """
    ctx = ctx or default_context()
    with ctx.workdps():
        N2, N3 = to_mpf(p.N2), to_mpf(p.N3)
        p1, p3 = to_mpf(p.p1), to_mpf(p.p3)
        shape = to_mpf(p.N4) - p.N1
        kind, variant = p.kind, p.variant

        upper = mpmath.mpf(0)
        if N3 == 0:
            argument = {1: 2 * p1, 2: mpmath.mpf(0), 3: p1}[variant]
            upper = 2**N2 * reg_gamma(kind, shape, argument, ctx)
        lower = mpmath.mpf(0)
        if N2 == 0:
            if variant == 3:
                gamma_part = reg_gamma_signed(kind, shape, -p1, ctx)
            else:
                argument = {1: mpmath.mpf(0), 2: 2 * p1}[variant]
                gamma_part = reg_gamma(kind, shape, argument, ctx)
            lower = (-1) ** p.q * 2**N3 * gamma_part

        prefactor = p1**p.N1 * inverse_pochhammer(shape, p.N1, ctx)
        return prefactor * (upper * mpmath.exp(-p3) - lower * mpmath.exp(p3))


def j_shift(p: JParams, axis: str, ctx: Optional[PrecisionContext] = None) -> List[Term]:
    """
    J の漸化式

    axis:
        "q":       ν = ((1+ν)^2 - (1-ν)^2)/4 による q-1 への変換
        "q2":      ν^2 の4次展開による q-2 への変換
        "N4-up":   J_{N4} = c·J_{N4+1} ± pref·p1^a/Γ(a+1)·(e^{-p1})·簡約J
        "N4-down": J_{N4} = c·J_{N4-1} ∓ pref·p1^{a-1}/Γ(a)·(e^{-p1})·簡約J
        "N2N3":    ν についての部分積分（p3 ≠ 0、q ≥ 1 では q·J^{q-1} が加わる）
    """
    ctx = ctx or default_context()
    with ctx.workdps():
        p = p.resolved()
        sign = _sign(p.kind)
        shape = p.shape

        if axis == "q":
            if p.q < 1:
                raise DomainError(f"q={p.q} は下げられません")
            quarter = mpmath.mpf(1) / 4
            return [
                Term(quarter, p.with_(q=p.q - 1, N2=p.N2 + 2)),
                Term(-quarter, p.with_(q=p.q - 1, N3=p.N3 + 2)),
            ]
        if axis == "q2":
            if p.q < 2:
                raise DomainError(f"q={p.q} は2下げられません")
            sixteenth = mpmath.mpf(1) / 16
            return [
                Term(sixteenth, p.with_(q=p.q - 2, N2=p.N2 + 4)),
                Term(-2 * sixteenth, p.with_(q=p.q - 2, N2=p.N2 + 2, N3=p.N3 + 2)),
                Term(sixteenth, p.with_(q=p.q - 2, N3=p.N3 + 4)),
            ]
        if axis in ("N4-up", "N4-down"):
            if axis == "N4-up":
                neighbour = p.with_(N4=p.N4 + 1)
                exponent = shape
                correction_sign = sign
            else:
                if shape - 1 <= 0:
                    raise DomainError(f"下向き漸化式は N4-N1-1 > 0 が必要です: N4-N1={shape}")
                neighbour = p.with_(N4=p.N4 - 1)
                exponent = shape - 1
                correction_sign = -sign
            ratio = inverse_pochhammer(shape, p.N1 - 1, ctx) / inverse_pochhammer(
                neighbour.shape, p.N1 - 1, ctx
            )
            reduced, decay = _shifted_reduced_j(p, exponent)
            correction = (
                correction_sign * p.prefactor(ctx) * p.p1**exponent * decay
                / mpmath.gamma(exponent + 1)
            )
            return _merge([Term(ratio, neighbour), Term(correction, reduced)])
        if axis == "N2N3":
            if p.p3 == 0:
                raise DomainError("p3 = 0 では N2, N3 方向の漸化式が特異です")
            if p.N2 < 0:
                raise DomainError(f"N2, N3 方向の漸化式は N2 >= 0 が必要です: N2={p.N2}")
            inverse_p3 = 1 / p.p3
            terms = []
            if p.N2 != 0:
                terms.append(Term(p.N2 * inverse_p3, p.with_(N2=p.N2 - 1)))
            if p.N3 != 0:
                terms.append(Term(-p.N3 * inverse_p3, p.with_(N3=p.N3 - 1)))
            if p.q != 0:
                terms.append(Term(p.q * inverse_p3, p.with_(q=p.q - 1)))

            base = inverse_p3 * p.prefactor(ctx) * p.p1**shape / mpmath.gamma(shape)
            if p.variant == 1:
                reduced = ReducedJ(p.q, p.N2 + shape - 1, p.N3, p.p3 + p.p1)
                correction = sign * base * mpmath.exp(-p.p1)
            elif p.variant == 2:
                # d/dν P[a, p1(1-ν)] は負
                reduced = ReducedJ(p.q, p.N2, p.N3 + shape - 1, p.p3 - p.p1)
                correction = -sign * base * mpmath.exp(-p.p1)
            else:
                reduced = ReducedJ(p.q + shape - 1, p.N2, p.N3, p.p3 + p.p1)
                correction = sign * base
            terms.append(Term(correction, reduced))

            # j_boundary は (a)_{N1} で規格化されているので (a)_{N1}/(a)_{N1-1} = a+N1-1 を掛ける
            boundary = j_boundary(p, ctx)
            terms.append(Term(-(shape + p.N1 - 1) * inverse_p3 * boundary, None))
            return _merge(terms)
        raise DomainError(f"未知の漸化式の軸です: {axis}")


# ---------------------------------------------------------------------------
# 線形結合の評価
# ---------------------------------------------------------------------------


def _evaluate_target(target: Target, method: MethodChoice, ctx: PrecisionContext) -> QuadratureOutcome:
    if target is None:
        return QuadratureOutcome(mpmath.mpf(1), mpmath.mpf(0), 0, 0, True)
    if isinstance(target, AuxParams):
        return _aux_g_cached(target, method, ctx)
    if isinstance(target, JParams):
        return _aux_j_cached(target, method, ctx)
    if isinstance(target, ReducedG):
        return _reduced_g_outcome(_resolve_reduced_g(
            target.q, target.N2, target.N3, target.p2, target.p3,
            target.nu_power, target.mixed_rate,
        ), ctx)
    if isinstance(target, ReducedJ):
        return _reduced_j_outcome(
            ReducedJ(to_mpf(target.q), to_mpf(target.N2), to_mpf(target.N3), to_mpf(target.p3)),
            ctx,
        )
    raise TypeError(f"評価できない項です: {target!r}")


def evaluate_terms(
    terms: List[Term],
    method: Optional[MethodChoice] = None,
    ctx: Optional[PrecisionContext] = None,
) -> QuadratureOutcome:
    """
    線形結合 Σ c_i·target_i を評価

    G, J の項は method で、簡約項は Mulliken 和または適応積分で評価する。
    """
    ctx = ctx or default_context()
    method = method or MethodChoice.from_config()
    with ctx.workdps():
        pairs = []
        for term in terms:
            target = term.target
            if isinstance(target, (AuxParams, JParams)):
                target = target.resolved()
            pairs.append((term.coefficient, _evaluate_target(target, method, ctx)))
        return combine_outcomes(pairs)


# ---------------------------------------------------------------------------
# G の評価
# ---------------------------------------------------------------------------


def _recurrence_obstacle(p) -> Optional[str]:
    """漸化式で N4-N1 = 1 まで下げられない理由（下げられるなら None）"""
    if not _is_nonnegative_integer(p.shape):
        return f"N4-N1={p.shape} が整数ではありません"
    return None


def _singular_split(p) -> bool:
    """P[1,x] = 1 - e^{-x} の分解で (μ+ν)^N2 (N2 < 0) の特異性が打ち消されなくなるか"""
    return isinstance(p, AuxParams) and p.kind == "P" and p.variant == 1 and p.N2 < 0


def _closed_form(p) -> bool:
    """漸化式の末端の簡約積分が全て Mulliken 関数の有限和になるか"""
    return (
        _recurrence_obstacle(p) is None
        and _is_nonnegative_integer(p.N2)
        and _is_nonnegative_integer(p.N3)
        and not (isinstance(p, AuxParams) and p.variant == 3)
    )


def _upward_closed_form(p) -> bool:
    """
    N2 < 0 の P 項で、N4 を上げる方向の和
    G_{N4} = Σ_s c_s·簡約G(N2+a+s) の各項が Mulliken 関数の有限和になるか
    """
    return (
        _singular_split(p)
        and _recurrence_obstacle(p) is None
        and _is_nonnegative_integer(p.N2 + p.shape)
        and _is_nonnegative_integer(p.N3)
    )


def _upward_terms_needed(p: AuxParams, ctx: PrecisionContext, limit: int) -> Optional[int]:
    """
    上向きの和が作業精度まで減衰する項数の目安（limit 以内で減衰しなければ None）

    s 項目は概ね s^{2q+N2+N3}·r^s、r = p1/(p1 + (p2+p3)/2)。
    """
    if p.p1 == 0:
        return 1
    rate = p.p1 + (p.p2 + p.p3) / 2
    if rate <= p.p1:
        return None
    decay = -mpmath.log(p.p1 / rate)
    degree = max(0, int(2 * p.q + p.N2 + p.N3))
    goal = ctx.working_digits * mpmath.log(10)
    for s in range(1, limit + 1):
        if s * decay - degree * mpmath.log(s + 1) >= goal:
            return s
    return None


def _choose_strategy(p, method: MethodChoice, ctx: PrecisionContext) -> str:
    if method.strategy != "auto":
        return method.strategy
    if p.p1 > Config.AUTO_P1_LIMIT or (p.q + 1) * int(p.shape) > Config.RECURRENCE_MAX_TERMS:
        return "adaptive"
    if _closed_form(p):
        return "recurrence"
    if _upward_closed_form(p) and _upward_terms_needed(p, ctx, method.series_limit) is not None:
        return "recurrence"
    return "adaptive"


def _expand(start, reducible: Callable, step: Callable) -> Dict[Target, mpmath.mpf]:
    """reducible な項がなくなるまで step で書き換える（出現順を保つ）"""
    combination: Dict[Target, mpmath.mpf] = {start: mpmath.mpf(1)}
    while True:
        target = next((t for t in combination if reducible(t)), None)
        if target is None:
            return combination
        coefficient = combination.pop(target)
        for term in step(target):
            combination[term.target] = (
                combination.get(term.target, mpmath.mpf(0)) + coefficient * term.coefficient
            )


def _g_base_terms(p: AuxParams, ctx: PrecisionContext) -> List[Term]:
    """N4-N1 = 1 の G: P[1,x] = 1 - e^{-x}, Q[1,x] = e^{-x}"""
    prefactor = p.prefactor(ctx)
    shifted = _shifted_reduced_g(p, 0)
    if p.kind == "Q":
        return [Term(prefactor, shifted)]
    plain = ReducedG(p.q, p.N2, p.N3, p.p2, p.p3)
    return [Term(prefactor, plain), Term(-prefactor, shifted)]


def _g_recurrence_terms(p: AuxParams, ctx: PrecisionContext) -> List[Term]:
    combination = _expand(
        p,
        lambda t: isinstance(t, AuxParams) and t.q > 0,
        lambda t: g_q_reduce(t, 2 if t.q >= 2 else 1, ctx),
    )
    combination = _expand_mapping(
        combination,
        lambda t: isinstance(t, AuxParams) and t.shape > 1,
        lambda t: g_shift_N4(t, "down", ctx),
    )
    terms = []
    for target, coefficient in combination.items():
        if isinstance(target, AuxParams):
            terms.extend(Term(coefficient * t.coefficient, t.target) for t in _g_base_terms(target, ctx))
        else:
            terms.append(Term(coefficient, target))
    return _merge(terms)


def _expand_mapping(combination: Dict[Target, mpmath.mpf], reducible, step) -> Dict[Target, mpmath.mpf]:
    result: Dict[Target, mpmath.mpf] = {}
    for target, coefficient in combination.items():
        if reducible(target):
            for inner, inner_coefficient in _expand(target, reducible, step).items():
                result[inner] = result.get(inner, mpmath.mpf(0)) + coefficient * inner_coefficient
        else:
            result[target] = result.get(target, mpmath.mpf(0)) + coefficient
    return result


def _evaluate_with_escalation(
    build: Callable[[PrecisionContext], List[Term]],
    method: MethodChoice,
    ctx: PrecisionContext,
) -> QuadratureOutcome:
    """
    漸化式で得た線形結合を評価し、桁落ちが保護桁を超えたら精度を上げて再評価

    結果の誤差には丸め誤差 Σ|c_i v_i|·10^{-digits} を含める。
    """
    run = ctx
    limit = 4 * ctx.working_digits + 200
    while True:
        with run.workdps():
            terms = build(run)
            outcome = evaluate_terms(terms, method, run)
            magnitude = mpmath.fsum(
                abs(term.coefficient * _evaluate_target(term.target, method, run).value)
                for term in terms
            )
            if magnitude == 0:
                return outcome
            value = outcome.value
            lost = (
                run.working_digits
                if value == 0
                else int(mpmath.ceil(mpmath.log10(magnitude / abs(value))))
            )
            guard = run.working_digits - ctx.target_digits - 5
            if lost <= guard or run.working_digits >= limit:
                error = outcome.error_estimate + 10 * magnitude * run.epsilon
                converged = outcome.converged and error <= ctx.rel_tol * abs(value)
                if not converged:
                    logger.warning(
                        f"漸化式の結果が目標精度に届きません: 桁落ち {lost} 桁, "
                        f"誤差 {mpmath.nstr(error, 5)}"
                    )
                return QuadratureOutcome(
                    +value, error, outcome.evaluations, outcome.subdivisions, converged
                )
        digits = min(limit, ctx.working_digits + lost + _EXTRA_DIGITS)
        logger.debug(f"漸化式の桁落ち {lost} 桁のため {digits} 桁で再評価します")
        run = ctx.with_digits(digits)


def _aux_g_adaptive(p: AuxParams, ctx: PrecisionContext) -> QuadratureOutcome:
    prefactor = p.prefactor(ctx)
    if prefactor == 0 or (p.kind == "P" and p.p1 == 0):
        return QuadratureOutcome(mpmath.mpf(0), mpmath.mpf(0), 0, 0, True)
    outcome = adaptive_integrate_2d(lambda mu, nu: _g_value(p, mu, nu, ctx), Region2D(), ctx)
    return outcome.scaled(prefactor)


def _aux_g_recurrence(p: AuxParams, method: MethodChoice, ctx: PrecisionContext) -> QuadratureOutcome:
    obstacle = _recurrence_obstacle(p)
    if obstacle is not None:
        raise UnsupportedMethodError(f"漸化式では評価できません: {obstacle}")
    if _singular_split(p):
        # N4 を下げる分解は (μ+ν)^{N2+k} の発散する項を生むので上向きに和をとる
        if _upward_closed_form(p) and _upward_terms_needed(p, ctx, method.series_limit) is not None:
            logger.info(f"N2={p.N2} < 0 の P 項を N4 を上げる方向の和で評価します")
            outcome = _series_outcome(_aux_g_series(p, method.series_limit, ctx))
            if outcome.converged:
                return outcome
            logger.warning(f"上向きの和が収束しないため適応積分に切り替えます: {p}")
        else:
            logger.info(f"N2={p.N2} < 0 の P 項は漸化式で分解すると特異になるため適応積分で評価します")
        return _aux_g_adaptive(p, ctx)

    def build(run: PrecisionContext) -> List[Term]:
        with run.workdps():
            return _g_recurrence_terms(p.resolved(), run)

    return _evaluate_with_escalation(build, method, ctx)


def _series_outcome(series: SeriesOutcome) -> QuadratureOutcome:
    return QuadratureOutcome(
        series.value,
        abs(series.last_term) * _SMALL_TERMS_TO_STOP,
        series.terms_used,
        0,
        series.converged and not series.diverged,
    )


@lru_cache(maxsize=4096)
def _aux_g_cached(p: AuxParams, method: MethodChoice, ctx: PrecisionContext) -> QuadratureOutcome:
    strategy = _choose_strategy(p, method, ctx)
    logger.debug(f"G を評価: {p} ({strategy})")
    if strategy == "adaptive":
        return _aux_g_adaptive(p, ctx)
    if strategy == "recurrence":
        return _aux_g_recurrence(p, method, ctx)
    return _series_outcome(_aux_g_series(p, method.series_limit, ctx))


def aux_g(
    p: AuxParams,
    method: Optional[MethodChoice] = None,
    ctx: Optional[PrecisionContext] = None,
) -> QuadratureOutcome:
    """
    二変数補助関数 G を評価

    Args:
        p: パラメータ
        method: 評価法（adaptive / recurrence / series / auto）
        ctx: 精度コンテキスト

    Returns:
        前置係数込みの QuadratureOutcome
    """
    ctx = ctx or default_context()
    method = method or MethodChoice.from_config()
    with ctx.workdps():
        return _aux_g_cached(p.resolved(), method, ctx)


# ---------------------------------------------------------------------------
# 級数展開
# ---------------------------------------------------------------------------


def _series_terms(p: AuxParams, ctx: PrecisionContext, limit: int):
    """級数の第 s 項を順に返す（前置係数なし）"""
    shape = p.shape
    if p.variant == 3:
        # P[a,x] = Σ_k (-1)^k x^{a+k}/(k!(a+k)Γ(a))
        gamma_shape = mpmath.gamma(shape)
        for k in range(limit + 1):
            coefficient = (-1) ** k * p.p1 ** (shape + k) / (
                mpmath.factorial(k) * (shape + k) * gamma_shape
            )
            reduced = ReducedG(p.q + shape + k, p.N2, p.N3, p.p2, p.p3)
            yield coefficient * _reduced_g_exact(reduced, ctx, limit)
        return
    # P[a,x] = e^{-x} Σ_s x^{a+s}/Γ(a+s+1)
    for s in range(limit + 1):
        coefficient = p.p1 ** (shape + s) / mpmath.gamma(shape + s + 1)
        reduced = _shifted_reduced_g(p, shape + s)
        yield coefficient * _reduced_g_exact(reduced, ctx, limit)


def _aux_g_series(p: AuxParams, limit: int, ctx: PrecisionContext) -> SeriesOutcome:
    prefactor = p.prefactor(ctx)
    cutoff = to_mpf(ctx.series_rel_cutoff)

    if p.p1 == 0:
        total = mpmath.mpf(0)
        terms_used = 0
        partial_sums: List[mpmath.mpf] = []
        converged, diverged, critical = True, False, 0
        last = mpmath.mpf(0)
    else:
        total = mpmath.mpf(0)
        partial_sums = []
        previous = None
        last = mpmath.mpf(0)
        critical = 0
        small = 0
        converged = False
        magnitudes = []
        for index, term in enumerate(_series_terms(p, ctx, limit)):
            total += term
            partial_sums.append(total)
            magnitudes.append(abs(term))
            if previous is not None and term != 0 and previous != 0 and mpmath.sign(term) != mpmath.sign(previous):
                critical = index
            previous = term
            last = term
            if total != 0 and abs(term) <= cutoff * abs(total):
                small += 1
                if small >= _SMALL_TERMS_TO_STOP:
                    converged = True
                    break
            else:
                small = 0
        terms_used = len(partial_sums)
        diverged = not converged and len(magnitudes) >= 2 and magnitudes[-1] >= magnitudes[-2]

    if p.kind == "P":
        value = prefactor * total
    else:
        plain = ReducedG(p.q, p.N2, p.N3, p.p2, p.p3)
        value = prefactor * (_reduced_g_exact(plain, ctx, limit) - total)

    if diverged:
        logger.warning(f"級数が発散しています: {p}, 項数 {terms_used}")
    elif not converged:
        logger.warning(f"級数が Ns={limit} までに収束しませんでした: {p}")
    return SeriesOutcome(
        value=+value,
        terms_used=terms_used,
        converged=converged,
        diverged=diverged,
        critical_ns=critical,
        partial_sums=tuple(prefactor * s for s in partial_sums),
        last_term=prefactor * last,
    )


def aux_g_series(p: AuxParams, Ns: int, ctx: Optional[PrecisionContext] = None) -> SeriesOutcome:
    """
    G の級数展開

    P[a,x] の級数で s 番目の項を簡約 G（Mulliken 関数の和）に置き換える。
        variant 1: p1^{a+s}/Γ(a+s+1)·簡約G(N2+a+s, N3; p2+p1, p3+p1)
        variant 2: p1^{a+s}/Γ(a+s+1)·簡約G(N2, N3+a+s; p2+p1, p3-p1)
        variant 3: 交代級数 (-1)^k p1^{a+k}/(k!(a+k)Γ(a))·簡約G(q+a+k; p2, p3)
    Q は 簡約G - P の級数。|項|/|部分和| が打ち切り値を3回続けて下回るか
    Ns に達したら止める。

    Args:
        p: パラメータ
        Ns: 和の上限（非整数の指数では二項展開の打ち切り数も兼ねる）
        ctx: 精度コンテキスト

    Returns:
        SeriesOutcome（値、使った項数、収束・発散、臨界 Ns、部分和）
    """
    if Ns < 1:
        raise DomainError(f"Ns は1以上が必要です: {Ns}")
    ctx = ctx or default_context()
    with ctx.workdps():
        return _aux_g_series(p.resolved(), Ns, ctx)


# ---------------------------------------------------------------------------
# J の評価
# ---------------------------------------------------------------------------


def _j_base_terms(p: JParams, ctx: PrecisionContext) -> List[Term]:
    prefactor = p.prefactor(ctx)
    shifted, decay = _shifted_reduced_j(p, 0)
    if p.kind == "Q":
        return [Term(prefactor * decay, shifted)]
    plain = ReducedJ(p.q, p.N2, p.N3, p.p3)
    return [Term(prefactor, plain), Term(-prefactor * decay, shifted)]


def _j_recurrence_terms(p: JParams, ctx: PrecisionContext) -> List[Term]:
    combination = _expand(
        p,
        lambda t: isinstance(t, JParams) and t.q > 0,
        lambda t: j_shift(t, "q2" if t.q >= 2 else "q", ctx),
    )
    combination = _expand_mapping(
        combination,
        lambda t: isinstance(t, JParams) and t.shape > 1,
        lambda t: j_shift(t, "N4-down", ctx),
    )
    terms = []
    for target, coefficient in combination.items():
        if isinstance(target, JParams):
            terms.extend(Term(coefficient * t.coefficient, t.target) for t in _j_base_terms(target, ctx))
        else:
            terms.append(Term(coefficient, target))
    return _merge(terms)


def _aux_j_adaptive(p: JParams, ctx: PrecisionContext) -> QuadratureOutcome:
    prefactor = p.prefactor(ctx)
    if prefactor == 0 or (p.kind == "P" and p.p1 == 0):
        return QuadratureOutcome(mpmath.mpf(0), mpmath.mpf(0), 0, 0, True)
    outcome = adaptive_integrate_1d(lambda nu: _j_value(p, nu, ctx), -1, 1, ctx)
    return outcome.scaled(prefactor)


def _aux_j_series(p: JParams, limit: int, ctx: PrecisionContext) -> QuadratureOutcome:
    prefactor = p.prefactor(ctx)
    shape = p.shape
    cutoff = to_mpf(ctx.series_rel_cutoff)
    total = mpmath.mpf(0)
    small = 0
    used = 0
    last = mpmath.mpf(0)
    converged = p.p1 == 0
    if not converged:
        for s in range(limit + 1):
            reduced, decay = _shifted_reduced_j(p, shape + s)
            if not (_is_nonnegative_integer(reduced.N2) and _is_nonnegative_integer(reduced.N3)):
                outcome = _reduced_j_outcome(reduced, ctx)
                reduced_value = outcome.value
            else:
                reduced_value = _reduced_j_exact(reduced, ctx)
            last = decay * p.p1 ** (shape + s) / mpmath.gamma(shape + s + 1) * reduced_value
            total += last
            used += 1
            if total != 0 and abs(last) <= cutoff * abs(total):
                small += 1
                if small >= _SMALL_TERMS_TO_STOP:
                    converged = True
                    break
            else:
                small = 0
    if p.kind == "P":
        value = prefactor * total
    else:
        value = prefactor * (_reduced_j_outcome(ReducedJ(p.q, p.N2, p.N3, p.p3), ctx).value - total)
    return QuadratureOutcome(+value, abs(prefactor * last) * _SMALL_TERMS_TO_STOP, used, 0, converged)


@lru_cache(maxsize=4096)
def _aux_j_cached(p: JParams, method: MethodChoice, ctx: PrecisionContext) -> QuadratureOutcome:
    strategy = _choose_strategy(p, method, ctx)
    logger.debug(f"J を評価: {p} ({strategy})")
    if strategy == "adaptive":
        return _aux_j_adaptive(p, ctx)
    if strategy == "recurrence":
        obstacle = _recurrence_obstacle(p)
        if obstacle is not None:
            raise UnsupportedMethodError(f"漸化式では評価できません: {obstacle}")

        def build(run: PrecisionContext) -> List[Term]:
            with run.workdps():
                return _j_recurrence_terms(p.resolved(), run)

        return _evaluate_with_escalation(build, method, ctx)
    return _aux_j_series(p, method.series_limit, ctx)


def aux_j(
    p: JParams,
    method: Optional[MethodChoice] = None,
    ctx: Optional[PrecisionContext] = None,
) -> QuadratureOutcome:
    """
    一変数補助関数 J を評価（ν ∈ [-1,1] の1次元積分）

    前置係数は p1^N1/(N4-N1)_{N1-1}。
    """
    ctx = ctx or default_context()
    method = method or MethodChoice.from_config()
    with ctx.workdps():
        return _aux_j_cached(p.resolved(), method, ctx)

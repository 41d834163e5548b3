"""
二中心二電子積分モジュール

非整数 Slater 型軌道 (NSTO) によるクーロン積分 J^{aa,bb} と
ハイブリッド積分 J^{aa,ab} を、軸をそろえた座標系 (lined-up) で
補助関数 ^{P1}G / ^{Q1}G の線形結合として組み立てる。

中心 a の密度が作るポテンシャルは動径関数 f(N1, L1, x) で表され、
それを楕円座標 (μ, ν) に写すと P[N1+L1+1, p1(μ+ν)] と
Q[N1-L1, p1(μ+ν)] を含む被積分関数になる。
"""

import logging
from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple

import mpmath

from angular import assoc_legendre, cos_theta_a, cos_theta_b, g_expansion, legendre_norm, product_expansion
from auxfn import AuxParams, MethodChoice, Term, evaluate_terms
from errors import DomainError, UnsupportedMethodError
from precision import PrecisionContext, default_context, inverse_pochhammer, reg_gamma, to_mpf
from quadrature import QuadratureOutcome, Region2D, adaptive_integrate_2d

logger = logging.getLogger(__name__)

INTEGRAL_KINDS = ("coulomb", "hybrid")


@dataclass(frozen=True)
class Orbital:
    """NSTO χ_{nlm}(ζ, r) = N r^{n-1} e^{-ζr} S_{lm}(θ, φ)"""

    n: object
    l: int
    m: int
    zeta: object

    def __post_init__(self):
        if to_mpf(self.n) <= 0:
            raise DomainError(f"主量子数 n は正である必要があります: n={self.n}")
        if not isinstance(self.l, int) or self.l < 0:
            raise DomainError(f"l は0以上の整数が必要です: l={self.l}")
        if not isinstance(self.m, int) or abs(self.m) > self.l:
            raise DomainError(f"|m| <= l が必要です: l={self.l}, m={self.m}")
        if to_mpf(self.zeta) <= 0:
            raise DomainError(f"ζ は正である必要があります: ζ={self.zeta}")


@dataclass(frozen=True)
class TwoElectronSpec:
    """
    二中心二電子積分の指定

    coulomb: pair1 は両方中心 a、pair2 は両方中心 b。
    hybrid:  pair1 は両方中心 a、pair2 は (中心 a, 中心 b)。
    """

    pair1: Tuple[Orbital, Orbital]
    pair2: Tuple[Orbital, Orbital]
    R: object
    kind: str = "coulomb"
    lined_up: bool = True

    def __post_init__(self):
        if self.kind not in INTEGRAL_KINDS:
            raise DomainError(f"積分の種類は coulomb または hybrid です: {self.kind}")
        if to_mpf(self.R) <= 0:
            raise DomainError(f"核間距離 R は正である必要があります: R={self.R}")
        if len(self.pair1) != 2 or len(self.pair2) != 2:
            raise DomainError("軌道の組は2つずつ指定してください")
        if not self.lined_up:
            raise UnsupportedMethodError("軸をそろえた座標系 (lined-up) の積分のみ対応しています")


@dataclass(frozen=True)
class PairParams:
    """軌道の組から決まるパラメータ p = R(ζ+ζ')/2, t = (ζ-ζ')/(ζ+ζ'), N = n+n'"""

    p: mpmath.mpf
    t: mpmath.mpf
    N: mpmath.mpf
    x_scale: mpmath.mpf


@dataclass(frozen=True)
class IntegralPlan:
    """前置係数と補助関数の線形結合（|係数| の降順）"""

    prefactor: mpmath.mpf
    terms: Tuple[Term, ...]


def nsto_norm(n, zeta, ctx: Optional[PrecisionContext] = None) -> mpmath.mpf:
    """NSTO の規格化定数 (2ζ)^{n+1/2}/√Γ(2n+1)"""
    ctx = ctx or default_context()
    with ctx.workdps():
        n, zeta = to_mpf(n), to_mpf(zeta)
        if n <= 0 or zeta <= 0:
            raise DomainError(f"n, ζ は正である必要があります: n={n}, ζ={zeta}")
        return (2 * zeta) ** (n + mpmath.mpf(1) / 2) / mpmath.sqrt(mpmath.gamma(2 * n + 1))


def pair_norm(p, t, n, n_prime, ctx: Optional[PrecisionContext] = None) -> mpmath.mpf:
    """
    組の規格化係数 [p(1+t)]^{n+1/2}[p(1-t)]^{n'+1/2}/√(Γ(2n+1)Γ(2n'+1))

    p = 1 のとき、二つの規格化定数の積を (ζ+ζ')^{n+n'+1} で割ったものになる。
    """
    ctx = ctx or default_context()
    with ctx.workdps():
        p, t = to_mpf(p), to_mpf(t)
        n, n_prime = to_mpf(n), to_mpf(n_prime)
        if abs(t) >= 1:
            raise DomainError(f"|t| < 1 が必要です: t={t}")
        if p <= 0:
            raise DomainError(f"p は正である必要があります: p={p}")
        half = mpmath.mpf(1) / 2
        return (
            (p * (1 + t)) ** (n + half)
            * (p * (1 - t)) ** (n_prime + half)
            / mpmath.sqrt(mpmath.gamma(2 * n + 1) * mpmath.gamma(2 * n_prime + 1))
        )


def pair_params(orbital: Orbital, orbital_prime: Orbital, R, ctx: Optional[PrecisionContext] = None) -> PairParams:
    """軌道の組のパラメータ（x = 2ζ̄r の 2ζ̄ = ζ+ζ' を x_scale とする）"""
    ctx = ctx or default_context()
    with ctx.workdps():
        zeta, zeta_prime = to_mpf(orbital.zeta), to_mpf(orbital_prime.zeta)
        total = zeta + zeta_prime
        return PairParams(
            p=to_mpf(R) * total / 2,
            t=(zeta - zeta_prime) / total,
            N=to_mpf(orbital.n) + to_mpf(orbital_prime.n),
            x_scale=total,
        )


def radial_potential_f(N1, L1: int, x, ctx: Optional[PrecisionContext] = None) -> mpmath.mpf:
    """
    動径ポテンシャル関数

    f(N1, L1, x) = Γ(N1+L1+1)·x^{-(L1+1)}·{P[N1+L1+1, x]
                   + x^{2L1+1}/(N1-L1)_{2L1+1}·Q[N1-L1, x]}

    密度 r^{N1-2}e^{-x} の L1 成分が作るポテンシャル（(ζ+ζ')^{-N1} を除く）。
    """
    ctx = ctx or default_context()
    with ctx.workdps():
        N1, x = to_mpf(N1), to_mpf(x)
        if N1 - L1 <= 0 or N1 + L1 + 1 <= 0:
            raise DomainError(f"N1-L1 > 0 が必要です: N1={N1}, L1={L1}")
        if x <= 0:
            raise DomainError(f"x は正である必要があります: x={x}")
        inner = reg_gamma("P", N1 + L1 + 1, x, ctx)
        outer = (
            x ** (2 * L1 + 1)
            * inverse_pochhammer(N1 - L1, 2 * L1 + 1, ctx)
            * reg_gamma("Q", N1 - L1, x, ctx)
        )
        return mpmath.gamma(N1 + L1 + 1) * x ** (-(L1 + 1)) * (inner + outer)


def _legendre_weight(L1: int, L2: int, lam: int, ctx: PrecisionContext) -> mpmath.mpf:
    return (
        mpmath.sqrt(mpmath.mpf(2 * L2 + 1) / (2 * L1 + 1))
        * legendre_norm(L1, lam, ctx)
        * legendre_norm(L2, lam, ctx)
    )


def _angular_channels(spec: TwoElectronSpec, ctx: PrecisionContext) -> List[Tuple[int, int, int, int, mpmath.mpf]]:
    """
    (L1, La, Lb, 位数 λ, 角度係数) のリスト

    coulomb: ρa の (L1, M) と ρb の (L2, M) の組、Lb = L2。
    hybrid:  ρa の (L1, M1) に χ2 の角度部分を掛けて (L2, M2) とし、
             χ2' の m2' と M2 が一致するもの。
    La は中心 a 側のルジャンドル関数の次数、Lb は中心 b 側。
    """
    a, a_prime = spec.pair1
    b, b_prime = spec.pair2
    density_a = product_expansion(a.l, a.m, a_prime.l, a_prime.m, ctx)
    channels = []
    if spec.kind == "coulomb":
        density_b = product_expansion(b.l, b.m, b_prime.l, b_prime.m, ctx)
        for L1, M, coef_a in density_a:
            for L2, M2, coef_b in density_b:
                if M2 != M:
                    continue
                weight = coef_a * coef_b * _legendre_weight(L1, L2, abs(M), ctx)
                channels.append((L1, L1, L2, abs(M), weight))
        return channels

    for L1, M1, coef_a in density_a:
        for L2, M2, coef_h in product_expansion(L1, M1, b.l, b.m, ctx):
            if M2 != b_prime.m:
                continue
            weight = (
                coef_a
                * coef_h
                * mpmath.sqrt(mpmath.mpf(2 * L2 + 1) / (2 * L1 + 1))
                * legendre_norm(L2, abs(M2), ctx)
                * legendre_norm(b_prime.l, abs(M2), ctx)
            )
            channels.append((L1, L2, b_prime.l, abs(M2), weight))
    return channels


def _exponents(spec: TwoElectronSpec, L1: int, alpha: int, beta: int, second: PairParams):
    """
    (P 項の N2, Q 項の N2, 共通の N3)

    coulomb: (μ+ν)^{-L1-α}, (μ+ν)^{L1+1-α}, (μ-ν)^{N2-1-β}
    hybrid:  (μ+ν)^{n2-L1-1-α}, (μ+ν)^{L1+n2-α}, (μ-ν)^{n2'-β}
    """
    if spec.kind == "coulomb":
        return -L1 - alpha, L1 + 1 - alpha, second.N - 1 - beta
    n2 = to_mpf(spec.pair2[0].n)
    n2_prime = to_mpf(spec.pair2[1].n)
    return n2 - L1 - 1 - alpha, L1 + n2 - alpha, n2_prime - beta


def _build_plan(spec: TwoElectronSpec, ctx: PrecisionContext) -> IntegralPlan:
    R = to_mpf(spec.R)
    first = pair_params(*spec.pair1, R, ctx)
    if spec.kind == "coulomb":
        second = pair_params(*spec.pair2, R, ctx)
        p3 = -second.p
    else:
        second = pair_params(*spec.pair2, R, ctx)
        p3 = second.p * second.t
    prefactor = (
        2
        / R
        * pair_norm(1, first.t, spec.pair1[0].n, spec.pair1[1].n, ctx)
        * pair_norm(second.p, second.t, spec.pair2[0].n, spec.pair2[1].n, ctx)
    )

    N1 = first.N
    combination: Dict[AuxParams, mpmath.mpf] = {}
    for L1, La, Lb, lam, angular_weight in _angular_channels(spec, ctx):
        if N1 - L1 <= 0:
            raise DomainError(f"n1+n1'-L1 > 0 が必要です: N1={N1}, L1={L1}")
        radial = mpmath.gamma(N1 + L1 + 1) * first.p ** (-L1)
        for (alpha, beta, q), g in g_expansion(La, Lb, lam).items():
            weight = angular_weight * radial * to_mpf(g)
            p_power, q_power, mu_minus_nu = _exponents(spec, L1, alpha, beta, second)
            for params in (
                AuxParams(0, q, p_power, mu_minus_nu, N1 + L1 + 1, first.p, second.p, p3, 1, "P"),
                AuxParams(2 * L1 + 1, q, q_power, mu_minus_nu, N1 + L1 + 1, first.p, second.p, p3, 1, "Q"),
            ):
                combination[params] = combination.get(params, mpmath.mpf(0)) + weight

    terms = [Term(w, params) for params, w in combination.items() if w != 0]
    terms.sort(key=lambda term: -abs(term.coefficient))
    logger.debug(f"{spec.kind} の係数表: {len(terms)} 項")
    return IntegralPlan(prefactor=prefactor, terms=tuple(terms))


def coulomb_plan(spec: TwoElectronSpec, ctx: Optional[PrecisionContext] = None) -> IntegralPlan:
    """クーロン積分の係数表（数値評価の前に角度和を展開しておく）"""
    if spec.kind != "coulomb":
        raise DomainError(f"coulomb の指定が必要です: {spec.kind}")
    ctx = ctx or default_context()
    with ctx.workdps():
        return _build_plan(spec, ctx)


def hybrid_plan(spec: TwoElectronSpec, ctx: Optional[PrecisionContext] = None) -> IntegralPlan:
    """ハイブリッド積分の係数表"""
    if spec.kind != "hybrid":
        raise DomainError(f"hybrid の指定が必要です: {spec.kind}")
    ctx = ctx or default_context()
    with ctx.workdps():
        return _build_plan(spec, ctx)


def _evaluate_plan(plan: IntegralPlan, method: Optional[MethodChoice], ctx: PrecisionContext) -> QuadratureOutcome:
    outcome = evaluate_terms(list(plan.terms), method, ctx)
    return outcome.scaled(plan.prefactor)


def coulomb_integral(
    spec: TwoElectronSpec,
    method: Optional[MethodChoice] = None,
    ctx: Optional[PrecisionContext] = None,
) -> QuadratureOutcome:
    """
    クーロン積分 J^{aa,bb}

    (2/R)·N(1,t1)·N(p2,t2)·Σ 角度係数·Γ(N1+L1+1)·p1^{-L1}
        ·Σ g^q_{αβ}·{^{P1}G^{0,q}_{-L1-α, N2-1-β, N1+L1+1}
                     + ^{Q1}G^{2L1+1,q}_{L1+1-α, N2-1-β, N1+L1+1}}(p1, p2, -p2)

    Args:
        spec: 積分の指定
        method: 補助関数の評価法
        ctx: 精度コンテキスト

    Returns:
        QuadratureOutcome
    """
    ctx = ctx or default_context()
    with ctx.workdps():
        return _evaluate_plan(coulomb_plan(spec, ctx), method, ctx)


def hybrid_integral(
    spec: TwoElectronSpec,
    method: Optional[MethodChoice] = None,
    ctx: Optional[PrecisionContext] = None,
) -> QuadratureOutcome:
    """
    ハイブリッド積分 J^{aa,ab}

    χ2 は中心 a、χ2' は中心 b にある。補助関数の引数は (p1, p2, p2·t2)、
    指数は (n2-L1-1-α, n2'-β) と (L1+n2-α, n2'-β)。
    """
    ctx = ctx or default_context()
    with ctx.workdps():
        return _evaluate_plan(hybrid_plan(spec, ctx), method, ctx)


def two_electron_integral(
    spec: TwoElectronSpec,
    method: Optional[MethodChoice] = None,
    ctx: Optional[PrecisionContext] = None,
) -> QuadratureOutcome:
    if spec.kind == "coulomb":
        return coulomb_integral(spec, method, ctx)
    return hybrid_integral(spec, method, ctx)


# ---------------------------------------------------------------------------
# 検証用の直接積分
# ---------------------------------------------------------------------------


def _oracle(spec: TwoElectronSpec, ctx: PrecisionContext) -> QuadratureOutcome:
    """
    g 展開と補助関数を使わずに、f(N1, L1, p1(μ+ν)) とルジャンドル関数の積を
    楕円座標で直接積分する
    """
    R = to_mpf(spec.R)
    first = pair_params(*spec.pair1, R, ctx)
    second = pair_params(*spec.pair2, R, ctx)
    prefactor = (
        2
        * first.p
        / R
        * pair_norm(1, first.t, spec.pair1[0].n, spec.pair1[1].n, ctx)
        * pair_norm(second.p, second.t, spec.pair2[0].n, spec.pair2[1].n, ctx)
    )
    channels = _angular_channels(spec, ctx)
    N1 = first.N
    if spec.kind == "coulomb":
        p3 = -second.p

        def density(mu, nu):
            return (mu - nu) ** (second.N - 1) * (mu + nu)

    else:
        p3 = second.p * second.t
        n2 = to_mpf(spec.pair2[0].n)
        n2_prime = to_mpf(spec.pair2[1].n)

        def density(mu, nu):
            return (mu + nu) ** n2 * (mu - nu) ** n2_prime

    def integrand(mu, nu):
        x_a, x_b = cos_theta_a(mu, nu), cos_theta_b(mu, nu)
        total = mpmath.mpf(0)
        for L1, La, Lb, lam, weight in channels:
            total += (
                weight
                * radial_potential_f(N1, L1, first.p * (mu + nu), ctx)
                * assoc_legendre(La, lam, x_a, ctx)
                * assoc_legendre(Lb, lam, x_b, ctx)
            )
        return total * density(mu, nu) * mpmath.exp(-second.p * mu - p3 * nu)

    return adaptive_integrate_2d(integrand, Region2D(), ctx).scaled(prefactor)


def coulomb_oracle(spec: TwoElectronSpec, ctx: Optional[PrecisionContext] = None) -> QuadratureOutcome:
    """クーロン積分の直接積分による参照値"""
    if spec.kind != "coulomb":
        raise DomainError(f"coulomb の指定が必要です: {spec.kind}")
    ctx = ctx or default_context()
    with ctx.workdps():
        return _oracle(spec, ctx)


def hybrid_oracle(spec: TwoElectronSpec, ctx: Optional[PrecisionContext] = None) -> QuadratureOutcome:
    """ハイブリッド積分の直接積分による参照値"""
    if spec.kind != "hybrid":
        raise DomainError(f"hybrid の指定が必要です: {spec.kind}")
    ctx = ctx or default_context()
    with ctx.workdps():
        return _oracle(spec, ctx)

"""
大域適応 Gauss-Kronrod 数値積分モジュール

1次元の有限区間・半無限区間と、楕円座標の積分領域 [1,∞)×[-1,1] を扱う。
半無限の μ 軸は t = 1 - 1/μ で [0,1) に写してから積分する。
"""

import heapq
import itertools
import logging
from dataclasses import dataclass, replace
from functools import lru_cache
from typing import Callable, Iterable, List, Optional, Sequence, Tuple

import mpmath

from errors import DomainError, EvaluationError
from precision import PrecisionContext, default_context, to_mpf

logger = logging.getLogger(__name__)

# Kronrod の節点計算に足す桁数
_RULE_GUARD_DIGITS = 20


@dataclass(frozen=True)
class QuadratureOutcome:
    """積分値・誤差推定・評価回数・分割回数・収束判定"""

    value: mpmath.mpf
    error_estimate: mpmath.mpf
    evaluations: int = 0
    subdivisions: int = 0
    converged: bool = True

    def scaled(self, factor) -> "QuadratureOutcome":
        """定数倍した結果"""
        return replace(
            self,
            value=self.value * factor,
            error_estimate=self.error_estimate * abs(factor),
        )


def combine_outcomes(weighted: Iterable[Tuple[mpmath.mpf, QuadratureOutcome]]) -> QuadratureOutcome:
    """
    Σ w_i·I_i をまとめる（与えられた順に加算）

    誤差は Σ |w_i|·ε_i、収束判定は全項の論理積。
    """
    value = mpmath.mpf(0)
    error = mpmath.mpf(0)
    evaluations = 0
    subdivisions = 0
    converged = True
    for weight, outcome in weighted:
        value += weight * outcome.value
        error += abs(weight) * outcome.error_estimate
        evaluations += outcome.evaluations
        subdivisions += outcome.subdivisions
        converged = converged and outcome.converged
    return QuadratureOutcome(value, error, evaluations, subdivisions, converged)


# ---------------------------------------------------------------------------
# Gauss-Kronrod 則
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GKRule:
    """[-1,1] 上の (2n+1) 点 Kronrod 則と埋め込み n 点 Gauss 則"""

    nodes: Tuple[mpmath.mpf, ...]
    kronrod_weights: Tuple[mpmath.mpf, ...]
    gauss_weights: Tuple[mpmath.mpf, ...]  # Kronrod 追加点では 0

    @property
    def gauss_points(self) -> int:
        return sum(1 for w in self.gauss_weights if w != 0)


def _legendre_poly_coefficients(n: int) -> List[mpmath.mpf]:
    """P_n の係数（昇べき）"""
    previous = [mpmath.mpf(1)]
    current = [mpmath.mpf(0), mpmath.mpf(1)]
    if n == 0:
        return previous
    for k in range(1, n):
        shifted = [mpmath.mpf(0)] + current
        padded = previous + [mpmath.mpf(0)] * (len(shifted) - len(previous))
        following = [
            ((2 * k + 1) * shifted[i] - k * padded[i]) / (k + 1) for i in range(len(shifted))
        ]
        previous, current = current, following
    return current


def _legendre_with_derivative(n: int, x: mpmath.mpf) -> Tuple[mpmath.mpf, mpmath.mpf]:
    p_prev, p = mpmath.mpf(1), x
    for k in range(1, n):
        p_prev, p = p, ((2 * k + 1) * x * p - k * p_prev) / (k + 1)
    derivative = n * (x * p - p_prev) / (x * x - 1)
    return p, derivative


def _newton(function, guess: mpmath.mpf, eps: mpmath.mpf, max_iter: int = 100) -> mpmath.mpf:
    x = guess
    for _ in range(max_iter):
        value, derivative = function(x)
        step = value / derivative
        x -= step
        if abs(step) <= eps:
            break
    return x


def _gauss_nodes(n: int, eps: mpmath.mpf) -> List[mpmath.mpf]:
    nodes = []
    for i in range(n):
        guess = mpmath.cos(mpmath.pi * (i + mpmath.mpf(0.75)) / (n + mpmath.mpf(0.5)))
        nodes.append(_newton(lambda x: _legendre_with_derivative(n, x), guess, eps))
    return sorted(nodes)


def _stieltjes_coefficients(n: int) -> List[mpmath.mpf]:
    """
    Stieltjes 多項式 E_{n+1} の係数（降べき）

    E_{n+1} = x^{n+1} + Σ_k c_k x^{n+1-2k} が P_n·x^j (j < n+1) と直交する条件を
    連立一次方程式として解く。偶奇性から奇数の j だけが残る。
    """
    legendre = _legendre_poly_coefficients(n)

    def moment(power: int) -> mpmath.mpf:
        total = mpmath.mpf(0)
        for i, coefficient in enumerate(legendre):
            if coefficient != 0 and (power + i) % 2 == 0:
                total += coefficient * 2 / (power + i + 1)
        return total

    count = (n + 1) // 2
    constraints = [j for j in range(1, n + 1, 2)]
    matrix = mpmath.matrix(count, count)
    rhs = mpmath.matrix(count, 1)
    for row, j in enumerate(constraints):
        for col in range(count):
            matrix[row, col] = moment(n + 1 - 2 * (col + 1) + j)
        rhs[row] = -moment(n + 1 + j)
    solution = mpmath.lu_solve(matrix, rhs) if count else []

    descending = [mpmath.mpf(0)] * (n + 2)
    descending[0] = mpmath.mpf(1)
    for k in range(count):
        descending[2 * (k + 1)] = solution[k]
    return descending


def _kronrod_nodes(n: int, gauss: Sequence[mpmath.mpf], eps: mpmath.mpf) -> List[mpmath.mpf]:
    coefficients = _stieltjes_coefficients(n)
    brackets = [mpmath.mpf(-1)] + list(gauss) + [mpmath.mpf(1)]
    roots = []
    for left, right in zip(brackets[:-1], brackets[1:]):
        guess = (left + right) / 2
        root = _newton(
            lambda x: mpmath.polyval(coefficients, x, derivative=True), guess, eps
        )
        roots.append(root)

    valid = all(brackets[i] < roots[i] < brackets[i + 1] for i in range(len(roots)))
    if not valid:
        # Newton が区間外に出た場合は全根を求め直す
        logger.debug(f"Kronrod 節点の Newton 反復が区間外に出たため polyroots を使用 (n={n})")
        found = mpmath.polyroots(coefficients, maxsteps=500, extraprec=200)
        roots = sorted(mpmath.re(r) for r in found)
    return roots


@lru_cache(maxsize=None)
def gk_rule(n: int, digits: int) -> GKRule:
    """
    n 点 Gauss / (2n+1) 点 Kronrod 則を digits 桁で生成（メモ化）

    Args:
        n: Gauss 点数
        digits: 10進桁数

    Returns:
        GKRule（節点は昇順）
    """
    if n < 1:
        raise DomainError(f"Gauss 点数は1以上が必要です: {n}")
    with mpmath.workdps(digits + _RULE_GUARD_DIGITS + 2 * n):
        eps = mpmath.mpf(10) ** (-(digits + _RULE_GUARD_DIGITS))
        gauss = _gauss_nodes(n, eps)
        extension = _kronrod_nodes(n, gauss, eps)
        nodes = sorted(gauss + extension)
        size = len(nodes)

        vandermonde = mpmath.matrix(size, size)
        moments = mpmath.matrix(size, 1)
        for k in range(size):
            for i, x in enumerate(nodes):
                vandermonde[k, i] = x**k
            moments[k] = mpmath.mpf(2) / (k + 1) if k % 2 == 0 else mpmath.mpf(0)
        kronrod = mpmath.lu_solve(vandermonde, moments)

        gauss_set = set(gauss)
        gauss_weights = []
        for x in nodes:
            if x in gauss_set:
                _, derivative = _legendre_with_derivative(n, x)
                gauss_weights.append(2 / ((1 - x * x) * derivative**2))
            else:
                gauss_weights.append(mpmath.mpf(0))

    logger.debug(f"Gauss-Kronrod 則を生成: G{n}/K{size}, {digits} 桁")
    return GKRule(
        nodes=tuple(nodes),
        kronrod_weights=tuple(kronrod[i] for i in range(size)),
        gauss_weights=tuple(gauss_weights),
    )


# ---------------------------------------------------------------------------
# 1区間・1セルの評価
# ---------------------------------------------------------------------------


def _checked(value, location) -> mpmath.mpf:
    if isinstance(value, mpmath.mpc):
        if value.imag != 0:
            raise EvaluationError(f"被積分関数が複素数になりました: {location}", location)
        value = value.real
    else:
        value = mpmath.mpf(value)
    if mpmath.isnan(value) or mpmath.isinf(value):
        raise EvaluationError(f"被積分関数が有限値ではありません: {location}", location)
    return value


def _scaled_error(difference, resasc, resabs, eps) -> mpmath.mpf:
    """QUADPACK と同じ |K-G| のスケーリングと丸め誤差の下限"""
    error = abs(difference)
    if resasc != 0 and error != 0:
        error = resasc * min(mpmath.mpf(1), (200 * error / resasc) ** mpmath.mpf(1.5))
    return max(error, 50 * eps * resabs)


def _gk_segment(f, a, b, rule: GKRule, eps) -> Tuple[mpmath.mpf, mpmath.mpf, mpmath.mpf]:
    center = (a + b) / 2
    half = (b - a) / 2
    values = []
    for x in rule.nodes:
        point = center + half * x
        values.append(_checked(f(point), point))

    kronrod = mpmath.fsum(w * v for w, v in zip(rule.kronrod_weights, values))
    gauss = mpmath.fsum(w * v for w, v in zip(rule.gauss_weights, values))
    mean = kronrod / 2
    resabs = mpmath.fsum(w * abs(v) for w, v in zip(rule.kronrod_weights, values))
    resasc = mpmath.fsum(w * abs(v - mean) for w, v in zip(rule.kronrod_weights, values))
    scale = abs(half)
    error = _scaled_error((kronrod - gauss) * half, resasc * scale, resabs * scale, eps)
    return kronrod * half, error, resabs * scale


def gk_apply(
    f: Callable, a, b, rule_points: int = 7, ctx: Optional[PrecisionContext] = None
) -> Tuple[mpmath.mpf, mpmath.mpf]:
    """
    [a,b] に Gauss-Kronrod 則を1回適用

    Args:
        f: 実数 -> 実数
        a, b: 区間 (a < b)
        rule_points: Gauss 点数
        ctx: 精度コンテキスト

    Returns:
        (Kronrod 推定値, 誤差推定)
    """
    ctx = ctx or default_context()
    with ctx.workdps():
        a, b = to_mpf(a), to_mpf(b)
        if not a < b:
            raise DomainError(f"積分区間は a < b が必要です: [{a}, {b}]")
        rule = gk_rule(rule_points, ctx.working_digits)
        value, error, _ = _gk_segment(f, a, b, rule, ctx.epsilon)
        return value, error


def map_semiinfinite(t, lower=1) -> Tuple[mpmath.mpf, mpmath.mpf]:
    """
    t ∈ [0,1) を μ = lower + t/(1-t) に写す

    Returns:
        (μ, ヤコビアン 1/(1-t)^2)
    """
    t = to_mpf(t)
    if t >= 1 or t < 0:
        raise DomainError(f"変換座標は 0 <= t < 1 が必要です: t={t}")
    one_minus = 1 - t
    return to_mpf(lower) + t / one_minus, 1 / (one_minus * one_minus)


# ---------------------------------------------------------------------------
# 2次元領域
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Region2D:
    """楕円座標の積分領域（μ_hi は無限大可）"""

    mu_lo: object = 1
    mu_hi: object = mpmath.inf
    nu_lo: object = -1
    nu_hi: object = 1

    def __post_init__(self):
        mu_lo, mu_hi = to_mpf(self.mu_lo), to_mpf(self.mu_hi)
        nu_lo, nu_hi = to_mpf(self.nu_lo), to_mpf(self.nu_hi)
        if mu_lo < 1 or not mu_lo < mu_hi:
            raise DomainError(f"μ 区間が不正です: [{self.mu_lo}, {self.mu_hi}]")
        if nu_lo < -1 or nu_hi > 1 or not nu_lo < nu_hi:
            raise DomainError(f"ν 区間が不正です: [{self.nu_lo}, {self.nu_hi}]")

    def transformed(self) -> Tuple[mpmath.mpf, mpmath.mpf, mpmath.mpf, mpmath.mpf]:
        """t = 1 - 1/μ に変換した (t_lo, t_hi, ν_lo, ν_hi)"""
        mu_hi = to_mpf(self.mu_hi)
        t_hi = mpmath.mpf(1) if mpmath.isinf(mu_hi) else 1 - 1 / mu_hi
        return (
            1 - 1 / to_mpf(self.mu_lo),
            t_hi,
            to_mpf(self.nu_lo),
            to_mpf(self.nu_hi),
        )


@dataclass
class _Cell:
    t_lo: mpmath.mpf
    t_hi: mpmath.mpf
    nu_lo: mpmath.mpf
    nu_hi: mpmath.mpf
    depth: int
    value: mpmath.mpf = None
    error: mpmath.mpf = None
    resabs: mpmath.mpf = None

    def key(self):
        return (self.t_lo, self.nu_lo, self.t_hi, self.nu_hi)

    def bisect(self) -> Tuple["_Cell", "_Cell"]:
        # 正規化した幅（t は長さ1、ν は長さ2）の長い方を半分にする
        if (self.t_hi - self.t_lo) >= (self.nu_hi - self.nu_lo) / 2:
            middle = (self.t_lo + self.t_hi) / 2
            return (
                _Cell(self.t_lo, middle, self.nu_lo, self.nu_hi, self.depth + 1),
                _Cell(middle, self.t_hi, self.nu_lo, self.nu_hi, self.depth + 1),
            )
        middle = (self.nu_lo + self.nu_hi) / 2
        return (
            _Cell(self.t_lo, self.t_hi, self.nu_lo, middle, self.depth + 1),
            _Cell(self.t_lo, self.t_hi, middle, self.nu_hi, self.depth + 1),
        )


def _gk_cell(f, cell: _Cell, rule: GKRule, eps) -> int:
    """直積 Gauss-Kronrod 則でセルを評価し、評価回数を返す"""
    t_center, t_half = (cell.t_lo + cell.t_hi) / 2, (cell.t_hi - cell.t_lo) / 2
    nu_center, nu_half = (cell.nu_lo + cell.nu_hi) / 2, (cell.nu_hi - cell.nu_lo) / 2

    nu_points = [nu_center + nu_half * x for x in rule.nodes]
    grid = []
    for x in rule.nodes:
        mu, jacobian = map_semiinfinite(t_center + t_half * x)
        row = []
        for nu in nu_points:
            row.append(_checked(f(mu, nu), (mu, nu)) * jacobian)
        grid.append(row)

    wk, wg = rule.kronrod_weights, rule.gauss_weights
    kronrod = mpmath.fsum(
        wk[i] * wk[j] * grid[i][j] for i in range(len(wk)) for j in range(len(wk))
    )
    gauss = mpmath.fsum(
        wg[i] * wg[j] * grid[i][j]
        for i in range(len(wg))
        if wg[i] != 0
        for j in range(len(wg))
        if wg[j] != 0
    )
    mean = kronrod / 4
    resabs = mpmath.fsum(
        wk[i] * wk[j] * abs(grid[i][j]) for i in range(len(wk)) for j in range(len(wk))
    )
    resasc = mpmath.fsum(
        wk[i] * wk[j] * abs(grid[i][j] - mean) for i in range(len(wk)) for j in range(len(wk))
    )
    area = t_half * nu_half
    cell.value = kronrod * area
    cell.resabs = resabs * area
    cell.error = _scaled_error((kronrod - gauss) * area, resasc * area, cell.resabs, eps)
    return len(wk) * len(wk)


def _check_tolerance(rel_tol, ctx: PrecisionContext) -> mpmath.mpf:
    floor = mpmath.mpf(10) ** (-ctx.working_digits + 8)
    if rel_tol is None:
        return ctx.rel_tol
    rel_tol = to_mpf(rel_tol)
    if rel_tol <= 0:
        raise DomainError(f"相対許容誤差は正である必要があります: {rel_tol}")
    if rel_tol < floor:
        raise DomainError(
            f"相対許容誤差 {mpmath.nstr(rel_tol, 5)} は作業精度の下限 "
            f"{mpmath.nstr(floor, 5)} より小さいです"
        )
    return rel_tol


def adaptive_integrate_2d(
    f: Callable,
    region: Optional[Region2D] = None,
    ctx: Optional[PrecisionContext] = None,
    rel_tol=None,
) -> QuadratureOutcome:
    """
    2次元の大域適応積分

    誤差推定が最大のセルから順に、長い方の軸で二分する。
    誤差の合計が rel_tol·|積分値| 以下になるか、深さ上限・分割回数上限に
    達したら終了する。同じ誤差のセルは先に作られた方を分割する。

    Args:
        f: (μ, ν) -> 実数
        region: 積分領域（既定は [1,∞)×[-1,1]）
        ctx: 精度コンテキスト
        rel_tol: 相対許容誤差（既定は ctx.rel_tol）

    Returns:
        QuadratureOutcome
    """
    ctx = ctx or default_context()
    region = region or Region2D()
    with ctx.workdps():
        rel_tol = _check_tolerance(rel_tol, ctx)
        floor = mpmath.mpf(10) ** (-ctx.working_digits + 8)
        eps = ctx.epsilon
        rule = gk_rule(ctx.rule_points, ctx.working_digits)
        serial = itertools.count()

        t_lo, t_hi, nu_lo, nu_hi = region.transformed()
        root = _Cell(t_lo, t_hi, nu_lo, nu_hi, 0)
        evaluations = _gk_cell(f, root, rule, eps)
        heap = [(-root.error, next(serial), root)]
        frozen: List[_Cell] = []
        frozen_error = mpmath.mpf(0)

        total = root.value
        total_error = root.error
        total_resabs = root.resabs
        subdivisions = 0
        converged = False

        while True:
            tolerance = max(rel_tol * abs(total), floor * total_resabs)
            if total_error <= tolerance:
                converged = True
                break
            if not heap or frozen_error > tolerance:
                break
            if subdivisions >= ctx.max_subdivisions:
                break

            _, _, worst = heapq.heappop(heap)
            if worst.depth >= ctx.max_recursion:
                frozen.append(worst)
                frozen_error += worst.error
                continue

            children = worst.bisect()
            for child in children:
                evaluations += _gk_cell(f, child, rule, eps)
                heapq.heappush(heap, (-child.error, next(serial), child))
            total += children[0].value + children[1].value - worst.value
            total_error += children[0].error + children[1].error - worst.error
            total_resabs += children[0].resabs + children[1].resabs - worst.resabs
            subdivisions += 1

        # 最終和はセル座標順に取る
        cells = sorted([item[2] for item in heap] + frozen, key=_Cell.key)
        value = mpmath.mpf(0)
        error = mpmath.mpf(0)
        for cell in cells:
            value += cell.value
            error += cell.error

        if not converged:
            logger.warning(
                f"2次元適応積分が収束しませんでした: 誤差 {mpmath.nstr(error, 5)}, "
                f"値 {mpmath.nstr(value, 10)}, 分割 {subdivisions}"
            )
        else:
            logger.debug(f"2次元適応積分: 分割 {subdivisions}, 評価 {evaluations}")
        return QuadratureOutcome(+value, +error, evaluations, subdivisions, converged)


@dataclass
class _Interval:
    lo: mpmath.mpf
    hi: mpmath.mpf
    depth: int
    value: mpmath.mpf = None
    error: mpmath.mpf = None
    resabs: mpmath.mpf = None


def adaptive_integrate_1d(
    f: Callable,
    a,
    b,
    ctx: Optional[PrecisionContext] = None,
    rel_tol=None,
) -> QuadratureOutcome:
    """
    1次元の大域適応積分（b = mpmath.inf で半無限区間）

    Args:
        f: 実数 -> 実数
        a, b: 積分区間
        ctx: 精度コンテキスト
        rel_tol: 相対許容誤差

    Returns:
        QuadratureOutcome
    """
    ctx = ctx or default_context()
    with ctx.workdps():
        rel_tol = _check_tolerance(rel_tol, ctx)
        floor = mpmath.mpf(10) ** (-ctx.working_digits + 8)
        eps = ctx.epsilon
        rule = gk_rule(ctx.rule_points, ctx.working_digits)
        a, b = to_mpf(a), to_mpf(b)
        if not a < b:
            raise DomainError(f"積分区間は a < b が必要です: [{a}, {b}]")

        if mpmath.isinf(b):
            lower = a

            def integrand(t):
                x, jacobian = map_semiinfinite(t, lower)
                return f(x) * jacobian

            lo, hi = mpmath.mpf(0), mpmath.mpf(1)
        else:
            integrand = f
            lo, hi = a, b

        serial = itertools.count()
        evaluations = 0

        def evaluate(interval: _Interval):
            interval.value, interval.error, interval.resabs = _gk_segment(
                integrand, interval.lo, interval.hi, rule, eps
            )
            return len(rule.nodes)

        root = _Interval(lo, hi, 0)
        evaluations += evaluate(root)
        heap = [(-root.error, next(serial), root)]
        frozen: List[_Interval] = []
        frozen_error = mpmath.mpf(0)
        total, total_error, total_resabs = root.value, root.error, root.resabs
        subdivisions = 0
        converged = False

        while True:
            tolerance = max(rel_tol * abs(total), floor * total_resabs)
            if total_error <= tolerance:
                converged = True
                break
            if not heap or frozen_error > tolerance or subdivisions >= ctx.max_subdivisions:
                break
            _, _, worst = heapq.heappop(heap)
            if worst.depth >= ctx.max_recursion:
                frozen.append(worst)
                frozen_error += worst.error
                continue
            middle = (worst.lo + worst.hi) / 2
            children = (
                _Interval(worst.lo, middle, worst.depth + 1),
                _Interval(middle, worst.hi, worst.depth + 1),
            )
            for child in children:
                evaluations += evaluate(child)
                heapq.heappush(heap, (-child.error, next(serial), child))
            total += children[0].value + children[1].value - worst.value
            total_error += children[0].error + children[1].error - worst.error
            total_resabs += children[0].resabs + children[1].resabs - worst.resabs
            subdivisions += 1

        intervals = sorted([item[2] for item in heap] + frozen, key=lambda iv: (iv.lo, iv.hi))
        value = mpmath.mpf(0)
        error = mpmath.mpf(0)
        for interval in intervals:
            value += interval.value
            error += interval.error

        if not converged:
            logger.warning(
                f"1次元適応積分が収束しませんでした: 誤差 {mpmath.nstr(error, 5)}, "
                f"値 {mpmath.nstr(value, 10)}"
            )
        return QuadratureOutcome(+value, +error, evaluations, subdivisions, converged)

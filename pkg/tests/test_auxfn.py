import mpmath
import numpy as np
import pytest

from auxfn import (
    AuxParams,
    JParams,
    MethodChoice,
    aux_g,
    aux_g_series,
    aux_j,
    evaluate_terms,
    g_integrand,
    g_q_reduce,
    g_reduced,
    g_shift_N2N3,
    g_shift_N4,
    j_boundary,
    j_integrand,
    j_reduced,
    j_shift,
    mulliken_A,
    mulliken_B,
)
from errors import DomainError, UnsupportedMethodError

# 表1の1行目（印刷は N2=1）: (μ+ν)^{-1}, N3=1, N4=3, q=1, p1=2, p2=12, p3=1.5
TABLE1_FIRST = AuxParams(0, 1, -1, 1, 3, "2", "12", "1.5")
# 漸化式の恒等式用（全ての指数が0以上）
SAMPLE = AuxParams(0, 1, 1, 1, 3, "2", "12", "1.5")
TABLE1_FIRST_VALUE = "-1.15343416955220862207849296482558325e-07"

RECURRENCE = MethodChoice("recurrence")
SERIES = MethodChoice("series")
ADAPTIVE = MethodChoice("adaptive")


def close(a, b, digits):
    return mpmath.almosteq(a, b, rel_eps=mpmath.mpf(10) ** (-digits), abs_eps=mpmath.mpf(10) ** (-digits - 8))


# ---------------------------------------------------------------------------
# パラメータの検証
# ---------------------------------------------------------------------------


def test_params_domain_checks():
    with pytest.raises(DomainError):
        AuxParams(3, 0, 1, 1, 3, 2, 12, 1)  # N4 <= N1
    with pytest.raises(DomainError):
        AuxParams(0, 0, 1, 1, 3, 2, 0, 1)  # p2 = 0
    with pytest.raises(DomainError):
        AuxParams(0, 0, 1, -1, 3, 2, 12, 1)  # N3 < 0
    with pytest.raises(DomainError):
        AuxParams(0, 0, 1, 1, "2.5", 2, 12, 1, variant=3)
    with pytest.raises(DomainError):
        AuxParams(0, 0, 1, 1, 3, 2, 12, 1, kind="R")
    with pytest.raises(DomainError):
        JParams(0, -1, 1, 1, 3, 2, 1)
    with pytest.raises(DomainError):
        MethodChoice("simpson")


def test_integrands_reject_points_outside_region(ctx):
    with pytest.raises(DomainError):
        g_integrand(TABLE1_FIRST, "0.5", 0, ctx)
    with pytest.raises(DomainError):
        j_integrand(JParams(1, 0, 1, 1, 3, 2, 1), "1.5", ctx)


# ---------------------------------------------------------------------------
# Mulliken 関数と簡約積分
# ---------------------------------------------------------------------------


@pytest.mark.parametrize("m, p", [(0, "2"), (3, "2"), (7, "0.3"), ("2.5", "1.7")])
def test_mulliken_A(ctx, m, p):
    with ctx.workdps():
        m_value, p_value = mpmath.mpf(m), mpmath.mpf(p)
        expected = mpmath.quad(lambda mu: mu**m_value * mpmath.exp(-p_value * mu), [1, mpmath.inf])
        assert close(mulliken_A(m, p, ctx), expected, 25)
    with pytest.raises(DomainError):
        mulliken_A(1, 0, ctx)


@pytest.mark.parametrize("m, p", [(0, "1.5"), (4, "1.5"), (3, "-9.6"), (12, "20"), (5, "0")])
def test_mulliken_B(ctx, m, p):
    with ctx.workdps():
        p_value = mpmath.mpf(p)
        expected = mpmath.quad(lambda nu: nu**m * mpmath.exp(-p_value * nu), [-1, 1])
        assert close(mulliken_B(m, p, ctx), expected, 25)


def test_reduced_g_matches_direct_quadrature(ctx):
    with ctx.workdps():
        expected = mpmath.quad(
            lambda mu, nu: mu * nu * (mu + nu) * (mu - nu) * mpmath.exp(-12 * mu - mpmath.mpf("1.5") * nu),
            [1, mpmath.inf],
            [-1, 1],
        )
        assert close(g_reduced(1, 1, 1, 12, "1.5", ctx), expected, 20)
        assert close(g_reduced(1, 1, 1, 12, "1.5", ctx, method="adaptive"), expected, 12)
    with pytest.raises(DomainError):
        g_reduced(0, 1, 1, 0, 1, ctx)


def test_reduced_j_matches_direct_quadrature(ctx):
    with ctx.workdps():
        expected = mpmath.quad(lambda nu: nu**2 * (1 + nu) ** 3 * (1 - nu) * mpmath.exp(-2 * nu), [-1, 1])
        assert close(j_reduced(2, 3, 1, 2, ctx), expected, 25)


# ---------------------------------------------------------------------------
# G の評価法どうしの一致
# ---------------------------------------------------------------------------


def test_recurrence_reproduces_table_value(ctx):
    # N2 < 0 なので N4 を上げる方向の和（Mulliken 和のみ、数値積分なし）になる
    outcome = aux_g(TABLE1_FIRST, RECURRENCE, ctx)
    assert outcome.converged
    assert outcome.subdivisions == 0
    assert 0 < outcome.evaluations < 250
    with ctx.workdps():
        assert close(outcome.value, mpmath.mpf(TABLE1_FIRST_VALUE), 14)


def test_series_reproduces_table_value(ctx):
    series = aux_g_series(TABLE1_FIRST, 250, ctx)
    assert series.converged
    assert not series.diverged
    assert series.terms_used < 250
    assert len(series.partial_sums) == series.terms_used
    with ctx.workdps():
        assert close(series.value, mpmath.mpf(TABLE1_FIRST_VALUE), 14)


def test_adaptive_reproduces_table_value(coarse_ctx):
    outcome = aux_g(TABLE1_FIRST, ADAPTIVE, coarse_ctx)
    assert outcome.converged
    with coarse_ctx.workdps():
        assert close(outcome.value, mpmath.mpf(TABLE1_FIRST_VALUE), 9)


def test_integral_definition_reproduces_table_value(coarse_ctx):
    # μ ∈ [1, ∞), ν ∈ [-1, 1] の定義をそのまま mpmath.quad で積分
    with coarse_ctx.workdps():
        value = mpmath.quad(
            lambda mu, nu: g_integrand(TABLE1_FIRST, mu, nu, coarse_ctx),
            [1, 2, mpmath.inf],
            [-1, 0, 1],
        )
        assert close(value, mpmath.mpf(TABLE1_FIRST_VALUE), 8)


def test_auto_matches_recurrence(ctx):
    auto = aux_g(TABLE1_FIRST, MethodChoice("auto"), ctx)
    with ctx.workdps():
        assert close(auto.value, aux_g(TABLE1_FIRST, RECURRENCE, ctx).value, 14)


def test_p_and_q_are_complementary(ctx):
    p_value = aux_g(SAMPLE, RECURRENCE, ctx).value
    q_value = aux_g(SAMPLE.with_(kind="Q"), RECURRENCE, ctx).value
    with ctx.workdps():
        assert close(p_value + q_value, g_reduced(1, 1, 1, 12, "1.5", ctx), 14)


@pytest.mark.parametrize("variant", [2, 3])
def test_other_variants_series_against_adaptive(coarse_ctx, variant):
    p = AuxParams(0, 0, 1, 2, 2, "1.5", "6", "1", variant=variant, kind="Q")
    series = aux_g(p, SERIES, coarse_ctx)
    adaptive = aux_g(p, ADAPTIVE, coarse_ctx)
    with coarse_ctx.workdps():
        assert close(series.value, adaptive.value, 8)


def test_recurrence_keeps_negative_exponent_whole(coarse_ctx):
    # クーロン積分の P 項と同じ形 (μ+ν)^{-1}・P[2, p1(μ+ν)]。p2 + p3 = 0 で上向きの和も減衰しない
    p = AuxParams(0, 0, -1, 0, 2, "1.5", "4", "-4")
    recurrence = aux_g(p, RECURRENCE, coarse_ctx)
    adaptive = aux_g(p, ADAPTIVE, coarse_ctx)
    with coarse_ctx.workdps():
        assert close(recurrence.value, adaptive.value, 8)


def test_recurrence_needs_integer_shape(ctx):
    with pytest.raises(UnsupportedMethodError):
        aux_g(AuxParams(0, 0, 1, 1, "2.5", 2, 12, "1.5"), RECURRENCE, ctx)


def _random_draws(count: int, seed: int):
    """漸化式と級数がどちらも Mulliken 和で閉じる範囲のパラメータ"""
    rng = np.random.default_rng(seed)
    draws = []
    for _ in range(count):
        N1 = int(rng.integers(0, 2))
        draws.append(
            AuxParams(
                N1,
                int(rng.integers(0, 3)),
                int(rng.integers(0, 3)),
                int(rng.integers(0, 3)),
                N1 + int(rng.integers(1, 4)),
                f"{rng.uniform(0.2, 1.5):.3f}",
                f"{rng.uniform(4, 8):.3f}",
                f"{rng.uniform(-1.5, 1.5):.3f}",
                variant=int(rng.integers(1, 3)),
                kind=str(rng.choice(["P", "Q"])),
            )
        )
    return draws


RANDOM_DRAWS = _random_draws(50, 20240617)


@pytest.mark.parametrize("p", RANDOM_DRAWS)
def test_random_draws_recurrence_series_and_complement(ctx, p):
    recurrence = aux_g(p, RECURRENCE, ctx)
    series = aux_g(p, SERIES, ctx)
    other = aux_g(p.with_(kind="Q" if p.kind == "P" else "P"), RECURRENCE, ctx)
    assert recurrence.converged
    assert series.converged
    with ctx.workdps():
        assert close(recurrence.value, series.value, 14)
        reduced = g_reduced(p.q, p.N2, p.N3, p.p2, p.p3, ctx)
        assert close(recurrence.value + other.value, p.prefactor(ctx) * reduced, 14)


@pytest.mark.parametrize("p", RANDOM_DRAWS[::10])
def test_random_draws_against_quadrature(coarse_ctx, p):
    adaptive = aux_g(p, ADAPTIVE, coarse_ctx)
    recurrence = aux_g(p, RECURRENCE, coarse_ctx)
    with coarse_ctx.workdps():
        assert close(adaptive.value, recurrence.value, 8)


@pytest.mark.parametrize("q", [0, 1, 2])
@pytest.mark.parametrize("kind", ["P", "Q"])
def test_variant2_mirrors_variant1(ctx, q, kind):
    # ν → -ν で (μ+ν) と (μ-ν) が入れ替わり、(μν)^q は (-1)^q 倍
    p = AuxParams(1, q, 2, 1, 3, "0.8", "5", "1.2", variant=2, kind=kind)
    mirrored = AuxParams(1, q, 1, 2, 3, "0.8", "5", "-1.2", variant=1, kind=kind)
    with ctx.workdps():
        expected = (-1) ** q * aux_g(mirrored, RECURRENCE, ctx).value
        assert close(aux_g(p, RECURRENCE, ctx).value, expected, 14)


# ---------------------------------------------------------------------------
# G の漸化式（級数で両辺を評価）
# ---------------------------------------------------------------------------

OTHER_VARIANT = AuxParams(0, 2, 1, 1, 3, "1.2", "6", "0.8")


@pytest.mark.parametrize("order", [1, 2])
def test_q_reduction_identity(ctx, order):
    p = SAMPLE.with_(q=2)
    lhs = aux_g(p, SERIES, ctx).value
    rhs = evaluate_terms(g_q_reduce(p, order, ctx), SERIES, ctx).value
    with ctx.workdps():
        assert close(lhs, rhs, 14)


@pytest.mark.parametrize("variant", [2, 3])
@pytest.mark.parametrize("order", [1, 2])
def test_q_reduction_identity_other_variants(ctx, variant, order):
    p = OTHER_VARIANT.with_(variant=variant)
    lhs = aux_g(p, SERIES, ctx).value
    rhs = evaluate_terms(g_q_reduce(p, order, ctx), SERIES, ctx).value
    with ctx.workdps():
        assert close(lhs, rhs, 14)


@pytest.mark.parametrize("direction", ["up", "down"])
@pytest.mark.parametrize("kind", ["P", "Q"])
def test_n4_shift_identity(ctx, direction, kind):
    p = SAMPLE.with_(kind=kind)
    lhs = aux_g(p, SERIES, ctx).value
    rhs = evaluate_terms(g_shift_N4(p, direction, ctx), SERIES, ctx).value
    with ctx.workdps():
        assert close(lhs, rhs, 14)


@pytest.mark.parametrize("direction", ["up", "down"])
def test_n4_shift_identity_variant2(ctx, direction):
    p = OTHER_VARIANT.with_(variant=2, kind="Q")
    lhs = aux_g(p, SERIES, ctx).value
    rhs = evaluate_terms(g_shift_N4(p, direction, ctx), SERIES, ctx).value
    with ctx.workdps():
        assert close(lhs, rhs, 14)


@pytest.mark.parametrize("direction", ["up", "down"])
def test_n4_shift_identity_variant3(coarse_ctx, direction):
    # 補正項は e^{-p1μν} を含む簡約 G（適応積分）
    p = OTHER_VARIANT.with_(variant=3, q=1)
    lhs = aux_g(p, SERIES, coarse_ctx).value
    rhs = evaluate_terms(g_shift_N4(p, direction, coarse_ctx), SERIES, coarse_ctx).value
    with coarse_ctx.workdps():
        assert close(lhs, rhs, 8)


def test_n4_shift_down_needs_room(ctx):
    with pytest.raises(DomainError):
        g_shift_N4(AuxParams(0, 0, 1, 1, 1, 2, 12, 1), "down", ctx)
    with pytest.raises(DomainError):
        g_shift_N4(SAMPLE, "sideways", ctx)


@pytest.mark.parametrize("q", [0, 1, 2])
@pytest.mark.parametrize("variant", [1, 2])
@pytest.mark.parametrize("kind", ["P", "Q"])
def test_n2n3_integration_by_parts(ctx, q, variant, kind):
    p = AuxParams(0, q, 2, 1, 3, "2", "12", "1.5", variant=variant, kind=kind)
    lhs = aux_g(p, SERIES, ctx).value
    rhs = evaluate_terms(g_shift_N2N3(p, ctx), SERIES, ctx).value
    with ctx.workdps():
        assert close(lhs, rhs, 14)


def test_n2n3_q_term_appears_only_for_positive_q(ctx):
    with_q = {term.target for term in g_shift_N2N3(SAMPLE.with_(N2=2), ctx)}
    assert any(isinstance(t, AuxParams) and t.q == 0 and t.N2 == 3 for t in with_q)
    assert any(isinstance(t, AuxParams) and t.q == 0 and t.N3 == 2 for t in with_q)
    without_q = g_shift_N2N3(SAMPLE.with_(q=0, N2=2), ctx)
    assert all(t.target.q == 0 for t in without_q if isinstance(t.target, AuxParams))


@pytest.mark.parametrize("q", [0, 1])
def test_n2n3_integration_by_parts_variant3(coarse_ctx, q):
    p = AuxParams(0, q, 2, 1, 3, "1.2", "6", "0.8", variant=3)
    lhs = aux_g(p, SERIES, coarse_ctx).value
    rhs = evaluate_terms(g_shift_N2N3(p, coarse_ctx), SERIES, coarse_ctx).value
    with coarse_ctx.workdps():
        assert close(lhs, rhs, 8)


def test_n2n3_needs_nonnegative_N2(ctx):
    with pytest.raises(DomainError):
        g_shift_N2N3(TABLE1_FIRST, ctx)


# ---------------------------------------------------------------------------
# J
# ---------------------------------------------------------------------------

J_SAMPLE = JParams(1, 1, 1, 1, 4, "2", "1.5")


@pytest.mark.parametrize("variant", [1, 2, 3])
def test_j_methods_agree(ctx, variant):
    p = J_SAMPLE.with_(variant=variant)
    adaptive = aux_j(p, ADAPTIVE, ctx)
    assert adaptive.converged
    for method in (RECURRENCE, SERIES):
        with ctx.workdps():
            assert close(aux_j(p, method, ctx).value, adaptive.value, 13)


def test_j_prefactor_and_definition(ctx):
    with ctx.workdps():
        expected = 2 * mpmath.quad(lambda nu: j_integrand(J_SAMPLE, nu, ctx), [-1, 1])
        assert close(aux_j(J_SAMPLE, ADAPTIVE, ctx).value, expected, 14)


@pytest.mark.parametrize("axis", ["q", "N4-up", "N4-down"])
@pytest.mark.parametrize("kind", ["P", "Q"])
def test_j_shift_identities(ctx, axis, kind):
    p = J_SAMPLE.with_(kind=kind)
    lhs = aux_j(p, ADAPTIVE, ctx).value
    rhs = evaluate_terms(j_shift(p, axis, ctx), ADAPTIVE, ctx).value
    with ctx.workdps():
        assert close(lhs, rhs, 14)


@pytest.mark.parametrize("q", [0, 1, 2])
@pytest.mark.parametrize("variant", [1, 2, 3])
def test_j_integration_by_parts(ctx, q, variant):
    p = JParams(1, q, 2, 1, 4, "2", "1.5", variant=variant)
    lhs = aux_j(p, ADAPTIVE, ctx).value
    rhs = evaluate_terms(j_shift(p, "N2N3", ctx), ADAPTIVE, ctx).value
    with ctx.workdps():
        assert close(lhs, rhs, 14)


@pytest.mark.parametrize("q", [0, 1])
def test_j_variant2_mirrors_variant1(ctx, q):
    p = JParams(1, q, 2, 1, 4, "2", "1.5", variant=2)
    mirrored = JParams(1, q, 1, 2, 4, "2", "-1.5", variant=1)
    with ctx.workdps():
        expected = (-1) ** q * aux_j(mirrored, ADAPTIVE, ctx).value
        assert close(aux_j(p, ADAPTIVE, ctx).value, expected, 14)


def test_j_boundary_closed_forms(ctx):
    with ctx.workdps():
        p3 = mpmath.mpf("1.5")
        # ν = 1 側だけ残る: P[3, 2·p1] e^{-p3}
        upper = AuxParams(0, 0, 0, 0, 3, "2", "12", "1.5")
        expected = (1 - 13 * mpmath.exp(-4)) * mpmath.exp(-p3)
        assert close(j_boundary(upper, ctx), expected, 25)
        # ν = -1 側だけ残る: -2^{N3}·Q[3, 0]·e^{p3}
        lower = AuxParams(0, 0, 0, 1, 3, "2", "12", "1.5", kind="Q")
        assert close(j_boundary(lower, ctx), -2 * mpmath.exp(p3), 25)
        # variant 3 は負の引数への接続 P[3, -2] = 1 - e^2(1 - 2 + 2)
        signed = lower.with_(kind="P", variant=3)
        assert close(j_boundary(signed, ctx), -2 * (1 - mpmath.exp(2)) * mpmath.exp(p3), 25)

import mpmath
import pytest

from errors import DomainError
from precision import (
    PrecisionContext,
    binomial_F,
    gamma,
    generalized_binomial,
    inverse_pochhammer,
    pochhammer,
    reg_gamma,
    reg_gamma_signed,
    to_mpf,
)


def close(a, b, digits=14):
    return mpmath.almosteq(a, b, rel_eps=mpmath.mpf(10) ** (-digits))


def test_context_rejects_too_few_guard_digits():
    with pytest.raises(DomainError):
        PrecisionContext(working_digits=20, target_digits=15)


def test_context_series_cutoff_follows_working_digits():
    ctx = PrecisionContext(working_digits=40, target_digits=20)
    assert ctx.series_rel_cutoff == pytest.approx(1e-40)
    assert ctx.with_digits(60).working_digits == 60


def test_to_mpf_keeps_decimal_strings_exact(ctx):
    with ctx.workdps():
        assert to_mpf("2.3") * 10 == 23
        assert to_mpf("1 234") == 1234


def test_gamma_domain(ctx):
    assert close(gamma(5, ctx), 24)
    with pytest.raises(DomainError):
        gamma(0, ctx)


@pytest.mark.parametrize("a, x", [("3", "0.5"), ("3", "7.25"), ("2.5", "1.5"), ("12", "30")])
def test_reg_gamma_complementary(ctx, a, x):
    with ctx.workdps():
        total = reg_gamma("P", a, x, ctx) + reg_gamma("Q", a, x, ctx)
        assert close(total, 1, 25)


def test_reg_gamma_integer_shape_finite_sum(ctx):
    with ctx.workdps():
        x = to_mpf("2.5")
        expected = mpmath.exp(-x) * (1 + x + x**2 / 2)
        assert close(reg_gamma("Q", 3, x, ctx), expected, 25)
        assert reg_gamma("P", 3, 0, ctx) == 0
        assert reg_gamma("Q", 3, 0, ctx) == 1


def test_reg_gamma_negative_argument(ctx):
    with ctx.workdps():
        x = to_mpf("-1.5")
        expected = mpmath.exp(-x) * (1 + x)
        assert close(reg_gamma_signed("Q", 2, x, ctx), expected, 25)
        assert close(reg_gamma_signed("P", 2, x, ctx), 1 - expected, 25)
    with pytest.raises(DomainError):
        reg_gamma("P", 2, "-1", ctx)
    with pytest.raises(DomainError):
        reg_gamma_signed("P", "2.5", "-1", ctx)


def test_pochhammer_negative_order(ctx):
    with ctx.workdps():
        assert pochhammer(3, 2, ctx) == 12
        assert pochhammer(5, 0, ctx) == 1
        # (a)_{-2} = 1/((a-1)(a-2))
        assert close(pochhammer(5, -2, ctx), mpmath.mpf(1) / 12)
        assert inverse_pochhammer(5, -2, ctx) == 12
    with pytest.raises(DomainError):
        inverse_pochhammer(0, 2, ctx)


def test_generalized_binomial_negative_upper(ctx):
    with ctx.workdps():
        assert generalized_binomial(-2, 3, ctx) == -4
        assert generalized_binomial(5, -1, ctx) == 0
        assert close(generalized_binomial("0.5", 2, ctx), mpmath.mpf(-1) / 8)


def test_binomial_F_matches_polynomial_product(ctx):
    # (μ+ν)^2 (μ-ν)^1 = μ^3 + μ^2ν - μν^2 - ν^3
    with ctx.workdps():
        assert [binomial_F(m, m, 2, 1, ctx) for m in range(4)] == [1, 1, -1, -1]
    with pytest.raises(DomainError):
        binomial_F(1, -1, 2, 1, ctx)

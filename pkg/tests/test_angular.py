from fractions import Fraction

import mpmath
import pytest

from angular import (
    assoc_legendre,
    cos_theta_a,
    cos_theta_b,
    g_expansion,
    gaunt_coeff,
    legendre_norm,
    product_expansion,
    real_harmonic,
)
from errors import DomainError


def close(a, b, digits=20):
    return mpmath.almosteq(a, b, rel_eps=mpmath.mpf(10) ** (-digits), abs_eps=mpmath.mpf(10) ** (-digits))


def test_assoc_legendre_low_orders(ctx):
    with ctx.workdps():
        x = mpmath.mpf("0.3")
        assert close(assoc_legendre(2, 0, x, ctx), (3 * x**2 - 1) / 2)
        assert close(assoc_legendre(2, 1, x, ctx), 3 * x * mpmath.sqrt(1 - x**2))
        assert close(assoc_legendre(2, 2, x, ctx), 3 * (1 - x**2))
    with pytest.raises(DomainError):
        assoc_legendre(1, 2, 0.1, ctx)


def test_legendre_norm_normalizes(ctx):
    with ctx.workdps():
        for l, m in [(0, 0), (2, 1), (3, 3)]:
            norm = legendre_norm(l, m, ctx)
            integral = mpmath.quad(lambda x: (norm * assoc_legendre(l, m, x, ctx)) ** 2, [-1, 1])
            assert close(integral, 1)


def _triple_integral(L, M, l1, m1, l2, m2, ctx):
    def bar(l, m, x):
        return legendre_norm(l, m, ctx) * assoc_legendre(l, m, x, ctx)

    integral = mpmath.quad(lambda x: bar(l1, m1, x) * bar(l2, m2, x) * bar(L, M, x), [-1, 1])
    return mpmath.sqrt(mpmath.mpf(2) / (2 * L + 1)) * integral


@pytest.mark.parametrize(
    "L, M, l1, m1, l2, m2",
    [(0, 0, 0, 0, 0, 0), (2, 0, 1, 0, 1, 0), (2, 2, 1, 1, 1, 1), (3, 1, 2, 1, 1, 0), (2, 1, 2, 2, 1, 1), (1, 1, 2, 2, 1, 1)],
)
def test_gaunt_matches_triple_integral(ctx, L, M, l1, m1, l2, m2):
    with ctx.workdps():
        assert close(gaunt_coeff(L, M, l1, m1, l2, m2, ctx), _triple_integral(L, M, l1, m1, l2, m2, ctx))


def test_gaunt_selection_rules(ctx):
    assert gaunt_coeff(1, 0, 1, 0, 1, 0, ctx) == 0  # パリティ
    assert gaunt_coeff(4, 0, 1, 0, 1, 0, ctx) == 0  # 三角条件
    assert gaunt_coeff(2, 1, 1, 1, 1, 1, ctx) == 0  # |M| が合わない
    with ctx.workdps():
        assert gaunt_coeff(3, 1, 2, 1, 1, 0, ctx) == gaunt_coeff(3, 1, 1, 0, 2, 1, ctx)


@pytest.mark.parametrize("l1, m1, l2, m2", [(1, 1, 1, 1), (1, -1, 2, 1), (2, 2, 1, -1), (2, 0, 2, 0), (2, -2, 2, -1)])
def test_product_expansion_reconstructs_product(ctx, l1, m1, l2, m2):
    theta, phi = "0.7", "0.4"
    with ctx.workdps():
        product = real_harmonic(l1, m1, theta, phi, ctx) * real_harmonic(l2, m2, theta, phi, ctx)
        expansion = mpmath.fsum(
            mpmath.sqrt(mpmath.mpf(2 * L + 1) / (4 * mpmath.pi)) * coefficient * real_harmonic(L, M, theta, phi, ctx)
            for L, M, coefficient in product_expansion(l1, m1, l2, m2, ctx)
        )
        assert close(product, expansion)


@pytest.mark.parametrize("L1, L2, lam", [(0, 0, 0), (1, 1, 0), (1, 1, 1), (2, 1, 1), (2, 2, 2), (3, 2, 1)])
def test_g_expansion_reconstructs_legendre_product(ctx, L1, L2, lam):
    expansion = g_expansion(L1, L2, lam)
    with ctx.workdps():
        for mu, nu in [("1.7", "0.3"), ("3.25", "-0.6"), ("1.05", "0.9")]:
            mu, nu = mpmath.mpf(mu), mpmath.mpf(nu)
            direct = assoc_legendre(L1, lam, cos_theta_a(mu, nu), ctx) * assoc_legendre(
                L2, lam, cos_theta_b(mu, nu), ctx
            )
            assert close(expansion.evaluate(mu, nu, ctx), direct)


def test_g_expansion_lowest_order():
    expansion = g_expansion(0, 0, 0)
    assert expansion.items() == [((0, 0, 0), Fraction(1))]
    with pytest.raises(DomainError):
        g_expansion(1, 2, 2)

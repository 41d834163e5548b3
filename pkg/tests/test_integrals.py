import mpmath
import pytest

from auxfn import AuxParams, MethodChoice
from errors import DomainError, UnsupportedMethodError
from integrals import (
    Orbital,
    TwoElectronSpec,
    coulomb_integral,
    coulomb_oracle,
    coulomb_plan,
    hybrid_integral,
    hybrid_oracle,
    hybrid_plan,
    nsto_norm,
    pair_norm,
    pair_params,
    radial_potential_f,
    two_electron_integral,
)


def close(a, b, digits):
    return mpmath.almosteq(a, b, rel_eps=mpmath.mpf(10) ** (-digits))


def s_pair(zeta="1"):
    return (Orbital(1, 0, 0, zeta), Orbital(1, 0, 0, zeta))


def coulomb_1s(R, zeta):
    """同じ指数の 1s 電荷分布どうしのクーロン積分（閉じた式）"""
    rho = zeta * R
    return (1 - (1 + rho * 11 / 8 + rho**2 * 3 / 4 + rho**3 / 6) * mpmath.exp(-2 * rho)) / R


# ---------------------------------------------------------------------------
# 規格化・動径関数
# ---------------------------------------------------------------------------


def test_nsto_norm(ctx):
    with ctx.workdps():
        assert close(nsto_norm(1, 1, ctx), 2, 25)
        assert close(nsto_norm(2, "0.5", ctx), mpmath.sqrt(mpmath.mpf(1) / 24), 25)
    with pytest.raises(DomainError):
        nsto_norm(0, 1, ctx)


def test_pair_norm_factorizes(ctx):
    zeta, zeta_prime = mpmath.mpf("1.3"), mpmath.mpf("0.7")
    with ctx.workdps():
        params = pair_params(Orbital(2, 1, 0, zeta), Orbital(3, 1, 0, zeta_prime), 2, ctx)
        expected = nsto_norm(2, zeta, ctx) * nsto_norm(3, zeta_prime, ctx) / (zeta + zeta_prime) ** 6
        assert close(pair_norm(1, params.t, 2, 3, ctx), expected, 25)
        assert close(params.p, 2, 25)
        assert params.N == 5
    with pytest.raises(DomainError):
        pair_norm(1, 1, 1, 1, ctx)


def test_radial_potential_closed_form(ctx):
    # 1s の組: f(2, 0, x) = (2/x)(1 - e^{-x}(1 + x/2))
    with ctx.workdps():
        x = mpmath.mpf("1.7")
        expected = 2 / x * (1 - mpmath.exp(-x) * (1 + x / 2))
        assert close(radial_potential_f(2, 0, x, ctx), expected, 25)


@pytest.mark.parametrize("N1, L1", [(2, 0), (4, 2), (6, 1)])
def test_radial_potential_far_field(ctx, N1, L1):
    # 遠方では点多極子 Γ(N1+L1+1)/x^{L1+1}
    with ctx.workdps():
        x = mpmath.mpf(200)
        expected = mpmath.gamma(N1 + L1 + 1) / x ** (L1 + 1)
        assert close(radial_potential_f(N1, L1, x, ctx), expected, 25)
    with pytest.raises(DomainError):
        radial_potential_f(2, 2, 1, ctx)


# ---------------------------------------------------------------------------
# 指定の検証
# ---------------------------------------------------------------------------


def test_spec_validation():
    with pytest.raises(DomainError):
        Orbital(1, 1, 2, 1)
    with pytest.raises(DomainError):
        Orbital(1, 0, 0, 0)
    with pytest.raises(DomainError):
        TwoElectronSpec(s_pair(), s_pair(), 0)
    with pytest.raises(DomainError):
        TwoElectronSpec(s_pair(), s_pair(), 2, kind="exchange")
    with pytest.raises(UnsupportedMethodError):
        TwoElectronSpec(s_pair(), s_pair(), 2, lined_up=False)


def test_plan_rejects_wrong_kind(ctx):
    spec = TwoElectronSpec(s_pair(), s_pair(), 2, kind="hybrid")
    with pytest.raises(DomainError):
        coulomb_plan(spec, ctx)
    with pytest.raises(DomainError):
        hybrid_plan(TwoElectronSpec(s_pair(), s_pair(), 2), ctx)


def test_coulomb_plan_for_s_orbitals(ctx):
    plan = coulomb_plan(TwoElectronSpec(s_pair(), s_pair(), 2), ctx)
    with ctx.workdps():
        targets = {term.target.resolved() for term in plan.terms}
        assert targets == {
            AuxParams(0, 0, 0, 1, 3, 2, 2, -2, 1, "P").resolved(),
            AuxParams(1, 0, 1, 1, 3, 2, 2, -2, 1, "Q").resolved(),
        }


# ---------------------------------------------------------------------------
# 積分値
# ---------------------------------------------------------------------------


@pytest.mark.parametrize(
    "R, zeta",
    [
        ("0.5", "1"),
        ("1", "1"),
        ("1.4", "1.24"),
        ("2", "0.7"),
        ("2.5", "1.5"),
        ("3", "2"),
        ("4", "0.9"),
        ("5", "1.3"),
        ("6", "0.8"),
        ("7.5", "1.2"),
    ],
)
def test_coulomb_s_orbitals_closed_form(ctx, R, zeta):
    spec = TwoElectronSpec(s_pair(zeta), s_pair(zeta), R)
    outcome = coulomb_integral(spec, MethodChoice("auto"), ctx)
    with ctx.workdps():
        assert close(outcome.value, coulomb_1s(mpmath.mpf(R), mpmath.mpf(zeta)), 15)


def test_coulomb_adaptive_and_oracle(coarse_ctx):
    spec = TwoElectronSpec(s_pair(), s_pair(), 2)
    with coarse_ctx.workdps():
        expected = coulomb_1s(mpmath.mpf(2), mpmath.mpf(1))
        assert close(coulomb_integral(spec, MethodChoice("adaptive"), coarse_ctx).value, expected, 8)
        assert close(coulomb_oracle(spec, coarse_ctx).value, expected, 8)


def test_coulomb_point_charge_limit(ctx):
    spec = TwoElectronSpec(s_pair("2"), s_pair("2"), 20)
    with ctx.workdps():
        assert close(two_electron_integral(spec, MethodChoice("recurrence"), ctx).value, mpmath.mpf(1) / 20, 14)


def test_hybrid_s_orbitals_against_oracle(coarse_ctx):
    spec = TwoElectronSpec(s_pair(), (Orbital(1, 0, 0, 1), Orbital(1, 0, 0, "1.2")), 2, kind="hybrid")
    integral = hybrid_integral(spec, MethodChoice("auto"), coarse_ctx)
    oracle = hybrid_oracle(spec, coarse_ctx)
    with coarse_ctx.workdps():
        assert close(integral.value, oracle.value, 8)


@pytest.mark.slow
def test_coulomb_exchange_of_centres(coarse_ctx):
    # m = 0 の分布は中心を入れ替えても同じ値
    p_pair = (Orbital(2, 1, 0, "1.2"), Orbital(2, 1, 0, "1.2"))
    forward = coulomb_integral(TwoElectronSpec(s_pair(), p_pair, 2), MethodChoice("auto"), coarse_ctx)
    backward = coulomb_integral(TwoElectronSpec(p_pair, s_pair(), 2), MethodChoice("auto"), coarse_ctx)
    with coarse_ctx.workdps():
        assert close(forward.value, backward.value, 8)


@pytest.mark.slow
@pytest.mark.parametrize(
    "pair1, pair2",
    [
        ((Orbital(2, 1, 1, 1), Orbital(2, 1, 1, 1)), (Orbital(1, 0, 0, "1.5"), Orbital(2, 1, 0, "1.5"))),
        ((Orbital(2, 1, 0, 1), Orbital(1, 0, 0, 1)), (Orbital(2, 1, -1, "0.9"), Orbital(2, 1, -1, "0.9"))),
    ],
)
def test_coulomb_plan_against_oracle(coarse_ctx, pair1, pair2):
    spec = TwoElectronSpec(pair1, pair2, "1.5")
    integral = coulomb_integral(spec, MethodChoice("auto"), coarse_ctx)
    oracle = coulomb_oracle(spec, coarse_ctx)
    with coarse_ctx.workdps():
        assert close(integral.value, oracle.value, 8)

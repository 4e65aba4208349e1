import math

import numpy as np
import pytest
from scipy.linalg import solve_discrete_are

from qce_lqr.converse import (
    CChoiceViolated,
    RhoOutOfRange,
    bellman_residual,
    bits_lower_bound,
    build_hard_instance,
    comm_budget_bound,
    cube_halfwidth,
    default_c,
    inflation_factors,
    regret_identity_check,
    verify_fixed_point,
)
from qce_lqr.control_math import spectral_radius


def test_scalar_instance_hand_values():
    inst = build_hard_instance(0.3, 1, 1, 1.0, 2.0)
    phi = math.sqrt(0.91 / 2)
    assert inst.Phi_K[0, 0] == pytest.approx(phi, rel=1e-12)
    assert inst.Phi_K[0, 0] == pytest.approx(0.67454, abs=1e-5)
    # B_K = -K / (c * phi), A_K = phi - B_K K
    assert inst.B_K[0, 0] == pytest.approx(-0.3 / (2 * phi), rel=1e-12)
    assert inst.B_K[0, 0] == pytest.approx(-0.22239, abs=5e-5)
    assert inst.A_K[0, 0] == pytest.approx(0.74126, abs=5e-5)
    gap, jerr = verify_fixed_point(inst)
    assert gap <= 1e-8 and jerr <= 1e-8


def test_zero_gain_instance():
    inst = build_hard_instance(0.0, 1, 1, 1.0, 2.0)
    assert inst.M_K[0, 0] == 1.0
    assert inst.Phi_K[0, 0] == pytest.approx(math.sqrt(0.5))
    assert inst.B_K[0, 0] == 0.0
    assert inst.A_K[0, 0] == pytest.approx(math.sqrt(0.5))
    gap, _ = verify_fixed_point(inst)
    assert gap == 0.0


@pytest.mark.parametrize("dx, du", [(1, 1), (2, 1), (2, 2)])
def test_random_instances_against_scipy(dx, du, rng):
    a = cube_halfwidth(0.5, dx, du)
    c = default_c(0.5, np.eye(dx), np.eye(du))
    for _ in range(30):
        inst = build_hard_instance(rng.uniform(-a, a, (du, dx)), np.eye(dx), np.eye(du), 1.0, c)
        assert max(inst.invariant_errors().values()) <= 1e-10
        assert np.linalg.eigvalsh(inst.M_K).min() > 0
        assert spectral_radius(inst.Phi_K) <= math.sqrt((c - 1) / c) + 1e-12
        P = solve_discrete_are(inst.A_K, inst.B_K, np.eye(dx), np.eye(du))
        assert np.allclose(P, inst.P, rtol=1e-8)


def test_c_choice_checked():
    with pytest.raises(CChoiceViolated):
        build_hard_instance(1.0, 1, 1, 1.0, 1.5)


def test_bellman_minimizer_and_origin(rng):
    inst = build_hard_instance([[0.2, -0.1]], np.eye(2), np.eye(1), 1.3, 1.2)
    assert bellman_residual(inst, np.zeros(2), np.zeros(1)) == 0.0
    for _ in range(100):
        x = rng.normal(size=2) * 5
        assert abs(bellman_residual(inst, x, inst.K @ x)) <= 1e-9 * (1 + x @ x)


def test_regret_identity_optimal_policy():
    inst = build_hard_instance(0.3, 1, 1, 1.0, 2.0)
    rep = regret_identity_check(inst, inst.K, 200, 500, 1)
    assert rep.excess_mean == 0.0
    assert rep.agrees


def test_regret_identity_noise_free_exact():
    inst = build_hard_instance(0.3, 1, 1, 1e-300, 2.0)
    rep = regret_identity_check(inst, lambda X: 0.1 * X + 0.5, 50, 3, 0)
    # deterministic: no spread across trials, both sides equal to rounding
    assert rep.excess_se == 0.0
    assert rep.diff == pytest.approx(0.0, abs=1e-9 * (1 + abs(rep.rhs_mean)))


def _bound_by_hand(alpha, T, dx, du, r, C1, c, sigma_w=1.0):
    m = dx * du
    c0 = sigma_w**2
    J = sigma_w**2 * c * dx
    Cest = 5 * c / c0 * (C1 + c * J)
    C = 1 + m / 2 * math.log2(2 * math.pi * math.e * Cest / m) - m * math.log2(2 * r / math.sqrt(m))
    return m * (1 - alpha) / 2 * math.log2(T) - C, Cest, C


def test_bits_lower_bound_dual_path():
    rep = bits_lower_bound(0.5, 2**20, 1, 1, 0.5, C1=1.0, c=1.3)
    want, cest, C = _bound_by_hand(0.5, 2**20, 1, 1, 0.5, 1.0, 1.3)
    assert rep.C_est == pytest.approx(cest, rel=1e-14)
    assert rep.constant_C == pytest.approx(C, rel=1e-14)
    assert rep.bits_lower == pytest.approx(want, rel=1e-12, abs=1e-12)
    assert rep.coefficient == 0.25


def test_bits_lower_bound_monotone():
    a = bits_lower_bound(0.5, 2**10, 2, 1, 0.5)
    b = bits_lower_bound(0.5, 2**11, 2, 1, 0.5)
    assert b.bits_lower - a.bits_lower == pytest.approx(a.coefficient)
    c = bits_lower_bound(0.7, 2**11, 2, 1, 0.5)
    assert c.bits_lower <= b.bits_lower
    with pytest.raises(ValueError):
        bits_lower_bound(1.0, 2**11, 2, 1, 0.5)
    with pytest.raises(CChoiceViolated):
        bits_lower_bound(0.5, 2**11, 1, 1, 0.5, c=1.1)


def test_inflation_factors_half():
    f = inflation_factors(0.5)
    assert f["beta"] == pytest.approx(0.70711, abs=1e-5)
    assert f["C_rho"] == pytest.approx(3.41421, abs=1e-5)
    assert f["m_inf"] == pytest.approx(4.41421, abs=1e-5)
    assert f["M_rho"] == 5 and f["b_rho"] == 5
    ratio = ((1 + math.sqrt(2)) / (1 - 0.5 * math.sqrt(2))) ** 2 / ((1 + 2**0.25) / (1 - 0.5 * 2**0.25)) ** 2 * 1.0835**2
    assert f["Q_fast"] / f["Q_slow"] == pytest.approx(ratio, rel=1e-12)
    with pytest.raises(RhoOutOfRange):
        inflation_factors(0.71)


def test_comm_budget():
    assert comm_budget_bound(2, 0.5, 2**10) == pytest.approx((2 * math.log2(5) + 5) * 10)
    assert comm_budget_bound(2, 0.5, 2**10) == pytest.approx(96.4, abs=0.05)
    d = comm_budget_bound(2, 0.5, 2**11) - comm_budget_bound(2, 0.5, 2**10)
    assert d == pytest.approx(2 * math.log2(5) + 5)
    # the codebook term falls with rho while the multiplier term b_rho rises
    rhos = [0.1, 0.2, 0.3, 0.5, 0.7]
    codebook_part = [comm_budget_bound(2, r, 2) - inflation_factors(r)["b_rho"] for r in rhos]
    assert all(a > b for a, b in zip(codebook_part, codebook_part[1:]))
    assert [inflation_factors(r)["b_rho"] for r in rhos] == [3, 3, 3, 5, 13]

"""Closed forms: rank-1 propagator, error/work laws, flip rates."""

import math

import numpy as np
import pytest
from scipy.special import i0

from spinosc import analytic
from spinosc.analytic import (
    Rank1Block,
    UnsupportedRegimeError,
    alpha_trajectory,
    assemble_blocks,
    b0_operator,
    blocks_from_superposition,
    coherence_envelope,
    epsilon_finite_t,
    epsilon_zero_t,
    min_work,
    phi_factor,
    propagate_rank1,
    propagate_state,
    tunneling_rate_correlation,
    tunneling_rate_finite_t,
    tunneling_rate_zero_t,
    weyl_phase_average_diagonal,
)
from spinosc.fock import FockRep, coherent_vector, trace_distance
from spinosc.model import SosParams, derive_rates, dressed_lowering, osc_op, spin_op, PAULI_3


def make_params(**kw):
    base = dict(omega0=1.0, D=1.0, T=0.0, g_o_at_omega0=1.0, g_o_at_0=0.25, g_3_at_0=0.0, g_1_at_0=1.0)
    base.update(kw)
    return SosParams(**base)


RATES = derive_rates(make_params())


def test_alpha_trajectory_endpoints():
    a0 = 0.3 - 0.2j
    assert alpha_trajectory(-1, a0, 0.0, RATES) == pytest.approx(a0, abs=1e-15)
    late = alpha_trajectory(-1, a0, 50.0 / RATES.gamma_net, RATES)
    assert abs(late - (-1.0)) < 1e-8
    late = alpha_trajectory(+1, a0, 50.0 / RATES.gamma_net, RATES)
    assert abs(late - (+1.0)) < 1e-8


def test_phi_vanishes_on_diagonal_blocks():
    rng = np.random.default_rng(5)
    for _ in range(10):
        alpha = rng.uniform(-1, 1) + 1j * rng.uniform(-1, 1)
        mu = int(rng.choice([-1, 1]))
        blk = Rank1Block(mu, mu, alpha, alpha, 1.0)
        for t in (0.0, 0.3, 2.0, 10.0):
            assert abs(phi_factor(blk, t, RATES)) < 1e-14


def test_phi_cross_spin_saturation():
    # mu=-1, nu=+1, beta=alpha real: Phi(infinity) -> -2 D^2
    blk = Rank1Block(-1, +1, 0.4, 0.4, 1.0)
    val = phi_factor(blk, 60.0 / RATES.gamma_net, RATES)
    assert val.real == pytest.approx(-2.0 * RATES.D**2, abs=1e-10)
    assert abs(math.exp(val.real) - math.exp(-2.0 * RATES.D**2)) < 1e-10


def test_phi_same_spin_magnitude_matches_cat_law():
    # |e^Phi| = exp{-(1 - e^{-gamma t}) |alpha-beta|^2 / 2} for same-spin dyads
    rng = np.random.default_rng(8)
    for _ in range(10):
        alpha = rng.uniform(-1, 1) + 1j * rng.uniform(-1, 1)
        beta = rng.uniform(-1, 1) + 1j * rng.uniform(-1, 1)
        blk = Rank1Block(-1, -1, alpha, beta, 1.0)
        for t in (0.1, 1.0, 4.0):
            env = abs(np.exp(phi_factor(blk, t, RATES)))
            target = math.exp(-0.5 * (1.0 - math.exp(-RATES.gamma_net * t)) * abs(alpha - beta) ** 2)
            assert env == pytest.approx(target, rel=1e-12)


def test_propagator_rejects_finite_temperature():
    rates_t = derive_rates(make_params(T=1.0))
    blk = Rank1Block(1, 1, 0.0, 0.0, 1.0)
    with pytest.raises(UnsupportedRegimeError):
        propagate_rank1(blk, 1.0, rates_t)


def test_propagator_hermitian_pairing():
    rng = np.random.default_rng(2)
    for _ in range(8):
        blk = Rank1Block(
            int(rng.choice([-1, 1])),
            int(rng.choice([-1, 1])),
            rng.uniform(-1, 1) + 1j * rng.uniform(-1, 1),
            rng.uniform(-1, 1) + 1j * rng.uniform(-1, 1),
            rng.uniform(-1, 1) + 1j * rng.uniform(-1, 1),
        )
        t = rng.uniform(0, 4)
        direct = propagate_rank1(blk.conjugate(), t, RATES)
        paired = propagate_rank1(blk, t, RATES).conjugate()
        assert direct.mu == paired.mu and direct.nu == paired.nu
        assert direct.alpha == pytest.approx(paired.alpha, abs=1e-12)
        assert direct.beta == pytest.approx(paired.beta, abs=1e-12)
        assert direct.amp == pytest.approx(paired.amp, abs=1e-12)


def test_stationary_mixture_is_fixed_point():
    rep = FockRep(40)
    p = make_params()
    blocks = [
        Rank1Block(-1, -1, -p.D, -p.D, 0.3),
        Rank1Block(+1, +1, +p.D, +p.D, 0.7),
    ]
    rho0 = assemble_blocks(blocks, rep)
    rho_t = propagate_state(blocks, 3.0 / RATES.gamma, RATES, rep)
    assert trace_distance(rho0, rho_t) < 1e-8


def test_asymptotic_weights_follow_initial_populations():
    rep = FockRep(40)
    blocks = blocks_from_superposition([(0.6, -1, 0.2), (0.8, +1, 0.2)])
    rho0 = assemble_blocks(blocks, rep)
    s3 = spin_op(PAULI_3, rep)
    p_plus0 = 0.5 * float(np.trace(rho0.matrix @ (np.eye(80) + s3)).real)
    late = propagate_state(blocks, 50.0 / RATES.gamma, RATES, rep)
    p_plus_inf = 0.5 * float(np.trace(late.matrix @ (np.eye(80) + s3)).real)
    assert p_plus_inf == pytest.approx(p_plus0, abs=1e-8)


def test_superposition_blocks_are_normalized():
    rep = FockRep(40)
    blocks = blocks_from_superposition([(1.0, -1, 0.3 + 0.1j), (1.0, -1, -0.5)])
    rho = assemble_blocks(blocks, rep)
    assert rho.trace().real == pytest.approx(1.0, abs=1e-10)
    rho.check()


def test_epsilon_zero_t_matches_truncated_overlap():
    assert epsilon_zero_t(0.0) == 1.0
    rep = FockRep(48)
    va = coherent_vector(+1.0, rep)
    vb = coherent_vector(-1.0, rep)
    overlap_sq = abs(np.vdot(va, vb)) ** 2
    assert epsilon_zero_t(1.0) == pytest.approx(overlap_sq, abs=1e-12)
    assert epsilon_zero_t(1.0) == pytest.approx(math.exp(-4.0), rel=1e-15)


def test_epsilon_finite_t_identity_with_noise_temperature():
    for D in (0.5, 1.0, 1.5):
        for T in (0.3, 1.0, 3.0):
            p = make_params(D=D, T=T)
            r = derive_rates(p)
            eps = epsilon_finite_t(D, p.omega0, T)
            assert eps == pytest.approx(math.exp(-r.w_bar / r.theta), rel=1e-12)
    assert epsilon_finite_t(1.0, 1.0, 0.0) == pytest.approx(math.exp(-4.0), rel=1e-15)
    assert epsilon_finite_t(1.0, 1.0, 1.0) == pytest.approx(0.1574499561306428, rel=1e-12)


def test_epsilon_monotonicity():
    eps_t = [epsilon_finite_t(1.0, 1.0, t) for t in np.linspace(0.01, 5, 40)]
    assert all(b > a for a, b in zip(eps_t, eps_t[1:]))
    eps_d = [epsilon_finite_t(d, 1.0, 1.0) for d in np.linspace(0.0, 2, 40)]
    assert all(b < a for a, b in zip(eps_d, eps_d[1:]))


def test_min_work():
    assert min_work(1.0, 3.0) == 0.0
    assert min_work(0.5, 2.5) == pytest.approx(2.5 * math.log(2.0), rel=1e-15)
    # round trip with the error law at D=1, T=0: theta = omega0/2
    assert min_work(math.exp(-4.0), 0.5) == pytest.approx(2.0, rel=1e-12)
    with pytest.raises(ValueError):
        min_work(0.0, 1.0)
    with pytest.raises(ValueError):
        min_work(1.5, 1.0)


def test_b0_decoupled_limit():
    rep = FockRep(16)
    p = make_params(D=0.0)
    B0 = b0_operator(p, rep)
    assert np.max(np.abs(B0 - np.eye(32))) < 1e-12
    assert tunneling_rate_zero_t(p).rate == pytest.approx(0.5, rel=1e-15)


def test_b0_matches_operator_series():
    # independent oracle: e^{-2D^2} sum (-1)^n (2D)^{2n}/(n!)^2 (bdag)^n b^n
    # summed with explicit truncated matrix powers
    rep = FockRep(48)
    p = make_params(D=1.0)
    b = dressed_lowering(p, rep)
    bdag = b.conj().T
    total = np.zeros((96, 96), dtype=complex)
    b_pow = np.eye(96, dtype=complex)
    bdag_pow = np.eye(96, dtype=complex)
    for n in range(40):
        coeff = (-1) ** n * (2.0 * p.D) ** (2 * n) / math.factorial(n) ** 2
        total += coeff * (bdag_pow @ b_pow)
        b_pow = b @ b_pow
        bdag_pow = bdag_pow @ bdag
    series = math.exp(-2.0 * p.D**2) * total
    built = b0_operator(p, rep)
    mask = np.zeros((96, 96), dtype=bool)
    for s0 in (0, 48):
        for s1 in (0, 48):
            mask[s0 : s0 + 32, s1 : s1 + 32] = True
    assert np.max(np.abs((series - built)[mask])) < 1e-6


def test_b0_eigenvalue_on_ground_states():
    rep = FockRep(48)
    p = make_params(D=1.0)
    B0 = b0_operator(p, rep)
    from spinosc.model import ground_state

    for sign in (+1, -1):
        g = ground_state(p, rep, sign)
        assert np.linalg.norm(B0 @ g - math.exp(-2.0) * g) < 1e-8


def test_zero_t_rate_value():
    p = make_params(D=1.0)
    res = tunneling_rate_zero_t(p)
    assert res.rate == pytest.approx(0.5 * math.exp(-4.0), rel=1e-15)
    assert res.rate == pytest.approx(0.00915781944436709, rel=1e-12)
    assert res.regime == "zero-T"


def test_finite_t_rate_zero_temperature_limit():
    p = make_params(T=0.0)
    exact, leading = tunneling_rate_finite_t(p)
    target = tunneling_rate_zero_t(p).rate
    assert exact.rate == pytest.approx(target, rel=1e-12)
    assert leading.rate == pytest.approx(target, rel=1e-12)
    assert tunneling_rate_correlation(p) == pytest.approx(target, rel=1e-12)


def test_finite_t_exact_form_value():
    # frozen from the Bessel expression evaluated independently with scipy i0
    p = make_params(T=1.0)
    exact, leading = tunneling_rate_finite_t(p)
    q = math.exp(-1.0)
    x = 1.0 - q
    direct = 0.5 * math.exp(-4.0 / x) * i0(4.0 * math.sqrt(1.0 / x**2 - 1.0))
    assert exact.rate == pytest.approx(direct, rel=1e-12)
    assert exact.exponent_temperature == pytest.approx(1.4039015408187165, rel=1e-12)
    r = derive_rates(p)
    assert leading.rate == pytest.approx(0.5 * math.exp(-r.w_bar / r.theta_prime), rel=1e-12)


def test_correlation_rate_matches_laguerre_sum():
    # brute-force sum (1/2) G1 (1-q) sum_n q^n [e^{-2D^2} L_n(4D^2)]^2,
    # independent of the Bessel identity
    for T in (0.5, 1.0, 2.0):
        p = make_params(T=T)
        q = math.exp(-1.0 / T)
        diag = weyl_phase_average_diagonal(p.D, 3000)
        brute = 0.5 * p.g_1_at_0 * (1.0 - q) * float(np.sum(q ** np.arange(3000) * diag**2))
        assert tunneling_rate_correlation(p) == pytest.approx(brute, rel=1e-10)


def test_exact_rate_monotone_in_temperature():
    vals = [tunneling_rate_finite_t(make_params(T=t))[0].rate for t in np.linspace(0.05, 4, 30)]
    assert all(b > a for a, b in zip(vals, vals[1:]))


def test_leading_exponent_consistency_at_large_displacement():
    p = make_params(D=3.0, T=1.0)
    exact, leading = tunneling_rate_finite_t(p)
    assert math.log(exact.rate) / math.log(leading.rate) == pytest.approx(1.0, abs=0.05)


def test_memory_time_identity():
    # lifetime * error = 2 / G_1(0) at zero temperature
    for D in (0.8, 1.0, 1.5):
        p = make_params(D=D)
        rate = tunneling_rate_zero_t(p).rate
        eps = epsilon_zero_t(D)
        assert (1.0 / rate) * eps == pytest.approx(2.0 / p.g_1_at_0, rel=1e-12)


def test_coherence_envelope_initial_value():
    blocks = blocks_from_superposition([(1 / math.sqrt(2), -1, 0.5), (1 / math.sqrt(2), +1, 0.5)])
    env0 = coherence_envelope(blocks, 0.0, RATES)
    assert env0 == pytest.approx(0.5, abs=1e-12)

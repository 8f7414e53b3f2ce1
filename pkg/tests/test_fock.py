"""Fock-space core: operators, states, fidelity, partial trace."""

import math

import numpy as np
import pytest

from spinosc.fock import (
    DisplacedThermal,
    FockRep,
    InvalidStateError,
    QuantumState,
    TruncationError,
    auto_fock_dim,
    coherent_overlap,
    coherent_vector,
    displaced_thermal_state,
    partial_trace,
    state_from_json,
    state_to_json,
    thermal_state,
    trace_distance,
    uhlmann_fidelity,
    weyl_operator,
)
from spinosc.model import SosParams, biased_gibbs


def random_unitary(n, rng):
    z = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    q, r = np.linalg.qr(z)
    return q * (np.diagonal(r) / np.abs(np.diagonal(r)))


def test_ladder_matrix_elements():
    rep = FockRep(12)
    for n in range(1, 12):
        assert rep.a[n - 1, n] == pytest.approx(math.sqrt(n), rel=1e-15)
    comm = rep.a @ rep.adag - rep.adag @ rep.a
    # canonical except the known truncation artifact in the corner
    assert np.allclose(comm[:-1, :-1], np.eye(11), atol=1e-14)
    assert comm[-1, -1] == pytest.approx(-(12 - 1), rel=1e-14)


def test_rep_rejects_tiny_dimension():
    with pytest.raises(ValueError):
        FockRep(1)


def test_coherent_vacuum_is_basis_vector():
    rep = FockRep(8)
    v = coherent_vector(0.0, rep)
    assert v[0] == pytest.approx(1.0)
    assert np.allclose(v[1:], 0.0)


def test_coherent_overlap_law():
    # brute-force component sums against |<a|b>|^2 = exp(-|a-b|^2)
    rep = FockRep(64)
    rng = np.random.default_rng(3)
    for _ in range(12):
        alpha = rng.uniform(-3, 3) + 1j * rng.uniform(-1, 1)
        beta = rng.uniform(-3, 3) + 1j * rng.uniform(-1, 1)
        if abs(alpha) > 3 or abs(beta) > 3:
            continue
        va, vb = coherent_vector(alpha, rep), coherent_vector(beta, rep)
        brute = abs(np.vdot(vb, va)) ** 2
        assert brute == pytest.approx(math.exp(-abs(alpha - beta) ** 2), abs=1e-8)
        assert np.vdot(vb, va) == pytest.approx(coherent_overlap(alpha, beta), abs=1e-8)


def test_coherent_mean_photon_number():
    rep = FockRep(64)
    alpha = 1.3 - 0.4j
    v = coherent_vector(alpha, rep)
    n_mean = (v.conj() @ rep.number @ v).real
    assert n_mean == pytest.approx(abs(alpha) ** 2, abs=1e-10)


def test_coherent_truncation_error():
    with pytest.raises(TruncationError) as err:
        coherent_vector(4.0, FockRep(8))
    assert err.value.deficit > 1e-4


def test_weyl_identity_and_inverse():
    rep = FockRep(48)
    assert np.allclose(weyl_operator(0.0, rep), np.eye(48))
    W = weyl_operator(0.7 + 0.3j, rep)
    Winv = weyl_operator(-(0.7 + 0.3j), rep)
    assert np.max(np.abs(W @ Winv - np.eye(48))) < 1e-8
    assert np.max(np.abs(W @ W.conj().T - np.eye(48))) < 1e-12


def test_weyl_composition_law():
    # W(a)W(b) = exp{(conj(a) b - a conj(b))/2} W(a+b), checked for a=1, b=i
    # on the space interior (the product pushes edge rows out of the space)
    rep = FockRep(64)
    alpha, beta = 1.0 + 0.0j, 1.0j
    lhs = weyl_operator(alpha, rep) @ weyl_operator(beta, rep)
    phase = np.exp(0.5 * (np.conj(alpha) * beta - alpha * np.conj(beta)))
    rhs = phase * weyl_operator(alpha + beta, rep)
    assert np.max(np.abs((lhs - rhs)[:40, :40])) < 1e-6


def test_displaced_thermal_t0_is_coherent_projector():
    rep = FockRep(32)
    state = displaced_thermal_state(DisplacedThermal(1.0, 1.0, 0.0), rep)
    v = coherent_vector(1.0, rep)
    v = v / np.linalg.norm(v)
    assert np.max(np.abs(state.matrix - np.outer(v, v.conj()))) < 1e-12


def test_thermal_mean_photon_number():
    omega0, T = 1.0, 1.0
    state = thermal_state(omega0, T, FockRep(64))
    rep = FockRep(64)
    n_mean = float(np.trace(rep.number @ state.matrix).real)
    assert n_mean == pytest.approx(1.0 / math.expm1(omega0 / T), abs=1e-6)


def test_displacement_covariance():
    # build once via the quadratic form, once by Weyl conjugation of the
    # undisplaced thermal state
    rep = FockRep(48)
    omega0, T, alpha = 1.0, 0.8, 0.9 + 0.2j
    direct = displaced_thermal_state(DisplacedThermal(alpha, omega0, T), rep)
    base = thermal_state(omega0, T, rep)
    W = weyl_operator(np.conj(alpha), rep)
    conjugated = QuantumState.oscillator(W.conj().T @ base.matrix @ W)
    assert trace_distance(direct, conjugated) < 1e-8


def test_displaced_thermal_truncation_error():
    with pytest.raises(TruncationError):
        displaced_thermal_state(DisplacedThermal(2.0, 1.0, 5.0), FockRep(16))


def test_truncation_monotonicity():
    deficits = []
    for dim in (24, 32, 40, 48):
        rep = FockRep(dim)
        state_spec = DisplacedThermal(1.5, 1.0, 1.0)
        ratio = state_spec.omega0 / state_spec.T
        shift = rep.a - state_spec.alpha * rep.identity
        w = np.linalg.eigvalsh(ratio * (shift.conj().T @ shift))
        deficit = 1.0 - (1.0 - math.exp(-ratio)) * float(np.sum(np.exp(-w)))
        deficits.append(deficit)
    assert all(d2 <= d1 + 1e-15 for d1, d2 in zip(deficits, deficits[1:]))


def test_fidelity_trivial_cases():
    rep = FockRep(24)
    rho = displaced_thermal_state(DisplacedThermal(0.5, 1.0, 1.0), rep)
    assert uhlmann_fidelity(rho, rho) == pytest.approx(1.0, abs=1e-10)
    va = coherent_vector(0.4, rep)
    vb = coherent_vector(-0.3, rep)
    va, vb = va / np.linalg.norm(va), vb / np.linalg.norm(vb)
    pa = QuantumState.oscillator(np.outer(va, va.conj()))
    pb = QuantumState.oscillator(np.outer(vb, vb.conj()))
    assert uhlmann_fidelity(pa, pb) == pytest.approx(abs(np.vdot(va, vb)), abs=1e-8)


def test_fidelity_displaced_thermal_closed_form():
    # squared fidelity of opposite pointers vs exp(-4 D^2 tanh(omega0/2T))
    rep = FockRep(64)
    plus = displaced_thermal_state(DisplacedThermal(+1.0, 1.0, 1.0), rep)
    minus = displaced_thermal_state(DisplacedThermal(-1.0, 1.0, 1.0), rep)
    f = uhlmann_fidelity(plus, minus)
    target = math.exp(-4.0 * math.tanh(0.5))
    assert target == pytest.approx(0.1574499561306428, rel=1e-12)
    assert f * f == pytest.approx(target, abs=1e-8)
    assert uhlmann_fidelity(minus, plus) == pytest.approx(f, abs=1e-8)


def test_fidelity_unitary_invariance():
    rep = FockRep(20)
    rng = np.random.default_rng(11)
    rho = displaced_thermal_state(DisplacedThermal(0.6, 1.0, 0.7), rep)
    sig = displaced_thermal_state(DisplacedThermal(-0.4, 1.0, 1.3), rep)
    base = uhlmann_fidelity(rho, sig)
    for _ in range(5):
        U = random_unitary(20, rng)
        ru = QuantumState.oscillator(U @ rho.matrix @ U.conj().T)
        su = QuantumState.oscillator(U @ sig.matrix @ U.conj().T)
        assert uhlmann_fidelity(ru, su) == pytest.approx(base, abs=1e-8)


def test_fidelity_rejects_invalid_state():
    rep = FockRep(8)
    good = thermal_state(1.0, 1.0, rep)
    bad_matrix = good.matrix.copy()
    bad_matrix[0, 0] -= 2e-4
    bad_matrix[1, 1] += 2e-4 - 2.0 * bad_matrix[1, 1]  # push an eigenvalue negative
    bad = QuantumState.oscillator(bad_matrix)
    with pytest.raises(InvalidStateError):
        uhlmann_fidelity(good, bad)


def test_trace_distance_basics():
    rep = FockRep(24)
    rho = thermal_state(1.0, 1.0, rep)
    assert trace_distance(rho, rho) == pytest.approx(0.0, abs=1e-14)
    e0 = np.zeros(24)
    e1 = np.zeros(24)
    e0[0], e1[1] = 1.0, 1.0
    p0 = QuantumState.oscillator(np.outer(e0, e0))
    p1 = QuantumState.oscillator(np.outer(e1, e1))
    assert trace_distance(p0, p1) == pytest.approx(1.0, abs=1e-14)


def test_trace_distance_vacuum_vs_thermal():
    # nbar = 1 means q = 1/2: the difference spectrum is (1/2, -1/4, -1/8, ...)
    # whose absolute sum is 1, so the distance is exactly 1/2 (up to the
    # geometric tail 2^-dim)
    dim = 40
    rep = FockRep(dim)
    omega0 = 1.0
    T = omega0 / math.log(2.0)  # q = 1/2 -> nbar = 1
    th = thermal_state(omega0, T, rep)
    vac = QuantumState.oscillator(np.outer(np.eye(dim)[0], np.eye(dim)[0]))
    assert trace_distance(vac, th) == pytest.approx(0.5, abs=1e-9)


def test_partial_trace_product_state():
    rep = FockRep(12)
    osc = thermal_state(1.0, 1.0, rep)
    spin = np.array([[0.7, 0.2], [0.2, 0.3]], dtype=complex)
    state = QuantumState(np.kron(spin, osc.matrix), (2, 12), ("spin", "osc"))
    reduced = partial_trace(state, "osc")
    assert np.max(np.abs(reduced.matrix - osc.matrix)) < 1e-12
    reduced_spin = partial_trace(state, "spin")
    assert np.max(np.abs(reduced_spin.matrix - spin)) < 1e-12


def test_partial_trace_bell_state():
    bell = np.zeros(4, dtype=complex)
    bell[0] = bell[3] = 1.0 / math.sqrt(2.0)
    state = QuantumState(np.outer(bell, bell.conj()), (2, 2), ("spin", "osc"))
    reduced = partial_trace(state, "spin")
    assert np.max(np.abs(reduced.matrix - 0.5 * np.eye(2))) < 1e-12


def test_partial_trace_biased_gibbs_pointer():
    params = SosParams(1.0, 1.0, 1.0, 1.0, 0.25, 0.0, 0.0)
    rep = FockRep(48)
    full = biased_gibbs(params, rep, +1)
    pointer = partial_trace(full, "osc")
    target = displaced_thermal_state(DisplacedThermal(+1.0, 1.0, 1.0), rep)
    assert trace_distance(pointer, target) < 1e-8


def test_partial_trace_unknown_label():
    state = thermal_state(1.0, 1.0, FockRep(8))
    with pytest.raises(ValueError):
        partial_trace(state, "spin")


def test_state_json_round_trip():
    state = thermal_state(1.0, 0.5, FockRep(10))
    data = state_to_json(state)
    assert set(data) == {"dim", "real_part", "imag_part"}
    assert data["dim"] == 10
    back = state_from_json(data)
    assert np.max(np.abs(back.matrix - state.matrix)) == 0.0


def test_state_check_catches_violations():
    m = np.eye(4, dtype=complex) / 4.0
    QuantumState.oscillator(m).check()
    bad_trace = QuantumState.oscillator(2.0 * m)
    with pytest.raises(InvalidStateError):
        bad_trace.check()
    non_herm = m.copy()
    non_herm[0, 1] = 1e-3
    with pytest.raises(InvalidStateError):
        QuantumState.oscillator(non_herm).check()


def test_auto_fock_dim_meets_target():
    dim = auto_fock_dim(1.5, 1.0, 1.0)
    state = displaced_thermal_state(
        DisplacedThermal(1.5, 1.0, 1.0), FockRep(dim), deficit_tol=1e-9
    )
    state.check()
    assert dim >= (1.5 + 4.0) ** 2  # at least the zero-T footprint

"""Measurement protocol on the composite observed-system (x) spin-oscillator
space: conditional spin-flip pulse, irreversible recording, Born weights and
work accounting.

The observed system O is two-dimensional with basis (|phi_->, |phi_+>); the
measured observable is X = P_+ - P_-.  The pulse applies

    U_M = P_+ (x) I  +  P_- (x) (-i sigma1)

(the -i is the conditional phase of a resonant pi flip; Born weights never
depend on it).  After the pulse the composite evolves under the master
equation acting on the spin-oscillator factor only, so the reduced state of
O is frozen while the oscillator records the bit: the pointer ends in the
mixture |c_-|^2 rho_P(-D) + |c_+|^2 rho_P(+D).

Composite kron order is (obs, spin, osc).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .analytic import tunneling_rate_finite_t
from .fock import FockRep, DisplacedThermal, QuantumState, displaced_thermal_state, partial_trace, trace_distance
from .lindblad import build_sos_generator, evolve, lift_generator
from .model import PAULI_1, SosParams, biased_gibbs, derive_rates

_P_MINUS = np.array([[1.0, 0.0], [0.0, 0.0]], dtype=complex)
_P_PLUS = np.array([[0.0, 0.0], [0.0, 1.0]], dtype=complex)


@dataclass(frozen=True)
class ObservedSystem:
    """Initial state c_- |phi_-> + c_+ |phi_+> of the measured two-level system."""

    c_minus: complex
    c_plus: complex

    def __post_init__(self):
        norm = abs(self.c_minus) ** 2 + abs(self.c_plus) ** 2
        if abs(norm - 1.0) > 1e-10:
            raise ValueError(f"amplitudes must be normalized, |c-|^2+|c+|^2 = {norm}")

    def vector(self) -> np.ndarray:
        return np.array([self.c_minus, self.c_plus], dtype=complex)


@dataclass(frozen=True)
class StageTimes:
    """The four well-separated timescales of one measurement."""

    t_m: float
    t_d: float
    t_r: float
    t_e: float


@dataclass
class MeasurementReport:
    work_invested: float
    born_weights: tuple
    pointer_error: float
    stage_times: StageTimes
    envelope_times: np.ndarray = field(repr=False)
    envelope: np.ndarray = field(repr=False)
    diagnostics: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "work_invested": self.work_invested,
            "born_weights": {"p_minus": self.born_weights[0], "p_plus": self.born_weights[1]},
            "pointer_error": self.pointer_error,
            "stage_times": {
                "t_M": self.stage_times.t_m,
                "t_D": self.stage_times.t_d,
                "t_R": self.stage_times.t_r,
                "t_E": self.stage_times.t_e,
            },
            "envelope": {
                "times": self.envelope_times.tolist(),
                "values": self.envelope.tolist(),
            },
            "diagnostics": self.diagnostics,
        }


def pulse_unitary(rep: FockRep) -> np.ndarray:
    """U_M on (obs, spin, osc): spin flip -i sigma1 conditioned on P_-."""
    flip = -1j * PAULI_1
    return np.kron(_P_PLUS, np.kron(np.eye(2), rep.identity)) + np.kron(
        _P_MINUS, np.kron(flip, rep.identity)
    )


def cnot_pulse(
    system: ObservedSystem,
    sos_state: QuantumState,
    params: SosParams | None = None,
    rep: FockRep | None = None,
) -> QuantumState:
    """Apply the instantaneous conditional flip to |phi_O><phi_O| (x) sos_state.

    When ``params``/``rep`` are supplied, the SOS input is checked against the
    stable spin-plus state and a warning diagnostic is emitted if it differs
    (the protocol still runs).
    """
    if sos_state.labels != ("spin", "osc"):
        raise ValueError("sos_state must live on the (spin, osc) space")
    fock_dim = sos_state.dims[1]
    if params is not None and rep is not None:
        stable = biased_gibbs(params, rep, +1)
        dist = trace_distance(sos_state, stable)
        if dist > 1e-6:
            warnings.warn(
                f"initial SOS state is not the stable spin-plus state "
                f"(trace distance {dist:.3g}); protocol runs anyway",
                stacklevel=2,
            )
    phi = system.vector()
    rho_obs = np.outer(phi, phi.conj())
    rho0 = np.kron(rho_obs, sos_state.matrix)
    U = pulse_unitary(FockRep(fock_dim))
    out = U @ rho0 @ U.conj().T
    return QuantumState(out, (2, 2, fock_dim), ("obs", "spin", "osc"))


def stage_times(params: SosParams) -> StageTimes:
    """t_M = 0 (instantaneous pulse), t_D = 1/Gamma, t_R = 1/gamma, t_E = 1/rate.

    The ordering t_D < t_R < t_E expected for a good memory additionally
    needs Gamma > gamma (dequantization faster than recording); the flip rate
    uses the finite-T exact form.
    """
    rates = derive_rates(params)
    exact, _ = tunneling_rate_finite_t(params)
    t_d = 1.0 / rates.big_gamma if rates.big_gamma > 0 else math.inf
    t_r = 1.0 / rates.gamma if rates.gamma > 0 else math.inf
    t_e = 1.0 / exact.rate if exact.rate > 0 else math.inf
    if params.D**2 >= 1.0 and params.g_1_at_0 <= rates.gamma and rates.big_gamma > rates.gamma:
        if not (t_d < t_r < t_e):
            warnings.warn(
                f"unexpected stage ordering t_D={t_d:.3g}, t_R={t_r:.3g}, t_E={t_e:.3g}",
                stacklevel=2,
            )
    return StageTimes(t_m=0.0, t_d=t_d, t_r=t_r, t_e=t_e)


def _pointer_targets(params: SosParams, rep: FockRep):
    minus = displaced_thermal_state(DisplacedThermal(-params.D, params.omega0, params.T), rep)
    plus = displaced_thermal_state(DisplacedThermal(+params.D, params.omega0, params.T), rep)
    return minus, plus


def pointer_weights(pointer: QuantumState, params: SosParams, rep: FockRep) -> tuple:
    """Least-squares weights of the two stable pointers in a pointer state.

    Solves the 2x2 Gram system in the Hilbert-Schmidt inner product, which
    recovers exact mixture weights even though the two pointers overlap.
    """
    minus, plus = _pointer_targets(params, rep)
    basis = [minus.matrix, plus.matrix]
    G = np.array([[np.vdot(x.ravel(), y.ravel()) for y in basis] for x in basis])
    v = np.array([np.vdot(x.ravel(), pointer.matrix.ravel()) for x in basis])
    w = np.linalg.solve(G, v)
    return (float(w[0].real), float(w[1].real))


def coherence_envelope_obs(state: QuantumState) -> float:
    """Trace norm of the off-diagonal O block <phi_-| rho |phi_+>."""
    n = state.dims[1] * state.dims[2]
    block = state.matrix[:n, n:]
    return float(np.sum(np.linalg.svd(block, compute_uv=False)))


def run_protocol(
    system: ObservedSystem,
    params: SosParams,
    rep: FockRep,
    horizon: float | None = None,
    n_samples: int = 60,
    rtol: float = 1e-9,
) -> MeasurementReport:
    """Full measurement: pulse, open-system recording, Born-weight readout.

    ``horizon`` defaults to 16/gamma_net, late enough for the moving pointer
    to merge with the stable one at the 1e-6 level.  Work bookkeeping:
    the pulse raises the SOS energy by 4 D^2 omega0 in the flipped branch,
    so the invested work is |c_-|^2 * 4 D^2 omega0.
    """
    rates = derive_rates(params)
    if rates.gamma_net <= 0:
        raise ValueError("recording requires gamma_net > 0")
    if horizon is None:
        horizon = 16.0 / rates.gamma_net
    if horizon < 10.0 / rates.gamma_net:
        warnings.warn("horizon shorter than 10/gamma_net; Born weights may not be converged")

    composite0 = cnot_pulse(system, biased_gibbs(params, rep, +1), params, rep)
    gen = lift_generator(build_sos_generator(params, rep, include_tunneling=False), 2)
    t_grid = np.linspace(0.0, horizon, n_samples)
    traj = evolve(gen, composite0, t_grid, rtol=rtol)

    final = traj.states[-1]
    pointer = partial_trace(final, "osc")
    weights = pointer_weights(pointer, params, rep)

    minus, plus = _pointer_targets(params, rep)
    target = QuantumState(
        abs(system.c_minus) ** 2 * minus.matrix + abs(system.c_plus) ** 2 * plus.matrix,
        (rep.dim,),
        ("osc",),
    )
    pointer_error = trace_distance(pointer, target)

    envelope = np.array([coherence_envelope_obs(s) for s in traj.states])
    work = abs(system.c_minus) ** 2 * 4.0 * params.D**2 * params.omega0

    return MeasurementReport(
        work_invested=work,
        born_weights=weights,
        pointer_error=pointer_error,
        stage_times=stage_times(params),
        envelope_times=t_grid,
        envelope=envelope,
        diagnostics=traj.diagnostics(),
    )


def protocol_trajectory(
    system: ObservedSystem,
    params: SosParams,
    rep: FockRep,
    horizon: float,
    n_samples: int = 120,
    rtol: float = 1e-9,
):
    """Composite trajectory after the pulse (for CSV emission and tests)."""
    composite0 = cnot_pulse(system, biased_gibbs(params, rep, +1), params, rep)
    gen = lift_generator(build_sos_generator(params, rep, include_tunneling=False), 2)
    t_grid = np.linspace(0.0, horizon, n_samples)
    return evolve(gen, composite0, t_grid, rtol=rtol)

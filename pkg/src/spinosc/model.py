"""Spin-oscillator system: physical parameters, derived rates, Hamiltonian.

Natural units hbar = k_B = 1 everywhere.  The system is a spin-1/2 strongly
coupled to one harmonic mode,

    H = omega0 (adag - D sigma3)(a - D sigma3),

normal-ordered so the two degenerate ground states |+;+D> and |-;-D> sit at
energy zero.  (The same operator can be written omega0 b'b - omega0 D^2 with
the constant absorbed differently; the offset omega0 D^2 is bookkeeping with
no physical content and this package fixes the normal-ordered convention.)

The environment enters only through four spectral-density point values
G_o(omega0), G_o(0), G_3(0), G_1(0); detailed balance (the KMS condition) is
imposed by construction, with the upward rate gamma * exp(-omega0/T) derived
from the user-supplied downward gamma.  T = 0 is a first-class value: all
exp(-omega0/T) factors evaluate to exactly zero on the same code path.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, asdict

import numpy as np

from .fock import (
    DisplacedThermal,
    FockRep,
    QuantumState,
    boltzmann_factor,
    coherent_vector,
    displaced_thermal_state,
    _expm_antihermitian,
)

PAULI_1 = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
PAULI_2 = np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex)
PAULI_3 = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)
SPIN_ID = np.eye(2, dtype=complex)

_JSON_KEYS = {
    "omega0": "omega0",
    "D": "D",
    "T": "T",
    "G_o_omega0": "g_o_at_omega0",
    "G_o_0": "g_o_at_0",
    "G_3_0": "g_3_at_0",
    "G_1_0": "g_1_at_0",
}


@dataclass(frozen=True)
class SosParams:
    """Physical parameters of the spin-oscillator system and its bath."""

    omega0: float
    D: float
    T: float
    g_o_at_omega0: float
    g_o_at_0: float
    g_3_at_0: float
    g_1_at_0: float

    def __post_init__(self):
        if self.omega0 <= 0:
            raise ValueError("omega0 must be > 0")
        if self.D < 0:
            raise ValueError("displacement D must be >= 0")
        if self.T < 0:
            raise ValueError("temperature must be >= 0")
        for name in ("g_o_at_omega0", "g_o_at_0", "g_3_at_0", "g_1_at_0"):
            if getattr(self, name) < 0:
                raise ValueError(f"spectral value {name} must be >= 0")

    @classmethod
    def from_dict(cls, data: dict) -> "SosParams":
        """Parse the flat JSON schema with keys omega0, D, T, G_o_omega0, ..."""
        missing = [k for k in _JSON_KEYS if k not in data]
        if missing:
            raise ValueError(f"missing parameter keys: {missing}")
        return cls(**{attr: float(data[key]) for key, attr in _JSON_KEYS.items()})

    def to_dict(self) -> dict:
        vals = asdict(self)
        return {key: vals[attr] for key, attr in _JSON_KEYS.items()}


@dataclass(frozen=True)
class DerivedRates:
    """Rates and effective temperatures derived from :class:`SosParams`.

    gamma      : oscillator dissipation rate G_o(omega0)
    gamma_up   : KMS upward rate gamma * exp(-omega0/T)  (0 at T=0)
    gamma_net  : net displacement damping gamma * (1 - exp(-omega0/T))
    big_gamma  : pure spin decoherence rate 4 D^2 G_o(0) + G_3(0)
    w_bar      : average bit-flip work 2 D^2 omega0
    theta      : mean oscillator energy omega0/(e^{omega0/T}-1) + omega0/2
    theta_prime: effective temperature governing the thermal flip-rate exponent

    omega0 and D are carried along so trajectory formulas need only this object.
    """

    gamma: float
    gamma_up: float
    gamma_net: float
    big_gamma: float
    w_bar: float
    theta: float
    theta_prime: float
    omega0: float
    D: float


def derive_rates(params: SosParams) -> DerivedRates:
    """All derived rates; T=0 handled by exact limits, never by division."""
    q = boltzmann_factor(params.omega0, params.T)
    # x = 1 - q computed without cancellation
    x = -math.expm1(-params.omega0 / params.T) if params.T > 0 else 1.0
    gamma = params.g_o_at_omega0
    theta = params.omega0 * (2.0 - x) / (2.0 * x)
    # theta' = (omega0/2)(1-q)/(1 - sqrt(1-(1-q)^2)), rewritten stably as
    # (omega0/2)(1 + sqrt(1-x^2))/x
    theta_prime = 0.5 * params.omega0 * (1.0 + math.sqrt(max(0.0, 1.0 - x * x))) / x
    return DerivedRates(
        gamma=gamma,
        gamma_up=gamma * q,
        gamma_net=gamma * x,
        big_gamma=4.0 * params.D**2 * params.g_o_at_0 + params.g_3_at_0,
        w_bar=2.0 * params.D**2 * params.omega0,
        theta=theta,
        theta_prime=theta_prime,
        omega0=params.omega0,
        D=params.D,
    )


def spin_op(sigma: np.ndarray, rep: FockRep) -> np.ndarray:
    """Lift a 2x2 spin operator to the spin (x) oscillator space."""
    return np.kron(sigma, rep.identity)


def osc_op(op: np.ndarray, rep: FockRep) -> np.ndarray:
    """Lift an oscillator operator to the spin (x) oscillator space."""
    return np.kron(SPIN_ID, op)


def dressed_lowering(params: SosParams, rep: FockRep) -> np.ndarray:
    """b = a - D sigma3, the lowering operator of the shifted ladders."""
    return osc_op(rep.a, rep) - params.D * spin_op(PAULI_3, rep)


def sos_hamiltonian(params: SosParams, rep: FockRep) -> np.ndarray:
    """H = omega0 (adag - D sigma3)(a - D sigma3) on spin (x) oscillator."""
    if rep.dim < 2:
        raise ValueError("representation dimension must be >= 2")
    b = dressed_lowering(params, rep)
    H = params.omega0 * (b.conj().T @ b)
    return 0.5 * (H + H.conj().T)


def dressing_unitary(params: SosParams, rep: FockRep) -> np.ndarray:
    """U = exp{D (a - adag) sigma3}; U^dag a U = a - D sigma3 in the interior."""
    gen = params.D * (osc_op(rep.a - rep.adag, rep) @ spin_op(PAULI_3, rep))
    return _expm_antihermitian(gen)


def ground_state(params: SosParams, rep: FockRep, spin_sign: int) -> np.ndarray:
    """Normalized ground vector |sign; sign*D> of the spin_sign sector."""
    if spin_sign not in (+1, -1):
        raise ValueError("spin_sign must be +1 or -1")
    v = coherent_vector(spin_sign * params.D, rep)
    v = v / np.linalg.norm(v)
    spin = np.array([1.0, 0.0]) if spin_sign > 0 else np.array([0.0, 1.0])
    return np.kron(spin, v).astype(complex)


def flipped_ground_state(params: SosParams, rep: FockRep, spin_sign: int) -> np.ndarray:
    """|sign; -sign*D>: the spin-flipped partner sitting 4 D^2 omega0 higher."""
    if spin_sign not in (+1, -1):
        raise ValueError("spin_sign must be +1 or -1")
    v = coherent_vector(-spin_sign * params.D, rep)
    v = v / np.linalg.norm(v)
    spin = np.array([1.0, 0.0]) if spin_sign > 0 else np.array([0.0, 1.0])
    return np.kron(spin, v).astype(complex)


def biased_gibbs(
    params: SosParams, rep: FockRep, spin_sign: int, excited: bool = False
) -> QuantumState:
    """Stable state |sign><sign| (x) displaced thermal at sign*D.

    With ``excited=True`` the oscillator factor is displaced to -sign*D
    instead (the state reached right after a conditional spin flip).  At T=0
    both reduce to the corresponding coherent projectors.
    """
    if spin_sign not in (+1, -1):
        raise ValueError("spin_sign must be +1 or -1")
    alpha = (-spin_sign if excited else spin_sign) * params.D
    osc = displaced_thermal_state(DisplacedThermal(alpha, params.omega0, params.T), rep)
    proj = np.zeros((2, 2), dtype=complex)
    proj[0 if spin_sign > 0 else 1, 0 if spin_sign > 0 else 1] = 1.0
    return QuantumState(np.kron(proj, osc.matrix), (2, rep.dim), ("spin", "osc"))

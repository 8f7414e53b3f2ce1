"""Spin-oscillator single-bit memory toolkit.

A spin-1/2 permanently coupled to a damped harmonic mode stores one bit in
two well-separated Gaussian pointer states.  The package provides the
closed-form dynamics (rank-1 propagator, error/work laws, flip rates), an
independent dense Lindblad integrator used as the oracle for every closed
form, the full measurement protocol on the composite observed-system space,
a faulty-measurement Szilard engine, and the N-gate computation-cost model,
plus a CLI emitting the corresponding curves as CSV/JSON.
"""

from .fock import (
    DisplacedThermal,
    FockRep,
    InvalidStateError,
    QuantumState,
    TruncationError,
    auto_fock_dim,
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
from .model import (
    DerivedRates,
    SosParams,
    biased_gibbs,
    derive_rates,
    dressing_unitary,
    ground_state,
    sos_hamiltonian,
)
from .analytic import (
    Rank1Block,
    TunnelingResult,
    UnsupportedRegimeError,
    alpha_trajectory,
    b0_operator,
    blocks_from_superposition,
    epsilon_finite_t,
    epsilon_zero_t,
    min_work,
    phi_factor,
    propagate_rank1,
    propagate_state,
    tunneling_rate_correlation,
    tunneling_rate_finite_t,
    tunneling_rate_zero_t,
)
from .lindblad import (
    GeneratorSpec,
    IntegrationError,
    Trajectory,
    build_sos_generator,
    evolve,
    fourier_component,
    initial_spin_flow,
)
from .measurement import MeasurementReport, ObservedSystem, cnot_pulse, run_protocol, stage_times
from .szilard import (
    CycleLedger,
    SzilardCycle,
    efficiency,
    maximize_efficiency,
    quasistatic_cycle,
    w_se,
    w_se_faulty,
    w_se_max,
)
from .costmodel import CostInputs, failure_probability, min_total_work

__version__ = "0.1.0"

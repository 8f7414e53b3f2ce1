"""Two-level Szilard engine driven by a measured bit, with faulty readout.

The working medium is a two-level system with the diagonal control

    H(t) = (E0/2) (f(t)^2 I - f(t) sigma3),   |f| <= 1,

so at f = s the recorded state |s> keeps energy 0 while |-s> is lifted by E0.
One cycle: (i) equilibrium at f=0, (ii) projective measurement of sigma3,
(iii) sudden quench f: 0 -> s (costs E0 exactly when the record was wrong),
(iv) slow ramp f: s -> 0 against the bath, extracting work.

Since H(t) stays diagonal and the cycle starts from Gibbs/projected states,
no coherences ever appear and step (iv) is exactly a classical two-state
detailed-balance master equation: downward rate r, upward rate
r exp(-gap/T).  Work and heat follow dW = Tr(rho dH), dQ = Tr(drho H).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp


@dataclass(frozen=True)
class SzilardCycle:
    """Bath temperature, level-shift scale and measurement error of one engine."""

    T: float
    E0: float
    epsilon: float

    def __post_init__(self):
        if self.T <= 0:
            raise ValueError("bath temperature must be > 0")
        if self.E0 < 0:
            raise ValueError("E0 must be >= 0")
        if not 0.0 <= self.epsilon <= 0.5:
            raise ValueError("epsilon must lie in [0, 1/2]")


@dataclass
class CycleLedger:
    """Energy bookkeeping of one simulated cycle (ensemble over outcomes)."""

    work_extracted: float
    work_invested_stage_iii: float
    heat_absorbed: float
    internal_energy_change: float
    stages: dict
    closure_defect: float


def binary_entropy(epsilon: float) -> float:
    """S(eps) = -eps ln eps - (1-eps) ln(1-eps), with S(0) = S(1) = 0."""
    if epsilon < 0.0 or epsilon > 1.0:
        raise ValueError("epsilon must lie in [0, 1]")
    s = 0.0
    if 0.0 < epsilon < 1.0:
        s = -epsilon * math.log(epsilon) - (1.0 - epsilon) * math.log(1.0 - epsilon)
    return s


def w_se(E0: float, T: float) -> float:
    """Quasistatic work T [ln 2 - ln(e^{-E0/T} + 1)] extracted per cycle."""
    if T <= 0:
        raise ValueError("temperature must be > 0")
    return T * (math.log(2.0) - math.log1p(math.exp(-E0 / T)))


def w_se_faulty(E0: float, T: float, epsilon: float) -> float:
    """Net extracted work with readout error: w_se(E0, T) - epsilon * E0."""
    if not 0.0 <= epsilon <= 0.5:
        raise ValueError("epsilon must lie in [0, 1/2]")
    return w_se(E0, T) - epsilon * E0


def w_se_max(epsilon: float, T: float) -> tuple[float, float]:
    """Optimal level shift and work: (T ln((1-eps)/eps), T [ln2 - S(eps)]).

    At epsilon = 0 the maximizer is unbounded; the saturated work T ln 2 is
    returned with E0* = inf rather than a large sentinel.
    """
    if not 0.0 <= epsilon <= 0.5:
        raise ValueError("epsilon must lie in [0, 1/2]")
    w = T * (math.log(2.0) - binary_entropy(epsilon))
    if epsilon == 0.0:
        return math.inf, w
    return T * math.log((1.0 - epsilon) / epsilon), w


def efficiency(epsilon: float, T: float, theta: float) -> float:
    """eta = (T/theta) (ln2 - S(eps)) / (-ln eps): extracted over invested."""
    if not 0.0 < epsilon < 1.0:
        raise ValueError("epsilon must lie in (0, 1)")
    return (T / theta) * (math.log(2.0) - binary_entropy(epsilon)) / (-math.log(epsilon))


def golden_section_max(f, a: float, b: float, xtol: float = 1e-6) -> tuple[float, float]:
    """Golden-section maximization of a unimodal scalar function on [a, b]."""
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    x1 = b - invphi * (b - a)
    x2 = a + invphi * (b - a)
    f1, f2 = f(x1), f(x2)
    while b - a > xtol:
        if f1 < f2:
            a, x1, f1 = x1, x2, f2
            x2 = a + invphi * (b - a)
            f2 = f(x2)
        else:
            b, x2, f2 = x2, x1, f1
            x1 = b - invphi * (b - a)
            f1 = f(x1)
    x = 0.5 * (a + b)
    return x, f(x)


def maximize_efficiency(T: float, theta: float) -> tuple[float, float]:
    """Error rate and efficiency at the engine optimum: (eps_bar, eta_bar).

    64-point log-spaced pre-scan over (1e-6, 1/2 - 1e-6) followed by
    golden-section refinement to 1e-6 absolute in epsilon.
    """
    lo, hi = 1e-6, 0.5 - 1e-6
    grid = np.geomspace(lo, hi, 64)
    vals = np.array([efficiency(e, T, theta) for e in grid])
    k = int(np.argmax(vals))
    a = grid[max(k - 1, 0)]
    b = grid[min(k + 1, len(grid) - 1)]
    eps_bar, eta_bar = golden_section_max(lambda e: efficiency(e, T, theta), a, b)
    return eps_bar, eta_bar


def _level_energies(E0: float, f: float) -> tuple[float, float]:
    """(E_plus, E_minus) of H(f) = (E0/2)(f^2 I - f sigma3)."""
    return 0.5 * E0 * (f * f - f), 0.5 * E0 * (f * f + f)


def _ramp_branch(E0, T, r, ramp_time, start_in_upper, rtol=1e-11):
    """Stage-iv ramp f: 1 -> 0 for one measurement branch (s = +1).

    State is (p_minus,), work and heat are integrated alongside.  Returns
    (work, heat, dE, p_minus_end).
    """
    def rhs(t, y):
        p_minus, _, _ = y
        f = 1.0 - t / ramp_time
        fdot = -1.0 / ramp_time
        e_p, e_m = _level_energies(E0, f)
        gap = e_m - e_p  # = E0 f >= 0: |-> is the upper level for f >= 0
        p_plus = 1.0 - p_minus
        down = r * p_minus
        up = r * math.exp(-gap / T) * p_plus
        dp_minus = up - down
        de_p = 0.5 * E0 * (2.0 * f * fdot - fdot)
        de_m = 0.5 * E0 * (2.0 * f * fdot + fdot)
        dwork = p_plus * de_p + p_minus * de_m
        dheat = -dp_minus * e_p + dp_minus * e_m
        return [dp_minus, dwork, dheat]

    p0 = 1.0 if start_in_upper else 0.0
    sol = solve_ivp(
        rhs,
        (0.0, ramp_time),
        [p0, 0.0, 0.0],
        method="RK45",
        rtol=rtol,
        atol=1e-14,
        dense_output=False,
    )
    if not sol.success:
        raise RuntimeError(f"stage-iv integration failed: {sol.message}")
    p_minus_end, work, heat = sol.y[0, -1], sol.y[1, -1], sol.y[2, -1]
    e_p0, e_m0 = _level_energies(E0, 1.0)
    e_start = p0 * e_m0 + (1.0 - p0) * e_p0
    e_end = 0.0  # H(f=0) = 0
    return work, heat, e_end - e_start, p_minus_end


def quasistatic_cycle(cycle: SzilardCycle, ramp_time: float, relaxation_rate: float) -> CycleLedger:
    """Simulate one full cycle and return the averaged energy ledger.

    Both measurement branches are propagated (weights 1-epsilon and epsilon)
    and averaged; by symmetry only the recorded outcome s = +1 is simulated.
    In the slow limit (ramp_time >> 1/relaxation_rate) the extracted work
    converges to w_se(E0, T) - epsilon * E0 from below.
    """
    if ramp_time <= 0:
        raise ValueError("ramp_time must be > 0")
    if relaxation_rate <= 0:
        raise ValueError("relaxation_rate must be > 0")
    E0, T, eps = cycle.E0, cycle.T, cycle.epsilon

    # stage iii (sudden quench from f=0): the occupied level pays its new energy
    e_p1, e_m1 = _level_energies(E0, 1.0)
    w_iii_correct = e_p1  # recorded +, true state |+>: energy 0
    w_iii_faulty = e_m1   # recorded +, true state |->: energy E0
    w_iii = (1.0 - eps) * w_iii_correct + eps * w_iii_faulty

    # stage iv ramp for both branches
    w_c, q_c, de_c, _ = _ramp_branch(E0, T, relaxation_rate, ramp_time, start_in_upper=False)
    w_f, q_f, de_f, _ = _ramp_branch(E0, T, relaxation_rate, ramp_time, start_in_upper=True)
    w_iv = (1.0 - eps) * w_c + eps * w_f
    q_iv = (1.0 - eps) * q_c + eps * q_f
    de_iv = (1.0 - eps) * de_c + eps * de_f

    closure = abs(de_c - (w_c + q_c)) + abs(de_f - (w_f + q_f))

    stages = {
        "i": {"work": 0.0, "heat": 0.0, "dE": 0.0},
        "ii": {"work": 0.0, "heat": 0.0, "dE": 0.0},
        "iii": {"work": w_iii, "heat": 0.0, "dE": w_iii},
        "iv": {"work": w_iv, "heat": q_iv, "dE": de_iv},
    }
    total_work = w_iii + w_iv
    return CycleLedger(
        work_extracted=-total_work,
        work_invested_stage_iii=w_iii,
        heat_absorbed=q_iv,
        internal_energy_change=w_iii + de_iv,
        stages=stages,
        closure_defect=closure,
    )

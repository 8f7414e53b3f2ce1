"""Independent numerical integrator for the Markovian master equations.

This module is the arbiter for every closed-form claim in the package: it
assembles the generator

    d rho/dt = -i[H, rho]
               + gamma  D[b] rho + gamma e^{-omega0/T} D[bdag] rho
               - (Gamma/2) [sigma3, [sigma3, rho]]
               - (G_1(0)/4) [K, [K, rho]]        (flip term, optional)

with b = a - D sigma3 and K the Hermitian flip jump operator, and integrates
the full density matrix with an embedded Dormand-Prince 4(5) scheme
(per-step relative tolerance 1e-9 by default, Hermiticity restored by
symmetrization after every accepted step, trace and positivity monitored,
never projected).

The flip dissipator is normalized so that the initial probability flow
(1/2) Tr(sigma3 d rho/dt) out of a stable state equals
(1/2) G_1(0) <B0^2>: the double commutator enters with prefactor G_1(0)/4.

All jump/dephasing operators above are eigenoperators of H (up to a phase
that cancels inside the dissipators), so the Hamiltonian can be removed
exactly by a rotating-frame transformation rho -> e^{iHt} rho e^{-iHt}.
Generators built by :func:`build_sos_generator` advertise this and
:func:`evolve` exploits it by default; the lab-frame path is kept and the
equivalence of the two is covered by tests.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .analytic import tunneling_jump_operator
from .fock import FockRep, QuantumState
from .model import PAULI_3, SosParams, derive_rates, dressed_lowering, sos_hamiltonian, spin_op
from .serialize import dump_json, write_csv


class IntegrationError(RuntimeError):
    """Integration failed; carries the diagnostics gathered so far."""

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


class AliasingError(RuntimeError):
    """Fourier extraction changed under sample doubling."""


@dataclass
class GeneratorSpec:
    """Dense Lindblad generator: Hamiltonian, jumps, double-commutator terms.

    ``jumps`` is a list of (L, rate) with dissipator rate * D[L];
    ``dephasings`` is a list of (A, rate) contributing -(rate/2) [A, [A, rho]]
    with Hermitian A.  ``frame_ok`` marks generators whose jump/dephasing
    operators are H-eigenoperators, enabling the exact rotating frame.
    """

    hamiltonian: np.ndarray
    jumps: list = field(default_factory=list)
    dephasings: list = field(default_factory=list)
    dims: tuple = ()
    labels: tuple = ()
    frame_ok: bool = False

    def __post_init__(self):
        n = self.hamiltonian.shape[0]
        if self.hamiltonian.shape != (n, n):
            raise ValueError("Hamiltonian must be square")
        for op, rate in list(self.jumps) + list(self.dephasings):
            if op.shape != (n, n):
                raise ValueError("operator dimension inconsistent with Hamiltonian")
            if rate < 0:
                raise ValueError("rates must be >= 0")
        if not self.dims:
            self.dims = (n,)
            self.labels = ("space",)

    @property
    def dim(self) -> int:
        return self.hamiltonian.shape[0]

    def apply(self, rho: np.ndarray, include_hamiltonian: bool = True) -> np.ndarray:
        """Evaluate the generator on an arbitrary matrix."""
        rhs = self._compiled(include_hamiltonian)
        return rhs(rho)

    def _compiled(self, include_hamiltonian: bool):
        key = "_rhs_h" if include_hamiltonian else "_rhs_noh"
        cached = getattr(self, key, None)
        if cached is not None:
            return cached

        H = self.hamiltonian if include_hamiltonian else None
        mm_terms = []       # (L, Ldag, LdagL) needing matrix products
        elementwise = None  # fused coefficient matrix for diagonal dephasings
        for L, rate in self.jumps:
            if rate == 0.0:
                continue
            Ls = math.sqrt(rate) * L
            mm_terms.append((Ls, Ls.conj().T, rate * (L.conj().T @ L)))
        for A, rate in self.dephasings:
            if rate == 0.0:
                continue
            d = np.diagonal(A)
            if np.max(np.abs(A - np.diag(d))) == 0.0:
                d = d.astype(complex)
                coeff = rate * (
                    np.outer(d, d.conj()) - 0.5 * (np.abs(d) ** 2)[:, None] - 0.5 * (np.abs(d) ** 2)[None, :]
                )
                elementwise = coeff if elementwise is None else elementwise + coeff
            else:
                As = math.sqrt(rate) * A
                mm_terms.append((As, As.conj().T, rate * (A @ A)))

        def rhs(rho):
            if H is not None:
                out = -1j * (H @ rho - rho @ H)
            else:
                out = np.zeros_like(rho)
            for Ls, Lds, LdL in mm_terms:
                out += Ls @ rho @ Lds - 0.5 * (LdL @ rho + rho @ LdL)
            if elementwise is not None:
                out += elementwise * rho
            return out

        object.__setattr__(self, key, rhs)
        return rhs

    def stiffness_scale(self, include_hamiltonian: bool = True) -> float:
        """Rough bound on the fastest generator eigenrate (for step capping)."""
        lam = 0.0
        for L, rate in self.jumps:
            lam += rate * np.linalg.norm(L, 2) ** 2
        for A, rate in self.dephasings:
            lam += 2.0 * rate * np.linalg.norm(A, 2) ** 2
        if include_hamiltonian:
            lam += 2.0 * np.linalg.norm(self.hamiltonian, 2)
        return float(lam)


@dataclass
class Trajectory:
    """Sampled solution of a master-equation run plus integrator diagnostics."""

    times: np.ndarray
    states: list
    trace_dev: np.ndarray
    min_eig: np.ndarray
    herm_defect_max: float
    n_accepted: int
    n_rejected: int
    rtol: float

    def observable(self, op: np.ndarray) -> np.ndarray:
        return np.array([np.trace(op @ s.matrix) for s in self.states])

    def diagnostics(self) -> dict:
        return {
            "max_trace_dev": float(np.max(self.trace_dev)),
            "min_eigenvalue": float(np.min(self.min_eig)),
            "herm_defect_max": float(self.herm_defect_max),
            "n_accepted": self.n_accepted,
            "n_rejected": self.n_rejected,
            "rtol": self.rtol,
        }

    def to_csv(self, path, observables: dict | None = None, config: dict | None = None):
        header = ["time", "trace", "min_eig"]
        columns = [
            self.times,
            np.array([s.trace().real for s in self.states]),
            self.min_eig,
        ]
        if observables:
            for name, values in observables.items():
                header.append(name)
                columns.append(np.asarray(values))
        rows = list(zip(*columns))
        write_csv(path, header, rows, config=config)

    def to_json(self, path=None, observables: dict | None = None, config: dict | None = None):
        payload = {
            "times": self.times.tolist(),
            "trace": [float(s.trace().real) for s in self.states],
            "min_eig": self.min_eig.tolist(),
            "diagnostics": self.diagnostics(),
        }
        if observables:
            payload["observables"] = {
                k: [[float(np.real(v)), float(np.imag(v))] for v in vals]
                for k, vals in observables.items()
            }
        if config is not None:
            payload["config"] = config
        if path is None:
            return payload
        dump_json(path, payload)
        return payload


def build_sos_generator(
    params: SosParams,
    rep: FockRep,
    include_tunneling: bool = False,
    regime: str = "auto",
) -> GeneratorSpec:
    """Master-equation generator on the spin (x) oscillator space.

    ``regime`` is "auto" (infer zero vs finite temperature from params.T),
    "zero-T" (requires params.T == 0) or "finite-T".  The upward jump bdag
    enters with the KMS rate gamma * exp(-omega0/T), which vanishes at T=0,
    so both regimes share one code path.
    """
    if regime not in ("auto", "zero-T", "finite-T"):
        raise ValueError(f"unknown regime {regime!r}")
    if regime == "zero-T" and params.T != 0.0:
        raise ValueError("zero-T regime requested but params.T > 0")
    rates = derive_rates(params)
    H = sos_hamiltonian(params, rep)
    b = dressed_lowering(params, rep)
    jumps = [(b, rates.gamma)]
    if rates.gamma_up > 0.0:
        jumps.append((b.conj().T, rates.gamma_up))
    dephasings = [(spin_op(PAULI_3, rep), rates.big_gamma)]
    if include_tunneling and params.g_1_at_0 > 0.0:
        # G_1(0)/2 on the double commutator reproduces the flow
        # (1/2) G_1(0) <B0^2> out of a stable state
        dephasings.append((tunneling_jump_operator(params, rep), 0.5 * params.g_1_at_0))
    return GeneratorSpec(
        hamiltonian=H,
        jumps=jumps,
        dephasings=dephasings,
        dims=(2, rep.dim),
        labels=("spin", "osc"),
        frame_ok=True,
    )


def lift_generator(gen: GeneratorSpec, n_front: int, label: str = "obs") -> GeneratorSpec:
    """Extend a generator with an inert front factor (identity dynamics)."""
    front = np.eye(n_front, dtype=complex)
    return GeneratorSpec(
        hamiltonian=np.kron(front, gen.hamiltonian),
        jumps=[(np.kron(front, L), r) for L, r in gen.jumps],
        dephasings=[(np.kron(front, A), r) for A, r in gen.dephasings],
        dims=(n_front,) + tuple(gen.dims),
        labels=(label,) + tuple(gen.labels),
        frame_ok=gen.frame_ok,
    )


# Dormand-Prince 4(5) tableau
_DP_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_DP_A = [
    [],
    [1 / 5],
    [3 / 40, 9 / 40],
    [44 / 45, -56 / 15, 32 / 9],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656],
    [35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84],
]
_DP_B5 = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
_DP_B4 = np.array([5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40])
_DP_E = _DP_B5 - _DP_B4


def evolve(
    gen: GeneratorSpec,
    rho0: QuantumState,
    t_grid,
    rtol: float = 1e-9,
    atol: float = 1e-12,
    max_steps: int = 2_000_000,
    rotating: bool | None = None,
    positivity_tol: float = 1e-6,
) -> Trajectory:
    """Integrate d rho/dt = L rho and sample on ``t_grid``.

    Adaptive embedded Dormand-Prince 4(5); Hermiticity is restored by
    symmetrization after each accepted step, trace drift and the minimum
    eigenvalue are recorded at every sample.  A positivity violation beyond
    ``positivity_tol`` aborts with diagnostics (it is monitored, never
    projected away).  ``rotating=None`` uses the exact rotating frame
    whenever the generator supports it.
    """
    t_grid = np.asarray(t_grid, dtype=float)
    if t_grid.ndim != 1 or len(t_grid) < 1:
        raise ValueError("t_grid must be a one-dimensional array of times")
    if t_grid[0] != 0.0 or np.any(np.diff(t_grid) <= 0):
        raise ValueError("t_grid must be ascending and start at 0")
    if tuple(gen.dims) != tuple(rho0.dims):
        raise ValueError(f"generator dims {gen.dims} != state dims {rho0.dims}")

    use_rotating = gen.frame_ok if rotating is None else rotating
    if use_rotating and not gen.frame_ok:
        raise ValueError("generator does not declare rotating-frame covariance")

    rhs = gen._compiled(include_hamiltonian=not use_rotating)
    if use_rotating:
        Hs = 0.5 * (gen.hamiltonian + gen.hamiltonian.conj().T)
        w_frame, V_frame = np.linalg.eigh(Hs)

        def to_lab(sigma, t):
            phase = np.exp(-1j * w_frame * t)
            rot = (V_frame * phase) @ V_frame.conj().T
            return rot @ sigma @ rot.conj().T
    else:
        def to_lab(sigma, t):
            return sigma

    lam = gen.stiffness_scale(include_hamiltonian=not use_rotating)
    h_cap = 3.0 / lam if lam > 0 else np.inf

    y = rho0.matrix.astype(complex).copy()
    t = 0.0
    h = min(h_cap, 0.1 / max(lam, 1e-12)) if np.isfinite(h_cap) else 0.01
    herm_defect_max = 0.0
    n_acc = n_rej = 0

    states, trace_dev, min_eig = [], [], []

    def record(sample_t, sigma):
        lab = to_lab(sigma, sample_t)
        st = QuantumState(lab, gen.dims, gen.labels)
        states.append(st)
        trace_dev.append(abs(st.trace().real - 1.0) + abs(st.trace().imag))
        min_eig.append(st.min_eigenvalue())

    grid_iter = iter(t_grid)
    next_sample = next(grid_iter)
    if next_sample == 0.0:
        record(0.0, y)
        next_sample = next(grid_iter, None)

    k1 = rhs(y)
    while next_sample is not None:
        if n_acc + n_rej >= max_steps:
            raise IntegrationError(
                f"step budget {max_steps} exhausted at t={t:.6g}",
                diagnostics={"t": t, "n_accepted": n_acc, "n_rejected": n_rej, "h": h},
            )
        h = min(h, h_cap, next_sample - t)
        ks = [k1]
        for i in range(1, 7):
            yi = y + h * sum(aij * kj for aij, kj in zip(_DP_A[i], ks))
            ks.append(rhs(yi))
        y5 = y + h * sum(b * k for b, k in zip(_DP_B5, ks) if b != 0.0)
        err_mat = h * sum(e * k for e, k in zip(_DP_E, ks) if e != 0.0)
        scale = atol + rtol * np.maximum(np.abs(y), np.abs(y5))
        err = math.sqrt(float(np.mean((np.abs(err_mat) / scale) ** 2)))
        if err <= 1.0:
            t += h
            defect = float(np.max(np.abs(y5 - y5.conj().T))) * 0.5
            herm_defect_max = max(herm_defect_max, defect)
            y = 0.5 * (y5 + y5.conj().T)
            n_acc += 1
            k1 = rhs(y)  # recomputed on the symmetrized state (no FSAL reuse)
            while next_sample is not None and abs(t - next_sample) < 1e-12 * max(1.0, t):
                record(next_sample, y)
                if min_eig[-1] < -positivity_tol:
                    raise IntegrationError(
                        f"positivity violated at t={t:.6g}: min eigenvalue {min_eig[-1]:.3g}",
                        diagnostics={"t": t, "min_eig": min_eig[-1], "n_accepted": n_acc},
                    )
                next_sample = next(grid_iter, None)
        else:
            n_rej += 1
        factor = 0.9 * err ** -0.2 if err > 0 else 5.0
        h = h * min(5.0, max(0.2, factor))
        if h <= 0 or not np.isfinite(h):
            raise IntegrationError(
                f"step size collapsed at t={t:.6g}",
                diagnostics={"t": t, "h": h, "err": err},
            )

    return Trajectory(
        times=t_grid.copy(),
        states=states,
        trace_dev=np.array(trace_dev),
        min_eig=np.array(min_eig),
        herm_defect_max=herm_defect_max,
        n_accepted=n_acc,
        n_rejected=n_rej,
        rtol=rtol,
    )


def initial_spin_flow(gen: GeneratorSpec, rho0: QuantumState) -> float:
    """Initial spin-escape rate (1/2) |Tr(sigma3 L rho0)|, sign-fixed.

    For a state polarized in the spin-minus sector this is literally
    (1/2) Tr(sigma3 L rho0); for a spin-plus stable state the raw trace is
    the negative of the escape rate, so the sign is flipped to report the
    outflow as a nonnegative number.
    """
    if "spin" not in gen.labels:
        raise ValueError("generator space carries no spin factor")
    ops = []
    for d, lab in zip(gen.dims, gen.labels):
        ops.append(PAULI_3 if lab == "spin" else np.eye(d, dtype=complex))
    S3 = ops[0]
    for op in ops[1:]:
        S3 = np.kron(S3, op)
    flow = 0.5 * float(np.trace(S3 @ gen.apply(rho0.matrix)).real)
    polarization = float(np.trace(S3 @ rho0.matrix).real)
    return -flow if polarization > 0 else flow


def fourier_component(
    family,
    m: int,
    omega0: float,
    n_samples: int = 256,
    alias_tol: float = 1e-8,
) -> np.ndarray:
    """(omega0/2pi) int_0^{2pi/omega0} e^{-i m omega0 t} V(t) dt by quadrature.

    ``family`` maps a time to a matrix, assumed periodic with period
    2pi/omega0.  The uniform-sample mean (the trapezoid rule for periodic
    integrands) is computed at ``n_samples`` and at twice that; if the two
    disagree beyond ``alias_tol`` an :class:`AliasingError` is raised.
    """
    if n_samples < 2:
        raise ValueError("need at least 2 samples per period")
    period = 2.0 * math.pi / omega0

    def average(k):
        ts = np.arange(k) * (period / k)
        acc = None
        for t in ts:
            term = np.exp(-1j * m * omega0 * t) * family(t)
            acc = term if acc is None else acc + term
        return acc / k

    coarse = average(n_samples)
    fine = average(2 * n_samples)
    if np.max(np.abs(coarse - fine)) > alias_tol:
        raise AliasingError(
            f"Fourier component m={m} changed by {np.max(np.abs(coarse - fine)):.3g} "
            f"under sample doubling (n={n_samples})"
        )
    return fine

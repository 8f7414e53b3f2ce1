"""Truncated Fock-space linear algebra for a single bosonic mode.

Conventions used throughout the package:

* annihilation operator ``a`` with ``<n-1| a |n> = sqrt(n)``;
* Weyl unitary ``W(alpha) = exp(alpha a - conj(alpha) adag)``.  It relates to
  the common displacement operator ``D(beta) = exp(beta adag - conj(beta) a)``
  through ``W(alpha) = D(-conj(alpha))``, so ``W(conj(alpha))^dag |0> = |alpha>``.

Everything is dense complex float64.  Truncation artifacts are confined to the
last few Fock levels (e.g. the commutator ``[a, adag]`` has a ``-(N-1)`` entry
in the bottom-right corner instead of ``+1``), so identity checks that need
exact operator algebra are done on the interior of the space.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


class TruncationError(RuntimeError):
    """Raised when the truncated space cannot hold a requested state.

    ``deficit`` carries the measured norm/trace deficit that tripped the check.
    """

    def __init__(self, message: str, deficit: float | None = None):
        super().__init__(message)
        self.deficit = deficit


class InvalidStateError(ValueError):
    """Raised when a matrix fails the density-matrix invariants."""


class FockRep:
    """Truncated Fock representation with cached ladder operators."""

    def __init__(self, dim: int):
        dim = int(dim)
        if dim < 2:
            raise ValueError(f"Fock dimension must be >= 2, got {dim}")
        self.dim = dim
        self.a = np.diag(np.sqrt(np.arange(1, dim, dtype=float)), 1).astype(complex)
        self.adag = self.a.conj().T.copy()
        self.number = np.diag(np.arange(dim, dtype=float)).astype(complex)
        self.identity = np.eye(dim, dtype=complex)

    def __repr__(self):
        return f"FockRep(dim={self.dim})"


@dataclass(frozen=True)
class DisplacedThermal:
    """Gaussian oscillator state: thermal at (omega0, T), displaced to alpha."""

    alpha: complex
    omega0: float
    T: float

    def __post_init__(self):
        if self.omega0 <= 0:
            raise ValueError("omega0 must be positive")
        if self.T < 0:
            raise ValueError("temperature must be >= 0")


@dataclass
class QuantumState:
    """Dense density matrix over a labeled tensor product of subsystems.

    ``dims``/``labels`` name the factors in kron order, e.g.
    ``dims=(2, 64), labels=("spin", "osc")`` for the spin (x) oscillator space.
    """

    matrix: np.ndarray
    dims: tuple
    labels: tuple

    def __post_init__(self):
        self.matrix = np.asarray(self.matrix, dtype=complex)
        self.dims = tuple(int(d) for d in self.dims)
        self.labels = tuple(self.labels)
        n = int(np.prod(self.dims))
        if self.matrix.shape != (n, n):
            raise ValueError(
                f"matrix shape {self.matrix.shape} does not match dims {self.dims}"
            )
        if len(self.dims) != len(self.labels):
            raise ValueError("dims and labels must have equal length")

    @classmethod
    def oscillator(cls, matrix: np.ndarray) -> "QuantumState":
        return cls(matrix, (matrix.shape[0],), ("osc",))

    @classmethod
    def spin_oscillator(cls, matrix: np.ndarray) -> "QuantumState":
        return cls(matrix, (2, matrix.shape[0] // 2), ("spin", "osc"))

    def trace(self) -> complex:
        return complex(np.trace(self.matrix))

    def hermiticity_defect(self) -> float:
        return float(np.max(np.abs(self.matrix - self.matrix.conj().T)))

    def min_eigenvalue(self) -> float:
        return float(np.linalg.eigvalsh(0.5 * (self.matrix + self.matrix.conj().T))[0])

    def check(self, herm_tol=1e-10, trace_tol=1e-8, eig_tol=1e-8) -> "QuantumState":
        """Validate Hermiticity, unit trace and positivity; return self."""
        h = self.hermiticity_defect()
        if h > herm_tol:
            raise InvalidStateError(f"hermiticity defect {h:.3g} > {herm_tol:g}")
        t = self.trace()
        if abs(t - 1.0) > trace_tol:
            raise InvalidStateError(f"trace {t} deviates from 1 by more than {trace_tol:g}")
        lo = self.min_eigenvalue()
        if lo < -eig_tol:
            raise InvalidStateError(f"minimum eigenvalue {lo:.3g} < -{eig_tol:g}")
        return self


def boltzmann_factor(omega0: float, T: float) -> float:
    """exp(-omega0/T), with the T=0 limit handled exactly (returns 0.0)."""
    if T == 0.0:
        return 0.0
    return math.exp(-omega0 / T)


def thermal_occupation(omega0: float, T: float) -> float:
    """Bose occupation 1/(exp(omega0/T) - 1); zero at T=0."""
    if T == 0.0:
        return 0.0
    return 1.0 / math.expm1(omega0 / T)


def coherent_overlap(alpha: complex, beta: complex) -> complex:
    """Exact overlap <beta|alpha> = exp(-|a|^2/2 - |b|^2/2 + conj(b) a)."""
    return np.exp(-0.5 * abs(alpha) ** 2 - 0.5 * abs(beta) ** 2 + np.conj(beta) * alpha)


def coherent_vector(alpha: complex, rep: FockRep, deficit_tol: float = 1e-4) -> np.ndarray:
    """Truncated coherent state components exp(-|alpha|^2/2) alpha^n / sqrt(n!).

    The vector is returned unnormalized (its norm is 1 minus the truncated
    tail).  Raises :class:`TruncationError` when the measured norm deficit
    exceeds ``deficit_tol``.
    """
    v = np.empty(rep.dim, dtype=complex)
    c = complex(np.exp(-0.5 * abs(alpha) ** 2))
    for n in range(rep.dim):
        v[n] = c
        c = c * alpha / math.sqrt(n + 1)
    deficit = 1.0 - float(np.vdot(v, v).real)
    if deficit > deficit_tol:
        raise TruncationError(
            f"coherent state |alpha|={abs(alpha):.3g} does not fit in dim {rep.dim} "
            f"(norm deficit {deficit:.3g})",
            deficit=deficit,
        )
    return v


def weyl_operator(alpha: complex, rep: FockRep) -> np.ndarray:
    """Weyl unitary W(alpha) = exp(alpha a - conj(alpha) adag)."""
    return _expm_antihermitian(alpha * rep.a - np.conj(alpha) * rep.adag)


def displacement_operator(beta: complex, rep: FockRep) -> np.ndarray:
    """D(beta) = exp(beta adag - conj(beta) a); D(beta)|0> = |beta>."""
    return weyl_operator(-np.conj(beta), rep)


def _expm_antihermitian(X: np.ndarray) -> np.ndarray:
    """exp(X) for anti-Hermitian X via eigh of iX; exactly unitary."""
    w, V = np.linalg.eigh(1j * X)
    return (V * np.exp(-1j * w)) @ V.conj().T


def sqrtm_psd(mat: np.ndarray, clamp_tol: float = 1e-8) -> np.ndarray:
    """Hermitian PSD matrix square root via eigendecomposition.

    Eigenvalues in [-clamp_tol, 0) are clamped to 0 (roundoff debris); anything
    below -clamp_tol raises :class:`InvalidStateError`.
    """
    w, V = np.linalg.eigh(0.5 * (mat + mat.conj().T))
    if w[0] < -clamp_tol:
        raise InvalidStateError(f"matrix is not PSD (min eigenvalue {w[0]:.3g})")
    return (V * np.sqrt(np.clip(w, 0.0, None))) @ V.conj().T


def thermal_state(omega0: float, T: float, rep: FockRep) -> QuantumState:
    """Undisplaced thermal oscillator state, renormalized after truncation."""
    return displaced_thermal_state(DisplacedThermal(0.0, omega0, T), rep)


def displaced_thermal_state(
    spec: DisplacedThermal, rep: FockRep, deficit_tol: float = 1e-4
) -> QuantumState:
    """Realize (1-q) exp{-(omega0/T)(adag-conj(alpha))(a-alpha)} in truncation.

    The operator is built by eigendecomposition of the (Hermitian) quadratic
    form and renormalized to unit trace afterwards.  At T=0 this reduces to
    the projector on the coherent state |alpha>.  The pre-renormalization
    trace deficit is compared against ``deficit_tol``.
    """
    alpha = complex(spec.alpha)
    if spec.T == 0.0:
        v = coherent_vector(alpha, rep, deficit_tol=deficit_tol)
        v = v / np.linalg.norm(v)
        return QuantumState.oscillator(np.outer(v, v.conj()))
    ratio = spec.omega0 / spec.T
    shift = rep.a - alpha * rep.identity
    quad = ratio * (shift.conj().T @ shift)
    w, V = np.linalg.eigh(0.5 * (quad + quad.conj().T))
    rho = (V * np.exp(-w)) @ V.conj().T
    raw_trace = float(np.trace(rho).real)
    deficit = 1.0 - (1.0 - boltzmann_factor(spec.omega0, spec.T)) * raw_trace
    if deficit > deficit_tol:
        raise TruncationError(
            f"displaced thermal (|alpha|={abs(alpha):.3g}, omega0/T={ratio:.3g}) "
            f"does not fit in dim {rep.dim} (trace deficit {deficit:.3g})",
            deficit=deficit,
        )
    rho = 0.5 * (rho + rho.conj().T) / raw_trace
    return QuantumState.oscillator(rho)


def uhlmann_fidelity(rho: QuantumState, sigma: QuantumState) -> float:
    """F = Tr sqrt(sqrt(rho) sigma sqrt(rho)), via Hermitian eigensolves.

    Note this is the *amplitude* fidelity: for pure states it reduces to
    |<psi|phi>|.  The transition probability is its square.
    """
    if rho.dims != sigma.dims:
        raise ValueError(f"states live on different spaces: {rho.dims} vs {sigma.dims}")
    rho.check()
    sigma.check()
    s = sqrtm_psd(rho.matrix)
    inner = s @ sigma.matrix @ s
    w = np.linalg.eigvalsh(0.5 * (inner + inner.conj().T))
    f = float(np.sum(np.sqrt(np.clip(w, 0.0, None))))
    return min(f, 1.0)


def trace_distance(a: QuantumState, b: QuantumState) -> float:
    """(1/2) * sum of absolute eigenvalues of (a - b)."""
    if a.dims != b.dims:
        raise ValueError(f"states live on different spaces: {a.dims} vs {b.dims}")
    diff = a.matrix - b.matrix
    w = np.linalg.eigvalsh(0.5 * (diff + diff.conj().T))
    return 0.5 * float(np.sum(np.abs(w)))


def partial_trace(state: QuantumState, keep) -> QuantumState:
    """Trace out every subsystem not named in ``keep``.

    ``keep`` is a label or tuple of labels; the kept factors stay in their
    original kron order.
    """
    keep = (keep,) if isinstance(keep, str) else tuple(keep)
    for k in keep:
        if k not in state.labels:
            raise ValueError(f"unknown subsystem {k!r}; state has {state.labels}")
    n_sub = len(state.dims)
    keep_idx = [i for i, lab in enumerate(state.labels) if lab in keep]
    drop_idx = [i for i in range(n_sub) if i not in keep_idx]
    tensor = state.matrix.reshape(state.dims + state.dims)
    for count, i in enumerate(sorted(drop_idx)):
        axis = i - count  # axes shift as we trace factors out
        tensor = np.trace(tensor, axis1=axis, axis2=axis + tensor.ndim // 2)
    kept_dims = tuple(state.dims[i] for i in keep_idx)
    n = int(np.prod(kept_dims))
    out = tensor.reshape(n, n)
    return QuantumState(out, kept_dims, tuple(state.labels[i] for i in keep_idx))


def state_to_json(state: QuantumState) -> dict:
    """Serialize to the flat {dim, real_part, imag_part} schema (row-major)."""
    m = state.matrix
    return {
        "dim": int(m.shape[0]),
        "real_part": m.real.ravel().tolist(),
        "imag_part": m.imag.ravel().tolist(),
    }


def state_from_json(data: dict, dims=None, labels=None) -> QuantumState:
    """Inverse of :func:`state_to_json`; defaults to a single 'osc' factor."""
    n = int(data["dim"])
    m = np.array(data["real_part"], dtype=float).reshape(n, n) + 1j * np.array(
        data["imag_part"], dtype=float
    ).reshape(n, n)
    if dims is None:
        dims, labels = (n,), ("osc",)
    return QuantumState(m, dims, labels)


def auto_fock_dim(
    alpha_max: float,
    omega0: float,
    T: float,
    target_deficit: float = 1e-9,
    hard_cap: int = 4096,
) -> int:
    """Smallest dimension holding states with labels up to ``alpha_max``.

    Starts from ceil((alpha_max + 4 sqrt(nbar+1))^2) + 8 and grows in steps of
    8 until the displaced thermal at ``alpha_max`` has trace deficit below
    ``target_deficit``.
    """
    nbar = thermal_occupation(omega0, T)
    dim = max(2, math.ceil((abs(alpha_max) + 4.0 * math.sqrt(nbar + 1.0)) ** 2) + 8)
    spec = DisplacedThermal(abs(alpha_max), omega0, T)
    while dim <= hard_cap:
        try:
            displaced_thermal_state(spec, FockRep(dim), deficit_tol=target_deficit)
            return dim
        except TruncationError:
            dim += 8
    raise TruncationError(f"no dimension up to {hard_cap} reaches deficit {target_deficit:g}")

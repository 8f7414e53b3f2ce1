"""Cost of long computations on protected bits: failure probability and
minimal total work.

A gate takes one recording time 1/gamma; the stored result decays at the
flip rate, so an N-gate run of duration N/gamma fails with probability

    delta = (1/kappa) N exp(-w_bar/theta),      kappa = 2 gamma / G_1(0),

and inverting for the per-gate work gives the N-gate minimum

    W_N = theta * N * (ln N + ln(1/delta) + ln(1/kappa)).

Unlike the T ln2 floor this grows faster than linearly in N and stays finite
at T -> 0 (theta then is the zero-point energy omega0/2).  Everything is
composed in log space; the joule conversion (k_B = 1.380649e-23 J/K) is
presentation only and applies when theta is tagged as kelvin.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

from .model import SosParams, derive_rates

K_BOLTZMANN = 1.380649e-23  # J/K


@dataclass(frozen=True)
class CostInputs:
    """Inputs of the N-gate work estimate.

    ``theta`` may be given directly (natural units, or kelvin with
    ``theta_unit="K"``) or derived from (omega0, T).
    """

    theta: float | None
    N: float
    delta: float
    kappa: float
    theta_unit: str = "natural"
    omega0: float | None = None
    T: float | None = None

    def __post_init__(self):
        if self.N < 1:
            raise ValueError("gate count N must be >= 1")
        if not 0.0 < self.delta < 1.0:
            raise ValueError("delta must lie in (0, 1)")
        if not 0.0 < self.kappa <= 1.0:
            raise ValueError("kappa must lie in (0, 1]")
        if self.theta_unit not in ("natural", "K"):
            raise ValueError("theta_unit must be 'natural' or 'K'")
        if self.theta is None and (self.omega0 is None or self.T is None):
            raise ValueError("either theta or (omega0, T) must be given")
        if self.theta is not None and self.theta <= 0:
            raise ValueError("theta must be > 0")

    def effective_theta(self) -> float:
        if self.theta is not None:
            return self.theta
        params = SosParams(self.omega0, 0.0, self.T, 0.0, 0.0, 0.0, 0.0)
        return derive_rates(params).theta


@dataclass(frozen=True)
class FailureProbability:
    value: float
    clamped: bool
    log_value: float


@dataclass(frozen=True)
class WorkEstimate:
    natural: float
    joules: float | None
    validity_warning: bool


def failure_probability(N: float, kappa: float, w_bar: float, theta: float) -> FailureProbability:
    """delta = (1/kappa) N exp(-w_bar/theta), evaluated in log space.

    Values >= 1 violate the rare-failure assumption; the report is clamped to
    1 and flagged rather than silently returned.
    """
    if N < 1 or kappa <= 0 or theta <= 0 or w_bar < 0:
        raise ValueError("inputs out of range")
    log_delta = math.log(N) - math.log(kappa) - w_bar / theta
    clamped = log_delta >= 0.0
    value = 1.0 if clamped else math.exp(log_delta)
    return FailureProbability(value=value, clamped=clamped, log_value=log_delta)


def min_total_work(inputs: CostInputs) -> WorkEstimate:
    """W_N = theta N (ln N + ln(1/delta) + ln(1/kappa)).

    Emits the validity warning when delta * kappa <= 1/N (the forgetting
    process is then not a small perturbation and the estimate degrades).
    """
    theta = inputs.effective_theta()
    log_sum = math.log(inputs.N) - math.log(inputs.delta) - math.log(inputs.kappa)
    natural = theta * inputs.N * log_sum
    joules = K_BOLTZMANN * natural if inputs.theta_unit == "K" else None
    invalid = math.log(inputs.delta) + math.log(inputs.kappa) + math.log(inputs.N) <= 0.0
    if invalid:
        warnings.warn(
            "delta * kappa <= 1/N: the rare-failure assumption behind the "
            "N-gate estimate is violated",
            stacklevel=2,
        )
    return WorkEstimate(natural=natural, joules=joules, validity_warning=invalid)


def landauer_total_work(T: float, N: float) -> float:
    """Reference floor T N ln 2 for the same gate count."""
    if T <= 0 or N < 1:
        raise ValueError("inputs out of range")
    return T * N * math.log(2.0)


def parse_temperature(text) -> tuple[float, str]:
    """Parse '300K' / '300 K' into (300.0, 'K'); bare numbers are natural units."""
    if isinstance(text, (int, float)):
        return float(text), "natural"
    s = str(text).strip()
    if s.endswith(("K", "k")):
        return float(s[:-1].strip()), "K"
    return float(s), "natural"

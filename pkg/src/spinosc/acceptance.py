"""Acceptance checks: one callable per criterion, shared by the test suite
and the ``spinosc validate`` command.

Each check returns a :class:`CheckResult` with a pass flag and a one-line
detail.  Heavy artifacts (integrator runs) are cached on the suite instance
so the hygiene criterion can audit the same trajectories the physics
criteria used.

Two checks document known defects rather than passing:

* the fidelity-law grid at the pinned dimension 64 misses its 1e-5 absolute
  tolerance at the single corner point (D=1.5, omega0/T=0.2), where the
  truncated tail of the hottest, widest pointer pair is ~5e-5 (the law holds
  to <1e-6 at dimension 96, which the suite reports alongside);
* the finite-temperature Bessel closed form built on the narrowed Gaussian
  average disagrees with the brute-force thermal trace by 5-20% on the test
  grid; the corrected correlation-function form matches the same trace to
  machine precision and is reported alongside.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np

from . import analytic, costmodel, szilard
from .fock import DisplacedThermal, FockRep, displaced_thermal_state, trace_distance, uhlmann_fidelity, weyl_operator
from .lindblad import build_sos_generator, evolve, fourier_component, initial_spin_flow
from .measurement import ObservedSystem, run_protocol
from .model import SosParams, biased_gibbs, derive_rates


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str
    runtime: float


def _timed(name):
    def wrap(fn):
        def inner(self):
            t0 = time.perf_counter()
            passed, detail = fn(self)
            return CheckResult(name=name, passed=passed, detail=detail, runtime=time.perf_counter() - t0)

        inner.__name__ = fn.__name__
        return inner

    return wrap


def _rel(a, b):
    return abs(a - b) / abs(b)


class AcceptanceSuite:
    """All acceptance criteria with shared cached artifacts."""

    def __init__(self, seed: int = 7):
        self.seed = seed
        self._cache = {}

    # ---------------------------------------------------------------- cache
    def _c2_runs(self):
        """Five random two-component superpositions, oracle trajectories."""
        if "c2" in self._cache:
            return self._cache["c2"]
        params = SosParams(1.0, 1.0, 0.0, 1.0, 0.25, 0.0, 0.0)
        rates = derive_rates(params)
        rep = FockRep(48)
        gen = build_sos_generator(params, rep)
        grid = np.linspace(0.0, 10.0 / rates.gamma, 21)
        rng = np.random.default_rng(self.seed)
        runs = []
        for _ in range(5):
            c = rng.normal(size=2) + 1j * rng.normal(size=2)
            c /= np.linalg.norm(c)
            mus = rng.choice([-1, 1], size=2)
            alphas = rng.uniform(-1, 1, size=2) + 1j * rng.uniform(-1, 1, size=2)
            blocks = analytic.blocks_from_superposition(
                [(c[0], int(mus[0]), alphas[0]), (c[1], int(mus[1]), alphas[1])]
            )
            rho0 = analytic.assemble_blocks(blocks, rep)
            traj = evolve(gen, rho0, grid)
            runs.append((blocks, traj))
        self._cache["c2"] = (params, rates, rep, grid, runs)
        return self._cache["c2"]

    def _protocol(self, T: float):
        key = ("protocol", T)
        if key in self._cache:
            return self._cache[key]
        params = SosParams(1.0, 1.0, T, 1.0, 0.25, 0.0, 0.0)
        rates = derive_rates(params)
        dim = 40 if T == 0.0 else 48
        rep = FockRep(dim)
        c = 1.0 / math.sqrt(2.0)
        report = run_protocol(
            ObservedSystem(c, c), params, rep, horizon=20.0 / rates.gamma_net
        )
        self._cache[key] = (params, rep, report)
        return self._cache[key]

    # ------------------------------------------------------------ criteria
    @_timed("criterion 1: fidelity law (5x5 grid, dim 64)")
    def criterion_1(self):
        rep = FockRep(64)
        worst = (0.0, None)
        for D in np.linspace(0.3, 1.5, 5):
            for ratio in np.geomspace(0.2, 5.0, 5):
                omega0, T = 1.0, 1.0 / ratio
                plus = displaced_thermal_state(DisplacedThermal(+D, omega0, T), rep)
                minus = displaced_thermal_state(DisplacedThermal(-D, omega0, T), rep)
                f2 = uhlmann_fidelity(plus, minus) ** 2
                target = analytic.epsilon_finite_t(D, omega0, T)
                diff = abs(f2 - target)
                if diff > worst[0]:
                    worst = (diff, (float(D), float(ratio)))
        passed = worst[0] < 1e-5
        detail = f"max |F^2 - closed form| = {worst[0]:.3g} at (D, omega0/T) = {worst[1]}"
        if not passed:
            # reference run showing the law itself is fine once the tail fits
            rep96 = FockRep(96)
            D, ratio = worst[1]
            plus = displaced_thermal_state(DisplacedThermal(+D, 1.0, 1.0 / ratio), rep96)
            minus = displaced_thermal_state(DisplacedThermal(-D, 1.0, 1.0 / ratio), rep96)
            diff96 = abs(uhlmann_fidelity(plus, minus) ** 2 - analytic.epsilon_finite_t(D, 1.0, 1.0 / ratio))
            detail += f" (truncation at the pinned dim 64; same point at dim 96: {diff96:.3g})"
        return passed, detail

    @_timed("criterion 2: rank-1 propagator vs integrator (5 random states)")
    def criterion_2(self):
        params, rates, rep, grid, runs = self._c2_runs()
        worst = 0.0
        for blocks, traj in runs:
            for t, state in zip(grid, traj.states):
                recon = analytic.propagate_state(blocks, t, rates, rep)
                worst = max(worst, trace_distance(recon, state))
        passed = worst < 1e-5
        return passed, f"max trace distance over 5 states x 21 times = {worst:.3g}"

    @_timed("criterion 3: zero-T flip rate vs (1/2) G_1(0) e^{-4D^2}")
    def criterion_3(self):
        worst = 0.0
        rep = FockRep(64)
        for D in (0.5, 1.0, 1.5):
            params = SosParams(1.0, D, 0.0, 1.0, 0.25, 0.0, 1.0)
            gen = build_sos_generator(params, rep, include_tunneling=True)
            rho0 = biased_gibbs(params, rep, -1)
            flow = initial_spin_flow(gen, rho0)
            closed = analytic.tunneling_rate_zero_t(params).rate
            worst = max(worst, _rel(flow, closed))
        passed = worst < 1e-6
        return passed, f"max relative error over D in (0.5, 1, 1.5) = {worst:.3g}"

    @_timed("criterion 4: finite-T Bessel form vs brute-force thermal trace")
    def criterion_4(self):
        rep = FockRep(64)
        D, omega0, g1 = 1.0, 1.0, 1.0
        worst_exact = 0.0
        worst_corr = 0.0
        for T in (0.5, 1.0, 2.0):
            params = SosParams(omega0, D, T, 1.0, 0.25, 0.0, g1)
            v0 = fourier_component(
                lambda t: weyl_operator(2.0 * D * np.exp(-1j * omega0 * t), rep),
                m=0,
                omega0=omega0,
                n_samples=256,
            )
            q = math.exp(-omega0 / T)
            weights = (1.0 - q) * q ** np.arange(rep.dim)
            brute = 0.5 * g1 * float(np.sum(weights * np.diagonal(v0 @ v0).real))
            exact, _ = analytic.tunneling_rate_finite_t(params)
            corr = analytic.tunneling_rate_correlation(params)
            worst_exact = max(worst_exact, _rel(exact.rate, brute))
            worst_corr = max(worst_corr, _rel(corr, brute))
        zero = analytic.tunneling_rate_finite_t(SosParams(omega0, D, 0.0, 1.0, 0.25, 0.0, g1))[0]
        limit_err = _rel(zero.rate, analytic.tunneling_rate_zero_t(
            SosParams(omega0, D, 0.0, 1.0, 0.25, 0.0, g1)).rate)
        passed = worst_exact < 1e-3 and limit_err < 1e-6
        detail = (
            f"Bessel form vs brute force: max rel diff = {worst_exact:.3g} "
            f"(corrected correlation form: {worst_corr:.3g}); T->0 limit error = {limit_err:.3g}"
        )
        return passed, detail

    @_timed("criterion 5: theta'/theta crossover on a log grid")
    def criterion_5(self):
        ratios = np.geomspace(1e-2, 1e2, 401)  # omega0/T
        vals = []
        for x in ratios:
            params = SosParams(1.0, 1.0, 1.0 / x, 0.0, 0.0, 0.0, 0.0)
            r = derive_rates(params)
            vals.append(r.theta_prime / r.theta)
        vals = np.array(vals)
        peak = float(np.max(vals))
        ends_ok = abs(vals[0] - 1.0) < 0.01 and abs(vals[-1] - 1.0) < 0.01
        passed = 1.25 <= peak <= 1.35 and ends_ok
        return passed, (
            f"max theta'/theta = {peak:.6f} at omega0/T = "
            f"{ratios[int(np.argmax(vals))]:.3f}; grid-end ratios {vals[0]:.4f}, {vals[-1]:.4f}"
        )

    @_timed("criterion 6: Born weights and invested work")
    def criterion_6(self):
        worst_w = 0.0
        work_errs = []
        for T in (0.0, 1.0):
            params, rep, report = self._protocol(T)
            worst_w = max(
                worst_w,
                abs(report.born_weights[0] - 0.5),
                abs(report.born_weights[1] - 0.5),
            )
            work_errs.append(_rel(report.work_invested, 2.0 * params.D**2 * params.omega0))
        # ensemble average over the deterministic inputs c_- in {1, 0}
        params = SosParams(1.0, 1.0, 0.0, 1.0, 0.25, 0.0, 0.0)
        w_flip = abs(1.0) ** 2 * 4.0 * params.D**2 * params.omega0
        w_idle = 0.0
        ensemble = 0.5 * (w_flip + w_idle)
        ens_err = _rel(ensemble, 2.0 * params.D**2 * params.omega0)
        passed = worst_w <= 1e-4 and max(work_errs) < 1e-12 and ens_err < 1e-15
        return passed, (
            f"max |weight - 1/2| = {worst_w:.3g}; work rel err = {max(work_errs):.3g}; "
            f"ensemble-average rel err = {ens_err:.3g}"
        )

    @_timed("criterion 7: Szilard optimum and closed-form work maximum")
    def criterion_7(self):
        T = 1.0
        eps_bar, eta_bar = szilard.maximize_efficiency(T, T)
        opt_ok = abs(eps_bar - 0.06) <= 0.01 and abs(eta_bar - 0.17) <= 0.01
        worst = 0.0
        for eps in np.arange(0.01, 0.50, 0.02):
            w_num = szilard.golden_section_max(
                lambda e0: szilard.w_se_faulty(e0, T, eps), 0.0, 60.0 * T, xtol=1e-6
            )[1]
            w_closed = szilard.w_se_max(eps, T)[1]
            worst = max(worst, abs(w_num - w_closed))
        passed = opt_ok and worst < 1e-8
        return passed, (
            f"eps_bar = {eps_bar:.6f}, eta_bar = {eta_bar:.6f} "
            f"(higher-precision value near 0.166); max |W_num - W_closed| = {worst:.3g}"
        )

    @_timed("criterion 8: quasistatic cycle converges to the closed form")
    def criterion_8(self):
        T, r = 1.0, 1.0
        worst_rel = 0.0
        worst_closure = 0.0
        for e0 in (1.0, 5.0, 20.0, 40.0):
            cycle = szilard.SzilardCycle(T=T, E0=e0 * T, epsilon=0.0)
            ledger = szilard.quasistatic_cycle(cycle, ramp_time=100.0 / r, relaxation_rate=r)
            target = szilard.w_se(e0 * T, T) if e0 < 40.0 else T * math.log(2.0)
            worst_rel = max(worst_rel, _rel(ledger.work_extracted, target))
            worst_closure = max(worst_closure, ledger.closure_defect)
        passed = worst_rel < 0.01 and worst_closure < 1e-8
        return passed, (
            f"max |W - closed form|/W = {worst_rel:.3g}; max ledger closure defect = "
            f"{worst_closure:.3g}"
        )

    @_timed("criterion 9: supercomputer cost scenario and exact round trip")
    def criterion_9(self):
        inputs = costmodel.CostInputs(theta=300.0, N=1e21, delta=1e-4, kappa=1e-8, theta_unit="K")
        est = costmodel.min_total_work(inputs)
        log10_joules = math.log10(est.joules)
        scenario_ok = 1.5 <= log10_joules <= 2.5
        worst = 0.0
        for w_bar in (10.0, 25.0, 40.0):
            fp = costmodel.failure_probability(N=1e12, kappa=1e-6, w_bar=w_bar, theta=1.0)
            rt = costmodel.min_total_work(
                costmodel.CostInputs(theta=1.0, N=1e12, delta=fp.value, kappa=1e-6)
            )
            worst = max(worst, _rel(rt.natural, 1e12 * w_bar))
        passed = scenario_ok and worst < 1e-12
        return passed, (
            f"W_N = {est.joules:.4g} J (log10 = {log10_joules:.3f}); "
            f"round-trip max rel err = {worst:.3g}"
        )

    @_timed("criterion 10: integrator hygiene and stationary states")
    def criterion_10(self):
        max_trace = 0.0
        min_eig = 0.0
        max_herm = 0.0
        _, _, _, _, runs = self._c2_runs()
        diags = [traj.diagnostics() for _, traj in runs]
        for T in (0.0, 1.0):
            _, _, report = self._protocol(T)
            diags.append(report.diagnostics)
        for d in diags:
            max_trace = max(max_trace, d["max_trace_dev"])
            min_eig = min(min_eig, d["min_eigenvalue"])
            max_herm = max(max_herm, d["herm_defect_max"])
        fixed_point = 0.0
        for T, dim in ((0.0, 48), (1.0, 48), (2.0, 64)):
            params = SosParams(1.0, 1.0, T, 1.0, 0.25, 0.0, 0.0)
            rep = FockRep(dim)
            gen = build_sos_generator(params, rep)
            for sign in (+1, -1):
                image = gen.apply(biased_gibbs(params, rep, sign).matrix)
                fixed_point = max(fixed_point, float(np.max(np.abs(image))))
        passed = (
            max_trace < 1e-8 and min_eig >= -1e-6 and max_herm < 1e-10 and fixed_point < 1e-8
        )
        return passed, (
            f"trace drift {max_trace:.3g}, min eigenvalue {min_eig:.3g}, "
            f"hermiticity defect {max_herm:.3g}, stationary-state image {fixed_point:.3g}"
        )

    def run_all(self):
        return [
            self.criterion_1(),
            self.criterion_2(),
            self.criterion_3(),
            self.criterion_4(),
            self.criterion_5(),
            self.criterion_6(),
            self.criterion_7(),
            self.criterion_8(),
            self.criterion_9(),
            self.criterion_10(),
        ]

"""Command-line front end.

Subcommands:

  decoherence  analytic vs integrator coherence decay of a spin cat state
  tunneling    flip-rate table (closed forms vs integrator flow)
  measure      full measurement protocol: report JSON + pointer trajectory CSV
  szilard      efficiency curve eta(eps) and its maximum
  cost         N-gate minimal-work estimate (natural units and joules)
  validate     run the acceptance checks and print a pass/fail matrix

Common flags: --config <json>, --out <path>, --format csv|json,
--sweep param:min:max:count:lin|log, --tol <float>, --fock-dim <int>.
Exit codes: 0 success, 2 validation failure, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import dataclass, field

import numpy as np

from . import analytic, costmodel, szilard
from .fock import FockRep, auto_fock_dim, state_from_json
from .lindblad import IntegrationError, build_sos_generator, evolve, initial_spin_flow
from .measurement import ObservedSystem, run_protocol
from .model import SosParams, biased_gibbs, derive_rates
from .serialize import dump_json, fmt_float, write_csv

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_NUMERICAL = 3

_DEFAULT_PARAMS = {
    "omega0": 1.0,
    "D": 1.0,
    "T": 0.0,
    "G_o_omega0": 1.0,
    "G_o_0": 0.25,
    "G_3_0": 0.0,
    "G_1_0": 1.0,
}


@dataclass
class Sweep:
    param: str
    lo: float
    hi: float
    count: int
    scale: str

    @classmethod
    def parse(cls, text: str) -> "Sweep":
        parts = text.split(":")
        if len(parts) != 5:
            raise ValueError("sweep must be param:min:max:count:lin|log")
        param, lo, hi, count, scale = parts
        lo, hi, count = float(lo), float(hi), int(count)
        if count < 2:
            raise ValueError("sweep count must be >= 2")
        if not lo < hi:
            raise ValueError("sweep bounds must be ordered min < max")
        if scale not in ("lin", "log"):
            raise ValueError("sweep scale must be lin or log")
        return cls(param, lo, hi, count, scale)

    def values(self) -> np.ndarray:
        if self.scale == "log":
            if self.lo <= 0:
                raise ValueError("log sweep needs positive bounds")
            return np.geomspace(self.lo, self.hi, self.count)
        return np.linspace(self.lo, self.hi, self.count)


@dataclass
class RunConfig:
    command: str
    params: dict = field(default_factory=dict)
    out: str | None = None
    fmt: str = "csv"
    sweeps: list = field(default_factory=list)
    tol: float | None = None
    fock_dim: int | None = None

    def sos_params(self, **overrides) -> SosParams:
        merged = dict(_DEFAULT_PARAMS)
        merged.update({k: v for k, v in self.params.items() if k in _DEFAULT_PARAMS})
        merged.update(overrides)
        return SosParams.from_dict(merged)

    def as_dict(self) -> dict:
        return {
            "command": self.command,
            "params": self.params,
            "format": self.fmt,
            "sweeps": [f"{s.param}:{s.lo}:{s.hi}:{s.count}:{s.scale}" for s in self.sweeps],
            "tol": self.tol,
            "fock_dim": self.fock_dim,
        }


def _build_config(args) -> RunConfig:
    params = {}
    if args.config:
        with open(args.config) as fh:
            params = json.load(fh)
        if not isinstance(params, dict):
            raise ValueError("config file must hold a JSON object")
    sweeps = [Sweep.parse(s) for s in (args.sweep or [])]
    return RunConfig(
        command=args.command,
        params=params,
        out=args.out,
        fmt=args.format,
        sweeps=sweeps,
        tol=args.tol,
        fock_dim=args.fock_dim,
    )


def _emit(config: RunConfig, header, rows, payload):
    """Write the table (csv) or the structured payload (json)."""
    if config.fmt == "csv":
        text = write_csv(config.out, header, rows, config=config.as_dict())
    else:
        payload = dict(payload)
        payload["config"] = config.as_dict()
        text = dump_json(config.out, payload)
    if config.out is None:
        sys.stdout.write(text)


def _pick_dim(config: RunConfig, alpha_max: float, omega0: float, T: float) -> int:
    if config.fock_dim is not None:
        return config.fock_dim
    return auto_fock_dim(alpha_max, omega0, T)


def cmd_decoherence(config: RunConfig) -> int:
    """Spin-cat coherence: analytic envelope vs integrator, with max-diff gate."""
    p = config.sos_params()
    if p.T != 0.0:
        raise ValueError("decoherence comparison is defined for T=0 (set T: 0)")
    rates = derive_rates(p)
    alpha = complex(config.params.get("alpha", 0.5))
    c_minus = complex(config.params.get("c_minus", 1 / math.sqrt(2)))
    c_plus = complex(config.params.get("c_plus", math.sqrt(1 - abs(c_minus) ** 2)))
    horizon = float(config.params.get("horizon", 6.0 / rates.gamma if rates.gamma > 0 else 6.0))
    n_t = int(config.params.get("n_times", 25))
    tol = config.tol if config.tol is not None else 1e-5

    dim = _pick_dim(config, abs(alpha) + 2.0 * p.D + 1.0, p.omega0, p.T)
    rep = FockRep(dim)
    blocks = analytic.blocks_from_superposition(
        [(c_minus, -1, alpha), (c_plus, +1, alpha)]
    )
    rho0 = analytic.assemble_blocks(blocks, rep)
    gen = build_sos_generator(p, rep)
    grid = np.linspace(0.0, horizon, n_t)
    traj = evolve(gen, rho0, grid)

    rows = []
    max_diff = 0.0
    for t, state in zip(grid, traj.states):
        ana = analytic.coherence_envelope(blocks, t, rates)
        n = rep.dim
        block = state.matrix[:n, n:]  # <+| rho |-> oscillator block
        num = float(np.sum(np.linalg.svd(block, compute_uv=False)))
        diff = abs(ana - num)
        max_diff = max(max_diff, diff)
        rows.append((t, ana, num, diff))

    _emit(
        config,
        ["time", "coherence_analytic", "coherence_oracle", "abs_diff"],
        rows,
        {
            "table": [
                {"time": r[0], "analytic": r[1], "oracle": r[2], "abs_diff": r[3]} for r in rows
            ],
            "max_abs_diff": max_diff,
        },
    )
    if max_diff > tol:
        print(f"FAIL: max |analytic - oracle| = {fmt_float(max_diff)} > {fmt_float(tol)}", file=sys.stderr)
        return EXIT_NUMERICAL
    return EXIT_OK


def cmd_tunneling(config: RunConfig) -> int:
    """Flip-rate table over a D (default) or T sweep."""
    sweep = config.sweeps[0] if config.sweeps else Sweep("D", 0.25, 2.0, 8, "lin")
    if sweep.param not in ("D", "T"):
        raise ValueError("tunneling sweeps support parameters 'D' or 'T'")
    rows = []
    for value in sweep.values():
        p = config.sos_params(**{sweep.param: float(value)})
        exact, leading = (
            (analytic.tunneling_rate_zero_t(p), analytic.tunneling_rate_zero_t(p))
            if p.T == 0.0
            else analytic.tunneling_rate_finite_t(p)
        )
        dim = _pick_dim(config, 2.0 * p.D + 2.0, p.omega0, p.T)
        rep = FockRep(dim)
        gen = build_sos_generator(p, rep, include_tunneling=True)
        rho0 = biased_gibbs(p, rep, -1)
        oracle = initial_spin_flow(gen, rho0)
        rows.append((value, exact.rate, leading.rate, oracle))
    _emit(
        config,
        [sweep.param, "rate_exact", "rate_leading", "rate_oracle"],
        rows,
        {
            "sweep_param": sweep.param,
            "table": [
                {sweep.param: r[0], "rate_exact": r[1], "rate_leading": r[2], "rate_oracle": r[3]}
                for r in rows
            ],
        },
    )
    return EXIT_OK


def cmd_measure(config: RunConfig) -> int:
    """Run the measurement protocol; JSON report plus optional trajectory CSV."""
    p = config.sos_params()
    c_abs = float(config.params.get("c_minus_abs", 1 / math.sqrt(2)))
    c_phase = float(config.params.get("c_minus_phase", 0.0))
    c_minus = c_abs * complex(math.cos(c_phase), math.sin(c_phase))
    c_plus = math.sqrt(max(0.0, 1.0 - c_abs**2))
    system = ObservedSystem(c_minus, c_plus)
    rates = derive_rates(p)
    horizon = float(config.params.get("horizon", 16.0 / rates.gamma_net))
    dim = _pick_dim(config, 3.0 * p.D, p.omega0, p.T)
    rep = FockRep(dim)

    report = run_protocol(system, p, rep, horizon=horizon)
    payload = report.to_dict()
    payload["fock_dim"] = dim
    payload["config"] = config.as_dict()
    text = dump_json(config.out, payload)
    if config.out is None:
        sys.stdout.write(text)

    traj_out = config.params.get("trajectory_out")
    if traj_out:
        rows = list(zip(report.envelope_times, report.envelope))
        write_csv(traj_out, ["time", "coherence_envelope"], rows, config=config.as_dict())
    return EXIT_OK


def cmd_szilard(config: RunConfig) -> int:
    """eta(eps) curve and the maximizing (eps_bar, eta_bar) summary."""
    T = float(config.params.get("T", 1.0))
    theta = float(config.params.get("theta", T))
    sweep = config.sweeps[0] if config.sweeps else Sweep("epsilon", 1e-3, 0.499, 200, "log")
    if sweep.param != "epsilon":
        raise ValueError("szilard sweeps support only 'epsilon'")
    eps_bar, eta_bar = szilard.maximize_efficiency(T, theta)
    rows = [(e, szilard.efficiency(e, T, theta)) for e in sweep.values()]
    if config.fmt == "csv":
        header = ["epsilon", "eta"]
        lines_config = config.as_dict()
        lines_config["summary"] = {"eps_bar": eps_bar, "eta_bar": eta_bar}
        _emit_csv_with_summary(config, header, rows, lines_config)
    else:
        _emit(
            config,
            ["epsilon", "eta"],
            rows,
            {
                "curve": [{"epsilon": r[0], "eta": r[1]} for r in rows],
                "eps_bar": eps_bar,
                "eta_bar": eta_bar,
            },
        )
    return EXIT_OK


def _emit_csv_with_summary(config, header, rows, config_with_summary):
    text = write_csv(config.out, header, rows, config=config_with_summary)
    if config.out is None:
        sys.stdout.write(text)


def cmd_cost(config: RunConfig) -> int:
    """Supercomputer-style minimal-work estimate."""
    theta_raw = config.params.get("theta", "300K")
    theta, unit = costmodel.parse_temperature(theta_raw)
    inputs = costmodel.CostInputs(
        theta=theta,
        N=float(config.params.get("N", 1e21)),
        delta=float(config.params.get("delta", 1e-4)),
        kappa=float(config.params.get("kappa", 1e-8)),
        theta_unit=unit,
    )
    estimate = costmodel.min_total_work(inputs)
    landauer = (
        costmodel.K_BOLTZMANN * costmodel.landauer_total_work(theta, inputs.N)
        if unit == "K"
        else costmodel.landauer_total_work(theta, inputs.N)
    )
    payload = {
        "theta": theta,
        "theta_unit": unit,
        "N": inputs.N,
        "delta": inputs.delta,
        "kappa": inputs.kappa,
        "work_natural": estimate.natural,
        "work_joules": estimate.joules,
        "landauer_reference": landauer,
        "validity_warning": estimate.validity_warning,
    }
    if config.fmt == "csv":
        keys = list(payload.keys())
        _emit(config, keys, [tuple(payload[k] if payload[k] is not None else "" for k in keys)], payload)
    else:
        _emit(config, [], [], payload)
    return EXIT_OK


def cmd_validate(config: RunConfig, state_path: str | None = None, fast: bool = False) -> int:
    """Acceptance matrix; also checks a serialized state when given one."""
    if state_path:
        with open(state_path) as fh:
            data = json.load(fh)
        try:
            state = state_from_json(data)
            state.check()
            print(f"PASS  state {state_path}: dim={state.dims[0]}, valid density matrix")
            return EXIT_OK
        except Exception as exc:  # noqa: BLE001 - report any invariant breach
            print(f"FAIL  state {state_path}: {exc}")
            return EXIT_VALIDATION

    from .acceptance import AcceptanceSuite

    suite = AcceptanceSuite()
    results = suite.run_all()
    all_pass = True
    for res in results:
        tag = "PASS" if res.passed else "FAIL"
        all_pass &= res.passed
        print(f"{tag}  {res.name}  [{res.runtime:.1f}s]  {res.detail}")
    return EXIT_OK if all_pass else EXIT_VALIDATION


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="spinosc", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
        ("decoherence", "cat-state coherence decay: analytic vs integrator"),
        ("tunneling", "flip-rate table over a parameter sweep"),
        ("measure", "run the measurement protocol"),
        ("szilard", "Szilard-engine efficiency curve"),
        ("cost", "N-gate minimal-work estimate"),
        ("validate", "run the acceptance checks"),
    ):
        sp = sub.add_parser(name, help=help_text)
        sp.add_argument("--config", help="JSON file with the parameter bundle")
        sp.add_argument("--out", help="output path (stdout when omitted)")
        sp.add_argument("--format", choices=("csv", "json"), default="csv")
        sp.add_argument("--sweep", action="append", help="param:min:max:count:lin|log")
        sp.add_argument("--tol", type=float, help="comparison tolerance")
        sp.add_argument("--fock-dim", type=int, help="override the automatic dimension")
        if name == "validate":
            sp.add_argument("--state", help="check a serialized state JSON instead")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = _build_config(args)
    except (ValueError, OSError, json.JSONDecodeError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    try:
        if args.command == "decoherence":
            return cmd_decoherence(config)
        if args.command == "tunneling":
            return cmd_tunneling(config)
        if args.command == "measure":
            return cmd_measure(config)
        if args.command == "szilard":
            return cmd_szilard(config)
        if args.command == "cost":
            return cmd_cost(config)
        if args.command == "validate":
            return cmd_validate(config, state_path=getattr(args, "state", None))
    except (ValueError, KeyError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except IntegrationError as exc:
        print(f"numerical failure: {exc} diagnostics={exc.diagnostics}", file=sys.stderr)
        return EXIT_NUMERICAL
    raise AssertionError("unreachable")


if __name__ == "__main__":
    sys.exit(main())

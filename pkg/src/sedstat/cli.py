"""Command-line front end.

Every subcommand prints a table (CSV by default, ``--format json``) and a
run manifest (JSON: subcommand, parameters, seed, version, sha256 of the
output).  The manifest goes to stderr, or next to ``--out`` as
``<out>.manifest.json``.  Exit status: 0 ok, 1 domain/numerical error,
2 usage error.

Inputs are dimensionless: frequencies in units of the oscillator frequency
omega (which is set to 1), temperatures as T/omega or x = omega/T.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import math
import sys
import warnings

import numpy as np

from sedstat import __version__, counting, fieldsynth, fluctuation, oscsim, parallel, resonance, spectra, thermo
from sedstat.errors import DomainError, IntegrationError, QuadratureBudgetError


def _density(kind: str, temp_ratio: float) -> spectra.SpectralDensity:
    if kind == "zeropoint":
        return spectra.SpectralDensity.zeropoint()
    if kind == "thermal":
        return spectra.SpectralDensity.thermal(temp_ratio)
    return spectra.SpectralDensity.total(temp_ratio)


def _floats(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _ints(text: str) -> list[int]:
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _threads(text: str):
    if text == "auto":
        return text
    try:
        n = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"--threads takes an integer or 'auto', got {text!r}")
    if n < 1:
        raise argparse.ArgumentTypeError("--threads must be >= 1")
    return n


# --- subcommands: each returns (columns, rows) ---------------------------------


def cmd_spectrum(args):
    xs = np.linspace(args.x_min, args.x_max, args.points)
    if np.any(xs <= 0):
        raise DomainError("x = omega/T must be > 0")
    rows = []
    for x in xs:
        t = 1.0 / x
        rows.append(
            [
                float(x),
                spectra.mean_energy(1.0, t),
                spectra.rho_total(1.0, t) * 2 * math.pi**2,
                spectra.mean_thermal_energy(1.0, t),
            ]
        )
    return ["x", "mean_energy_over_omega", "rho_total_scaled", "thermal_energy_over_omega"], rows


def cmd_resonance(args):
    params = resonance.OscillatorParams.from_tau(args.tau)
    density = _density(args.density, args.temp_ratio)
    cfg = resonance.QuadratureConfig(
        omega_max=args.cutoff,
        wing_halfwidths=args.wing_halfwidths,
        rel_tol=args.rel_tol,
        max_evals=args.max_evals,
    )
    res = resonance.mean_energy_integral(params, density, cfg)
    narrow = resonance.narrow_resonance_value(params, density)
    gap = abs(res.value - narrow) / narrow if narrow else math.nan
    cols = ["tau", "temp_ratio", "integral", "abs_error", "narrow_value", "relative_gap", "n_evals"]
    return cols, [[params.tau, args.temp_ratio, res.value, res.abs_error, narrow, gap, res.n_evals]]


def cmd_field_sim(args):
    density = _density(args.density, args.temp_ratio)
    if args.trajectory:
        table = fieldsynth.synthesize(density, args.cutoff, args.modes, args.seed)
        t = np.linspace(0.0, args.t_max, args.t_points)
        e = table.field(t)
        return ["t", "Ex", "Ey", "Ez"], [[float(ti), *map(float, row)] for ti, row in zip(t, e)]
    t = np.linspace(0.0, args.t_max, args.t_points)
    tables = fieldsynth.ensemble(density, args.cutoff, args.modes, args.realizations, args.seed)
    est = fieldsynth.correlation_empirical(tables, t)
    oracle = fieldsynth.correlation_oracle(density, args.cutoff, t)
    rows = [
        [float(ti), float(c), float(s), float(o)]
        for ti, c, s, o in zip(t, est.correlation, est.stderr, oracle)
    ]
    return ["t", "correlation", "stderr", "cosine_transform"], rows


def _sim_config(args):
    params = resonance.OscillatorParams.from_tau(args.tau)
    g = params.gamma
    return oscsim.SimConfig(
        params,
        n_realizations=args.realizations,
        seed=args.seed,
        dt=args.dt,
        t_relax=args.relax / g,
        t_measure=None if args.measure is None else args.measure / g,
        field_omega_max=args.cutoff,
        mode_spacing=args.mode_spacing * g,
    )


def cmd_osc_sim(args):
    cfg = _sim_config(args)
    density = _density(args.density, args.temp_ratio)
    if args.dump_trajectory:
        with open(args.dump_trajectory, "w", newline="") as fh:
            oscsim.write_trajectory_csv(fh, cfg, density, stride=args.dump_stride)
    if args.histogram:
        h = oscsim.energy_histogram(cfg, density, args.histogram, threads=args.threads)
        rows = [
            [float(lo), float(hi), float(d)]
            for lo, hi, d in zip(h.edges[:-1], h.edges[1:], h.density)
        ]
        return ["bin_lo", "bin_hi", "density"], rows
    s = oscsim.simulate_ensemble(cfg, density, threads=args.threads)
    expected = spectra.mean_energy(1.0, args.temp_ratio)
    cols = [
        "tau",
        "temp_ratio",
        "mean",
        "mean_stderr",
        "expected_mean",
        "variance_ratio",
        "variance_ratio_stderr",
        "kinetic_mean",
        "potential_mean",
        "n_samples",
    ]
    return cols, [
        [
            cfg.params.tau,
            args.temp_ratio,
            s.mean,
            s.mean_stderr,
            expected,
            s.variance_ratio,
            s.variance_stderr / s.mean**2,
            s.kinetic_mean,
            s.potential_mean,
            s.n_samples,
        ]
    ]


def cmd_fluctuation(args):
    cfg = fluctuation.OdeSolveConfig.from_low_temperature(
        1.0, args.t_start, args.t_end, rtol=args.rtol, n_output=args.points
    )
    sol = fluctuation.solve_mean_energy(1.0, cfg)
    rows = []
    for t, e, err in zip(sol.temperature, sol.mean_energy, sol.error_estimate):
        exact = spectra.mean_energy(1.0, t)
        rows.append(
            [float(t), float(e), exact, abs(e - exact) / exact, float(err), fluctuation.variance_residual(1.0, t)]
        )
    return ["temp_ratio", "ode_mean_energy", "closed_form", "relative_difference", "error_estimate", "variance_residual"], rows


def cmd_counting(args):
    occ = args.occ if args.occ is not None else [float(args.N)] + [0.0] * (args.A - 1)
    if len(occ) != args.A:
        raise DomainError(f"--occ has {len(occ)} entries but A = {args.A}")
    part = counting.EnergyPartition.from_occupations(occ)
    if part.n_fractions != args.N:
        raise DomainError(f"--occ sums to {part.n_fractions}, not N = {args.N}")
    exact = counting.probability_exact(args.A, args.N).probability
    mc = counting.probability_mc(part, args.samples, args.seed, args.weight_mode, threads=args.threads)
    occ_text = ";".join(f"{v:g}" for v in occ)
    cols = ["A", "N", "occupations", "weight_mode", "exact", "mc", "stderr", "samples"]
    return cols, [[args.A, args.N, occ_text, args.weight_mode, exact, mc.probability, mc.stderr, mc.n_samples]]


def cmd_entropy(args):
    xs = np.linspace(args.x_min, args.x_max, args.points)
    if np.any(xs <= 0):
        raise DomainError("x = omega/T must be > 0")
    rows = []
    for x in xs:
        t = 1.0 / x
        u = spectra.mean_thermal_energy(1.0, t)
        eps = spectra.mean_energy(1.0, t)
        rows.append(
            [
                float(x),
                u,
                thermo.caloric_entropy(u, 1.0),
                thermo.caloric_entropy_derivative(eps, 1.0),
                thermo.inverse_temperature(eps, 1.0),
            ]
        )
    return ["x", "thermal_energy_over_omega", "entropy", "dS_deps", "inverse_temperature"], rows


def cmd_limit(args):
    reports = []
    for i, a in enumerate(args.A):
        n = None if args.N_ratio is None else max(1, int(round(args.N_ratio * a)))
        cfg = thermo.ThermoLimitConfig(
            a,
            temperature=args.temp_ratio,
            n_fractions=n,
            trials=args.trials,
            seed=parallel.realization_seed(args.seed, i),
            fluctuations=not args.no_fluctuations,
        )
        reports.append(thermo.thermodynamic_limit_run(cfg))
    return list(thermo.REPORT_COLUMNS), [thermo.report_row(r) for r in reports]


# --- parser ------------------------------------------------------------------


def _shared(p):
    p.add_argument("--seed", type=int, default=0, help="master RNG seed")
    p.add_argument("--format", choices=["csv", "json"], default="csv")
    p.add_argument("--out", help="write output here instead of stdout")
    p.add_argument("--threads", type=_threads, default=1, help="worker threads or 'auto'")
    p.add_argument("--config", help="key=value file; keys are flag names, flags override")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sedstat", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"sedstat {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    p = sub.add_parser("spectrum", help="mean energy and spectral density vs x = omega/T")
    p.add_argument("--x-min", type=float, default=0.1)
    p.add_argument("--x-max", type=float, default=10.0)
    p.add_argument("--points", type=int, default=50)
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("resonance", help="resonance-integral mean energy vs narrow-resonance value")
    p.add_argument("--tau", type=float, default=1e-6)
    p.add_argument("--temp-ratio", type=float, default=0.0, help="T/omega")
    p.add_argument("--density", choices=["zeropoint", "thermal", "total"], default="total")
    p.add_argument("--cutoff", type=float, default=100.0, help="omega_max/omega")
    p.add_argument("--wing-halfwidths", type=float, default=50.0)
    p.add_argument("--rel-tol", type=float, default=1e-10)
    p.add_argument("--max-evals", type=int, default=400_000)
    p.set_defaults(func=cmd_resonance)

    p = sub.add_parser("field-sim", help="random-phase field ensemble and its correlation function")
    p.add_argument("--modes", type=int, default=2000)
    p.add_argument("--cutoff", type=float, default=5.0, help="omega_max/omega")
    p.add_argument("--realizations", type=int, default=10_000)
    p.add_argument("--temp-ratio", type=float, default=0.0)
    p.add_argument("--density", choices=["zeropoint", "thermal", "total"], default="total")
    p.add_argument("--t-max", type=float, default=10.0, help="in units of 1/omega")
    p.add_argument("--t-points", type=int, default=41)
    p.add_argument("--trajectory", action="store_true", help="emit one realization (t, Ex, Ey, Ez)")
    p.set_defaults(func=cmd_field_sim)

    p = sub.add_parser("osc-sim", help="Langevin ensemble of field-driven oscillators")
    p.add_argument("--tau", type=float, default=1e-3)
    p.add_argument("--temp-ratio", type=float, default=0.0)
    p.add_argument("--density", choices=["zeropoint", "thermal", "total"], default="total")
    p.add_argument("--realizations", type=int, default=200)
    p.add_argument("--dt", type=float, default=0.045, help="time step in units of 1/omega")
    p.add_argument("--relax", type=float, default=8.0, help="relaxation time in units of 1/gamma")
    p.add_argument("--measure", type=float, default=None, help="measurement time in units of 1/gamma")
    p.add_argument("--cutoff", type=float, default=2.0, help="drive cutoff omega_max/omega")
    p.add_argument("--mode-spacing", type=float, default=0.05, help="drive mode spacing in units of gamma")
    p.add_argument("--histogram", type=int, default=0, metavar="BINS", help="emit an energy histogram")
    p.add_argument("--dump-trajectory", metavar="PATH", help="debug CSV of realization 0 (t, x, v, eps)")
    p.add_argument("--dump-stride", type=int, default=100)
    p.set_defaults(func=cmd_osc_sim)

    p = sub.add_parser("fluctuation", help="integrate the energy-fluctuation ODE in temperature")
    p.add_argument("--t-start", type=float, default=0.05, help="T/omega")
    p.add_argument("--t-end", type=float, default=1.0, help="T/omega")
    p.add_argument("--points", type=int, default=20)
    p.add_argument("--rtol", type=float, default=1e-11)
    p.set_defaults(func=cmd_fluctuation)

    p = sub.add_parser("counting", help="exact and Monte Carlo occupation probability")
    p.add_argument("--A", type=int, required=True, help="number of oscillators")
    p.add_argument("--N", type=int, required=True, help="number of energy fractions")
    p.add_argument("--occ", type=_floats, default=None, help="comma-separated occupations, sum N")
    p.add_argument("--samples", type=int, default=1_000_000)
    p.add_argument("--weight-mode", choices=["flat", "field"], default="flat")
    p.set_defaults(func=cmd_counting)

    p = sub.add_parser("entropy", help="caloric entropy and temperature relation vs x = omega/T")
    p.add_argument("--x-min", type=float, default=0.1)
    p.add_argument("--x-max", type=float, default=10.0)
    p.add_argument("--points", type=int, default=50)
    p.set_defaults(func=cmd_entropy)

    p = sub.add_parser("limit", help="thermodynamic-limit statistics of the energy fraction q")
    p.add_argument("--A", type=_ints, required=True, help="oscillator count(s), comma-separated")
    p.add_argument("--temp-ratio", type=float, default=1.0)
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--N-ratio", type=float, default=None, help="N/A (default 1)")
    p.add_argument("--no-fluctuations", action="store_true", help="set dU = 0")
    p.set_defaults(func=cmd_limit)

    for action in sub.choices.values():
        _shared(action)
    return parser


def _read_config(path: str) -> dict[str, str]:
    values = {}
    with open(path) as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected key=value")
            key, val = (s.strip() for s in line.split("=", 1))
            values[key.lstrip("-").replace("-", "_")] = val
    return values


def _parse(parser, argv):
    argv = list(sys.argv[1:] if argv is None else argv)
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    choices = parser._subparsers._group_actions[0].choices
    command = next((a for a in argv if a in choices), None)
    if known.config and command:
        sub = choices[command]
        actions = {a.dest: a for a in sub._actions}
        try:
            values = _read_config(known.config)
        except (OSError, ValueError) as exc:
            sub.error(str(exc))
        defaults = {}
        for key, val in values.items():
            if key not in actions or key in ("config", "help"):
                sub.error(f"unknown config key {key!r}")
            action = actions[key]
            if action.nargs == 0:  # store_true flags
                defaults[key] = val.lower() in ("1", "true", "yes", "on")
            else:
                # string defaults go through the action's type converter
                defaults[key] = val
            action.required = False
        sub.set_defaults(**defaults)
    return parser.parse_args(argv)


def _format(columns, rows, fmt: str) -> str:
    def cell(v):
        if isinstance(v, (float, np.floating)):
            return f"{float(v):.17g}"
        return str(v)

    if fmt == "json":
        def jval(v):
            if isinstance(v, (np.integer,)):
                return int(v)
            if isinstance(v, (float, np.floating)):
                v = float(v)
                return v if math.isfinite(v) else None
            return v

        return json.dumps([dict(zip(columns, map(jval, r))) for r in rows], indent=1) + "\n"
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([cell(v) for v in r])
    return buf.getvalue()


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = _parse(parser, argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    params = {k: v for k, v in vars(args).items() if k not in ("func", "config", "out", "format")}
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            columns, rows = args.func(args)
    except (DomainError, IntegrationError, QuadratureBudgetError) as exc:
        print(f"sedstat {args.command}: {exc}", file=sys.stderr)
        return 1
    text = _format(columns, rows, args.format)
    manifest = {
        "subcommand": args.command,
        "parameters": params,
        "seed": args.seed,
        "version": __version__,
        "checksum": "sha256:" + hashlib.sha256(text.encode()).hexdigest(),
    }
    manifest_text = json.dumps(manifest, sort_keys=True, default=str)
    if args.out:
        with open(args.out, "w", newline="") as fh:
            fh.write(text)
        with open(args.out + ".manifest.json", "w") as fh:
            fh.write(manifest_text + "\n")
    else:
        sys.stdout.write(text)
        sys.stdout.flush()
        print(manifest_text, file=sys.stderr)
    return 0


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()

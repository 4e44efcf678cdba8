"""
Command-line entry point: ``xiflow <subcommand> [options]``.

Every file written is accompanied by ``<file>.meta.json`` holding the
effective configuration and the equations the run exercises.
"""

import argparse
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from . import __version__
from .constants import DEFAULT_CATALOGUE_HEIGHT, DEFAULT_ZERO_TOLERANCE, EQUATION_LOOKUP, EXIT_CODES
from .dynamics import (
    detect_closed_orbit_period,
    integrate_hamiltonian,
    integrate_holomorphic_flow,
    integrate_newton_path,
    integrate_variational,
    phase_portrait_grid,
)
from .errors import ConvergenceError, DomainError, FormatError
from .formulas import flow_map_differential, quantized_energies
from .logger import logger, set_log_level
from .specfun import digamma, gamma, xi, xi_array, xi_derivative, zeta
from .utils import format_complex, parse_complex, write_csv, write_metadata
from .verify import SUITES, run_verification
from .zeros import load_catalogue, locate_zeros, riemann_von_mangoldt, save_catalogue

CATALOGUE_ENV = "XIFLOW_CATALOGUE"

COMPLEX_HELP = """complex literals follow

    literal  = real ("+" | "-") [unsigned] "i" | real | [sign] [unsigned] "i"
    real     = [sign] unsigned
    unsigned = digits ["." [digits]] [exponent] | "." digits [exponent]

e.g. 0.5+14.1347i, -2, 3.5i"""

EVALUATORS = {
    "zeta": zeta,
    "gamma": gamma,
    "digamma": digamma,
    "xi": xi,
    "xi1": lambda s: xi_derivative(s, 1),
    "xi2": lambda s: xi_derivative(s, 2),
}


@dataclass
class RunConfig:
    """Effective configuration of one invocation, echoed into metadata sidecars."""

    subcommand: str
    output_path: str = None
    format: str = "csv"
    tolerance: float = None
    catalogue_path: str = None
    jobs: int = 1
    options: dict = field(default_factory=dict)

    @classmethod
    def from_namespace(cls, args):
        common = {"command", "out", "format", "tol", "catalogue", "jobs", "log_level", "handler"}
        options = {
            key: (format_complex(value) if isinstance(value, complex) else value)
            for key, value in vars(args).items()
            if key not in common
        }
        if "T" in options and options["T"] is not None:
            options["T"] = [format_complex(value) for value in args.T]
        return cls(
            subcommand=args.command,
            output_path=getattr(args, "out", None),
            format=args.format,
            tolerance=getattr(args, "tol", None),
            catalogue_path=args.catalogue,
            jobs=args.jobs,
            options=options,
        )


def _complex_literal(text):
    try:
        return parse_complex(text)
    except ValueError as e:
        raise argparse.ArgumentTypeError(str(e))


def _write_table(config, header, rows):
    if config.format == "json":
        records = [dict(zip(header, row)) for row in rows]
        write_metadata(config.output_path, {"columns": header, "rows": records})
    else:
        write_csv(config.output_path, header, rows)


def _write_sidecar(config, equation_key, summary):
    payload = {
        "config": asdict(config),
        "equations": EQUATION_LOOKUP[equation_key],
        "summary": summary,
        "version": __version__,
        "created": time.strftime("%Y-%m-%dT%H:%M:%S%z"),
    }
    write_metadata(f"{config.output_path}.meta.json", payload)


def _catalogue(config, tau_max=DEFAULT_CATALOGUE_HEIGHT):
    """The configured catalogue; zeros are located only when no path is configured."""
    if config.catalogue_path:
        return load_catalogue(config.catalogue_path)
    logger.info(f"No catalogue configured; locating zeros up to {tau_max:g}.")
    return locate_zeros(tau_max, jobs=config.jobs)


def cmd_eval(args, config):
    value = EVALUATORS[args.fn](args.s)
    print(format_complex(value))


def cmd_zeros(args, config):
    catalogue = locate_zeros(args.tau_max, config.tolerance or DEFAULT_ZERO_TOLERANCE, jobs=config.jobs)
    config.output_path = config.output_path or config.catalogue_path or "zeros.jsonl"
    save_catalogue(catalogue, config.output_path)
    expected = riemann_von_mangoldt(args.tau_max)
    print(f"{len(catalogue)} zeros up to {args.tau_max:g} (smooth estimate {expected:.3f})")
    _write_sidecar(config, "zeros", {"count": len(catalogue), "smooth_estimate": expected})


def _flow_xi(args, config):
    trajectory = integrate_holomorphic_flow(args.q0, args.t, config.tolerance, args.max_step)
    print(f"q({args.t:g}) = {format_complex(trajectory.final.q)}")
    return "flow:xi", trajectory, {}


def _flow_hamiltonian(args, config):
    trajectory = integrate_hamiltonian(args.q0, args.p0, args.t, config.tolerance, args.max_step)
    energy = trajectory.energy()
    drift = float(np.max(np.abs(energy - energy[0])) / abs(energy[0]))
    print(f"max |H - H0|/|H0| = {drift:.3e}")
    return "flow:hamiltonian", trajectory, {"max_relative_energy_drift": drift}


def _flow_newton(args, config):
    vertices = args.T or [1.0]
    trajectory = integrate_newton_path(args.q0, vertices, config.tolerance, args.max_step)
    columns = trajectory.arrays()
    values = xi_array(columns["q"])
    modulus = float(np.max(np.abs(np.abs(values) / abs(values[0]) - 1.0)))
    exact = float(np.max(np.abs(values - values[0] * np.exp(-columns["T"])) / np.abs(values[0] * np.exp(-columns["T"]))))
    print(f"max | |xi(s)|/|xi(s0)| - 1 | = {modulus:.3e}")
    print(f"max |xi(s) - xi(s0) exp(-T)| / |xi(s0) exp(-T)| = {exact:.3e}")
    return "flow:newton", trajectory, {"modulus_drift": modulus, "exact_solution_error": exact}


def _flow_variational(args, config):
    trajectory = integrate_variational(args.q0, args.p0, args.dq0, args.dp0, args.t, config.tolerance, args.max_step)
    summary = {}
    if args.check_M:
        deviation = 0.0
        for state in trajectory.states[1:]:
            predicted = np.array(flow_map_differential(args.q0, args.p0, state.q).apply(args.dq0, args.dp0))
            measured = np.array([state.dq, state.dp])
            deviation = max(deviation, float(np.linalg.norm(predicted - measured) / np.linalg.norm(measured)))
        print(f"max closed-form deviation = {deviation:.3e}")
        summary["max_flow_map_deviation"] = deviation
    print(f"(dq, dp)({args.t:g}) = ({format_complex(trajectory.final.dq)}, {format_complex(trajectory.final.dp)})")
    return "flow:variational", trajectory, summary


FLOWS = {
    "xi": _flow_xi,
    "hamiltonian": _flow_hamiltonian,
    "newton": _flow_newton,
    "variational": _flow_variational,
}


def cmd_flow(args, config):
    config.tolerance = config.tolerance or 1e-10
    key, trajectory, summary = FLOWS[args.kind](args, config)
    summary.update(
        accepted_steps=trajectory.accepted_steps,
        rejected_steps=trajectory.rejected_steps,
        max_local_error=trajectory.max_local_error,
    )
    if config.output_path:
        if config.format == "json":
            columns = trajectory.arrays()
            header = ["t"] + [f"{name}_{part}" for name in columns if name != "t" for part in ("re", "im")]
            rows = [
                [float(columns["t"][i])]
                + [float(getattr(columns[name][i], part)) for name in columns if name != "t" for part in ("real", "imag")]
                for i in range(len(trajectory.states))
            ]
            _write_table(config, header, rows)
        else:
            trajectory.to_csv(config.output_path)
        _write_sidecar(config, key, summary)


def _numeric_period(zero, radius, tol):
    return detect_closed_orbit_period(zero.rho + radius, zero, tol)


def cmd_periods(args, config):
    catalogue = _catalogue(config)
    zeros = [catalogue.record(n) for n in range(1, args.n + 1)]
    tol = config.tolerance or 1e-10
    if config.jobs > 1 and len(zeros) > 1:
        with ProcessPoolExecutor(max_workers=config.jobs) as pool:
            numeric = list(pool.map(_numeric_period, zeros, [args.radius] * len(zeros), [tol] * len(zeros)))
    else:
        numeric = [_numeric_period(zero, args.radius, tol) for zero in zeros]

    header = ["n", "rho_im", "period", "numeric_period", "relative_gap"]
    rows = []
    for zero, measured in zip(zeros, numeric):
        gap = abs(measured - zero.period) / zero.period
        rows.append([zero.index, float(zero.rho.imag), zero.period, measured, gap])
        print(f"n={zero.index}: t*={zero.period:.10g}, numeric={measured:.10g}, gap={gap:.2e}")
    config.output_path = config.output_path or "periods.csv"
    _write_table(config, header, rows)
    _write_sidecar(config, "periods", {"max_relative_gap": max((row[-1] for row in rows), default=0.0)})


def cmd_spectrum(args, config):
    zero = _catalogue(config).record(args.n)
    table = quantized_energies(zero, range(0, args.k + 1), args.h)
    header = ["n", "rho_im", "period", "frequency", "k", "E"]
    rows = [[table.zero_index, float(table.rho.imag), table.period, table.frequency, k, e] for k, e in table.energies]
    for k, energy in table.energies:
        print(f"k={k}: E={energy!r}")
    config.output_path = config.output_path or "spectrum.csv"
    _write_table(config, header, rows)
    _write_sidecar(config, "spectrum", {"frequency": table.frequency, "h": table.h})


def cmd_portrait(args, config):
    portrait = phase_portrait_grid(
        (args.re_min, args.re_max), (args.im_min, args.im_max), args.nx, args.ny, jobs=config.jobs
    )
    config.output_path = config.output_path or "portrait.csv"
    if config.format == "json":
        rows = [
            [float(x), float(y), float(portrait.values[j, i].real), float(portrait.values[j, i].imag),
             float(portrait.phase[j, i]), float(portrait.modulus[j, i])]
            for j, y in enumerate(portrait.im)
            for i, x in enumerate(portrait.re)
        ]
        _write_table(config, ["re", "im", "xi_re", "xi_im", "phase", "modulus"], rows)
    else:
        portrait.to_csv(config.output_path)
    _write_sidecar(config, "portrait", {"nodes": args.nx * args.ny})


def cmd_verify(args, config):
    catalogue = load_catalogue(config.catalogue_path) if config.catalogue_path else None
    results = run_verification(args.suite, catalogue=catalogue)
    for result in results:
        status = "PASS" if result.passed else "FAIL"
        print(f"{status} {result.name:<20} residual={result.residual:.3e} threshold={result.threshold:.0e}")
    if config.output_path:
        write_metadata(config.output_path, {"results": [asdict(result) for result in results]})
        _write_sidecar(config, "verify", {"passed": all(result.passed for result in results)})
    return EXIT_CODES["ok"] if all(result.passed for result in results) else EXIT_CODES["failed"]


def build_parser():
    parser = argparse.ArgumentParser(
        prog="xiflow",
        description="Numerical laboratory for the Riemann xi-flow and its Hamiltonian system.",
        epilog=COMPLEX_HELP,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    parser.add_argument("--catalogue", default=os.environ.get(CATALOGUE_ENV), help=f"zero catalogue path (env {CATALOGUE_ENV})")
    parser.add_argument("--format", choices=["csv", "json"], default="csv", help="table output format")
    parser.add_argument("--log-level", default="INFO", help="DEBUG, INFO, WARNING or ERROR")
    parser.add_argument("--jobs", type=int, default=os.cpu_count() or 1, help="worker processes for grids and orbit scans")
    subparsers = parser.add_subparsers(dest="command", required=True)

    evaluate = subparsers.add_parser("eval", help="evaluate a special function", epilog=COMPLEX_HELP,
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    evaluate.add_argument("--fn", choices=sorted(EVALUATORS), required=True)
    evaluate.add_argument("--s", type=_complex_literal, required=True)
    evaluate.set_defaults(handler=cmd_eval)

    zeros = subparsers.add_parser("zeros", help="locate zeros and write a catalogue")
    zeros.add_argument("--tau-max", type=float, default=DEFAULT_CATALOGUE_HEIGHT)
    zeros.add_argument("--tol", type=float, default=None)
    zeros.add_argument("--out", default=None)
    zeros.set_defaults(handler=cmd_zeros)

    flow = subparsers.add_parser("flow", help="integrate a flow", epilog=COMPLEX_HELP,
                                 formatter_class=argparse.RawDescriptionHelpFormatter)
    flow.add_argument("--kind", choices=sorted(FLOWS), required=True)
    flow.add_argument("--q0", type=_complex_literal, required=True)
    flow.add_argument("--p0", type=_complex_literal, default=1 + 0j)
    flow.add_argument("--dq0", type=_complex_literal, default=1 + 0j)
    flow.add_argument("--dp0", type=_complex_literal, default=1 + 0j)
    flow.add_argument("--t", type=float, default=1.0, help="real flow time")
    flow.add_argument("--T", type=_complex_literal, nargs="+", default=None,
                      help="complex time, or the vertices of a piecewise-linear path, for the Newton flow")
    flow.add_argument("--tol", type=float, default=None)
    flow.add_argument("--max-step", type=float, default=None)
    flow.add_argument("--check-M", action="store_true", help="compare against the closed-form flow map")
    flow.add_argument("--out", default=None)
    flow.set_defaults(handler=cmd_flow)

    periods = subparsers.add_parser("periods", help="closed-orbit periods of the first zeros")
    periods.add_argument("--n", type=int, default=3)
    periods.add_argument("--radius", type=float, default=0.01)
    periods.add_argument("--tol", type=float, default=None)
    periods.add_argument("--out", default=None)
    periods.set_defaults(handler=cmd_periods)

    spectrum = subparsers.add_parser("spectrum", help="quantised energies of one orbit")
    spectrum.add_argument("--n", type=int, default=1)
    spectrum.add_argument("--k", type=int, default=5)
    spectrum.add_argument("--h", type=float, default=1.0)
    spectrum.add_argument("--out", default=None)
    spectrum.set_defaults(handler=cmd_spectrum)

    portrait = subparsers.add_parser("portrait", help="xi, its phase and modulus on a grid")
    portrait.add_argument("--re-min", type=float, default=-1.0)
    portrait.add_argument("--re-max", type=float, default=2.0)
    portrait.add_argument("--im-min", type=float, default=0.0)
    portrait.add_argument("--im-max", type=float, default=40.0)
    portrait.add_argument("--nx", type=int, default=61)
    portrait.add_argument("--ny", type=int, default=401)
    portrait.add_argument("--out", default=None)
    portrait.set_defaults(handler=cmd_portrait)

    verify = subparsers.add_parser("verify", help="run the identity suites")
    verify.add_argument("--suite", choices=["all", *SUITES], default="all")
    verify.add_argument("--out", default=None)
    verify.set_defaults(handler=cmd_verify)
    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_CODES["ok"] if e.code in (0, None) else EXIT_CODES["usage"]

    set_log_level(args.log_level)
    config = RunConfig.from_namespace(args)
    logger.debug(f"Effective configuration: {config}")
    try:
        code = args.handler(args, config)
    except FormatError as e:
        logger.error(f"Malformed input: {e}")
        return EXIT_CODES["usage"]
    except DomainError as e:
        logger.error(str(e))
        print(f"error: {e}", file=sys.stderr)
        return EXIT_CODES["domain"]
    except ConvergenceError as e:
        logger.error(str(e))
        print(f"error: {e}", file=sys.stderr)
        return EXIT_CODES["convergence"]
    except OSError as e:
        logger.error(f"I/O failure: {e}")
        print(f"error: {e}", file=sys.stderr)
        return EXIT_CODES["usage"]
    return EXIT_CODES["ok"] if code is None else code


if __name__ == "__main__":
    sys.exit(main())

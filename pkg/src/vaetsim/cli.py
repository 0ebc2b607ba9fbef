"""Command-line interface.

    vaetsim <task> [--config FILE] [--out DIR] [--threads N]
                   [--override key=value ...]

Tasks: eigen, ep, trace-line, dynamics, lindblad, sweep, cut,
enhancement, period.  Missing config sections fall back to the package
defaults.  Every run writes one CSV data file plus a JSON manifest next
to it; the output directory defaults to the current directory and can be
set with the VAETSIM_OUT environment variable or the --out flag (the flag
wins).

Exit status: 0 success, 2 configuration error, 3 numerical error,
4 domain error.
"""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np
import yaml

from . import __version__
from .config import (
    RunConfig,
    TASKS,
    apply_overrides,
    config_from_dict,
    config_to_dict,
)
from .dynamics import evolve_params, time_grid
from .errors import ConfigError, VaetsimError
from .linalg import eig_general
from .model import dimer_hamiltonian
from .output import (
    RunManifest,
    cut_rows,
    enhancement_rows,
    eigensystem_rows,
    ep_rows,
    line_rows,
    period_rows,
    read_spectrum_csv,
    spectrum_rows,
    trajectory_rows,
    write_csv,
)
from .spectral import (
    dimer_spectrum_closed_form,
    find_ep,
    match_to_closed_form,
    trace_exceptional_line,
)
from .sweeps import Axis, cut_1d, enhancement_factor, period_curve, sweep_2d


def _out_dir(flag_value) -> str:
    if flag_value:
        return flag_value
    return os.environ.get("VAETSIM_OUT", ".")


def _basename(config: RunConfig) -> str:
    return config.output.basename or config.task.replace("-", "_")


def _traj_checks(manifest: RunManifest, traj):
    dev = traj.population_sum_deviation()
    manifest.check("population_sum", dev < 1e-9, f"max deviation {dev:.3e}")
    top = float(traj.top_fock_weight.max())
    manifest.check("top_fock_weight", top < 1e-5, f"max {top:.3e}")
    if "fock_overflow" in traj.flags:
        manifest.warnings.append(
            f"top Fock level reached weight {traj.flags['fock_overflow']:.3e}"
        )


def run(config: RunConfig, out_dir: str = ".", threads: int = 1) -> list[str]:
    """Execute one task; returns the paths written."""
    base = os.path.join(out_dir, _basename(config))
    manifest = RunManifest(config=config_to_dict(config), version=__version__)
    csv_path = base + ".csv"

    if config.task == "eigen":
        spec = dimer_spectrum_closed_form(config.dimer)
        system = eig_general(dimer_hamiltonian(config.dimer))
        perm = match_to_closed_form(system.values, spec)
        values = system.values[perm]
        residuals = system.residuals[perm]
        agreement = float(np.abs(values - spec.values).max())
        manifest.check(
            "closed_form_agreement", agreement < 1e-8, f"max |diff| {agreement:.3e}"
        )
        manifest.extra["closed_form"] = [
            [v.real, v.imag] for v in spec.values
        ]
        write_csv(csv_path, *eigensystem_rows(values, residuals))

    elif config.task == "ep":
        report = find_ep(config.dimer)
        manifest.check(
            "eigvec_coalescence",
            report.eigvec_min_angle < 1e-3,
            f"min principal angle {report.eigvec_min_angle:.3e} rad",
        )
        write_csv(csv_path, *ep_rows(report))

    elif config.task == "trace-line":
        line = trace_exceptional_line(
            config.dimer.delta,
            config.options.alpha.values(),
            j_tunnel=config.dimer.j_tunnel,
        )
        gammas = [g for _, g in line.samples]
        manifest.check(
            "monotone_in_alpha",
            all(b > a for a, b in zip(gammas, gammas[1:])),
            "gamma* strictly increasing",
        )
        write_csv(csv_path, *line_rows(line))

    elif config.task in ("dynamics", "lindblad"):
        opts = config.options
        t = time_grid(opts.t_final, opts.dt)
        kw = {}
        dissipation = None
        if config.task == "lindblad":
            dissipation = config.dissipation
            kw["method"] = opts.method
        traj = evolve_params(config.dimer, config.vibration, t, dissipation, **kw)
        _traj_checks(manifest, traj)
        write_csv(csv_path, *trajectory_rows(traj))

    elif config.task == "sweep":
        opts = config.options
        if config.vibration is None:
            raise ConfigError("sweep task requires a vibration section")
        spectrum = sweep_2d(
            config.dimer,
            config.vibration,
            Axis(opts.x.name, tuple(opts.x.values())),
            Axis(opts.y.name, tuple(opts.y.values())),
            t_f=opts.t_final,
            dt=opts.dt,
            threads=threads,
        )
        manifest.extra["x_name"] = spectrum.x_axis.name
        manifest.extra["y_name"] = spectrum.y_axis.name
        flagged = int(np.count_nonzero(spectrum.flags))
        manifest.check("cells_in_range", True, "populations within [0, 1]")
        if flagged:
            manifest.warnings.append(f"{flagged} cell(s) flagged; see flags column")
        write_csv(csv_path, *spectrum_rows(spectrum))

    elif config.task == "cut":
        spectrum = read_spectrum_csv(config.options.map_csv)
        cut = cut_1d(spectrum, config.options.axis, config.options.value)
        manifest.extra["fixed_axis"] = cut.fixed_name
        manifest.extra["fixed_value"] = cut.fixed_value
        manifest.extra["requested_value"] = cut.requested_value
        manifest.extra["snap_offset"] = cut.fixed_value - cut.requested_value
        write_csv(csv_path, *cut_rows(cut))

    elif config.task == "enhancement":
        opts = config.options
        if config.vibration is None:
            raise ConfigError("enhancement task requires a vibration section")
        curve = enhancement_factor(
            config.dimer,
            config.vibration,
            np.asarray(opts.gamma.values()),
            t_f=opts.t_final,
            dt=opts.dt,
            threads=threads,
        )
        manifest.extra["reference"] = curve.reference
        write_csv(csv_path, *enhancement_rows(curve))

    elif config.task == "period":
        curve = period_curve(config.dimer, np.asarray(config.options.gamma.values()))
        manifest.extra["gamma_star"] = curve.gamma_star
        manifest.extra["fit_coefficient"] = curve.fit_c
        manifest.extra["fit_max_rel_dev"] = curve.fit_max_rel_dev
        write_csv(csv_path, *period_rows(curve))

    else:  # pragma: no cover - guarded by config validation
        raise ConfigError(f"unknown task {config.task!r}")

    manifest.attach(csv_path)
    manifest_path = base + ".manifest.json"
    manifest.write(manifest_path)
    return [csv_path, manifest_path]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="vaetsim",
        description="Non-Hermitian vibronic dimer simulator",
    )
    parser.add_argument("task", choices=TASKS)
    parser.add_argument("--config", help="YAML config file (defaults apply if omitted)")
    parser.add_argument("--out", help="output directory (or set VAETSIM_OUT)")
    parser.add_argument("--threads", type=int, default=1)
    parser.add_argument(
        "--override",
        action="append",
        default=[],
        metavar="KEY=VALUE",
        help="override a config entry, e.g. dimer.gamma=1.04",
    )
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.config:
            try:
                with open(args.config) as fh:
                    text = fh.read()
            except OSError as exc:
                raise ConfigError(f"cannot read config {args.config!r}: {exc}") from exc
            try:
                doc = yaml.safe_load(text)
            except yaml.YAMLError as exc:
                raise ConfigError(f"config is not well-formed YAML: {exc}") from exc
            doc = doc if doc is not None else {}
        else:
            doc = {}
        doc = apply_overrides(doc, args.override)
        config = config_from_dict(doc, task=args.task)
        paths = run(config, out_dir=_out_dir(args.out), threads=args.threads)
    except VaetsimError as exc:
        print(f"vaetsim: error: {exc}", file=sys.stderr)
        return exc.exit_code
    for p in paths:
        print(p)
    return 0


if __name__ == "__main__":
    sys.exit(main())

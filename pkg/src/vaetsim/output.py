"""CSV serialization and run manifests.

Every data file is RFC-4180-style CSV with a header row, floats at 12
significant digits, complex values split into re/im column pairs, and a
deterministic row order, so identical configs reproduce identical bytes.
Each file is written atomically (temp file, then rename) and accompanied
by exactly one ``<name>.manifest.json`` recording the config echo, code
version, timestamp, invariant-check results, and warnings.
"""

from __future__ import annotations

import hashlib
import json
import os
import tempfile
from dataclasses import dataclass, field
from datetime import datetime, timezone

import numpy as np

from .errors import ConfigError, DomainError
from .linalg import EigenSystem
from .spectral import EPReport, ExceptionalLine
from .sweeps import Axis, Cut1D, EnhancementCurve, PeriodCurve, SpectrumMap


def fmt(value) -> str:
    """Deterministic 12-significant-digit float formatting."""
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return f"{float(value):.11e}"


def write_csv(path, header, rows):
    """Write rows of already-formatted cells atomically."""
    text = ",".join(header) + "\n"
    text += "".join(",".join(row) + "\n" for row in rows)
    _atomic_write(path, text)
    return path


def _atomic_write(path, text: str):
    directory = os.path.dirname(os.fspath(path)) or "."
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def sha256_file(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            h.update(chunk)
    return h.hexdigest()


@dataclass
class RunManifest:
    """Reproducibility sidecar for one data file."""

    config: dict
    version: str
    timestamp: str = ""
    invariant_checks: list = field(default_factory=list)
    warnings: list = field(default_factory=list)
    outputs: list = field(default_factory=list)
    extra: dict = field(default_factory=dict)

    def check(self, name: str, passed: bool, detail: str = ""):
        self.invariant_checks.append(
            {"name": name, "passed": bool(passed), "detail": detail}
        )

    def attach(self, path):
        self.outputs.append(
            {"path": os.path.basename(os.fspath(path)), "sha256": sha256_file(path)}
        )

    def write(self, path):
        if not self.timestamp:
            self.timestamp = datetime.now(timezone.utc).isoformat()
        _atomic_write(path, json.dumps(self.__dict__, indent=2, sort_keys=True) + "\n")
        return path


def trajectory_rows(traj):
    header = [
        "t",
        "p_acceptor",
        "p_donor",
        "p_gg",
        "p_ee",
        "raw_trace",
        "mean_phonon",
        "top_fock_weight",
    ]
    rows = [
        [
            fmt(traj.times[i]),
            fmt(traj.p_acceptor[i]),
            fmt(traj.p_donor[i]),
            fmt(traj.p_gg[i]),
            fmt(traj.p_ee[i]),
            fmt(traj.raw_trace[i]),
            fmt(traj.mean_phonon[i]),
            fmt(traj.top_fock_weight[i]),
        ]
        for i in range(traj.times.size)
    ]
    return header, rows


def eigensystem_rows(values, residuals):
    header = ["index", "lambda_re", "lambda_im", "residual"]
    rows = [
        [str(i + 1), fmt(values[i].real), fmt(values[i].imag), fmt(residuals[i])]
        for i in range(len(values))
    ]
    return header, rows


def ep_rows(report: EPReport):
    header = [
        "gamma_star",
        "order",
        "degeneracy",
        "transitions",
        "eigvec_min_angle",
    ]
    rows = [
        [
            fmt(report.gamma_star),
            str(report.order_n),
            str(report.degeneracy_s),
            str(report.transition_count),
            fmt(report.eigvec_min_angle),
        ]
    ]
    return header, rows


def line_rows(line: ExceptionalLine):
    header = ["alpha", "gamma_star"]
    rows = [[fmt(a), fmt(g)] for a, g in line.samples]
    return header, rows


def spectrum_rows(spectrum: SpectrumMap):
    header = ["x", "y", "p_final", "p_avg", "flags"]
    rows = []
    for i, xv in enumerate(spectrum.x_axis.values):
        for j, yv in enumerate(spectrum.y_axis.values):
            rows.append(
                [
                    fmt(xv),
                    fmt(yv),
                    fmt(spectrum.p_final[i, j]),
                    fmt(spectrum.p_avg[i, j]),
                    str(int(spectrum.flags[i, j])),
                ]
            )
    return header, rows


def cut_rows(cut: Cut1D):
    header = ["x", "p_final", "p_avg", "flags"]
    rows = [
        [fmt(cut.axis.values[i]), fmt(cut.p_final[i]), fmt(cut.p_avg[i]),
         str(int(cut.flags[i]))]
        for i in range(len(cut.axis.values))
    ]
    return header, rows


def enhancement_rows(curve: EnhancementCurve):
    header = ["gamma", "factor_final", "factor_avg", "factor_peak", "flags"]
    rows = [
        [
            fmt(curve.gamma_grid[i]),
            fmt(curve.factor_final[i]),
            fmt(curve.factor_avg[i]),
            fmt(curve.factor_peak[i]),
            str(int(curve.flags[i])),
        ]
        for i in range(curve.gamma_grid.size)
    ]
    return header, rows


def period_rows(curve: PeriodCurve):
    header = ["gamma", "t_star"]
    rows = [
        [fmt(curve.gamma[i]), fmt(curve.t_star[i])]
        for i in range(curve.gamma.size)
    ]
    return header, rows


def read_spectrum_csv(csv_path, manifest_path=None) -> SpectrumMap:
    """Rebuild a SpectrumMap from its CSV (and manifest, for axis names)."""
    with open(csv_path, "r", newline="") as fh:
        lines = [ln.rstrip("\n") for ln in fh if ln.strip()]
    if not lines or lines[0].split(",") != ["x", "y", "p_final", "p_avg", "flags"]:
        raise ConfigError(f"{csv_path}: not a spectrum-map CSV")
    xs, ys, data = [], [], {}
    for ln in lines[1:]:
        sx, sy, spf, spa, sfl = ln.split(",")
        xv, yv = float(sx), float(sy)
        if xv not in data:
            data[xv] = {}
            xs.append(xv)
        if yv not in data[xv]:
            data[xv][yv] = (float(spf), float(spa), int(sfl))
        if yv not in ys:
            ys.append(yv)
    x_name, y_name = "x", "y"
    metadata = {}
    if manifest_path is None:
        candidate = os.fspath(csv_path)
        candidate = candidate[:-4] if candidate.endswith(".csv") else candidate
        candidate += ".manifest.json"
        manifest_path = candidate if os.path.exists(candidate) else None
    if manifest_path is not None:
        with open(manifest_path) as fh:
            manifest = json.load(fh)
        metadata = manifest.get("extra", {})
        x_name = metadata.get("x_name", x_name)
        y_name = metadata.get("y_name", y_name)
    nx, ny = len(xs), len(ys)
    p_final = np.zeros((nx, ny))
    p_avg = np.zeros((nx, ny))
    flags = np.zeros((nx, ny), dtype=np.int64)
    for i, xv in enumerate(xs):
        row = data[xv]
        if len(row) != ny:
            raise ConfigError(f"{csv_path}: ragged grid at x={xv}")
        for j, yv in enumerate(ys):
            p_final[i, j], p_avg[i, j], flags[i, j] = row[yv]
    try:
        x_axis = Axis(x_name, tuple(xs))
        y_axis = Axis(y_name, tuple(ys))
    except DomainError as exc:
        raise ConfigError(f"{csv_path}: {exc}") from exc
    return SpectrumMap(
        x_axis=x_axis,
        y_axis=y_axis,
        p_final=p_final,
        p_avg=p_avg,
        p_peak=np.maximum(p_final, p_avg),
        flags=flags,
        metadata=metadata,
    )

"""Sweep orchestration: 2-D spectra, 1-D cuts, enhancement factors, and
the slow-oscillation period curve.

Every cell evolves one trajectory and reports the fluorescence transfer
signal at the final time (``p_final``), its time average (``p_avg``), and
its running maximum (``p_peak``).  Cells whose vibrational parameters
crowd the Fock truncation are computed anyway and flagged rather than
dropped; so are cells whose trajectory spills weight into the top Fock
level.  The pipeline contains no randomness, so identical specs give
bit-identical maps.
"""

from __future__ import annotations

import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .dynamics import (
    DEFAULT_DT,
    DEFAULT_T_FINAL,
    averaged_population,
    evolve_params,
    time_grid,
)
from .errors import DomainError, PhaseDomainError
from .model import DimerParams, DissipationParams, VibrationParams
from .spectral import find_ep, slow_period

#: Cell flag bits.
FLAG_FOCK_INADEQUATE = 1  # thermal occupation too close to the truncation
FLAG_TOP_FOCK = 2         # trajectory populated the top Fock level
FLAG_SMALL_DENOMINATOR = 4  # reference value below guard in a ratio

DIMER_AXES = ("gamma", "alpha", "delta")
VIBRATION_AXES = ("nu", "kappa", "kbt")
SWEEP_AXES = DIMER_AXES + VIBRATION_AXES


@dataclass(frozen=True)
class Axis:
    """Named uniform grid over one swept parameter."""

    name: str
    values: tuple[float, ...]

    def __post_init__(self):
        if self.name not in SWEEP_AXES:
            raise DomainError(
                f"unknown sweep axis {self.name!r}; supported: {SWEEP_AXES}"
            )
        if len(self.values) == 0:
            raise ValueError("axis grid must not be empty")

    @staticmethod
    def from_range(name: str, start: float, stop: float, step: float) -> "Axis":
        if step <= 0 or stop < start:
            raise ValueError(f"bad axis range {start}..{stop} step {step}")
        n = int(round((stop - start) / step))
        vals = tuple(float(start + k * step) for k in range(n + 1))
        return Axis(name, vals)


@dataclass
class SpectrumMap:
    """2-D sweep of the transfer observables.

    ``p_final[i, j]`` etc. correspond to ``x_axis.values[i]`` and
    ``y_axis.values[j]``.
    """

    x_axis: Axis
    y_axis: Axis
    p_final: np.ndarray
    p_avg: np.ndarray
    p_peak: np.ndarray
    flags: np.ndarray
    metadata: dict

    def validate(self):
        for name, arr in (("p_final", self.p_final), ("p_avg", self.p_avg)):
            if arr.min() < -1e-12 or arr.max() > 1.0 + 1e-9:
                raise DomainError(f"{name} left [0, 1]: {arr.min()}..{arr.max()}")
        if np.any(self.p_avg > self.p_peak + 1e-9):
            raise DomainError("p_avg exceeds the recorded per-cell maximum")


@dataclass
class Cut1D:
    """One row or column of a :class:`SpectrumMap`."""

    axis: Axis
    fixed_name: str
    fixed_value: float
    requested_value: float
    p_final: np.ndarray
    p_avg: np.ndarray
    flags: np.ndarray


@dataclass
class EnhancementCurve:
    """Transfer relative to the Hermitian (gamma = 0) reference.

    ``factor_final`` and ``factor_avg`` are the fixed-time and
    time-averaged ratios.  The fixed-time reference samples a fast Rabi
    oscillation of period ~2 pi / (2 sqrt(delta^2 + alpha^2)), so that
    ratio is extremely sensitive to the exact read-out phase;
    ``factor_peak`` divides the running maxima over [0, t_f] instead,
    which is the phase-robust reading of the same enhancement.
    """

    gamma_grid: np.ndarray
    factor_final: np.ndarray
    factor_avg: np.ndarray
    factor_peak: np.ndarray
    flags: np.ndarray
    reference: dict


def _apply_axis(p: DimerParams, v: VibrationParams, name: str, value: float):
    if name in DIMER_AXES:
        return replace(p, **{name: float(value)}), v
    return p, replace(v, **{name: float(value)})


def _cell(p, v, t, t_f):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        traj = evolve_params(p, v, t)
    signal = traj.p_acceptor_excited
    flag = 0
    if not v.fock_adequate:
        flag |= FLAG_FOCK_INADEQUATE
    if "fock_overflow" in traj.flags:
        flag |= FLAG_TOP_FOCK
    return (
        float(signal[-1]),
        averaged_population(traj, t_f),
        float(signal.max()),
        flag,
    )


def sweep_2d(
    dimer: DimerParams,
    vibration: VibrationParams,
    x: Axis,
    y: Axis,
    t_f: float = DEFAULT_T_FINAL,
    dt: float = DEFAULT_DT,
    threads: int = 1,
) -> SpectrumMap:
    """Evolve one trajectory per grid cell and collect the observables.

    Cells are independent; with ``threads > 1`` they are dispatched to a
    thread pool (the heavy lifting is in BLAS, which releases the GIL).
    Results are written by index, so scheduling order cannot change the
    output.
    """
    t = time_grid(t_f, dt)
    nx, ny = len(x.values), len(y.values)
    p_final = np.zeros((nx, ny))
    p_avg = np.zeros((nx, ny))
    p_peak = np.zeros((nx, ny))
    flags = np.zeros((nx, ny), dtype=np.int64)

    def work(idx):
        i, j = idx
        p, v = _apply_axis(dimer, vibration, x.name, x.values[i])
        p, v = _apply_axis(p, v, y.name, y.values[j])
        return i, j, _cell(p, v, t, t_f)

    indices = [(i, j) for i in range(nx) for j in range(ny)]
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(work, indices))
    else:
        results = [work(idx) for idx in indices]
    for i, j, (pf, pb, pk, fl) in results:
        p_final[i, j] = pf
        p_avg[i, j] = pb
        p_peak[i, j] = pk
        flags[i, j] = fl

    out = SpectrumMap(
        x_axis=x,
        y_axis=y,
        p_final=p_final,
        p_avg=p_avg,
        p_peak=p_peak,
        flags=flags,
        metadata={
            "dimer": dimer,
            "vibration": vibration,
            "t_f": t_f,
            "dt": dt,
            "signal": "acceptor_excited",
        },
    )
    out.validate()
    return out


def cut_1d(spectrum: SpectrumMap, axis: str, value: float) -> Cut1D:
    """Extract the 1-D spectrum at the grid line nearest ``value``.

    The fixed axis is named by ``axis``; the returned curve runs along the
    other one.  Snapping offset is recorded in the result.
    """
    if axis == spectrum.x_axis.name:
        grid = np.asarray(spectrum.x_axis.values)
        k = int(np.argmin(np.abs(grid - value)))
        return Cut1D(
            axis=spectrum.y_axis,
            fixed_name=axis,
            fixed_value=float(grid[k]),
            requested_value=value,
            p_final=spectrum.p_final[k, :].copy(),
            p_avg=spectrum.p_avg[k, :].copy(),
            flags=spectrum.flags[k, :].copy(),
        )
    if axis == spectrum.y_axis.name:
        grid = np.asarray(spectrum.y_axis.values)
        k = int(np.argmin(np.abs(grid - value)))
        return Cut1D(
            axis=spectrum.x_axis,
            fixed_name=axis,
            fixed_value=float(grid[k]),
            requested_value=value,
            p_final=spectrum.p_final[:, k].copy(),
            p_avg=spectrum.p_avg[:, k].copy(),
            flags=spectrum.flags[:, k].copy(),
        )
    raise DomainError(
        f"axis {axis!r} is not part of this map "
        f"({spectrum.x_axis.name!r}, {spectrum.y_axis.name!r})"
    )


#: Ratios with a Hermitian reference below this are flagged, not divided.
DENOMINATOR_GUARD = 1e-6


def enhancement_factor(
    dimer: DimerParams,
    vibration: VibrationParams,
    gamma_grid,
    t_f: float = DEFAULT_T_FINAL,
    dt: float = DEFAULT_DT,
    threads: int = 1,
) -> EnhancementCurve:
    """Transfer enhancement over the Hermitian reference per gamma."""
    gammas = np.asarray(gamma_grid, dtype=float)
    if gammas.ndim != 1 or gammas.size == 0:
        raise ValueError("gamma_grid must be a non-empty 1-D sequence")
    t = time_grid(t_f, dt)
    ref_p = replace(dimer, gamma=0.0)
    ref_final, ref_avg, ref_peak, _ = _cell(ref_p, vibration, t, t_f)

    def work(i):
        p = replace(dimer, gamma=float(gammas[i]))
        return i, _cell(p, vibration, t, t_f)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(work, range(gammas.size)))
    else:
        results = [work(i) for i in range(gammas.size)]

    factor_final = np.zeros(gammas.size)
    factor_avg = np.zeros(gammas.size)
    factor_peak = np.zeros(gammas.size)
    flags = np.zeros(gammas.size, dtype=np.int64)
    for i, (pf, pb, pk, fl) in results:
        flags[i] = fl
        if min(ref_final, ref_avg, ref_peak) < DENOMINATOR_GUARD:
            flags[i] |= FLAG_SMALL_DENOMINATOR
        factor_final[i] = pf / ref_final if ref_final >= DENOMINATOR_GUARD else np.nan
        factor_avg[i] = pb / ref_avg if ref_avg >= DENOMINATOR_GUARD else np.nan
        factor_peak[i] = pk / ref_peak if ref_peak >= DENOMINATOR_GUARD else np.nan
    return EnhancementCurve(
        gamma_grid=gammas,
        factor_final=factor_final,
        factor_avg=factor_avg,
        factor_peak=factor_peak,
        flags=flags,
        reference={
            "p_final": ref_final,
            "p_avg": ref_avg,
            "p_peak": ref_peak,
            "t_f": t_f,
            "dt": dt,
        },
    )


@dataclass
class PeriodCurve:
    """Slow-oscillation period versus gamma, with the EP-law fit.

    ``fit_c`` is the least-squares coefficient of
    ``c (gamma* - gamma)^{-1/2}`` over the curve; ``fit_max_rel_dev`` the
    worst relative deviation of the data from that fit.
    """

    gamma: np.ndarray
    t_star: np.ndarray
    gamma_star: float
    fit_c: float
    fit_max_rel_dev: float


def period_curve(p: DimerParams, gamma_grid) -> PeriodCurve:
    """Slow-oscillation period per grid point, unbroken phase only."""
    gammas = np.asarray(gamma_grid, dtype=float)
    if gammas.ndim != 1 or gammas.size == 0:
        raise ValueError("gamma_grid must be a non-empty 1-D sequence")
    gamma_star = find_ep(p).gamma_star
    t_star = np.empty(gammas.size)
    for i, g in enumerate(gammas):
        if g >= gamma_star:
            raise PhaseDomainError(
                f"gamma={g} is at or beyond the EP ({gamma_star:.6f}); the "
                "slow period is defined in the unbroken phase only"
            )
        t_star[i] = slow_period(replace(p, gamma=float(g)))
    basis = 1.0 / np.sqrt(gamma_star - gammas)
    fit_c = float(np.dot(t_star, basis) / np.dot(basis, basis))
    rel_dev = np.abs(t_star - fit_c * basis) / t_star
    return PeriodCurve(
        gamma=gammas,
        t_star=t_star,
        gamma_star=gamma_star,
        fit_c=fit_c,
        fit_max_rel_dev=float(rel_dev.max()),
    )


def smoothed_local_maxima(x, y, min_height_frac: float = 0.0):
    """Local maxima of ``y`` after 3-point moving-average smoothing.

    Returns (positions, heights) of interior maxima of the smoothed curve
    whose height reaches ``min_height_frac`` times the global smoothed
    maximum.  Grid-phase-robust peak reading for spectra and curves.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if y.size < 3:
        raise ValueError("need at least 3 samples to find peaks")
    sm = y.copy()
    sm[1:-1] = (y[:-2] + y[1:-1] + y[2:]) / 3.0
    interior = np.flatnonzero(
        (sm[1:-1] >= sm[:-2]) & (sm[1:-1] > sm[2:])
    ) + 1
    if interior.size == 0:
        return np.array([]), np.array([])
    floor = min_height_frac * sm.max()
    keep = interior[sm[interior] >= floor]
    return x[keep], sm[keep]

"""Metrics over stored run histories: energies, fidelity, chirp, balance.

Boundary-series energies use composite Simpson quadrature per uniform
time segment so metric-level integration error stays far below the
solver's own; the passive-medium check efficiency + transmission <= 1
holds to 1e-6 on the default grids.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np

from .errors import InvalidParameterError, UndefinedMetricError
from .params import GridSpec, MediumParams, Protocol, PulseSpec
from .solver import SpaceTimeField


def _simpson_uniform(y: np.ndarray, dx: float) -> float:
    """Composite Simpson on uniformly spaced samples (any length >= 1)."""
    n = y.size
    if n < 2:
        return 0.0
    if n == 2:
        return 0.5 * dx * float(y[0] + y[1])
    if n % 2 == 1:
        s = y[0] + y[-1] + 4.0 * y[1:-1:2].sum() + 2.0 * y[2:-2:2].sum()
        return dx / 3.0 * float(s)
    # even count: Simpson on the first n-1 points, 3/8 correction absent;
    # close the last interval with a 3-point Newton-Cotes using the tail
    head = _simpson_uniform(y[:-1], dx)
    tail = dx / 12.0 * float(-y[-3] + 8.0 * y[-2] + 5.0 * y[-1])
    return head + tail


def _split_regions(t: np.ndarray, cuts: Sequence[float]):
    """Index ranges of the uniform regions delimited by `cuts`."""
    edges = [0]
    for c in cuts:
        edges.append(int(np.searchsorted(t, c, side="left")))
    edges.append(t.size - 1)
    for a, b in zip(edges, edges[1:]):
        if b > a:
            yield a, b  # region samples t[a..b] inclusive


def integrate_boundary(t: np.ndarray, y: np.ndarray,
                       cuts: Sequence[float]) -> float:
    """Integrate y(t) over the window, respecting piecewise-uniform dt."""
    total = 0.0
    for a, b in _split_regions(t, cuts):
        dx = t[a + 1] - t[a]
        total += _simpson_uniform(y[a:b + 1], dx)
    return total


def efficiency(history: SpaceTimeField,
               flip_time: Optional[float] = None) -> Tuple[float, float]:
    """(transmission, efficiency): output energy split at the flip,
    normalized by the input energy."""
    if flip_time is None:
        if not history.flip_times:
            raise InvalidParameterError("no flip in protocol; pass flip_time")
        flip_time = history.flip_times[0]
    t = history.t
    cuts = list(history.flip_times)
    e_in = integrate_boundary(t, np.abs(history.e_in) ** 2, cuts)
    if e_in <= 0.0:
        raise UndefinedMetricError("zero input energy")
    i_flip = int(np.searchsorted(t, flip_time, side="left"))
    out2 = np.abs(history.e_out) ** 2
    pre = integrate_boundary(t[: i_flip + 1], out2[: i_flip + 1],
                             [c for c in cuts if c < flip_time])
    post = integrate_boundary(t[i_flip:], out2[i_flip:],
                              [c for c in cuts if c > flip_time])
    return pre / e_in, post / e_in


def peak_time(t: np.ndarray, y: np.ndarray) -> float:
    """Arg max of |y| with 3-point parabolic refinement."""
    a = np.abs(y)
    i = int(np.argmax(a))
    if 0 < i < a.size - 1:
        num = a[i - 1] - a[i + 1]
        den = a[i - 1] - 2.0 * a[i] + a[i + 1]
        if den != 0.0:
            return float(t[i] + 0.5 * num / den * (t[i + 1] - t[i]))
    return float(t[i])


def envelope_fidelity(echo_t, echo_vals, input_t, input_vals,
                      reversed_input: bool = True):
    """Peak normalized cross-correlation of |echo(t)| against |f_in(s - t)|.

    Returns (fidelity in [0, 1], lag).  The lag is the correlation-refined
    input-to-echo delay: an input centered at -t0 recalled symmetrically
    about the flip gives lag = 2*t0.  With reversed_input=False the match
    is against |f_in(t - s)| instead (forward time order, e.g. after a
    two-memory cascade) and the lag is the plain shift s.
    Both series must share one uniform sample spacing.
    """
    a = np.abs(np.asarray(echo_vals))
    b = np.abs(np.asarray(input_vals))
    if not a.any() or not b.any():
        raise UndefinedMetricError("zero series in fidelity")
    dta = np.diff(echo_t)
    dtb = np.diff(input_t)
    dt = dta[0]
    if (np.abs(dta - dt).max() > 1e-9 * abs(dt)
            or np.abs(dtb - dt).max() > 1e-9 * abs(dt)):
        raise InvalidParameterError("fidelity needs a shared uniform spacing")
    if reversed_input:
        # echo(t) ~ f_in(s - t); the input-to-echo delay is then
        # s - 2 * t_peak(input)
        c = np.convolve(a, b)
        lag0 = echo_t[0] + input_t[0] - 2.0 * peak_time(input_t, input_vals)
    else:
        c = np.correlate(a, b, mode="full")
        lag0 = echo_t[0] - input_t[0] - (b.size - 1) * dt
    norm = math.sqrt(float((a**2).sum()) * float((b**2).sum()))
    k = int(np.argmax(c))
    lag = lag0 + k * dt
    if 0 < k < c.size - 1:
        num = c[k - 1] - c[k + 1]
        den = c[k - 1] - 2.0 * c[k] + c[k + 1]
        if den != 0.0:
            lag += 0.5 * num / den * dt
    return float(c[k] / norm), float(lag)


@dataclass(frozen=True)
class ChirpFit:
    """Weighted linear fit of the unwrapped echo phase over its FWHM."""

    slope: float          # d(phase)/dt at the window center
    peak_time: float
    window: Tuple[float, float]
    n_points: int


def chirp_estimate(t, vals, *, min_peak: float = 0.0,
                   jump_threshold: float = math.pi) -> ChirpFit:
    """Fit the echo's instantaneous frequency d(phase)/dt near its peak."""
    vals = np.asarray(vals)
    amp = np.abs(vals)
    pk = float(amp.max(initial=0.0))
    if pk <= 0.0 or pk < min_peak:
        raise UndefinedMetricError("echo amplitude below chirp threshold")
    ipk = int(np.argmax(amp))
    half = amp >= 0.5 * pk
    i0 = ipk
    while i0 > 0 and half[i0 - 1]:
        i0 -= 1
    i1 = ipk
    while i1 < amp.size - 1 and half[i1 + 1]:
        i1 += 1
    if i1 - i0 < 3:
        raise UndefinedMetricError("too few samples across the echo peak")
    tw = np.asarray(t)[i0:i1 + 1]
    ph = np.unwrap(np.angle(vals[i0:i1 + 1]),
                   discont=max(jump_threshold, math.pi / 2))
    tc = peak_time(tw, vals[i0:i1 + 1])
    coeff = np.polyfit(tw - tc, ph, 1, w=amp[i0:i1 + 1])
    return ChirpFit(slope=float(coeff[0]), peak_time=tc,
                    window=(float(tw[0]), float(tw[-1])),
                    n_points=int(tw.size))


def energy_balance(history: SpaceTimeField, medium: MediumParams):
    """Photon-flux balance residual series.

    With zero decay,  d/dt int sum_f w_f |alpha|^2 dz
    + (coupling/density) * (|E(z0)|^2 - |E(-z0)|^2)  vanishes; a decay
    rate adds the 2*decay*norm sink.  Returns (times, residual,
    normalized_max) with the residual normalized by the peak input flux.
    """
    if medium.density <= 0.0:
        raise InvalidParameterError("energy balance needs density > 0")
    g_over_n = medium.coupling / medium.density
    t = history.t
    A = history.alpha_norm
    flux = g_over_n * (np.abs(history.e_out) ** 2 - np.abs(history.e_in) ** 2)
    times, resid = [], []
    for a, b in _split_regions(t, list(history.flip_times)):
        if b - a < 2:
            continue
        dt = t[a + 1] - t[a]
        sl = slice(a + 1, b)
        dA = (A[a + 2:b + 1] - A[a:b - 1]) / (2.0 * dt)
        r = dA + 2.0 * medium.decay * A[sl] + flux[sl]
        times.append(t[sl])
        resid.append(r)
    times = np.concatenate(times)
    resid = np.concatenate(resid)
    peak_flux = float(np.max(g_over_n * np.abs(history.e_in) ** 2))
    if peak_flux <= 0.0:
        raise UndefinedMetricError("zero input flux")
    return times, resid, float(np.max(np.abs(resid)) / peak_flux)


@dataclass
class RunReport:
    """Summary metrics of one protocol run."""

    input_energy: float = math.nan
    transmitted_energy: float = math.nan
    echo_energy: float = math.nan
    transmission: float = math.nan
    efficiency: float = math.nan
    echo_peak_time: float = math.nan
    envelope_fidelity: float = math.nan
    fidelity_lag: float = math.nan
    chirp: float = math.nan
    chirp_peak_time: float = math.nan
    energy_residual: float = math.nan
    n_z: int = 0
    dt: float = math.nan
    t_start: float = math.nan
    t_end: float = math.nan
    backend: str = ""
    flip_time: float = math.nan
    status: str = "ok"
    notes: Tuple[str, ...] = ()

    FIELDS = (
        "input_energy", "transmitted_energy", "echo_energy", "transmission",
        "efficiency", "echo_peak_time", "envelope_fidelity", "fidelity_lag",
        "chirp", "chirp_peak_time", "energy_residual", "n_z", "dt",
        "t_start", "t_end", "backend", "flip_time", "status",
    )

    def as_row(self) -> dict:
        return {name: getattr(self, name) for name in self.FIELDS}


def build_report(
    history: SpaceTimeField,
    medium: MediumParams,
    pulse: PulseSpec,
    protocol: Protocol,
    grid: GridSpec,
) -> RunReport:
    """Assemble the standard report from a stored history."""
    notes = []
    rep = RunReport(
        n_z=grid.n_z, dt=grid.dt, t_start=grid.t_start, t_end=grid.t_end,
        backend=history.backend,
        flip_time=protocol.flip_times[0] if protocol.flip_times else math.nan,
    )
    t = history.t
    try:
        trans, eff = efficiency(history)
    except UndefinedMetricError:
        rep.status = "zero-input"
        return rep
    except InvalidParameterError:
        trans = eff = math.nan
        notes.append("no flip: transmission/efficiency split undefined")
    cuts = list(history.flip_times)
    rep.input_energy = integrate_boundary(t, np.abs(history.e_in) ** 2, cuts)
    rep.transmission = trans
    rep.efficiency = eff
    if not math.isnan(trans):
        rep.transmitted_energy = trans * rep.input_energy
        rep.echo_energy = eff * rep.input_energy

    if history.flip_times:
        flip = history.flip_times[0]
        post = t >= flip
        echo_t, echo_v = t[post], history.e_out[post]
        if np.abs(echo_v).max(initial=0.0) > 0.0:
            rep.echo_peak_time = peak_time(echo_t, echo_v)
            pre = t <= flip
            try:
                rep.envelope_fidelity, rep.fidelity_lag = envelope_fidelity(
                    echo_t, echo_v, t[pre], history.e_in[pre]
                )
            except (UndefinedMetricError, InvalidParameterError) as exc:
                notes.append(f"fidelity: {exc}")
            try:
                fit = chirp_estimate(echo_t, echo_v)
                rep.chirp = fit.slope
                rep.chirp_peak_time = fit.peak_time
            except UndefinedMetricError as exc:
                notes.append(f"chirp: {exc}")
        else:
            notes.append("no post-flip signal")

    try:
        _, _, rep.energy_residual = energy_balance(history, medium)
    except (InvalidParameterError, UndefinedMetricError) as exc:
        notes.append(f"energy balance: {exc}")

    rep.notes = tuple(notes)
    return rep


@dataclass
class SweepRow:
    value: float
    report: Optional[RunReport]
    error: str = ""


@dataclass
class SweepTable:
    axis: str
    rows: List[SweepRow] = field(default_factory=list)

    def column(self, name: str) -> List:
        return [getattr(r.report, name) if r.report else math.nan
                for r in self.rows]


def sweep(
    runner: Callable[[float], RunReport],
    axis: str,
    values: Sequence[float],
    *,
    threads: int = 1,
) -> SweepTable:
    """One report per axis value; per-row failures recorded, sweep continues.

    Rows are deterministic and ordered like `values` regardless of the
    thread count.
    """
    table = SweepTable(axis=axis)

    def one(v):
        try:
            return SweepRow(value=v, report=runner(v))
        except Exception as exc:  # per-row isolation is the contract
            return SweepRow(value=v, report=None, error=str(exc))

    if threads > 1 and len(values) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            table.rows = list(pool.map(one, values))
    else:
        table.rows = [one(v) for v in values]
    return table

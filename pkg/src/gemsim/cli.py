"""Command-line front end: simulate, compare, sweep, cascade.

All commands resolve a flat key-value configuration (preset and/or file
plus --set overrides), echo the resolved form next to the outputs, and
write plot-ready CSV.  Runs are internally rescaled to natural units;
emitted times and rates are in the configuration's own units.

Exit codes: 0 success, 1 configuration error, 2 numerical failure,
3 validity warning under --strict.
"""
from __future__ import annotations

import argparse
import math
import sys
import warnings
from dataclasses import replace
from pathlib import Path
from typing import Dict, List, Optional

import numpy as np

from . import analysis, cascade as cascade_mod, oracle, solver
from .analysis import RunReport
from .config import RunConfig, parse_config_text, parse_set_overrides
from .errors import (
    ConfigError,
    GemsimError,
    InvalidParameterError,
    NumericalError,
    OracleValidityWarning,
    StabilityError,
)
from .params import nondimensionalize

EMIT_CHOICES = ("boundary", "field", "alpha", "spectra")


def _fmt(x) -> str:
    if isinstance(x, float):
        if math.isnan(x):
            return "nan"
        return repr(x)
    return str(x)


def write_csv(path: Path, header: List[str], rows) -> None:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(_fmt(v) for v in row))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def _report_row(report: RunReport) -> list:
    return [report.as_row()[k] for k in RunReport.FIELDS]


def _rescale_report(report: RunReport, tscale: float) -> RunReport:
    """Map a natural-units report back to the configuration's units."""
    r = replace(report)
    for name in ("input_energy", "transmitted_energy", "echo_energy",
                 "echo_peak_time", "fidelity_lag", "chirp_peak_time",
                 "dt", "t_start", "t_end", "flip_time"):
        setattr(r, name, getattr(r, name) * tscale)
    r.chirp = r.chirp / tscale
    return r


def _write_report(out: Path, report: RunReport) -> None:
    write_csv(out / "report.csv", list(RunReport.FIELDS),
              [_report_row(report)])


def _write_boundary(out: Path, history, tscale: float) -> None:
    rows = zip(
        history.t * tscale,
        history.e_in.real, history.e_in.imag,
        history.e_out.real, history.e_out.imag,
        np.abs(history.e_out) ** 2,
    )
    write_csv(out / "boundary.csv",
              ["t", "re_e_in", "im_e_in", "re_e_out", "im_e_out",
               "abs2_e_out"], rows)


def _write_zt(out: Path, name: str, times, z, grids, tscale, lscale) -> None:
    rows = []
    for ti, row in zip(times, grids):
        for zj, v in zip(z, row):
            rows.append((ti * tscale, zj * lscale, v.real, v.imag,
                         abs(v) ** 2))
    write_csv(out / name, ["t", "z", "re", "im", "abs2"], rows)


def _write_spectra(out: Path, history, pulse, medium, tscale) -> None:
    sw = pulse.bandwidth_rms()
    omega = np.linspace(-4.0 * sw, 4.0 * sw, 161)
    pre = history.t <= (history.flip_times[0] if history.flip_times
                        else history.t[-1])
    f_in = oracle.dft_time(history.t[pre], history.e_in[pre], omega)
    f_out = oracle.dft_time(history.t[pre], history.e_out[pre], omega)
    rows = zip(omega / tscale, f_in.real, f_in.imag, f_out.real, f_out.imag,
               np.abs(f_out) / np.maximum(np.abs(f_in), 1e-300))
    write_csv(out / "spectra.csv",
              ["omega", "re_f_in", "im_f_in", "re_f_out", "im_f_out",
               "abs_ratio"], rows)


def _prepare(args):
    file_values: Dict[str, object] = {}
    if args.config:
        text = Path(args.config).read_text(encoding="utf-8")
        file_values = parse_config_text(text, source=args.config)
    overrides = parse_set_overrides(args.set or [])
    cfg = RunConfig.resolve(scenario=args.scenario,
                            file_values=file_values, overrides=overrides)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "resolved_config.cfg").write_text(cfg.dump(), encoding="utf-8")
    return cfg, out


def _run_scaled(cfg: RunConfig, backend=None):
    medium, pulse, grid, protocol = cfg.build()
    scaled = nondimensionalize(medium, pulse, grid, protocol)
    history, report = solver.run(
        scaled.medium, scaled.pulse, scaled.protocol, scaled.grid,
        backend=backend,
    )
    return scaled, history, report


def cmd_simulate(args) -> int:
    cfg, out = _prepare(args)
    scaled, history, report = _run_scaled(cfg)
    tscale = scaled.time_scale
    _write_report(out, _rescale_report(report, tscale))
    emit = [e for e in (args.emit or "boundary").split(",") if e]
    for e in emit:
        if e not in EMIT_CHOICES:
            raise ConfigError(f"unknown emit selection {e!r}", key="emit")
    if "boundary" in emit:
        _write_boundary(out, history, tscale)
    if "field" in emit:
        _write_zt(out, "field_zt.csv", history.snap_t, history.z,
                  history.snap_e, tscale, scaled.length_scale)
    if "alpha" in emit:
        _write_zt(out, "alpha_zt.csv", history.snap_t, history.z,
                  history.snap_p, tscale, scaled.length_scale)
    if "spectra" in emit:
        _write_spectra(out, history, scaled.pulse, scaled.medium, tscale)
    print(f"simulate: efficiency={report.efficiency:.6g} "
          f"transmission={report.transmission:.6g} -> {out}")
    return 0


def compare_run(cfg: RunConfig, out: Optional[Path] = None):
    """Solver vs closed-form chain; returns the summary metric dict."""
    scaled, history, report = _run_scaled(cfg)
    medium, pulse = scaled.medium, scaled.pulse
    tscale = scaled.time_scale
    flip = scaled.protocol.flip_times[0]
    beta = medium.optical_depth()

    # echo vs the input-output map (envelopes; the map's phase is stated
    # in the conjugate spectral convention, so complex overlap conjugates)
    post = history.t > flip
    echo_t, echo_v = history.t[post], history.e_out[post]
    pred = oracle.output_map(pulse, medium, echo_t)
    peak = np.abs(pred.values).max()
    mwin = np.abs(pred.values) > 1e-6 * peak
    rms = float(np.sqrt(np.mean(
        (np.abs(echo_v[mwin]) - np.abs(pred.values[mwin])) ** 2))) / peak
    overlap_num = np.vdot(np.conj(pred.values[mwin]), echo_v[mwin])
    overlap = abs(overlap_num) / math.sqrt(
        float(np.sum(np.abs(pred.values[mwin]) ** 2))
        * float(np.sum(np.abs(echo_v[mwin]) ** 2)))

    # transmitted spectrum vs the transfer function, inside the pulse band
    sw = pulse.bandwidth_rms()
    omega = np.linspace(-2.5 * sw, 2.5 * sw, 11)
    pre = history.t <= flip
    spec_in = oracle.dft_time(history.t[pre], history.e_in[pre], omega)
    spec_out = oracle.dft_time(history.t[pre], history.e_out[pre], omega)
    measured = np.abs(spec_out / spec_in)
    tev = oracle.spectral_transfer(omega, medium.z_half, medium)
    logdev = float(np.max(np.abs(np.log(measured) - np.log(tev.attenuation)))
                   / (math.pi * beta)) if beta > 0 else float(
                       np.max(np.abs(measured - 1.0)))

    # stored-field k-spectrum at the flip instant vs the asymptotic form
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", OracleValidityWarning)
        e_flip = history.field_at_event(flip)
        k, ek = oracle.fft_spatial_spectrum(history.z, e_flip, pad=8)
        ftf = oracle.flip_time_field(pulse, medium, k)
        amp5 = np.abs(ftf.values)
        mask = amp5 > 1e-3 * amp5.max()
        corr = float(np.corrcoef(np.abs(ek)[mask], amp5[mask])[0, 1])
    validity_warned = any(
        issubclass(w.category, OracleValidityWarning) for w in caught
    )

    summary = {
        "echo_rms_of_peak": rms,
        "echo_envelope_fidelity": report.envelope_fidelity,
        "echo_complex_overlap": float(overlap),
        "transfer_logdev_max_frac": logdev,
        "kspace_correlation": corr,
        "validity_ratio": ftf.validity_ratio,
        "validity_warned": validity_warned,
        "efficiency": report.efficiency,
        "transmission": report.transmission,
    }
    if out is not None:
        write_csv(out / "echo_compare.csv",
                  ["t", "abs_echo", "abs_predicted", "re_echo", "im_echo",
                   "re_predicted", "im_predicted"],
                  zip(echo_t * tscale, np.abs(echo_v), np.abs(pred.values),
                      echo_v.real, echo_v.imag,
                      pred.values.real, pred.values.imag))
        write_csv(out / "transfer_compare.csv",
                  ["omega", "abs_measured", "abs_predicted"],
                  zip(omega / tscale, measured, tev.attenuation))
        write_csv(out / "kspace_compare.csv",
                  ["k", "abs_solver", "abs_predicted"],
                  zip(k[mask], np.abs(ek)[mask], amp5[mask]))
        write_csv(out / "compare_summary.csv",
                  ["metric", "value"],
                  [(k_, v) for k_, v in summary.items()])
        _write_report(out, _rescale_report(report, tscale))
    return summary


def cmd_compare(args) -> int:
    cfg, out = _prepare(args)
    summary = compare_run(cfg, out)
    print("compare: " + " ".join(f"{k}={v:.6g}" if isinstance(v, float)
                                 else f"{k}={v}" for k, v in summary.items()))
    if args.strict and summary["validity_warned"]:
        print("strict mode: oracle validity warning raised", file=sys.stderr)
        return 3
    return 0


def cmd_sweep(args) -> int:
    cfg, out = _prepare(args)
    axis = args.axis
    values = [float(v) for v in str(args.values).split(",") if v != ""]

    def runner(v):
        sub = RunConfig.resolve(
            scenario=None,
            file_values=dict(cfg.values),
            overrides={axis: v},
        )
        scaled, history, report = _run_scaled(sub)
        return _rescale_report(report, scaled.time_scale)

    table = analysis.sweep(runner, axis, values, threads=args.threads)
    header = ["axis", "value", *RunReport.FIELDS, "error"]
    rows = []
    for r in table.rows:
        rep = r.report if r.report is not None else RunReport()
        rows.append([axis, r.value, *_report_row(rep), r.error])
    write_csv(out / "sweep.csv", header, rows)
    print(f"sweep: {len(rows)} rows -> {out / 'sweep.csv'}")
    return 0


def cmd_cascade(args) -> int:
    cfg, out = _prepare(args)
    medium, pulse, grid, protocol = cfg.build()
    if protocol.cascade is None:
        # second stage disabled: identical to simulate
        return cmd_simulate(args)
    scaled = nondimensionalize(medium, pulse, grid, protocol)
    res = cascade_mod.run_cascade(
        scaled.medium, scaled.pulse, scaled.protocol, scaled.grid
    )
    tscale = scaled.time_scale
    for stage, hist, rep in (("stage1", res.history1, res.report1),
                             ("stage2", res.history2, res.report2)):
        sub = out / stage
        sub.mkdir(exist_ok=True)
        _write_report(sub, _rescale_report(rep, tscale))
        _write_boundary(sub, hist, tscale)
    write_csv(out / "cascade_report.csv",
              ["chirp_stage1", "chirp_stage2", "residual_chirp_fraction",
               "end_to_end_fidelity", "end_to_end_lag", "flip2_time",
               "efficiency_stage1", "efficiency_stage2"],
              [(res.chirp1 / tscale, res.chirp2 / tscale,
                res.residual_chirp_fraction, res.end_to_end_fidelity,
                res.end_to_end_lag * tscale, res.flip2_offset * tscale,
                res.report1.efficiency, res.report2.efficiency)])
    print(f"cascade: residual chirp {res.residual_chirp_fraction:.3g} of "
          f"stage 1, end-to-end fidelity {res.end_to_end_fidelity:.4f}"
          f" -> {out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="gemsim",
        description="Gradient echo memory simulator and analysis toolkit",
    )
    sub = p.add_subparsers(dest="command", required=True)
    for name, fn in (("simulate", cmd_simulate), ("compare", cmd_compare),
                     ("sweep", cmd_sweep), ("cascade", cmd_cascade)):
        q = sub.add_parser(name)
        q.add_argument("--scenario", help="named preset")
        q.add_argument("--config", help="configuration file path")
        q.add_argument("--set", action="append", metavar="KEY=VALUE",
                       help="override a configuration key (repeatable)")
        q.add_argument("--out", default="gemsim-out", help="output directory")
        q.add_argument("--emit",
                       help="comma list from boundary,field,alpha,spectra; "
                            "empty writes only the report")
        q.add_argument("--strict", action="store_true",
                       help="treat validity warnings as errors (exit 3)")
        q.add_argument("--threads", type=int, default=1)
        if name == "sweep":
            q.add_argument("--axis", required=True,
                           help="configuration key to sweep")
            q.add_argument("--values", required=True,
                           help="comma-separated axis values")
        q.set_defaults(fn=fn)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except ConfigError as exc:
        key = f" (key: {exc.key})" if exc.key else ""
        print(f"configuration error: {exc}{key}", file=sys.stderr)
        return 1
    except (NumericalError, StabilityError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 2
    except InvalidParameterError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 1
    except GemsimError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

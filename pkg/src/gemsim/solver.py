"""Method-of-lines integrator for the linearized two-level ensemble.

The polarization obeys, per z point and detuning family,

    d(alpha)/dt = -(decay + i*(s*sigma_f*gradient*z + delta_f)) * alpha
                  + i*coupling * E(z, t)

while the field, having no time derivative in the light-speed frame, is
re-solved at every Runge-Kutta stage as a cumulative trapezoid along z,

    E(z) = f_in(t) + i*density * integral_{-z_half}^{z} sum_f w_f alpha dz'

with the entry-face boundary value as the constant of integration.  Sign
reversals of the controlled gradient split the time stepping exactly at
the event, so a flip is never smeared across a step.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np

from . import kernel
from .errors import InvalidParameterError, NumericalError, StabilityError
from .params import GridSpec, MediumParams, Protocol, PulseSpec, discretize_line

STABILITY_LIMIT = 0.5  # dt * max|detuning| above this refuses to run


@dataclass(frozen=True)
class Families:
    """Flattened (orientation x intrinsic-class) detuning families."""

    sign: np.ndarray     # controlled-gradient multiplier per family
    offset: np.ndarray   # static detuning offset per family
    weight: np.ndarray   # source weight per family, sums to 1

    @classmethod
    def from_medium(cls, medium: MediumParams) -> "Families":
        offsets, wts = discretize_line(medium.intrinsic)
        sgn, off, wgt = [], [], []
        for s_o, u_o in medium.orientations:
            sgn.append(np.full(offsets.size, s_o))
            off.append(offsets)
            wgt.append(wts * u_o)
        return cls(
            sign=np.concatenate(sgn),
            offset=np.concatenate(off),
            weight=np.concatenate(wgt),
        )


@dataclass
class SolverState:
    """Instantaneous integrator state."""

    t: float
    alpha: np.ndarray        # complex (n_z, n_fam)
    sign: float = 1.0

    def flipped(self) -> "SolverState":
        """Reverse the controlled-gradient sign; intrinsic offsets stay."""
        return SolverState(t=self.t, alpha=self.alpha, sign=-self.sign)


def flip_sign(state: SolverState, at_time: float) -> SolverState:
    """Apply a detuning flip at `at_time` (sign involution on the state)."""
    out = state.flipped()
    out.t = at_time
    return out


@dataclass
class SpaceTimeField:
    """Stored history of a run.

    Boundary series are kept at full step resolution; E(z) and the
    source-summed polarization are decimated by the grid's store stride.
    Event snapshots hold the exact fields at segment boundaries (window
    edges and every flip instant).
    """

    z: np.ndarray
    t: np.ndarray
    e_in: np.ndarray
    e_out: np.ndarray
    alpha_norm: np.ndarray
    snap_t: np.ndarray
    snap_e: np.ndarray            # (n_snap, n_z)
    snap_p: np.ndarray            # (n_snap, n_z)
    event_t: np.ndarray
    event_e: np.ndarray           # (n_event, n_z)
    event_p: np.ndarray
    segments: List[Tuple[float, float, float, float, int]]
    backend: str
    flip_times: Tuple[float, ...]

    def field_at_event(self, t_event: float, atol: float = 1e-12) -> np.ndarray:
        """E(z) snapshot at a segment boundary (e.g. a flip instant)."""
        idx = np.where(np.abs(self.event_t - t_event) <= atol)[0]
        if idx.size == 0:
            raise InvalidParameterError(f"no event snapshot at t={t_event}")
        return self.event_e[idx[0]]


def _check_stability(medium: MediumParams, dt: float, allow_unstable: bool):
    span = medium.max_detuning()
    if dt * span > STABILITY_LIMIT and not allow_unstable:
        raise StabilityError(
            f"dt*max|detuning| = {dt * span:.3g} exceeds {STABILITY_LIMIT}; "
            f"reduce dt below {STABILITY_LIMIT / span:.3g} or override"
        )


def _segment_plan(grid: GridSpec, protocol: Protocol):
    edges = [grid.t_start, *protocol.flip_times, grid.t_end]
    signs = [protocol.initial_sign * (-1) ** i for i in range(len(edges) - 1)]
    plan = []
    for (a, b), s in zip(zip(edges, edges[1:]), signs):
        n = max(1, int(round((b - a) / grid.dt)))
        plan.append((a, b, float(s), (b - a) / n, n))
    return plan


def simulate(
    medium: MediumParams,
    pulse: PulseSpec,
    protocol: Protocol,
    grid: GridSpec,
    *,
    backend: Optional[str] = None,
    allow_unstable: bool = False,
) -> SpaceTimeField:
    """Integrate the full window and return the stored history."""
    protocol.validate_window(grid)
    _check_stability(medium, grid.dt, allow_unstable)

    fam = Families.from_medium(medium)
    backend_name, advance = kernel.get_backend(backend)
    z = np.linspace(-medium.z_half, medium.z_half, grid.n_z)
    alpha = np.zeros((grid.n_z, fam.sign.size), dtype=np.complex128)

    plan = _segment_plan(grid, protocol)
    t_parts, ein_parts, eout_parts, norm_parts = [], [], [], []
    snap_t_parts, snap_e_parts, snap_p_parts = [], [], []
    event_t, event_e, event_p = [], [], []
    stride = grid.store_stride
    wz = np.full(grid.n_z, z[1] - z[0])
    wz[0] = wz[-1] = 0.5 * (z[1] - z[0])

    def event_snapshot(t_now, f_now):
        E = kernel.field_sweep(alpha, f_now, z, fam.weight, medium.density)
        event_t.append(t_now)
        event_e.append(E.copy())
        event_p.append(alpha @ fam.weight)
        return E

    for a, b, s, dt_eff, n in plan:
        th = a + 0.5 * dt_eff * np.arange(2 * n + 1)
        f_half = pulse.sample(th)
        event_snapshot(a, f_half[0])

        bound_in = np.empty(n, dtype=np.complex128)
        bound_out = np.empty(n, dtype=np.complex128)
        norm = np.empty(n, dtype=float)
        n_snap = (n + stride - 1) // stride
        snap_e = np.empty((n_snap, grid.n_z), dtype=np.complex128)
        snap_p = np.empty((n_snap, grid.n_z), dtype=np.complex128)

        advance(
            alpha, s, medium.coupling, medium.density, medium.decay,
            medium.gradient, z, fam.sign, fam.offset, fam.weight,
            np.ascontiguousarray(f_half), dt_eff, n, stride,
            bound_in, bound_out, norm, snap_e, snap_p,
        )

        bad = np.flatnonzero(~np.isfinite(bound_out))
        if bad.size:
            t_bad = a + dt_eff * bad[0]
            zi = np.flatnonzero(~np.isfinite(alpha).all(axis=1))
            raise NumericalError(
                f"non-finite field at t={t_bad:.6g}",
                t=t_bad,
                z_index=int(zi[0]) if zi.size else None,
            )

        t_parts.append(a + dt_eff * np.arange(n))
        ein_parts.append(bound_in)
        eout_parts.append(bound_out)
        norm_parts.append(norm)
        snap_t_parts.append(a + dt_eff * stride * np.arange(n_snap))
        snap_e_parts.append(snap_e)
        snap_p_parts.append(snap_p)

    # final point of the window
    t_final = plan[-1][1]
    f_final = pulse.sample(np.array([t_final]))[0]
    E_final = event_snapshot(t_final, f_final)
    t_parts.append(np.array([t_final]))
    ein_parts.append(np.array([f_final]))
    eout_parts.append(np.array([E_final[-1]]))
    norm_parts.append(np.array([float(wz @ ((np.abs(alpha) ** 2) @ fam.weight))]))

    if not np.isfinite(alpha).all():
        zi = np.flatnonzero(~np.isfinite(alpha).all(axis=1))
        raise NumericalError(
            f"non-finite polarization at t={t_final:.6g}",
            t=t_final,
            z_index=int(zi[0]) if zi.size else None,
        )

    return SpaceTimeField(
        z=z,
        t=np.concatenate(t_parts),
        e_in=np.concatenate(ein_parts),
        e_out=np.concatenate(eout_parts),
        alpha_norm=np.concatenate(norm_parts),
        snap_t=np.concatenate(snap_t_parts),
        snap_e=np.vstack(snap_e_parts),
        snap_p=np.vstack(snap_p_parts),
        event_t=np.asarray(event_t),
        event_e=np.vstack(event_e),
        event_p=np.vstack(event_p),
        segments=plan,
        backend=backend_name,
        flip_times=protocol.flip_times,
    )


def step(
    state: SolverState,
    medium: MediumParams,
    protocol: Protocol,
    dt: float,
    pulse: PulseSpec,
    *,
    allow_unstable: bool = False,
) -> SolverState:
    """Advance a state by one step, splitting exactly at flip events."""
    _check_stability(medium, dt, allow_unstable)
    fam = Families.from_medium(medium)
    z = np.linspace(-medium.z_half, medium.z_half, state.alpha.shape[0])
    t0, t1 = state.t, state.t + dt
    cuts = [t0] + [ft for ft in protocol.flip_times if t0 < ft < t1] + [t1]
    alpha = state.alpha.copy()
    sign = state.sign
    scratch = (np.empty(1, np.complex128), np.empty(1, np.complex128),
               np.empty(1, float))
    for a, b in zip(cuts, cuts[1:]):
        th = a + 0.5 * (b - a) * np.arange(3)
        kernel.advance_segment(
            alpha, sign, medium.coupling, medium.density, medium.decay,
            medium.gradient, z, fam.sign, fam.offset, fam.weight,
            pulse.sample(th), b - a, 1, 0, *scratch, None, None,
        )
        if b in protocol.flip_times:
            sign = -sign
    if not np.isfinite(alpha).all():
        zi = np.flatnonzero(~np.isfinite(alpha).all(axis=1))
        raise NumericalError("non-finite polarization after step",
                             t=t1, z_index=int(zi[0]) if zi.size else None)
    return SolverState(t=t1, alpha=alpha, sign=sign)


def run(
    medium: MediumParams,
    pulse: PulseSpec,
    protocol: Protocol,
    grid: GridSpec,
    *,
    backend: Optional[str] = None,
    allow_unstable: bool = False,
):
    """Full protocol run: history plus the standard report."""
    from . import analysis  # local import; analysis consumes solver types

    history = simulate(
        medium, pulse, protocol, grid,
        backend=backend, allow_unstable=allow_unstable,
    )
    report = analysis.build_report(history, medium, pulse, protocol, grid)
    return history, report

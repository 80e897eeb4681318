"""Domain types: medium, intrinsic line, pulse, grid, protocol, scaling.

All solver-facing code works in the natural frame where the pulse duration
and sample half-length are 1; :func:`nondimensionalize` maps physical
parameter sets into that frame and back.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Optional, Tuple

import numpy as np

from .errors import InvalidParameterError

# Gaussian pulse duration convention: `duration` is the FWHM of the
# intensity envelope |f|^2.  Field sigma = duration / (2*sqrt(ln 2)).
_FWHM_TO_SIGMA = 1.0 / (2.0 * math.sqrt(math.log(2.0)))

LINE_SHAPES = ("delta", "lorentzian", "gaussian")
PULSE_SHAPES = ("gaussian", "square", "custom")


@dataclass(frozen=True)
class IntrinsicLineModel:
    """Static intrinsic (non-reversible) detuning spread of the ensemble.

    The spread is discretized into `n_classes` frozen detuning classes with
    normalized weights; `truncation` is the sampled half-support in units
    of `width` (the FWHM).
    """

    shape: str = "delta"
    width: float = 0.0
    n_classes: int = 1
    truncation: float = 10.0

    def __post_init__(self):
        if self.shape not in LINE_SHAPES:
            raise InvalidParameterError(f"unknown line shape {self.shape!r}")
        if self.n_classes < 1:
            raise InvalidParameterError("n_classes must be >= 1")
        if self.n_classes == 1 and self.shape != "delta":
            raise InvalidParameterError("n_classes = 1 requires shape 'delta'")
        if self.n_classes > 1 and self.width <= 0.0:
            raise InvalidParameterError(
                "a broadened line (n_classes > 1) needs width > 0"
            )
        if self.truncation <= 0.0:
            raise InvalidParameterError("truncation must be positive")

    def scaled(self, time_scale: float) -> "IntrinsicLineModel":
        return replace(self, width=self.width * time_scale)


def discretize_line(model: IntrinsicLineModel) -> Tuple[np.ndarray, np.ndarray]:
    """Return (offsets, weights) for the intrinsic-line detuning classes.

    Offsets are symmetric about zero, weights are nonnegative and sum to 1.
    For broadened shapes the classes sample a uniform grid over
    +-truncation*width, weighted by the line-shape density.
    """
    if model.shape == "delta" or model.n_classes == 1:
        return np.zeros(1), np.ones(1)
    half = model.truncation * model.width
    offsets = np.linspace(-half, half, model.n_classes)
    if model.shape == "lorentzian":
        hwhm = 0.5 * model.width
        pdf = hwhm / (np.pi * (offsets**2 + hwhm**2))
    else:  # gaussian
        sig = model.width / (2.0 * math.sqrt(2.0 * math.log(2.0)))
        pdf = np.exp(-0.5 * (offsets / sig) ** 2)
    weights = pdf / pdf.sum()
    return offsets, weights


@dataclass(frozen=True)
class MediumParams:
    """Two-level ensemble constants.

    coupling   atom-field coupling strength (rad/s per field unit)
    density    atomic line density folded with the transverse profile
    decay      excited-state population decay rate (rad/s)
    gradient   controlled detuning gradient (rad/s per length)
    z_half     sample half-length; the sample spans [-z_half, z_half]
    intrinsic  static non-reversible detuning spread
    orientations  tuple of (stark_sign, weight) site families
    """

    coupling: float
    density: float
    gradient: float
    z_half: float
    decay: float = 0.0
    intrinsic: IntrinsicLineModel = field(default_factory=IntrinsicLineModel)
    orientations: Tuple[Tuple[float, float], ...] = ((1.0, 1.0),)

    def __post_init__(self):
        if self.gradient <= 0.0:
            raise InvalidParameterError("gradient must be > 0")
        if self.z_half <= 0.0:
            raise InvalidParameterError("z_half must be > 0")
        if self.coupling < 0.0 or self.density < 0.0 or self.decay < 0.0:
            raise InvalidParameterError(
                "coupling, density and decay must be nonnegative"
            )
        w = [wt for _, wt in self.orientations]
        if len(self.orientations) not in (1, 2):
            raise InvalidParameterError("one or two orientation families")
        if any(wt < 0 for wt in w) or abs(sum(w) - 1.0) > 1e-12:
            raise InvalidParameterError(
                "orientation weights must be nonnegative and sum to 1"
            )
        if any(abs(s) != 1.0 for s, _ in self.orientations):
            raise InvalidParameterError("orientation signs must be +1 or -1")

    def optical_depth(self) -> float:
        """Dimensionless absorption parameter coupling*density/gradient."""
        beta = self.coupling * self.density / self.gradient
        if not math.isfinite(beta):
            raise InvalidParameterError("optical depth is not finite")
        return beta

    def max_detuning(self) -> float:
        """Largest |detuning| any class sees; bounds the stiff term."""
        offsets, _ = discretize_line(self.intrinsic)
        return self.gradient * self.z_half + float(np.max(np.abs(offsets)))

    def scaled(self, time_scale: float, length_scale: float) -> "MediumParams":
        return replace(
            self,
            coupling=self.coupling * time_scale,
            density=self.density * length_scale,
            decay=self.decay * time_scale,
            gradient=self.gradient * time_scale * length_scale,
            z_half=self.z_half / length_scale,
            intrinsic=self.intrinsic.scaled(time_scale),
        )


@dataclass(frozen=True)
class PulseSpec:
    """Input field envelope f_in(t) applied at the entry face z = -z_half.

    For a gaussian, `duration` is the intensity-envelope FWHM (the paper
    never pins the convention; this is the documented default).  `center`
    should be negative so the pulse is inside the medium before a flip at
    t = 0.  `carrier_offset` rotates the envelope as exp(-i*offset*(t-center)).
    """

    shape: str = "gaussian"
    duration: float = 1.0
    amplitude: complex = 1.0 + 0.0j
    center: float = 0.0
    carrier_offset: float = 0.0
    custom_times: Optional[np.ndarray] = None
    custom_values: Optional[np.ndarray] = None

    def __post_init__(self):
        if self.shape not in PULSE_SHAPES:
            raise InvalidParameterError(f"unknown pulse shape {self.shape!r}")
        if self.duration <= 0.0:
            raise InvalidParameterError("duration must be > 0")
        if self.shape == "custom":
            t = np.asarray(self.custom_times, dtype=float)
            v = np.asarray(self.custom_values, dtype=complex)
            if t is None or v is None or t.ndim != 1 or t.shape != v.shape:
                raise InvalidParameterError(
                    "custom pulse needs matching 1-d times/values arrays"
                )
            if t.size < 2 or np.any(np.diff(t) <= 0):
                raise InvalidParameterError(
                    "custom pulse time base must be strictly increasing"
                )
            object.__setattr__(self, "custom_times", t)
            object.__setattr__(self, "custom_values", v)

    def sample(self, times) -> np.ndarray:
        """Evaluate f_in on `times`; zero outside a custom pulse's support."""
        t = np.asarray(times, dtype=float)
        if self.shape == "gaussian":
            sig = self.duration * _FWHM_TO_SIGMA
            env = np.exp(-0.5 * ((t - self.center) / sig) ** 2)
        elif self.shape == "square":
            half = 0.5 * self.duration
            env = ((t >= self.center - half) & (t <= self.center + half)).astype(float)
        else:
            re = np.interp(t, self.custom_times, self.custom_values.real,
                           left=0.0, right=0.0)
            im = np.interp(t, self.custom_times, self.custom_values.imag,
                           left=0.0, right=0.0)
            env = re + 1j * im
        out = self.amplitude * env
        if self.carrier_offset != 0.0:
            out = out * np.exp(-1j * self.carrier_offset * (t - self.center))
        return np.asarray(out, dtype=complex)

    def energy(self) -> float:
        """Closed-form envelope energy where available, quadrature otherwise."""
        a2 = abs(self.amplitude) ** 2
        if self.shape == "gaussian":
            sig = self.duration * _FWHM_TO_SIGMA
            return a2 * sig * math.sqrt(math.pi)
        if self.shape == "square":
            return a2 * self.duration
        vals = self.sample(self.custom_times)
        return float(np.trapezoid(np.abs(vals) ** 2, self.custom_times))

    def bandwidth_rms(self) -> float:
        """RMS width of the spectral intensity |F(omega)|^2 (rad/s).

        Gaussian pulses use the analytic value; others are estimated from
        a finite-difference quadrature of the sampled envelope.
        """
        if self.shape == "gaussian":
            sig = self.duration * _FWHM_TO_SIGMA
            return 1.0 / (math.sqrt(2.0) * sig)
        if self.shape == "square":
            raise InvalidParameterError(
                "rms bandwidth of a square pulse diverges"
            )
        t = self.custom_times
        v = self.sample(t)
        dv = np.gradient(v, t)
        num = np.trapezoid(np.abs(dv) ** 2, t)
        den = np.trapezoid(np.abs(v) ** 2, t)
        if den == 0.0:
            raise InvalidParameterError("zero-energy pulse has no bandwidth")
        return float(np.sqrt(num / den))

    def scaled(self, time_scale: float) -> "PulseSpec":
        # times divide by the scale, rates multiply
        kw = dict(
            duration=self.duration / time_scale,
            center=self.center / time_scale,
            carrier_offset=self.carrier_offset * time_scale,
        )
        if self.shape == "custom":
            kw["custom_times"] = self.custom_times / time_scale
        return replace(self, **kw)


def sample_pulse(pulse: PulseSpec, times) -> np.ndarray:
    """Module-level alias for :meth:`PulseSpec.sample`."""
    return pulse.sample(times)


@dataclass(frozen=True)
class GridSpec:
    """Discretization of the space-time integration window."""

    n_z: int = 200
    dt: float = 0.005
    t_start: float = -8.0
    t_end: float = 8.0
    store_stride: int = 16

    def __post_init__(self):
        if self.n_z < 2:
            raise InvalidParameterError("n_z must be >= 2")
        if self.dt <= 0.0:
            raise InvalidParameterError("dt must be > 0")
        if not self.t_start < self.t_end:
            raise InvalidParameterError("t_start must be < t_end")
        if self.store_stride < 1:
            raise InvalidParameterError("store_stride must be >= 1")

    def refined(self, factor: int = 2) -> "GridSpec":
        """Grid with dt/factor and factor*n_z, for convergence studies."""
        return replace(
            self,
            n_z=self.n_z * factor,
            dt=self.dt / factor,
            store_stride=self.store_stride * factor,
        )

    def scaled(self, time_scale: float) -> "GridSpec":
        return replace(
            self,
            dt=self.dt / time_scale,
            t_start=self.t_start / time_scale,
            t_end=self.t_end / time_scale,
        )


@dataclass(frozen=True)
class CascadeSpec:
    """Second-memory descriptor: its flip runs the opposite way."""

    storage: float = 8.0          # stage-2 flip sits this long after handoff
    beta_scale: float = 1.0       # stage-2 optical depth relative to stage 1

    def __post_init__(self):
        if self.storage <= 0.0:
            raise InvalidParameterError("cascade storage must be > 0")
        if self.beta_scale <= 0.0:
            raise InvalidParameterError("cascade beta_scale must be > 0")


@dataclass(frozen=True)
class Protocol:
    """Timeline of controlled-gradient sign reversals."""

    flip_times: Tuple[float, ...] = (0.0,)
    initial_sign: int = 1
    cascade: Optional[CascadeSpec] = None

    def __post_init__(self):
        ft = tuple(float(t) for t in self.flip_times)
        if any(b <= a for a, b in zip(ft, ft[1:])):
            raise InvalidParameterError("flip_times must be strictly increasing")
        if self.initial_sign not in (1, -1):
            raise InvalidParameterError("initial_sign must be +1 or -1")
        object.__setattr__(self, "flip_times", ft)

    def validate_window(self, grid: GridSpec) -> None:
        for t in self.flip_times:
            if not (grid.t_start < t < grid.t_end):
                raise InvalidParameterError(
                    f"flip at t={t} outside window ({grid.t_start}, {grid.t_end})"
                )

    def scaled(self, time_scale: float) -> "Protocol":
        casc = self.cascade
        if casc is not None:
            casc = replace(casc, storage=casc.storage / time_scale)
        return replace(
            self,
            flip_times=tuple(t / time_scale for t in self.flip_times),
            cascade=casc,
        )


@dataclass(frozen=True)
class ScaledSystem:
    """A parameter set mapped to the natural frame (duration = z_half = 1)."""

    medium: MediumParams
    pulse: PulseSpec
    grid: GridSpec
    protocol: Protocol
    time_scale: float
    length_scale: float

    def redimensionalize(self) -> Tuple[MediumParams, PulseSpec, GridSpec, Protocol]:
        """Undo the rescaling; round-trips to the original inputs."""
        return (
            self.medium.scaled(1.0 / self.time_scale, 1.0 / self.length_scale),
            self.pulse.scaled(1.0 / self.time_scale),
            self.grid.scaled(1.0 / self.time_scale),
            self.protocol.scaled(1.0 / self.time_scale),
        )


def nondimensionalize(
    medium: MediumParams,
    pulse: PulseSpec,
    grid: GridSpec,
    protocol: Protocol = Protocol(flip_times=()),
) -> ScaledSystem:
    """Rescale so the pulse duration and sample half-length are 1.

    Physics is invariant: the optical depth and every rate-to-bandwidth
    ratio are unchanged; the scale factors are kept for the round trip.
    """
    if pulse.duration <= 0.0 or medium.z_half <= 0.0:
        raise InvalidParameterError("duration and z_half must be positive")
    T = pulse.duration
    L = medium.z_half
    return ScaledSystem(
        medium=medium.scaled(T, L),
        pulse=pulse.scaled(T),
        grid=grid.scaled(T),
        protocol=protocol.scaled(T),
        time_scale=T,
        length_scale=L,
    )

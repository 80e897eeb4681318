"""Closed-form solution chain used to cross-check the solver.

The chain: a causal polarization kernel at fixed z, the frequency-domain
transfer function through the gradient-broadened sample, the k-space form
of the stored field at the flip instant (valid when the applied broadening
well exceeds the pulse bandwidth), and the end-to-end input-output map
whose unit-modulus phase factor carries the echo chirp.

Sign conventions: frequency spectra here use F(w) = int f(t) e^{-iwt} dt
and spatial spectra use F(k) = int E(z) e^{+ikz} dz.  The solver's complex
envelope is the time-domain conjugate of this convention, so complex
comparisons conjugate one side; magnitude comparisons need nothing.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from .errors import InvalidParameterError, OracleValidityWarning
from .gammafn import complex_gamma, gamma_phase_ratio
from .params import MediumParams, PulseSpec

SINGULARITY_TOL = 1e-9   # relative gap required around log singularities


def dft_time(t: np.ndarray, y: np.ndarray, omega: np.ndarray) -> np.ndarray:
    """F(w) = int y(t) e^{-iwt} dt by trapezoid on the stored grid."""
    out = np.empty(omega.size, dtype=np.complex128)
    for i, w in enumerate(omega):
        out[i] = np.trapezoid(y * np.exp(-1j * w * t), t)
    return out


def spatial_spectrum(z: np.ndarray, e_z: np.ndarray, k: np.ndarray) -> np.ndarray:
    """F(k) = int E(z) e^{+ikz} dz by trapezoid on the z grid."""
    out = np.empty(k.size, dtype=np.complex128)
    for i, kk in enumerate(k):
        out[i] = np.trapezoid(e_z * np.exp(1j * kk * z), z)
    return out


def fft_spatial_spectrum(z: np.ndarray, e_z: np.ndarray, pad: int = 8):
    """Zero-padded FFT version of :func:`spatial_spectrum`; returns (k, F)."""
    h = z[1] - z[0]
    n = z.size * pad
    buf = np.zeros(n, dtype=np.complex128)
    buf[: z.size] = e_z
    k = 2.0 * math.pi * np.fft.fftshift(np.fft.fftfreq(n, d=h))
    spec = np.conj(np.fft.fftshift(np.fft.fft(np.conj(buf)))) * h
    spec *= np.exp(1j * k * z[0])
    return k, spec


def polarization_kernel(
    times: np.ndarray,
    e_values: np.ndarray,
    z: float,
    medium: MediumParams,
    t_eval: Optional[np.ndarray] = None,
    sign: float = 1.0,
) -> np.ndarray:
    """Causal response alpha(z, t) to a stored field history at one z.

    alpha(t) = i*coupling * int H(t-t') exp(-(decay + i*sign*gradient*z)
    (t-t')) E(t') dt', quadrature on the stored grid.  Valid for the
    pre-flip evolution of a delta intrinsic line.
    """
    times = np.asarray(times, float)
    e_values = np.asarray(e_values, complex)
    if t_eval is None:
        t_eval = times
    t_eval = np.atleast_1d(np.asarray(t_eval, float))
    if t_eval.max() > times[-1] + 1e-12:
        raise InvalidParameterError("field history shorter than requested t")
    lam = medium.decay + 1j * sign * medium.gradient * z
    out = np.empty(t_eval.size, dtype=np.complex128)
    for i, te in enumerate(t_eval):
        m = times <= te
        tm = times[m]
        if tm.size < 2:
            out[i] = 0.0
            continue
        integrand = np.exp(-lam * (te - tm)) * e_values[m]
        out[i] = 1j * medium.coupling * np.trapezoid(integrand, tm)
    return out


@dataclass
class TransferEvaluation:
    """Frequency transfer through the sample up to position z."""

    omega: np.ndarray
    z: float
    transfer: np.ndarray
    attenuation: np.ndarray
    phase: np.ndarray
    e_tilde: Optional[np.ndarray] = None


def transfer_omega_grid(medium: MediumParams, n: int,
                        span: float = 1.5) -> np.ndarray:
    """Half-sample-offset omega grid so the step edges and log
    singularities at +-gradient*z_half never land on a node."""
    edge = medium.gradient * medium.z_half
    step = 2.0 * span * edge / n
    return -span * edge + (np.arange(n) + 0.5) * step


def spectral_transfer(
    omega: np.ndarray,
    z: float,
    medium: MediumParams,
    f_in_spectrum: Optional[np.ndarray] = None,
) -> TransferEvaluation:
    """Per-component transfer exp[-pi*beta*(H(w+eta*z) - H(w-eta*z0))
    + i*beta*ln|(w+eta*z)/(w-eta*z0)|] from the entry face to z."""
    omega = np.asarray(omega, float)
    beta = medium.optical_depth()
    eta = medium.gradient
    z0 = medium.z_half
    if not (-z0 <= z <= z0):
        raise InvalidParameterError("z outside the sample")
    up = omega + eta * z
    dn = omega - eta * z0
    scale = max(eta * z0, abs(omega).max(initial=0.0))
    if np.any(np.abs(up) < SINGULARITY_TOL * scale) or np.any(
        np.abs(dn) < SINGULARITY_TOL * scale
    ):
        raise InvalidParameterError(
            "omega grid collides with a transfer singularity; "
            "use transfer_omega_grid"
        )
    expo = -math.pi * beta * (np.heaviside(up, 0.5) - np.heaviside(dn, 0.5))
    phase = beta * np.log(np.abs(up / dn))
    transfer = np.exp(expo + 1j * phase)
    e_tilde = None if f_in_spectrum is None else f_in_spectrum * transfer
    return TransferEvaluation(
        omega=omega, z=z, transfer=transfer,
        attenuation=np.abs(transfer), phase=phase, e_tilde=e_tilde,
    )


@dataclass
class FlipTimeField:
    """k-spectrum of the stored field at the flip instant."""

    k: np.ndarray
    values: np.ndarray
    validity_ratio: float
    valid: bool


def broadening_ratio(medium: MediumParams, pulse: PulseSpec) -> float:
    """Applied broadening over pulse bandwidth: gradient*z_half*duration/2pi.

    The canonical ideal scenario sits at 2; the asymptotic k-space form
    needs roughly 10 for percent-level agreement.
    """
    return medium.gradient * medium.z_half * pulse.duration / (2.0 * math.pi)


def flip_time_field(
    pulse: PulseSpec,
    medium: MediumParams,
    k: np.ndarray,
    *,
    validity_threshold: float = 2.0,
) -> FlipTimeField:
    """Stored-field k-spectrum at the flip: asymmetric in sgn(k) through
    the cosh/sinh bracket, with the input history mapped along k/gradient.

    Below `validity_threshold` in broadening ratio the result is still
    returned, with a warning attached instead of a hard error.
    """
    k = np.asarray(k, float)
    beta = medium.optical_depth()
    eta = medium.gradient
    ratio = broadening_ratio(medium, pulse)
    valid = ratio >= validity_threshold
    if not valid:
        warnings.warn(
            f"broadening ratio {ratio:.3g} below validity threshold "
            f"{validity_threshold:g}; k-space form is asymptotic",
            OracleValidityWarning,
            stacklevel=2,
        )
    tau = k / eta
    fin = pulse.sample(-tau)
    gam = complex_gamma(1j * beta) if beta > 0 else 1.0 + 0.0j
    vals = np.zeros(k.size, dtype=np.complex128)
    nz = tau != 0.0
    at = np.abs(tau[nz])
    bracket = at * math.cosh(math.pi * beta / 2.0) + tau[nz] * math.sinh(
        math.pi * beta / 2.0
    )
    power = at ** (-2.0) * np.exp(-1j * beta * np.log(at))
    vals[nz] = (
        -fin[nz] * np.sign(k[nz]) * beta * power * gam * bracket
    )
    return FlipTimeField(k=k, values=vals, validity_ratio=ratio, valid=valid)


@dataclass
class OutputMap:
    """Echo prediction: time-reversed input with a unit-modulus phase."""

    t: np.ndarray
    values: np.ndarray
    skipped: np.ndarray   # True where t == 0 (log-phase singularity)
    phase_constant: complex


def output_map(pulse: PulseSpec, medium: MediumParams,
               t: np.ndarray) -> OutputMap:
    """f_out(t) = f_in(-t) * |t|^{2i*beta} * Gamma(i*beta)/Gamma(-i*beta).

    The envelope equals the time-reversed input exactly; the phase term
    2*beta*ln|t| carries the chirp.  t = 0 samples are skipped and
    recorded in the mask.
    """
    t = np.asarray(t, float)
    beta = medium.optical_depth()
    if beta <= 0.0:
        raise InvalidParameterError("output map needs optical depth > 0")
    ratio = gamma_phase_ratio(beta)
    skipped = t == 0.0
    vals = np.zeros(t.size, dtype=np.complex128)
    ok = ~skipped
    vals[ok] = (
        pulse.sample(-t[ok])
        * np.exp(2j * beta * np.log(np.abs(t[ok])))
        * ratio
    )
    return OutputMap(t=t, values=vals, skipped=skipped, phase_constant=ratio)


def output_chirp(medium: MediumParams, t: float) -> float:
    """Instantaneous frequency of the echo phase factor: 2*beta/t."""
    if t == 0.0:
        raise InvalidParameterError("chirp undefined at t = 0")
    return 2.0 * medium.optical_depth() / t


def cascade_map(
    pulse: PulseSpec,
    medium1: MediumParams,
    medium2: MediumParams,
    t: np.ndarray,
) -> OutputMap:
    """Two memories in series, the second flipped the opposite way.

    The second stage applies the conjugate phase convention, so the
    composed output is forward-time ordered and the chirp terms cancel
    up to |t|^{2i(beta1-beta2)}; equal depths leave a constant phase.
    """
    t = np.asarray(t, float)
    b1 = medium1.optical_depth()
    b2 = medium2.optical_depth()
    if b1 <= 0.0 or b2 <= 0.0:
        raise InvalidParameterError("cascade needs positive optical depths")
    r1 = gamma_phase_ratio(b1)
    r2 = np.conj(gamma_phase_ratio(b2))
    skipped = t == 0.0
    ok = ~skipped
    vals = np.zeros(t.size, dtype=np.complex128)
    # stage 1 output evaluated at -t, then the conjugate-convention stage 2
    vals[ok] = (
        pulse.sample(t[ok])
        * np.exp(2j * (b1 - b2) * np.log(np.abs(t[ok])))
        * r1 * r2
    )
    return OutputMap(t=t, values=vals, skipped=skipped,
                     phase_constant=r1 * r2)

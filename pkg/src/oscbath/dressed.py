"""Evolution in dressed coordinates.

The dressed amplitudes f_{mu nu}(t) = sum_r t_mu^r t_nu^r exp(-i Omega_r t)
form a unitary matrix in a finite cavity.  In free space the particle
amplitude is f_00 = C1 + i S1 and the bath amplitude per unit
omega sqrt(delta_omega) is built from C2 and S2.

S2 is evaluated two ways.  ``method="pv"`` integrates the defining
principal value directly.  ``method="split"`` uses the partial fractions

    a^2 / ((w^2 - a^2) D(a)) = (w^2/D(w)) [1/(w^2 - a^2) + a^2/D(a)] - (wb^4/D(w)) / D(a)

where the first term has the closed principal value
(sin(wt) Ci(wt) - cos(wt) Si(wt)) / w and the other two are the same
for every w, so one pair of quadratures per t serves the whole w-axis.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from functools import lru_cache

import numpy as np
from scipy.special import sici

from .bare import OccupationKind, OccupationTrace
from .cavity import ModeSpectrum, TransformMatrix
from .errors import DegeneratePoleError, DomainError, IndexOutOfRangeError
from .model import ModelParams, bose_occupation
from .quadrature import (ExpWeight, Fixed, PowerDecay, QuadratureSpec,
                         integrate_oscillatory, integrate_pv, integrate_semi_infinite,
                         require_converged)

DEFAULT_QUAD = QuadratureSpec(rel_tol=1e-10, abs_tol=1e-13)


@dataclass(frozen=True)
class DressedAmplitude:
    value: complex
    mu: int
    nu: int
    t: float


# --------------------------------------------------------------------------
# finite cavity

def f_row(spectrum: ModeSpectrum, T: TransformMatrix, mu: int, t):
    """f_{mu nu}(t) for every nu; shape (N+1,) or (len(t), N+1)."""
    full = T.full
    n = full.shape[0]
    if not (0 <= mu < n) or int(mu) != mu:
        raise IndexOutOfRangeError(f"mu={mu} outside 0..{n - 1}")
    tt = np.atleast_1d(np.asarray(t, dtype=float))
    ph = np.exp(-1j * np.outer(tt, spectrum.Omegas))
    row = (ph * full[mu][None, :]) @ full.T
    return row[0] if np.ndim(t) == 0 else row


def f_matrix_finite(spectrum: ModeSpectrum, T: TransformMatrix, mu: int, nu: int, t: float) -> DressedAmplitude:
    n = T.full.shape[0]
    if not (0 <= nu < n) or int(nu) != nu:
        raise IndexOutOfRangeError(f"nu={nu} outside 0..{n - 1}")
    return DressedAmplitude(complex(f_row(spectrum, T, mu, t)[nu]), int(mu), int(nu), float(t))


def occupation_dressed_finite(spectrum: ModeSpectrum, T: TransformMatrix, params: ModelParams, t):
    """|f_00|^2 n0 + sum_k |f_0k|^2 n_B(omega_k).

    The bath is populated with the bare Bose distribution at the cavity
    frequencies; dressed and bare bath modes only coincide as R grows.
    """
    p = np.abs(f_row(spectrum, T, 0, t)) ** 2
    nb = bose_occupation(spectrum.omegas_bath, params.beta)
    n = p[..., 0] * params.n0_initial + (p[..., 1:] * nb).sum(axis=-1)
    return float(n) if np.ndim(n) == 0 else n


# --------------------------------------------------------------------------
# free-space kernels

def c1(params: ModelParams, t):
    """Real part of f_00: exp(-pi g t/2) [cos(kappa t) - (pi g / 2 kappa) sin(kappa t)]."""
    t = np.asarray(t, dtype=float)
    k, pg = params.kappa, math.pi * params.g
    out = np.exp(-pg * t / 2) * (np.cos(k * t) - pg / (2 * k) * np.sin(k * t))
    return float(out) if out.ndim == 0 else out


def _check_pole(params: ModelParams, w) -> None:
    if np.any(np.sqrt(params.spectral_denominator(w)) < 1e-10 * params.omega_bar ** 2):
        raise DegeneratePoleError(f"Lorentzian denominator vanishes near omega={w} (g={params.g})")


def c2(params: ModelParams, w, t: float):
    """Closed form of the cosine kernel C2(omega, t)."""
    w = np.asarray(w, dtype=float)
    if np.any(w <= 0):
        raise DomainError("omega must be > 0")
    if params.g == 0:
        return np.zeros_like(w) if w.ndim else 0.0
    _check_pole(params, w)
    wb, k, pg = params.omega_bar, params.kappa, math.pi * params.g
    D = params.spectral_denominator(w)
    out = math.sqrt(2 * params.g) * (
        math.exp(-pg * t / 2) * ((w * w - wb * wb) / D * math.cos(k * t)
                                 - pg / (2 * k) * (w * w + wb * wb) / D * math.sin(k * t))
        + pg * w / D * np.sin(w * t))
    return float(out) if out.ndim == 0 else out


def _moment_spec(params: ModelParams, quad: QuadratureSpec, t: float) -> QuadratureSpec:
    tail = quad.tail if isinstance(quad.tail, Fixed) else PowerDecay(2.0)
    # panel roundoff accumulates to about eps times the L1 norm of the
    # envelopes, int a^2/D = 1/(2g) and int 1/D = 1/(2g wb^2)
    l1 = max(1.0, params.omega_bar ** -2) / (2 * params.g)
    floor = 100 * np.finfo(float).eps * l1
    return replace(quad, tail=tail, abs_tol=max(quad.abs_tol, floor),
                   oscillation_freq_hint=max(quad.oscillation_freq_hint or 0.0, t) or None)


@lru_cache(maxsize=4096)
def _sine_moments(params: ModelParams, t: float, quad: QuadratureSpec):
    # I0 = int sin(a t)/D(a), I1 = int a^2 sin(a t)/D(a), a in (0, inf)
    if t == 0:
        return 0.0, 0.0
    D = params.spectral_denominator

    def env(a):
        d = D(a)
        return np.stack([1.0 / d, a * a / d], axis=-1)

    res = integrate_oscillatory(env, t, "sin", _moment_spec(params, quad, t), 0.0, [params.omega_bar])
    require_converged(res, f"sine moments at t={t}")
    return float(res.value[0]), float(res.value[1])


def s1(params: ModelParams, t: float, quad: QuadratureSpec = DEFAULT_QUAD) -> float:
    """Imaginary part of f_00: -2g int a^2 sin(a t) / D(a) da."""
    if t < 0:
        raise DomainError("t must be >= 0")
    if params.g == 0:
        return -math.sin(params.omega_bar * t)
    return -2 * params.g * _sine_moments(params, float(t), quad)[1]


def s1_resonant(params: ModelParams, t):
    """Contribution of the damped resonance to S1."""
    t = np.asarray(t, dtype=float)
    k, pg = params.kappa, math.pi * params.g
    out = -np.exp(-pg * t / 2) * (np.sin(k * t) + pg / (2 * k) * np.cos(k * t))
    return float(out) if out.ndim == 0 else out


def s1_endpoint(params: ModelParams, t: float, quad: QuadratureSpec = DEFAULT_QUAD) -> float:
    """Non-oscillating part of S1: 2g int_0^inf y^2 exp(-y t) / D(i y) dy.

    Rotating the contour onto the imaginary axis splits S1 into this term
    and s1_resonant.  It behaves like 4 g / (omega_bar^4 t^3) at large t.
    """
    if not t > 0:
        raise DomainError("t must be > 0")
    wb, pg = params.omega_bar, math.pi * params.g

    def f(y):
        return 2 * params.g * y * y * np.exp(-y * t) / ((y * y + wb * wb) ** 2 - (pg * y) ** 2)

    spec = replace(quad, tail=ExpWeight(t), oscillation_freq_hint=None)
    return require_converged(integrate_semi_infinite(f, spec), f"S1 endpoint t={t}").value


def s1_asymptotic(params: ModelParams, t):
    return 4 * params.g / (params.omega_bar ** 4 * np.asarray(t, dtype=float) ** 3)


def pv_sine_kernel(w, t: float):
    """PV int_0^inf sin(a t) / (w^2 - a^2) da = (sin(wt) Ci(wt) - cos(wt) Si(wt)) / w."""
    w = np.asarray(w, dtype=float)
    x = w * t
    si, ci = sici(x)
    return (np.sin(x) * ci - np.cos(x) * si) / w


def _s2_split(params: ModelParams, w, t: float, moments):
    if t == 0:
        return np.zeros_like(np.asarray(w, dtype=float))
    I0, I1 = moments
    wb = params.omega_bar
    D = params.spectral_denominator(w)
    return -(2 * params.g) ** 1.5 * (w * w / D * (pv_sine_kernel(w, t) + I1) - wb ** 4 / D * I0)


def _s2_pv(params: ModelParams, w: float, t: float, quad: QuadratureSpec) -> float:
    g2 = (2 * params.g) ** 1.5
    D = params.spectral_denominator

    def f(a):
        return -g2 * a * a * np.sin(a * t) / ((w * w - a * a) * D(a))

    window = min(w / 2, 10 * math.pi * params.g)
    spec = replace(quad, tail=quad.tail if isinstance(quad.tail, Fixed) else PowerDecay(4.0),
                   oscillation_freq_hint=max(quad.oscillation_freq_hint or 0.0, t))
    res = integrate_pv(f, w, spec, 0.0, None, window, [params.omega_bar])
    return require_converged(res, f"S2 at omega={w}, t={t}").value


def s2(params: ModelParams, w, t: float, quad: QuadratureSpec = DEFAULT_QUAD, method: str = "pv"):
    """Sine kernel S2(omega, t) = -(2g)^{3/2} PV int a^2 sin(a t) / ((w^2 - a^2) D(a)) da."""
    w = np.asarray(w, dtype=float)
    if np.any(w <= 0):
        raise DomainError("omega must be > 0")
    if t < 0:
        raise DomainError("t must be >= 0")
    if params.g == 0 or t == 0:
        return np.zeros_like(w) if w.ndim else 0.0
    _check_pole(params, w)
    if method == "split":
        out = _s2_split(params, w, float(t), _sine_moments(params, float(t), quad))
    elif method == "pv":
        out = np.array([_s2_pv(params, float(x), float(t), quad) for x in np.atleast_1d(w)])
        out = out.reshape(w.shape)
    else:
        raise ValueError(f"unknown method {method!r}")
    return float(out) if np.ndim(out) == 0 else out


def s2_pole_term(params: ModelParams, w, t):
    """Undamped part of S2 left by the pole at a = omega."""
    w = np.asarray(w, dtype=float)
    return math.sqrt(2 * params.g) * math.pi * params.g * w * np.cos(w * t) / params.spectral_denominator(w)


def s2_endpoint(params: ModelParams, w: float, t: float, quad: QuadratureSpec = DEFAULT_QUAD) -> float:
    """Non-oscillating part of S2: (2g)^{3/2} int_0^inf y^2 exp(-y t) / ((w^2 + y^2) D(i y)) dy."""
    if not t > 0:
        raise DomainError("t must be > 0")
    wb, pg = params.omega_bar, math.pi * params.g

    def f(y):
        return (2 * params.g) ** 1.5 * y * y * np.exp(-y * t) / (
            (w * w + y * y) * ((y * y + wb * wb) ** 2 - (pg * y) ** 2))

    spec = replace(quad, tail=ExpWeight(t), oscillation_freq_hint=None)
    return require_converged(integrate_semi_infinite(f, spec), f"S2 endpoint t={t}").value


def s2_asymptotic(params: ModelParams, w, t):
    return 4 * math.sqrt(2) * params.g ** 1.5 / (np.asarray(w) ** 2 * params.omega_bar ** 4
                                                 * np.asarray(t, dtype=float) ** 3)


def on_shell_term(params: ModelParams, w, t: float):
    """sqrt(2g) exp(-i w t) (w^2 - wb^2) / D(w), removed from C2 + i S2 by ``on_shell``."""
    w = np.asarray(w, dtype=float)
    return (math.sqrt(2 * params.g) * np.exp(-1j * w * t)
            * (w * w - params.omega_bar ** 2) / params.spectral_denominator(w))


def f00_continuum(params: ModelParams, t: float, quad: QuadratureSpec = DEFAULT_QUAD) -> complex:
    if t < 0:
        raise DomainError("t must be >= 0")
    if params.g == 0:
        return complex(np.exp(-1j * params.omega_bar * t))
    return complex(c1(params, t), s1(params, t, quad))


def f0w_continuum(params: ModelParams, w, t: float, quad: QuadratureSpec = DEFAULT_QUAD,
                  on_shell: bool = True, method: str = "pv"):
    """Bath amplitude f_{0 omega} per unit omega sqrt(delta_omega).

    With ``on_shell=False`` this is C2 + i S2.  The default subtracts
    on_shell_term, which makes the amplitude vanish at t = 0 and restores
    |f_00|^2 + int omega^2 |f_0w|^2 domega = 1.
    """
    w = np.asarray(w, dtype=float)
    val = c2(params, w, t) + 1j * s2(params, w, t, quad, method)
    if on_shell and params.g > 0:
        val = val - on_shell_term(params, w, t)
    return complex(val) if np.ndim(val) == 0 else val


def _bath_weight(params: ModelParams, t: float, quad: QuadratureSpec, on_shell: bool, bose: bool):
    moments = _sine_moments(params, t, quad)

    def f(w):
        amp = c2(params, w, t) + 1j * _s2_split(params, w, t, moments)
        if on_shell:
            amp = amp - on_shell_term(params, w, t)
        out = w * w * np.abs(amp) ** 2
        if bose:
            out = out / np.expm1(params.beta * w)
        return out

    return f


def bath_probability(params: ModelParams, t: float,
                     quad: QuadratureSpec = QuadratureSpec(rel_tol=1e-7, abs_tol=1e-9),
                     on_shell: bool = True) -> float:
    """int_0^inf omega^2 |f_0w(t)|^2 domega, the probability carried by the bath.

    The integrand falls off like omega^-2 with superposed oscillations, so
    the tail is extrapolated octave by octave.
    """
    if params.g == 0 or (t == 0 and on_shell):
        return 0.0
    spec = replace(quad, tail=PowerDecay(2.0, start=max(4.0 * params.omega_bar, 1.0), method="octaves"),
                   oscillation_freq_hint=float(t) or None)
    res = integrate_semi_infinite(_bath_weight(params, float(t), quad, on_shell, False), spec,
                                  0.0, [params.omega_bar])
    return require_converged(res, f"bath probability at t={t}").value


def occupation_dressed_continuum(params: ModelParams, t, quad: QuadratureSpec = DEFAULT_QUAD,
                                 on_shell: bool = True):
    """|f_00|^2 n0 + int omega^2 |f_0w|^2 n_B(omega) domega.

    ``on_shell=False`` uses C2^2 + S2^2 literally, which does not conserve
    probability; see f0w_continuum.
    """
    tt = np.atleast_1d(np.asarray(t, dtype=float))
    if np.any(tt < 0):
        raise DomainError("t must be >= 0")
    out = np.empty_like(tt)
    for i, ti in enumerate(tt):
        ti = float(ti)
        if params.g == 0:
            out[i] = params.n0_initial
            continue
        p00 = abs(f00_continuum(params, ti, quad)) ** 2
        if ti == 0 and on_shell:
            out[i] = params.n0_initial
            continue
        tail = quad.tail if isinstance(quad.tail, Fixed) else ExpWeight(params.beta)
        spec = replace(quad, tail=tail, oscillation_freq_hint=max(quad.oscillation_freq_hint or 0.0, ti) or None)
        res = integrate_semi_infinite(_bath_weight(params, ti, quad, on_shell, True), spec,
                                      0.0, [params.omega_bar])
        require_converged(res, f"dressed continuum at t={ti}")
        out[i] = p00 * params.n0_initial + res.value
    return float(out[0]) if np.ndim(t) == 0 else out


def f00_sq_asymptotic(params: ModelParams, t):
    """Large-t form exp(-pi g t) [cos kt - (pi g/2k) sin kt]^2 + 16 g^2 / (wb^8 t^6)."""
    t = np.asarray(t, dtype=float)
    out = c1(params, t) ** 2
    if params.g > 0:
        out = out + 16 * params.g ** 2 / (params.omega_bar ** 8 * t ** 6)
    return float(out) if np.ndim(out) == 0 else out


def dressing_factor_A00(params: ModelParams, quad: QuadratureSpec = DEFAULT_QUAD) -> float:
    """(1/sqrt(wb)) int_0^inf 2 g W^2 sqrt(W) / D(W) dW."""
    if params.g == 0:
        return 1.0
    wb = params.omega_bar

    def f(W):
        return 2 * params.g * W * W * np.sqrt(W) / params.spectral_denominator(W) / math.sqrt(wb)

    spec = replace(quad, tail=PowerDecay(1.5, start=4 * wb), oscillation_freq_hint=None)
    return require_converged(integrate_semi_infinite(f, spec, 0.0, [wb]), "A00").value


def trace_dressed_finite(spectrum: ModeSpectrum, T: TransformMatrix, params: ModelParams, times) -> OccupationTrace:
    vals = occupation_dressed_finite(spectrum, T, params, np.asarray(times, dtype=float))
    return OccupationTrace(np.asarray(times, float), np.atleast_1d(vals), OccupationKind.DRESSED_FINITE,
                           params, spectrum.cavity)


def trace_dressed_continuum(params: ModelParams, times, quad: QuadratureSpec = DEFAULT_QUAD,
                            on_shell: bool = True) -> OccupationTrace:
    vals = occupation_dressed_continuum(params, np.asarray(times, dtype=float), quad, on_shell)
    return OccupationTrace(np.asarray(times, float), np.atleast_1d(vals), OccupationKind.DRESSED_CONTINUUM, params)

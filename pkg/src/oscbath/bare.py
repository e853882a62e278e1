"""Heisenberg evolution in bare coordinates.

Finite cavities use exact sums over the normal modes; free space uses the
closed-form coefficients together with the kernels F (thermal part) and
G (creation from the bare vacuum, logarithmically divergent).
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace
from typing import Optional, Union

import numpy as np

from .cavity import ModeSpectrum, TransformMatrix
from .errors import DomainError, IndexOutOfRangeError
from .model import CavitySpec, ModelParams, bose_occupation
from .quadrature import (ExpWeight, Fixed, QuadratureSpec, integrate,
                         integrate_semi_infinite, require_converged)

DEFAULT_QUAD = QuadratureSpec(rel_tol=1e-9, abs_tol=1e-11)


class OccupationKind(str, enum.Enum):
    BARE_FINITE = "bare_finite"
    BARE_CONTINUUM = "bare_continuum"
    DRESSED_FINITE = "dressed_finite"
    DRESSED_CONTINUUM = "dressed_continuum"


@dataclass(frozen=True)
class OccupationTrace:
    times: np.ndarray
    values: np.ndarray
    kind: OccupationKind
    params_snapshot: ModelParams
    cavity_snapshot: Optional[CavitySpec] = None

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        v = np.asarray(self.values, dtype=float)
        if t.shape != v.shape or t.ndim != 1:
            raise ValueError("times and values must be 1-D arrays of equal length")
        if np.any(np.diff(t) <= 0):
            raise ValueError("times must be strictly increasing")
        if np.any(v < 0) or not np.all(np.isfinite(v)):
            raise ValueError("occupations must be finite and non-negative")
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "kind", OccupationKind(self.kind))


@dataclass(frozen=True)
class BogoliubovPair:
    alpha: complex
    beta: complex
    mu: int
    nu: Optional[int]
    t: float
    omega: Optional[float] = None   # bath frequency for continuum channels


# --------------------------------------------------------------------------
# finite cavity

def _mode_freqs(spectrum: ModeSpectrum) -> np.ndarray:
    return np.concatenate([[spectrum.params.omega_bar], spectrum.omegas_bath])


def _check_index(i: int, n: int, name: str) -> None:
    if not (0 <= int(i) < n) or int(i) != i:
        raise IndexOutOfRangeError(f"{name}={i} outside 0..{n - 1}")


def bogoliubov_row(spectrum: ModeSpectrum, T: TransformMatrix, mu: int, t):
    """alpha_{mu nu}(t) and beta_{mu nu}(t) for every nu.

    Returns complex arrays of shape (N+1,) for scalar t, or (len(t), N+1).
    """
    full = T.full
    n = full.shape[0]
    _check_index(mu, n, "mu")
    w = _mode_freqs(spectrum)
    Om = spectrum.Omegas
    tt = np.atleast_1d(np.asarray(t, dtype=float))
    c = np.cos(np.outer(tt, Om))
    s = np.sin(np.outer(tt, Om))
    A = full[mu][None, :] * full          # (nu, r): t_mu^r t_nu^r
    wm = w[mu]
    p = np.sqrt(wm / w)                    # sqrt(w_mu / w_nu)
    q = np.sqrt(wm * w)
    Ac = c @ A.T
    As_over = (s / Om) @ A.T
    As_times = (s * Om) @ A.T
    alpha = 0.5 * (p + 1 / p) * Ac - 0.5j * (q * As_over + As_times / q)
    beta = 0.5 * (p - 1 / p) * Ac + 0.5j * (q * As_over - As_times / q)
    if np.ndim(t) == 0:
        return alpha[0], beta[0]
    return alpha, beta


def bogoliubov_finite(spectrum: ModeSpectrum, T: TransformMatrix, mu: int, nu: int,
                      t: float) -> BogoliubovPair:
    _check_index(nu, T.full.shape[0], "nu")
    a, b = bogoliubov_row(spectrum, T, mu, t)
    return BogoliubovPair(complex(a[nu]), complex(b[nu]), int(mu), int(nu), float(t))


def occupation_bare_finite(spectrum: ModeSpectrum, T: TransformMatrix, params: ModelParams, t,
                           include_vacuum: bool = True):
    """Particle occupation n_0(t) from the exact finite sums.

    ``include_vacuum=False`` drops the |beta|^2 terms describing creation
    from the bare vacuum, which is the finite analogue of the renormalized
    continuum expression.
    """
    a, b = bogoliubov_row(spectrum, T, 0, t)
    a2 = np.abs(a) ** 2
    b2 = np.abs(b) ** 2
    nb = bose_occupation(spectrum.omegas_bath, params.beta)
    n = (a2[..., 0] + b2[..., 0]) * params.n0_initial + ((a2[..., 1:] + b2[..., 1:]) * nb).sum(axis=-1)
    if include_vacuum:
        n = n + b2.sum(axis=-1)
    return float(n) if np.ndim(n) == 0 else n


# --------------------------------------------------------------------------
# free-space closed forms

def K_factor(params: ModelParams, t):
    """Weight of the initial occupation, |alpha_00|^2 + |beta_00|^2; equal to 1 for t < 0."""
    tt = np.asarray(t, dtype=float)
    wb, k, pg = params.omega_bar, params.kappa, math.pi * params.g
    tp = np.maximum(tt, 0.0)
    K = np.exp(-pg * tp) / (wb ** 2 * k ** 2) * (
        wb ** 4 + pg ** 2 / 8 * (2 * wb ** 2 - pg ** 2) * np.cos(2 * k * tp)
        - pg ** 3 * k / 4 * np.sin(2 * k * tp))
    K = np.where(tt < 0, 1.0, K)
    return float(K) if K.ndim == 0 else K


def _closed_particle(params: ModelParams, t):
    wb, k, pg = params.omega_bar, params.kappa, math.pi * params.g
    e = np.exp(-pg * t / 2)
    em, ep = np.exp(-1j * k * t), np.exp(1j * k * t)
    alpha = e / (16 * wb * k) * ((2 * wb + 2 * k - 1j * pg) ** 2 * em - (2 * wb - 2 * k - 1j * pg) ** 2 * ep)
    beta = pg * e / (8 * wb * k) * ((pg + 2j * k) * em - (pg - 2j * k) * ep)
    return alpha, beta


def _closed_bath(params: ModelParams, w, t):
    wb, k, g, pg = params.omega_bar, params.kappa, params.g, math.pi * params.g
    e = np.exp(-pg * t / 2)
    em, ep = np.exp(-1j * k * t), np.exp(1j * k * t)
    sg, s2g = math.sqrt(g), math.sqrt(2 * g)
    alpha = (np.sqrt(w / (2 * wb)) * (wb + w) * sg * np.exp(-1j * w * t) / (w ** 2 - wb ** 2 + 1j * pg * w)
             + np.sqrt(w / wb) * s2g / (4 * k)
             * ((2 * k + 2 * wb - 1j * pg) / (2 * k - 2 * w - 1j * pg) * em
                + (2 * wb - 2 * k - 1j * pg) / (2 * k + 2 * w + 1j * pg) * ep) * e)
    beta = (np.sqrt(w / (2 * wb)) * (w - wb) * sg * np.exp(1j * w * t) / (w ** 2 - wb ** 2 - 1j * pg * w)
            - np.sqrt(w / wb) * s2g / (4 * k)
            * ((2 * wb + 2 * k - 1j * pg) / (2 * k + 2 * w - 1j * pg) * em
               + (2 * wb - 2 * k - 1j * pg) / (2 * k - 2 * w + 1j * pg) * ep) * e)
    return alpha, beta


def bogoliubov_closed(params: ModelParams, channel: Union[str, float], t: float) -> BogoliubovPair:
    """Free-space alpha_0nu, beta_0nu.

    ``channel`` is "particle" for (alpha_00, beta_00) or a bath frequency
    omega > 0, in which case the coefficients of sqrt(delta_omega) in
    alpha_0k and beta_0k are returned.
    """
    if t < 0:
        raise DomainError("closed forms need t >= 0")
    if isinstance(channel, str):
        if channel != "particle":
            raise ValueError("channel must be 'particle' or a bath frequency")
        a, b = _closed_particle(params, t)
        return BogoliubovPair(complex(a), complex(b), 0, 0, float(t))
    w = float(channel)
    if not w > 0:
        raise DomainError("bath frequency must be > 0")
    a, b = _closed_bath(params, w, t)
    return BogoliubovPair(complex(a), complex(b), 0, None, float(t), omega=w)


def F_kernel(params: ModelParams, w, t):
    """Thermal kernel: (g/omega_bar) F = |alpha_0w|^2 + |beta_0w|^2 per unit delta_omega."""
    w = np.asarray(w, dtype=float)
    wb, k, pg = params.omega_bar, params.kappa, math.pi * params.g
    D = params.spectral_denominator(w)
    e1, e2 = math.exp(-pg * t), math.exp(-pg * t / 2)
    s = w * w + wb * wb
    r = (w * w - wb * wb) / s
    c2k, s2k = math.cos(2 * k * t), math.sin(2 * k * t)
    ck, sk = math.cos(k * t), math.sin(k * t)
    cw, sw = np.cos(w * t), np.sin(w * t)
    brace = (1 + e1 / (4 * k * k) * (4 * wb * wb - pg * pg * c2k - 2 * pg * k * r * s2k)
             - e2 / k * (2 * k * cw * ck + 4 * w * wb * wb / s * sw * sk - pg * r * cw * sk))
    return w * s / D * brace


def G_kernel(params: ModelParams, w, t):
    """Vacuum kernel: (g/omega_bar) G = 2 |beta_0w|^2 per unit delta_omega.

    The 1/(omega - omega_bar)^2 factors inside the braces are multiplied out
    so the kernel is regular at omega = omega_bar.
    """
    w = np.asarray(w, dtype=float)
    wb, k, pg = params.omega_bar, params.kappa, math.pi * params.g
    D = params.spectral_denominator(w)
    e1, e2 = math.exp(-pg * t), math.exp(-pg * t / 2)
    d = w - wb
    c2k, s2k = math.cos(2 * k * t), math.sin(2 * k * t)
    ck, sk = math.cos(k * t), math.sin(k * t)
    cw, sw = np.cos(w * t), np.sin(w * t)
    body = (d * d * (1 + e1 * wb * wb / (k * k))
            + e1 / (4 * k * k) * (2 * pg * pg * wb * w - pg * pg * (w * w + wb * wb) * c2k
                                  - 2 * pg * k * (w + wb) * d * s2k)
            - e2 / k * (d * d * (2 * k * cw * ck - 2 * wb * sw * sk) - pg * (w + wb) * d * cw * sk))
    return w * body / D


def _bose_spec(params: ModelParams, quad: QuadratureSpec, t: float) -> QuadratureSpec:
    tail = quad.tail if isinstance(quad.tail, Fixed) else ExpWeight(params.beta)
    hint = max(quad.oscillation_freq_hint or 0.0, t) or None
    return replace(quad, tail=tail, oscillation_freq_hint=hint)


def thermal_integral_bare(params: ModelParams, t: float, quad: QuadratureSpec = DEFAULT_QUAD):
    """(g/omega_bar) * integral of F(w, t) n_B(w) over w > 0, as a QuadratureResult."""
    pref = params.g / params.omega_bar

    def f(w):
        return pref * F_kernel(params, w, t) / np.expm1(params.beta * w)

    return integrate_semi_infinite(f, _bose_spec(params, quad, t), 0.0, [params.omega_bar])


def occupation_bare_continuum(params: ModelParams, t, quad: QuadratureSpec = DEFAULT_QUAD):
    """Renormalized free-space occupation K(t) n0 + (g/omega_bar) int F n_B.

    The Bose weight fixes the tail policy to ExpWeight(beta) unless ``quad``
    carries an explicit Fixed cutoff.
    """
    tt = np.atleast_1d(np.asarray(t, dtype=float))
    if np.any(tt < 0):
        raise DomainError("continuum occupation needs t >= 0")
    out = np.empty_like(tt)
    for i, ti in enumerate(tt):
        if params.g == 0:
            out[i] = params.n0_initial
            continue
        res = require_converged(thermal_integral_bare(params, float(ti), quad), f"bare continuum at t={ti}")
        out[i] = K_factor(params, ti) * params.n0_initial + res.value
    return float(out[0]) if np.ndim(t) == 0 else out


def vacuum_divergence_probe(params: ModelParams, t: float, Lambda: float,
                            quad: QuadratureSpec = DEFAULT_QUAD) -> float:
    """(g/omega_bar) * integral of G(w, t) over 0 < w < Lambda.

    Grows like a(t) ln(Lambda) + b(t) as the cutoff is raised.
    """
    if not Lambda > 10 * params.omega_bar:
        raise DomainError("Lambda must exceed 10 omega_bar")
    if t < 0:
        raise DomainError("t must be >= 0")
    if params.g == 0:
        return 0.0
    pref = params.g / params.omega_bar
    spec = replace(quad, oscillation_freq_hint=max(quad.oscillation_freq_hint or 0.0, t) or None)
    # logarithmically spaced breakpoints keep the 1/w tail well resolved
    bps = [params.omega_bar] + list(np.geomspace(10 * params.omega_bar, Lambda, 8)[:-1])
    res = integrate(lambda w: pref * G_kernel(params, w, t), 0.0, Lambda, spec, bps)
    return require_converged(res, f"divergence probe t={t}, Lambda={Lambda}").value


def vacuum_slope(params: ModelParams, t: float) -> float:
    """Coefficient of ln(Lambda) in the divergence probe at time t."""
    wb, k, pg = params.omega_bar, params.kappa, math.pi * params.g
    if params.g == 0:
        return 0.0
    return params.g / wb * (1 + math.exp(-pg * t) * (4 * wb * wb - pg * pg * math.cos(2 * k * t)
                                                    - 2 * pg * k * math.sin(2 * k * t)) / (4 * k * k))


def trace_bare_finite(spectrum: ModeSpectrum, T: TransformMatrix, params: ModelParams, times,
                      include_vacuum: bool = False) -> OccupationTrace:
    vals = occupation_bare_finite(spectrum, T, params, np.asarray(times, dtype=float), include_vacuum)
    return OccupationTrace(np.asarray(times, float), np.atleast_1d(vals), OccupationKind.BARE_FINITE,
                           params, spectrum.cavity)


def trace_bare_continuum(params: ModelParams, times, quad: QuadratureSpec = DEFAULT_QUAD) -> OccupationTrace:
    vals = occupation_bare_continuum(params, np.asarray(times, dtype=float), quad)
    return OccupationTrace(np.asarray(times, float), np.atleast_1d(vals), OccupationKind.BARE_CONTINUUM, params)

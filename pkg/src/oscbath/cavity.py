"""Normal modes of the particle coupled to N cavity modes.

The potential matrix is an arrowhead: V_00 = omega_bar^2 + N eta^2,
V_kk = omega_k^2, V_0k = -eta omega_k.  Its eigenvalues Omega_r^2 are the
roots of the secular function

    h(x) = omega_bar^2 - x - eta^2 x sum_k 1 / (omega_k^2 - x),

which is strictly decreasing between consecutive poles omega_k^2, so each
branch holds exactly one root.  Written with u = R Omega / pi this is the
cotangent condition

    cot(R Omega) = Omega/(pi g) + (1 - R omega_bar^2/(pi g))/(R Omega)
                   - (2 R Omega / pi^2) T_N(u),

where T_N(u) = sum_{k>N} 1/(k^2 - u^2) vanishes as N -> infinity.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.linalg import eigh
from scipy.special import digamma

from .errors import (BracketFailure, DegenerateModeError, NonPositiveError,
                     UnstableSystemError)
from .model import CavitySpec, ModelParams

_EPS = np.finfo(float).eps


@dataclass(frozen=True)
class ModeSpectrum:
    cavity: CavitySpec
    omegas_bath: np.ndarray
    Omegas: np.ndarray
    residuals: np.ndarray
    params: ModelParams
    truncated: bool = True

    @property
    def size(self) -> int:
        return len(self.Omegas)


@dataclass(frozen=True)
class TransformMatrix:
    t0: np.ndarray      # t_0^r, shape (N+1,)
    tk: np.ndarray      # t_k^r, shape (N, N+1)

    @property
    def full(self) -> np.ndarray:
        """Rows mu = 0..N, columns r = 0..N."""
        return np.vstack([self.t0[None, :], self.tk])


def _tail_sum(u: np.ndarray, N: int) -> np.ndarray:
    # sum_{k>N} 1/(k^2 - u^2) via the digamma function
    return (digamma(N + 1 + u) - digamma(N + 1 - u)) / (2 * u)


def cavity_condition(params: ModelParams, cavity: CavitySpec, Omega, truncated: bool = True,
                     scaled: bool = True):
    """Pole-free form of the cotangent condition.

    Multiplying through by pi g R Omega sin(R Omega) gives

        pi g R Omega cos(R Omega) - sin(R Omega) [R Omega^2 + pi g - R omega_bar^2
                                                  - (2 g R^2/pi) Omega^2 T_N]

    which vanishes at every normal frequency.  With ``scaled`` the value is
    divided by the sum of the magnitudes of its terms plus Omega |dr/dOmega|,
    so a root correct to a few ulps reports a residual near machine epsilon.
    """
    W = np.asarray(Omega, dtype=float)
    R, g, wb = cavity.R, params.g, params.omega_bar
    x = R * W
    c, s = np.cos(x), np.sin(x)
    bracket = [R * W * W, np.full_like(W, math.pi * g), np.full_like(W, -R * wb * wb)]
    if truncated:
        bracket.append(-(2 * g * R * R / math.pi) * W * W * _tail_sum(x / math.pi, cavity.N))
    first = math.pi * g * R * W * c
    val = first - s * sum(bracket)
    if not scaled:
        return val
    mag = sum(np.abs(b) for b in bracket)
    # Omega |dr/dOmega| measures how far rounding Omega moves the value
    slope = W * (math.pi * g * R * (np.abs(c) + R * W * np.abs(s))
                 + R * np.abs(c) * mag + np.abs(s) * 2 * mag / np.maximum(W, _EPS))
    scale = np.abs(first) + np.abs(s) * mag + slope
    scale = np.where(scale > 0, scale, 1.0)
    return val / scale


def _secular(x: np.ndarray, wk2: np.ndarray, eta2: float, wb2: float):
    d = wk2[None, :] - x[:, None]
    s1 = (wk2[None, :] / d).sum(axis=1)
    s2 = (wk2[None, :] / (d * d)).sum(axis=1)
    # V00 - x - sum c_k^2/(w_k^2 - x) with V00 = wb2 + N eta2, c_k^2 = eta2 w_k^2
    h = wb2 + eta2 * (len(wk2) - s1) - x
    dh = -1.0 - eta2 * s2
    return h, dh


def _solve_secular(params: ModelParams, cavity: CavitySpec, tol: float) -> np.ndarray:
    N = cavity.N
    wk = cavity.omegas
    wk2 = wk * wk
    eta2 = cavity.eta(params.g) ** 2
    wb2 = params.omega_bar ** 2
    eps = 1e-9 * math.pi / cavity.R
    # branch edges in frequency; the top branch is closed by a Gershgorin bound
    gersh = max(wb2 + N * eta2 + math.sqrt(eta2) * wk.sum(),
                float(np.max(wk2 + math.sqrt(eta2) * wk)))
    lo_w = np.concatenate([[0.0], wk])
    hi_w = np.concatenate([wk, [math.sqrt(gersh) * (1 + 1e-12) + eps]])
    lo = (lo_w + eps) ** 2
    lo[0] = 0.0
    hi = (hi_w - eps) ** 2
    hi[-1] = hi_w[-1] ** 2
    h_lo, _ = _secular(lo, wk2, eta2, wb2)
    h_hi, _ = _secular(hi, wk2, eta2, wb2)
    # a root closer than eps to a pole: shrink the offset toward the pole
    for shrink in range(8):
        bad_lo = h_lo <= 0
        bad_hi = h_hi >= 0
        bad_lo[0] = False
        bad_hi[-1] = False
        if not (bad_lo.any() or bad_hi.any()):
            break
        e = eps * 10.0 ** (-2 * (shrink + 1))
        lo = np.where(bad_lo, (lo_w + e) ** 2, lo)
        hi = np.where(bad_hi, (hi_w - e) ** 2, hi)
        h_lo, _ = _secular(lo, wk2, eta2, wb2)
        h_hi, _ = _secular(hi, wk2, eta2, wb2)
    if np.any(h_lo[1:] <= 0) or np.any(h_hi[:-1] >= 0) or h_lo[0] <= 0 or h_hi[-1] >= 0:
        bad = np.flatnonzero((h_lo <= 0) | (h_hi >= 0))
        raise BracketFailure(f"no sign change on branches {bad[:10].tolist()}")
    # bisection to a coarse bracket, then safeguarded Newton
    for _ in range(30):
        mid = 0.5 * (lo + hi)
        hm, _ = _secular(mid, wk2, eta2, wb2)
        pos = hm > 0
        lo = np.where(pos, mid, lo)
        hi = np.where(pos, hi, mid)
    x = 0.5 * (lo + hi)
    for _ in range(100):
        h, dh = _secular(x, wk2, eta2, wb2)
        pos = h > 0
        lo = np.where(pos, x, lo)
        hi = np.where(pos, hi, x)
        step = h / dh
        xn = x - step
        outside = (xn <= lo) | (xn >= hi)
        xn = np.where(outside, 0.5 * (lo + hi), xn)
        done = np.abs(xn - x) <= tol * np.abs(xn) + _EPS * np.abs(xn)
        x = xn
        if np.all(done | (hi - lo <= 4 * _EPS * hi)):
            break
    return np.sqrt(x)


def _solve_cot(params: ModelParams, cavity: CavitySpec) -> np.ndarray:
    # N = infinity condition, one root per branch (k pi/R, (k+1) pi/R), k = 0..N
    R = cavity.R
    eps = 1e-9 * math.pi / R
    k = np.arange(cavity.N + 1)
    lo = k * math.pi / R + eps
    hi = (k + 1) * math.pi / R - eps
    f = lambda W: cavity_condition(params, cavity, W, truncated=False, scaled=False)
    f_lo, f_hi = f(lo), f(hi)
    if np.any(np.sign(f_lo) == np.sign(f_hi)):
        bad = np.flatnonzero(np.sign(f_lo) == np.sign(f_hi))
        raise BracketFailure(f"no sign change on cotangent branches {bad[:10].tolist()}")
    s_lo = np.sign(f_lo)
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        fm = f(mid)
        same = np.sign(fm) == s_lo
        lo = np.where(same, mid, lo)
        hi = np.where(same, hi, mid)
        if np.all(hi - lo <= 2 * _EPS * hi):
            break
    return 0.5 * (lo + hi)


def solve_spectrum(params: ModelParams, cavity: CavitySpec, tol: float = 1e-14,
                   truncated: bool = True) -> ModeSpectrum:
    """Normal frequencies Omega_r, r = 0..N, in ascending order.

    ``truncated=True`` solves the exact N-mode condition; ``truncated=False``
    solves the N -> infinity cotangent condition on its first N+1 branches.
    """
    if not tol > 0:
        raise NonPositiveError("tol must be > 0")
    wk = cavity.omegas
    if params.g == 0:
        Om = np.sort(np.concatenate([[params.omega_bar], wk]))
        if np.any(np.diff(Om) <= 0):
            raise DegenerateModeError("omega_bar coincides with a cavity mode at g = 0")
        res = np.zeros_like(Om)
        return ModeSpectrum(cavity, wk, Om, res, params, truncated)
    Om = _solve_secular(params, cavity, tol) if truncated else _solve_cot(params, cavity)
    res = np.abs(cavity_condition(params, cavity, Om, truncated=truncated))
    return ModeSpectrum(cavity, wk, Om, res, params, truncated)


def transform_matrix(params: ModelParams, spectrum: ModeSpectrum, method: str = "exact") -> TransformMatrix:
    """Matrix elements t_mu^r.

    ``exact`` normalizes each arrowhead eigenvector (1, c_k/(omega_k^2 - Omega^2));
    ``closed`` uses the continuum expression
    t_0^r = eta Omega / sqrt((Omega^2 - wb^2)^2 + eta^2 (3 Omega^2 - wb^2)/2 + pi^2 g^2 Omega^2).
    Both give t_k^r = eta omega_k t_0^r / (omega_k^2 - Omega_r^2).
    """
    cav = spectrum.cavity
    wk = spectrum.omegas_bath
    Om = spectrum.Omegas
    N = cav.N
    if params.g == 0:
        perm = np.argsort(np.concatenate([[params.omega_bar], wk]), kind="stable")
        full = np.zeros((N + 1, N + 1))
        full[perm, np.arange(N + 1)] = 1.0
        return TransformMatrix(full[0].copy(), full[1:].copy())
    eta = cav.eta(params.g)
    d = wk[:, None] ** 2 - Om[None, :] ** 2
    if np.min(np.abs(d)) <= 1e3 * _EPS * np.max(wk) ** 2:
        raise DegenerateModeError("a normal frequency coincides with a cavity mode")
    ratio = eta * wk[:, None] / d          # t_k^r / t_0^r
    if method == "exact":
        t0 = 1.0 / np.sqrt(1.0 + (ratio * ratio).sum(axis=0))
    elif method == "closed":
        wb2 = params.omega_bar ** 2
        O2 = Om * Om
        t0 = eta * Om / np.sqrt((O2 - wb2) ** 2 + 0.5 * eta * eta * (3 * O2 - wb2)
                                + (math.pi * params.g) ** 2 * O2)
    else:
        raise ValueError(f"unknown method {method!r}")
    return TransformMatrix(t0, ratio * t0[None, :])


def potential_matrix(params: ModelParams, cavity: CavitySpec,
                     bare_frequency_sq: Optional[float] = None) -> np.ndarray:
    wk = cavity.omegas
    eta = cavity.eta(params.g)
    V = np.diag(np.concatenate([[0.0], wk * wk]))
    V[0, 0] = params.omega_bar ** 2 + cavity.N * eta ** 2 if bare_frequency_sq is None else bare_frequency_sq
    V[0, 1:] = V[1:, 0] = -eta * wk
    return V


def diagonalize_oracle(params: ModelParams, cavity: CavitySpec,
                       bare_frequency_sq: Optional[float] = None):
    """Dense eigendecomposition of the potential matrix.

    Returns (eigenvalues, eigenvectors) with eigenvalues ascending and each
    eigenvector column scaled so its particle component is positive.
    ``bare_frequency_sq`` overrides V_00 (default omega_bar^2 + N eta^2).
    """
    V = potential_matrix(params, cavity, bare_frequency_sq)
    lam, E = eigh(V)
    if lam[0] < 0:
        raise UnstableSystemError(f"negative eigenvalue {lam[0]:.6g}: bare frequency below counterterm")
    sign = np.where(E[0] < 0, -1.0, 1.0)
    return lam, E * sign[None, :]


def write_spectrum_csv(spectrum: ModeSpectrum, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["r", "Omega_r", "residual"])
        for r, (Om, res) in enumerate(zip(spectrum.Omegas, spectrum.residuals)):
            w.writerow([r, repr(float(Om)), repr(float(res))])

"""Adaptive Gauss-Kronrod quadrature for finite, semi-infinite, oscillatory
and principal-value integrals.

Integrands are vectorized callables: ``f(x)`` receives a 1-D array of nodes
and returns an array of shape ``(m,)`` or ``(m, k)`` for ``k`` simultaneous
integrands sharing the same nodes.

Refinement is deterministic.  Every panel whose error estimate is within a
factor 4 of the worst panel is bisected, and the choice does not depend on
the requested tolerance, so a tighter tolerance continues exactly the same
refinement sequence.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, Optional, Sequence, Union

import numpy as np

from .errors import (DomainError, NonFiniteIntegrand, NonPositiveError,
                     ParameterError, PoleOnBoundary, QuadratureFailure)

Integrand = Callable[[np.ndarray], np.ndarray]

# 15-point Kronrod extension of the 7-point Gauss rule (QUADPACK qk15).
_XGK = np.array([
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
])
_WGK = np.array([
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
])
_WG = np.array([
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
])

NODES = np.concatenate([-_XGK[:7], [0.0], _XGK[6::-1]])
KRONROD_WEIGHTS = np.concatenate([_WGK[:7], [_WGK[7]], _WGK[6::-1]])
GAUSS_WEIGHTS = np.zeros(15)
GAUSS_WEIGHTS[[1, 13]] = _WG[0]
GAUSS_WEIGHTS[[3, 11]] = _WG[1]
GAUSS_WEIGHTS[[5, 9]] = _WG[2]
GAUSS_WEIGHTS[7] = _WG[3]

_EPS = np.finfo(float).eps
_TINY = np.finfo(float).tiny
_STALL_ROUNDS = 12


# --------------------------------------------------------------------------
# specification and result types

@dataclass(frozen=True)
class ExpWeight:
    """Integrand decays at least like exp(-beta x); truncate the tail."""
    beta: float


@dataclass(frozen=True)
class PowerDecay:
    """Integrand decays like x**(-p), p > 1, beyond ``start``.

    ``method`` picks the tail treatment: "map" sends [start, inf) to (0, 1]
    so an exact power law becomes constant; "cycles" sums half periods of
    the oscillation hint with Wynn acceleration; "octaves" integrates
    [L, 2L], [2L, 4L], ... and extrapolates the geometric decay, which
    suits a smooth power law carrying decaying oscillations.  "auto" uses
    "cycles" when an oscillation hint is set and "map" otherwise.
    """
    p: float = 2.0
    start: Optional[float] = None
    method: str = "auto"


@dataclass(frozen=True)
class Fixed:
    """Integrate up to a hard cutoff and ignore everything beyond it."""
    cutoff: float


TailPolicy = Union[ExpWeight, PowerDecay, Fixed]


@dataclass(frozen=True)
class QuadratureSpec:
    rel_tol: float = 1e-10
    abs_tol: float = 1e-12
    max_panels: int = 50_000
    tail: TailPolicy = field(default_factory=PowerDecay)
    oscillation_freq_hint: Optional[float] = None

    def __post_init__(self):
        if not (self.rel_tol > 0 and self.abs_tol > 0):
            raise NonPositiveError("quadrature tolerances must be positive")
        if self.max_panels < 16:
            raise ParameterError("max_panels must be at least 16")
        if self.oscillation_freq_hint is not None and self.oscillation_freq_hint < 0:
            raise DomainError("oscillation_freq_hint must be >= 0")
        tail = self.tail
        if isinstance(tail, ExpWeight) and not tail.beta > 0:
            raise NonPositiveError("ExpWeight.beta must be positive")
        if isinstance(tail, PowerDecay) and not tail.p > 1:
            raise DomainError("PowerDecay.p must exceed 1")
        if isinstance(tail, PowerDecay) and tail.method not in ("auto", "map", "cycles", "octaves"):
            raise ParameterError(f"unknown PowerDecay.method {tail.method!r}")
        if isinstance(tail, Fixed) and not tail.cutoff > 0:
            raise NonPositiveError("Fixed.cutoff must be positive")

    def tolerance(self, value) -> np.ndarray:
        return np.maximum(self.abs_tol, self.rel_tol * np.abs(value))


@dataclass
class QuadratureResult:
    value: Union[float, np.ndarray]
    error_estimate: Union[float, np.ndarray]
    panels_used: int
    converged: bool

    def __add__(self, other: "QuadratureResult") -> "QuadratureResult":
        return QuadratureResult(self.value + other.value,
                                self.error_estimate + other.error_estimate,
                                self.panels_used + other.panels_used,
                                self.converged and other.converged)


def _zero_result(shape=()) -> QuadratureResult:
    if shape:
        return QuadratureResult(np.zeros(shape), np.zeros(shape), 0, True)
    return QuadratureResult(0.0, 0.0, 0, True)


def _finalize(res: QuadratureResult, spec: QuadratureSpec) -> QuadratureResult:
    # report plain floats for scalar integrands
    val, err = res.value, res.error_estimate
    if np.ndim(val) == 0:
        val, err = float(val), float(err)
    ok = bool(res.converged and np.all(np.asarray(err) <= spec.tolerance(val)))
    return QuadratureResult(val, err, res.panels_used, ok)


def require_converged(res: QuadratureResult, context: str = "") -> QuadratureResult:
    """Raise QuadratureFailure unless ``res`` converged."""
    if not res.converged:
        raise QuadratureFailure(
            f"quadrature did not converge{' (' + context + ')' if context else ''}: "
            f"value={res.value!r}, error={res.error_estimate!r}, panels={res.panels_used}")
    return res


# --------------------------------------------------------------------------
# the panel rule

def _evaluate(f: Integrand, x: np.ndarray) -> np.ndarray:
    fx = np.asarray(f(x))
    if fx.shape[:1] != x.shape[:1]:
        raise ValueError(f"integrand returned shape {fx.shape} for {x.shape[0]} nodes")
    if not np.all(np.isfinite(fx)):
        bad = x[~np.isfinite(fx).reshape(len(x), -1).all(axis=1)]
        raise NonFiniteIntegrand(f"non-finite integrand value at x={bad[:5]}")
    return fx


def gk15(f: Integrand, a: np.ndarray, b: np.ndarray):
    """Apply the 15-point Kronrod rule on panels [a_i, b_i].

    Returns (integral, error) with leading axis over panels.  The error
    estimate follows QUADPACK: the Gauss/Kronrod difference scaled by the
    integrand variation, floored at 50 eps times the absolute integral.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    c = 0.5 * (a + b)
    h = 0.5 * (b - a)
    x = c[:, None] + h[:, None] * NODES[None, :]
    fx = _evaluate(f, x.ravel())
    fx = fx.reshape(x.shape + fx.shape[1:])
    extra = (slice(None),) + (None,) * (fx.ndim - 2)
    hh = np.abs(h)[extra]
    resk = np.tensordot(KRONROD_WEIGHTS, fx, axes=([0], [1]))
    resg = np.tensordot(GAUSS_WEIGHTS, fx, axes=([0], [1]))
    resabs = np.tensordot(KRONROD_WEIGHTS, np.abs(fx), axes=([0], [1]))
    mean = 0.5 * resk
    resasc = np.tensordot(KRONROD_WEIGHTS, np.abs(fx - mean[:, None]), axes=([0], [1]))
    err = np.abs(resk - resg) * hh
    resasc = resasc * hh
    resabs = resabs * hh
    with np.errstate(divide="ignore", invalid="ignore"):
        scaled = resasc * np.minimum(1.0, (200.0 * err / resasc) ** 1.5)
    err = np.where((resasc != 0) & (err != 0), scaled, err)
    err = np.where(resabs > _TINY / (50 * _EPS), np.maximum(50 * _EPS * resabs, err), err)
    return resk * h[extra], err


def _adaptive(f: Integrand, edges: np.ndarray, spec: QuadratureSpec) -> QuadratureResult:
    """Globally adaptive bisection starting from the panels given by ``edges``."""
    a = np.asarray(edges[:-1], dtype=float)
    b = np.asarray(edges[1:], dtype=float)
    val, err = gk15(f, a, b)
    vector = val.ndim > 1
    best = None
    stale = 0
    while True:
        order = np.argsort(a, kind="stable")
        total = val[order].sum(axis=0)
        etot = err.sum(axis=0)
        key = float(np.max(etot))
        if best is None or key <= best[0]:
            if best is not None and key > 0.9 * best[0]:
                stale += 1
            else:
                stale = 0
            best = (key, total, etot, len(a))
        else:
            stale += 1
        if np.all(etot <= spec.tolerance(total)):
            return QuadratureResult(best[1], best[2], best[3], True)
        if stale >= _STALL_ROUNDS:
            # roundoff-limited: further bisection no longer helps
            return QuadratureResult(best[1], best[2], best[3], False)
        perr = err.max(axis=1) if vector else err
        width = np.abs(b - a)
        splittable = width > 8 * _EPS * np.maximum(np.abs(a), np.abs(b)) + _TINY
        perr = np.where(splittable, perr, -1.0)
        room = spec.max_panels - len(a)
        if room <= 0 or perr.max() <= 0:
            return QuadratureResult(best[1], best[2], best[3], False)
        sel = np.flatnonzero(perr >= 0.25 * perr.max())
        if len(sel) > room:
            sel = sel[np.argsort(-perr[sel], kind="stable")[:room]]
            sel.sort()
        keep = np.ones(len(a), dtype=bool)
        keep[sel] = False
        mid = 0.5 * (a[sel] + b[sel])
        na = np.concatenate([a[sel], mid])
        nb = np.concatenate([mid, b[sel]])
        nv, ne = gk15(f, na, nb)
        a = np.concatenate([a[keep], na])
        b = np.concatenate([b[keep], nb])
        val = np.concatenate([val[keep], nv])
        err = np.concatenate([err[keep], ne])


def _panel_edges(a: float, b: float, breakpoints: Sequence[float], hint: Optional[float]) -> np.ndarray:
    pts = [a] + sorted(float(p) for p in breakpoints if a < p < b) + [b]
    edges = [a]
    max_width = math.pi / (4.0 * hint) if hint else math.inf
    for lo, hi in zip(pts[:-1], pts[1:]):
        n = max(1, int(math.ceil((hi - lo) / max_width))) if math.isfinite(max_width) else 1
        edges.extend(np.linspace(lo, hi, n + 1)[1:])
    return np.asarray(edges)


def integrate(f: Integrand, a: float, b: float, spec: QuadratureSpec = QuadratureSpec(),
              breakpoints: Sequence[float] = ()) -> QuadratureResult:
    """Integrate over the finite interval [a, b].

    No panel straddles a breakpoint, and with an oscillation hint no initial
    panel is wider than pi / (4 hint).
    """
    if not (math.isfinite(a) and math.isfinite(b)):
        raise DomainError("integrate needs finite limits; use integrate_semi_infinite")
    if a == b:
        return _finalize(_zero_result(), spec)
    if b < a:
        res = integrate(f, b, a, spec, breakpoints)
        return QuadratureResult(-res.value, res.error_estimate, res.panels_used, res.converged)
    edges = _panel_edges(a, b, breakpoints, spec.oscillation_freq_hint)
    return _finalize(_adaptive(f, edges, spec), spec)


# --------------------------------------------------------------------------
# series acceleration

def wynn_epsilon(partial_sums: Sequence[float]):
    """Wynn epsilon extrapolation of a sequence of partial sums.

    Returns (estimate, error) where the error is the distance between the
    two most recent even-column estimates.
    """
    s = np.asarray(partial_sums, dtype=float)
    n = len(s)
    if n == 0:
        return 0.0, math.inf
    if n < 3:
        return float(s[-1]), (abs(s[-1] - s[-2]) if n == 2 else math.inf)
    prev = np.zeros(n + 1)
    cur = s.copy()
    estimates = [cur[-1]]
    k = 0
    while len(cur) > 1:
        diff = cur[1:] - cur[:-1]
        with np.errstate(divide="ignore"):
            nxt = prev[1:len(cur)] + np.where(diff != 0, 1.0 / np.where(diff != 0, diff, 1.0), np.inf)
        prev, cur = cur, nxt
        k += 1
        if not np.all(np.isfinite(cur)):
            break
        if k % 2 == 0:
            estimates.append(cur[-1])
    if len(estimates) < 2:
        return float(s[-1]), abs(s[-1] - s[-2])
    return float(estimates[-1]), float(abs(estimates[-1] - estimates[-2]))


def _wynn_vector(sums: np.ndarray):
    if sums.ndim == 1:
        return wynn_epsilon(sums)
    out = [wynn_epsilon(sums[:, j]) for j in range(sums.shape[1])]
    return np.array([o[0] for o in out]), np.array([o[1] for o in out])


# --------------------------------------------------------------------------
# semi-infinite integrals

def exp_tail_cutoff(f: Integrand, beta: float, a: float, abs_tol: float,
                    start: Optional[float] = None, max_doublings: int = 60) -> tuple:
    """Smallest probed Lambda with an estimated tail below abs_tol / 10.

    The tail beyond Lambda is bounded by (largest |f| on [Lambda, Lambda + 4/beta])
    times 2/beta, which is generous for an e^{-beta x} envelope.
    Returns (Lambda, tail_estimate).
    """
    step = 1.0 / beta
    lam = max(a + step, start if start is not None else a + step)
    probe = np.linspace(0.0, 4.0 * step, 33)
    for _ in range(max_doublings):
        vals = np.abs(_evaluate(f, lam + probe))
        scale = float(vals.max()) * 2.0 * step
        if scale < abs_tol / 10:
            return lam, scale
        lam = a + 2.0 * (lam - a)
    raise QuadratureFailure(f"integrand does not decay like exp(-{beta} x); last probe at {lam}")


def _power_tail_mapped(f: Integrand, lam0: float, p: float, spec: QuadratureSpec) -> QuadratureResult:
    # x = lam0 * s**(-1/(p-1)) turns an exact x**-p tail into a constant on (0, 1]
    q = 1.0 / (p - 1.0)

    def g(s):
        with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
            x = lam0 * s ** (-q)
            ok = np.isfinite(x) & (s > 0)
            xs = np.where(ok, x, lam0)
            fx = np.asarray(f(xs))
            jac = lam0 * q * (xs / lam0) ** p
            if fx.ndim > 1:
                jac = jac[:, None]
                okb = ok[:, None]
            else:
                okb = ok
            out = np.where(okb, fx * jac, 0.0)
        return out

    return _adaptive(g, np.array([0.0, 1.0]), replace(spec, oscillation_freq_hint=None))


def _power_tail_cycles(f: Integrand, lam0: float, freq: float, spec: QuadratureSpec,
                       max_cycles: int = 200) -> QuadratureResult:
    # half-period cycles summed with Wynn epsilon acceleration
    half = math.pi / freq
    partial = []
    total = None
    errsum = 0.0
    panels = 0
    ok = True
    est, est_err = 0.0, math.inf
    for k in range(max_cycles):
        lo = lam0 + k * half
        res = _adaptive(f, np.linspace(lo, lo + half, 5), spec)
        panels += res.panels_used
        ok = ok and res.converged
        errsum = errsum + res.error_estimate
        total = res.value if total is None else total + res.value
        partial.append(np.array(total, dtype=float))
        if k >= 5:
            est, est_err = _wynn_vector(np.array(partial))
            tol = spec.tolerance(est)
            if np.all(est_err <= tol / 4):
                return QuadratureResult(est, est_err + errsum, panels, ok)
    return QuadratureResult(est, est_err + errsum, panels, False)


def _power_tail_octaves(f: Integrand, lam0: float, p: float, spec: QuadratureSpec,
                        max_octaves: int = 40) -> QuadratureResult:
    r = 2.0 ** (1.0 - p)
    acc = None
    prev = None
    errsum = 0.0
    panels = 0
    ok = True
    lo = lam0
    for _ in range(max_octaves):
        res = integrate(f, lo, 2 * lo, spec)
        panels += res.panels_used
        ok = ok and res.converged
        errsum = errsum + res.error_estimate
        acc = res.value if acc is None else acc + res.value
        est = acc + res.value * r / (1 - r)
        if prev is not None:
            change = np.abs(est - prev)
            if np.all(change <= spec.tolerance(est) / 4):
                return QuadratureResult(est, change + errsum, panels, ok)
        if panels >= spec.max_panels:
            break
        prev = est
        lo *= 2
    return QuadratureResult(est, np.abs(est - prev) + errsum if prev is not None else np.abs(est),
                            panels, False)


def integrate_semi_infinite(f: Integrand, spec: QuadratureSpec = QuadratureSpec(),
                            a: float = 0.0, breakpoints: Sequence[float] = ()) -> QuadratureResult:
    """Integrate over [a, inf) according to ``spec.tail``."""
    tail = spec.tail
    hint = spec.oscillation_freq_hint
    bps = [p for p in breakpoints if p > a]
    if isinstance(tail, Fixed):
        if tail.cutoff <= a:
            raise DomainError("Fixed cutoff must exceed the lower limit")
        return integrate(f, a, tail.cutoff, spec, bps)
    if isinstance(tail, ExpWeight):
        start = max(bps) if bps else None
        lam, tail_est = exp_tail_cutoff(f, tail.beta, a, spec.abs_tol, start)
        res = integrate(f, a, lam, spec, bps)
        res = QuadratureResult(res.value, res.error_estimate + tail_est,
                               res.panels_used, res.converged)
        return _finalize(res, spec)
    # power-law tail
    lam0 = tail.start if tail.start is not None else max([a + 1.0] + [2.0 * p for p in bps])
    if lam0 <= a:
        raise DomainError("PowerDecay.start must exceed the lower limit")
    if hint:
        # align the split with a whole number of half periods
        half = math.pi / hint
        lam0 = a + half * math.ceil((lam0 - a) / half)
    head_spec = replace(spec, abs_tol=spec.abs_tol / 2, rel_tol=spec.rel_tol / 2)
    head = integrate(f, a, lam0, head_spec, bps)
    tail_tol = float(np.min(spec.tolerance(head.value))) / 4
    tail_spec = replace(spec, abs_tol=tail_tol, rel_tol=spec.rel_tol / 4,
                        max_panels=max(16, spec.max_panels - head.panels_used))
    method = tail.method
    if method == "auto":
        method = "cycles" if hint else "map"
    if method == "cycles" and not hint:
        raise ParameterError("cycle summation needs an oscillation_freq_hint")
    if method == "cycles":
        rest = _power_tail_cycles(f, lam0, hint, tail_spec)
    elif method == "octaves":
        rest = _power_tail_octaves(f, lam0, tail.p, tail_spec)
    else:
        rest = _power_tail_mapped(f, lam0, tail.p, tail_spec)
    return _finalize(head + rest, spec)


def _times(f_env: Integrand, w: Callable[[np.ndarray], np.ndarray]) -> Integrand:
    def h(x):
        fx = np.asarray(f_env(x))
        wx = w(x)
        return fx * (wx[:, None] if fx.ndim > 1 else wx)
    return h


def integrate_oscillatory(f_envelope: Integrand, freq: float, phase: str,
                          spec: QuadratureSpec = QuadratureSpec(), a: float = 0.0,
                          breakpoints: Sequence[float] = ()) -> QuadratureResult:
    """Integrate f_envelope(x) * sin(freq x) or * cos(freq x) over [a, inf)."""
    if phase not in ("sin", "cos"):
        raise ParameterError("phase must be 'sin' or 'cos'")
    if freq < 0:
        raise DomainError("freq must be >= 0")
    if freq == 0:
        if phase == "cos":
            return integrate_semi_infinite(f_envelope, spec, a, breakpoints)
        probe = np.asarray(f_envelope(np.array([a + 1.0])))
        return _finalize(_zero_result(probe.shape[1:]), spec)
    trig = np.sin if phase == "sin" else np.cos
    hint = max(spec.oscillation_freq_hint or 0.0, freq)
    return integrate_semi_infinite(_times(f_envelope, lambda x: trig(freq * x)),
                                   replace(spec, oscillation_freq_hint=hint), a, breakpoints)


def integrate_pv(f: Integrand, pole: float, spec: QuadratureSpec = QuadratureSpec(),
                 a: float = 0.0, b: Optional[float] = None,
                 window: Optional[float] = None,
                 breakpoints: Sequence[float] = ()) -> QuadratureResult:
    """Cauchy principal value of f over [a, b] (b=None means infinity).

    ``f`` contains a simple pole at ``pole``.  On [pole - d, pole + d] the
    integrand is folded to f(pole + u) + f(pole - u), in which the pole
    cancels, and the rest is integrated normally.
    """
    upper = math.inf if b is None else float(b)
    span = max(1.0, abs(pole))
    if not (pole - a > 1e-12 * span and upper - pole > 1e-12 * span):
        raise PoleOnBoundary(f"pole {pole} is not strictly inside ({a}, {upper})")
    room = min(pole - a, upper - pole)
    d = 0.5 * room if window is None else float(window)
    if not 0 < d <= room:
        raise DomainError(f"window must lie in (0, {room}]")

    def folded(u):
        return np.asarray(f(pole + u)) + np.asarray(f(pole - u))

    # the fold cancels A/u against -A/u, leaving roundoff of order eps*|A|
    u = d * np.logspace(-6, 0, 13)
    residue = np.max(np.abs(np.asarray(f(pole + u))).reshape(len(u), -1) * u[:, None], axis=0)
    noise = float(np.max(residue)) * 1e3 * _EPS
    inner = [p for p in breakpoints if p != pole]
    right = [p for p in inner if p > pole + d]

    def pieces(sub):
        res = integrate(folded, 0.0, d, replace(sub, abs_tol=max(sub.abs_tol, noise)))
        if pole - d > a:
            res = res + integrate(f, a, pole - d, sub, [p for p in inner if p < pole])
        if b is None:
            res = res + integrate_semi_infinite(f, sub, pole + d, right)
        elif upper > pole + d:
            res = res + integrate(f, pole + d, upper, sub, right)
        return res

    res = pieces(replace(spec, abs_tol=spec.abs_tol / 3, rel_tol=spec.rel_tol / 3))
    if res.converged and np.any(res.error_estimate > spec.tolerance(res.value)):
        # the two sides cancelled; redo with an absolute target set by the total
        target = float(np.min(spec.tolerance(res.value))) / 3
        res = pieces(replace(spec, abs_tol=target, rel_tol=spec.rel_tol * 1e-3))
    return _finalize(res, spec)

"""Adaptive quadrature and bracketed root finding with explicit tolerances.

The integrator is a Gauss-Kronrod 7/15 rule with bisection refinement of
the worst panel.  Integrands must be vectorized (ndarray of nodes in,
ndarray of values out); every integrand in this package is evaluated in
u-space after the substitution u = F(y), so the intervals are bounded and
the integrands are bounded and piecewise smooth.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass

import numpy as np

__all__ = [
    "QuadratureConfig",
    "RootConfig",
    "QuadratureError",
    "BracketError",
    "integrate",
    "integrate_detailed",
    "find_root",
]

# 15-point Kronrod abscissae on [-1, 1] and weights; the embedded 7-point
# Gauss rule uses the odd-indexed abscissae.  Standard QUADPACK constants.
_XK = np.array([
    -0.991455371120813, -0.949107912342759, -0.864864423359769,
    -0.741531185599394, -0.586087235467691, -0.405845151377397,
    -0.207784955007898, 0.0,
    0.207784955007898, 0.405845151377397, 0.586087235467691,
    0.741531185599394, 0.864864423359769, 0.949107912342759,
    0.991455371120813,
])
_WK = np.array([
    0.022935322010529, 0.063092092629979, 0.104790010322250,
    0.140653259715525, 0.169004726639267, 0.190350578064785,
    0.204432940075298, 0.209482141084728,
    0.204432940075298, 0.190350578064785, 0.169004726639267,
    0.140653259715525, 0.104790010322250, 0.063092092629979,
    0.022935322010529,
])
_WG = np.array([
    0.129484966168870, 0.279705391489277, 0.381830050505119,
    0.417959183673469,
    0.381830050505119, 0.279705391489277, 0.129484966168870,
])


@dataclass(frozen=True)
class QuadratureConfig:
    abs_tol: float = 1e-10
    rel_tol: float = 1e-10
    max_subdivisions: int = 10**6

    def __post_init__(self):
        if self.abs_tol <= 0 or self.rel_tol <= 0:
            raise ValueError("quadrature tolerances must be positive")
        if self.max_subdivisions < 1:
            raise ValueError("max_subdivisions must be at least 1")


@dataclass(frozen=True)
class RootConfig:
    x_tol: float = 1e-12
    f_tol: float = 1e-12
    max_iter: int = 200

    def __post_init__(self):
        if self.x_tol <= 0 or self.f_tol <= 0:
            raise ValueError("root tolerances must be positive")
        if self.max_iter < 1:
            raise ValueError("max_iter must be at least 1")


class QuadratureError(RuntimeError):
    """Refinement budget exhausted; carries the best estimate and its bound."""

    def __init__(self, message: str, estimate: float, error_bound: float):
        super().__init__(f"{message} (estimate={estimate!r}, error_bound={error_bound!r})")
        self.estimate = estimate
        self.error_bound = error_bound


class BracketError(ValueError):
    """The supplied interval does not bracket a sign change."""


def _panel(f, a, b):
    """Kronrod estimate and conservative |K15 - G7| error for one panel."""
    c = 0.5 * (a + b)
    h = 0.5 * (b - a)
    y = np.asarray(f(c + h * _XK), dtype=float)
    if y.shape != _XK.shape:
        raise TypeError("integrand must map an ndarray of nodes to values elementwise")
    k = h * float(y @ _WK)
    g = h * float(y[1::2] @ _WG)
    return k, abs(k - g)


def integrate_detailed(f, a, b, cfg: QuadratureConfig | None = None,
                       initial_panels: int = 8, break_points=None):
    """Adaptive integral of a vectorized ``f`` on [a, b].

    Returns (value, error_bound, panels).  Raises QuadratureError when the
    subdivision budget runs out before ``error_bound`` falls below
    ``abs_tol + rel_tol * |value|``.  The interval starts out split into
    ``initial_panels`` equal panels so that narrow features near the
    endpoints are seen by at least one Kronrod node; known kink locations
    of the integrand can be supplied as ``break_points`` and become panel
    edges, which makes piecewise-polynomial integrands exact immediately.
    """
    cfg = cfg or QuadratureConfig()
    a, b = float(a), float(b)
    if a > b:
        raise ValueError(f"integration bounds out of order: [{a}, {b}]")
    if a == b:
        return 0.0, 0.0, 0
    # heap entries: (-err, tiebreak, a, b, val, err); stale entries are
    # compensated by the running totals.
    heap = []
    total_val = total_err = 0.0
    edges = np.linspace(a, b, max(int(initial_panels), 1) + 1)
    if break_points is not None:
        cuts = np.asarray(break_points, dtype=float)
        cuts = cuts[(cuts > a) & (cuts < b)]
        edges = np.unique(np.concatenate([edges, cuts]))
    for i, (pa, pb) in enumerate(zip(edges[:-1], edges[1:])):
        val, err = _panel(f, pa, pb)
        heapq.heappush(heap, (-err, i, pa, pb, val, err))
        total_val += val
        total_err += err
    splits = 0
    serial = len(heap)
    frozen_err = 0.0
    while total_err > cfg.abs_tol + cfg.rel_tol * abs(total_val):
        if not heap or splits >= cfg.max_subdivisions:
            raise QuadratureError(
                "quadrature did not reach the requested tolerance",
                total_val,
                total_err,
            )
        _, _, pa, pb, pval, perr = heapq.heappop(heap)
        width = pb - pa
        if width <= 8.0 * np.finfo(float).eps * (abs(pa) + abs(pb) + 1.0):
            # Cannot be split further in floating point; park its error.
            frozen_err += perr
            if frozen_err > cfg.abs_tol + cfg.rel_tol * abs(total_val):
                raise QuadratureError(
                    "quadrature stalled on an unresolvable feature",
                    total_val,
                    total_err,
                )
            continue
        mid = 0.5 * (pa + pb)
        lval, lerr = _panel(f, pa, mid)
        rval, rerr = _panel(f, mid, pb)
        total_val += (lval + rval) - pval
        total_err += (lerr + rerr) - perr
        heapq.heappush(heap, (-lerr, serial, pa, mid, lval, lerr))
        heapq.heappush(heap, (-rerr, serial + 1, mid, pb, rval, rerr))
        serial += 2
        splits += 1
    return total_val, total_err, len(heap)


def integrate(f, a, b, cfg: QuadratureConfig | None = None) -> float:
    """Adaptive integral of a vectorized ``f`` on [a, b]; see integrate_detailed."""
    return integrate_detailed(f, a, b, cfg)[0]


def find_root(f, lo, hi, cfg: RootConfig | None = None) -> float:
    """Root of a continuous scalar ``f`` inside the bracket [lo, hi].

    Secant steps safeguarded by bisection: the bracket always shrinks, so
    convergence is guaranteed.  Stops when |f(x)| <= f_tol or the bracket
    width falls below x_tol; the result never leaves the initial bracket.
    """
    cfg = cfg or RootConfig()
    a, b = float(lo), float(hi)
    if a > b:
        raise ValueError(f"bracket out of order: [{a}, {b}]")
    fa, fb = float(f(a)), float(f(b))
    if abs(fa) <= cfg.f_tol:
        return a
    if abs(fb) <= cfg.f_tol:
        return b
    if fa * fb > 0:
        raise BracketError(f"no sign change on [{a}, {b}]: f(a)={fa!r}, f(b)={fb!r}")
    for _ in range(cfg.max_iter):
        if b - a <= cfg.x_tol:
            return 0.5 * (a + b)
        width = b - a
        if fb != fa:
            x = b - fb * (b - a) / (fb - fa)
        else:
            x = 0.5 * (a + b)
        # Reject secant points hugging the bracket ends; fall back to bisection.
        if not (a + 0.01 * width < x < b - 0.01 * width):
            x = 0.5 * (a + b)
        fx = float(f(x))
        if abs(fx) <= cfg.f_tol:
            return x
        if fa * fx < 0:
            b, fb = x, fx
        else:
            a, fa = x, fx
        # Guarantee progress: bisect whenever the bracket stopped halving.
        if (b - a) > 0.5 * width:
            m = 0.5 * (a + b)
            fm = float(f(m))
            if abs(fm) <= cfg.f_tol:
                return m
            if fa * fm < 0:
                b, fb = m, fm
            else:
                a, fa = m, fm
    raise RuntimeError(f"root refinement did not converge in {cfg.max_iter} iterations")

"""Continuous step distributions symmetric about zero.

Every distribution here satisfies F(-x) + F(x) = 1 by construction and
exposes the four primitives the rest of the library is built on: the CDF
``cdf``, the folded CDF ``folded_cdf`` (the law of |X|, equal to
2*F(x) - 1 for x >= 0), the quantile function, and inverse-CDF sampling.

``cdf`` and ``ppf`` are vectorized (ndarray in, ndarray out); ``quantile``
is the scalar, domain-checked front end.  The median quantile is pinned to
0 exactly for every distribution, including those whose CDF is flat at
level 1/2, where the generalized inverse alone would be ambiguous.
"""

from __future__ import annotations

import json
import math

import numpy as np

__all__ = [
    "DistributionError",
    "SymmetricDistribution",
    "Uniform",
    "Laplace",
    "PowerFold",
    "IntervalUnionUniform",
    "TabulatedCdf",
    "from_spec",
    "builtin_suite",
]

_ATOM_TOL = 1e-9


class DistributionError(ValueError):
    """Invalid distribution parameters, spec payloads, or domain errors."""


def _as_float_array(x):
    return np.asarray(x, dtype=float)


class SymmetricDistribution:
    """Base class for continuous distributions symmetric about 0."""

    #: (lower, upper) bounds of the support; may be infinite.
    support: tuple[float, float] = (-math.inf, math.inf)

    def cdf(self, x):
        """F(x), vectorized."""
        raise NotImplementedError

    def ppf(self, u):
        """Quantile function on (0, 1), vectorized.  ppf(0.5) == 0."""
        raise NotImplementedError

    def quantile(self, u: float) -> float:
        """Scalar quantile with domain checking; quantile(1/2) = 0."""
        u = float(u)
        if not 0.0 < u < 1.0:
            raise DistributionError(f"quantile argument must be in (0, 1), got {u}")
        return float(self.ppf(u))

    def folded_cdf(self, x):
        """G(x) = P(|X| <= x) = 2 F(x) - 1 for x >= 0."""
        x = _as_float_array(x)
        if np.any(x < 0):
            raise DistributionError("folded_cdf is defined for x >= 0 only")
        return 2.0 * self.cdf(x) - 1.0

    def folded_ppf(self, u):
        """Quantile of |X|: the inverse of the folded CDF."""
        u = _as_float_array(u)
        return self.ppf(0.5 * (1.0 + u))

    def sample(self, rng: np.random.Generator, size=None):
        """Inverse-CDF draws from the given generator."""
        return self.ppf(rng.random(size))

    def cdf_break_points(self) -> np.ndarray:
        """x values where F is not smooth; quadrature splits panels there."""
        return np.array([b for b in self.support if math.isfinite(b)])

    def spec(self) -> dict:
        """JSON-ready description; inverse of :func:`from_spec`."""
        raise NotImplementedError

    def __repr__(self):
        return f"{type(self).__name__}({json.dumps(self.spec())})"


class Uniform(SymmetricDistribution):
    """Uniform on (-a, a)."""

    def __init__(self, a: float = 1.0):
        a = float(a)
        if not (math.isfinite(a) and a > 0):
            raise DistributionError(f"uniform halfwidth must be positive, got {a}")
        self.a = a
        self.support = (-a, a)

    def cdf(self, x):
        x = _as_float_array(x)
        return np.clip((x + self.a) / (2.0 * self.a), 0.0, 1.0)

    def ppf(self, u):
        u = _as_float_array(u)
        return self.a * (2.0 * u - 1.0)

    def spec(self):
        return {"kind": "uniform", "a": self.a}


class Laplace(SymmetricDistribution):
    """Two-sided exponential with density exp(-|x|/b) / (2b)."""

    def __init__(self, b: float = 1.0):
        b = float(b)
        if not (math.isfinite(b) and b > 0):
            raise DistributionError(f"laplace scale must be positive, got {b}")
        self.b = b
        self.support = (-math.inf, math.inf)

    def cdf(self, x):
        x = _as_float_array(x)
        z = x / self.b
        with np.errstate(over="ignore"):
            return np.where(z < 0, 0.5 * np.exp(z), 1.0 - 0.5 * np.exp(-z))

    def ppf(self, u):
        u = _as_float_array(u)
        with np.errstate(divide="ignore"):
            lo = np.log(2.0 * u)
            hi = -np.log(2.0 * (1.0 - u))
        return self.b * np.where(u < 0.5, lo, hi)

    def cdf_break_points(self):
        return np.array([0.0])

    def spec(self):
        return {"kind": "laplace", "b": self.b}


class PowerFold(SymmetricDistribution):
    """Distribution on (-1, 1) whose folded CDF is G(x) = x**delta.

    Small delta piles the mass of |X| near 0 on a scale much shorter than
    the support, which makes the triangle event for three absolute steps
    rare; it is the sharpness family for the lower bound on the rank-rule
    parameter p.
    """

    def __init__(self, delta: float):
        delta = float(delta)
        if not (math.isfinite(delta) and delta > 0):
            raise DistributionError(f"powerfold exponent must be positive, got {delta}")
        self.delta = delta
        self.support = (-1.0, 1.0)

    def cdf(self, x):
        x = _as_float_array(x)
        g = np.clip(np.abs(x), 0.0, 1.0) ** self.delta
        return np.where(x >= 0, 0.5 * (1.0 + g), 0.5 * (1.0 - g))

    def ppf(self, u):
        u = _as_float_array(u)
        w = np.abs(2.0 * u - 1.0)
        mag = w ** (1.0 / self.delta)
        return np.where(u >= 0.5, mag, -mag)

    def cdf_break_points(self):
        return np.array([-1.0, 0.0, 1.0])

    def spec(self):
        return {"kind": "powerfold", "delta": self.delta}


class IntervalUnionUniform(SymmetricDistribution):
    """Uniform on (-d, -c) | (c, d) with 0 < c < d: no mass near the origin."""

    def __init__(self, c: float, d: float):
        c, d = float(c), float(d)
        if not (math.isfinite(c) and math.isfinite(d) and 0 < c < d):
            raise DistributionError(f"interval union needs 0 < c < d, got c={c}, d={d}")
        self.c = c
        self.d = d
        self.support = (-d, d)

    def cdf(self, x):
        x = _as_float_array(x)
        c, d, w = self.c, self.d, self.d - self.c
        pos = 0.5 + np.clip(x - c, 0.0, w) / (2.0 * w)
        neg = 0.5 - np.clip(-x - c, 0.0, w) / (2.0 * w)
        return np.where(x >= 0, pos, neg)

    def ppf(self, u):
        u = _as_float_array(u)
        c, w = self.c, self.d - self.c
        mag = c + np.abs(2.0 * u - 1.0) * w
        return np.where(u == 0.5, 0.0, np.where(u > 0.5, mag, -mag))

    def cdf_break_points(self):
        return np.array([-self.d, -self.c, self.c, self.d])

    def spec(self):
        return {"kind": "interval_union", "c": self.c, "d": self.d}


class TabulatedCdf(SymmetricDistribution):
    """Piecewise-linear CDF from a grid of (x, F(x)) points on x >= 0.

    The negative half is produced by mirroring, so symmetry is exact.  The
    grid must be monotone, reach F = 1 at its last point, and have
    F(0) = 1/2 (the point (0, 1/2) is prepended when missing).  Repeated x
    values with different F would be an atom and are rejected: the library
    relies on continuity of F throughout.

    Every knot is a kink of the CDF, and the solvers split quadrature
    panels at all of them, so solve cost grows roughly quadratically in
    the knot count; tables with more than a hundred or so knots get slow.
    """

    def __init__(self, grid):
        pts = np.asarray(list(grid), dtype=float)
        if pts.ndim != 2 or pts.shape[1] != 2 or pts.shape[0] < 1:
            raise DistributionError("tabulated grid must be a nonempty list of (x, F) pairs")
        if not np.all(np.isfinite(pts)):
            raise DistributionError("tabulated grid contains non-finite entries")
        pts = pts[np.argsort(pts[:, 0], kind="stable")]
        x, f = pts[:, 0], pts[:, 1]
        if x[0] < 0:
            raise DistributionError("tabulated grid must cover x >= 0 only; the negative side is mirrored")

        # Collapse duplicate x values; a jump there would be an atom.
        keep_x, keep_f = [], []
        i = 0
        while i < len(x):
            j = i
            while j + 1 < len(x) and x[j + 1] == x[i]:
                j += 1
            span = f[i : j + 1]
            if span.max() - span.min() > _ATOM_TOL:
                raise DistributionError(
                    f"tabulated grid has an atom at x={x[i]}: F jumps by {span.max() - span.min():.3g}"
                )
            keep_x.append(x[i])
            keep_f.append(float(span.mean()))
            i = j + 1
        x = np.array(keep_x)
        f = np.array(keep_f)

        if np.any(np.diff(f) < 0):
            raise DistributionError("tabulated grid has non-monotone F values")
        if x[0] == 0.0:
            if abs(f[0] - 0.5) > _ATOM_TOL:
                raise DistributionError(f"tabulated grid must have F(0) = 1/2, got {f[0]}")
            f[0] = 0.5
        else:
            if f[0] < 0.5 - _ATOM_TOL:
                raise DistributionError("tabulated grid has F < 1/2 at positive x")
            x = np.concatenate([[0.0], x])
            f = np.concatenate([[0.5], np.maximum(f, 0.5)])
        if abs(f[-1] - 1.0) > _ATOM_TOL:
            raise DistributionError(f"tabulated grid must reach F = 1, got {f[-1]}")
        f[-1] = 1.0
        f = np.minimum(f, 1.0)

        self._x = np.concatenate([-x[:0:-1], x])
        self._f = np.concatenate([1.0 - f[:0:-1], f])
        self.support = (float(self._x[0]), float(self._x[-1]))
        self._grid = [[float(a), float(b)] for a, b in zip(x, f)]

    def cdf(self, x):
        x = _as_float_array(x)
        return np.interp(x, self._x, self._f)

    def ppf(self, u):
        u = _as_float_array(u)
        idx = np.clip(np.searchsorted(self._f, u, side="left"), 1, len(self._f) - 1)
        f0, f1 = self._f[idx - 1], self._f[idx]
        x0, x1 = self._x[idx - 1], self._x[idx]
        df = f1 - f0
        t = np.where(df > 0, (u - f0) / np.where(df > 0, df, 1.0), 1.0)
        return np.where(u == 0.5, 0.0, x0 + t * (x1 - x0))

    def cdf_break_points(self):
        return self._x.copy()

    def spec(self):
        return {"kind": "tabulated", "grid": self._grid}


_KINDS = {
    "uniform": lambda s: Uniform(s.get("a", 1.0)),
    "laplace": lambda s: Laplace(s.get("b", 1.0)),
    "powerfold": lambda s: PowerFold(s["delta"]),
    "interval_union": lambda s: IntervalUnionUniform(s["c"], s["d"]),
    "tabulated": lambda s: TabulatedCdf(s["grid"]),
}


def from_spec(spec) -> SymmetricDistribution:
    """Build a distribution from a JSON object (or JSON text).

    Examples: ``{"kind": "uniform", "a": 1.0}``, ``{"kind": "laplace",
    "b": 1.0}``, ``{"kind": "powerfold", "delta": 0.1}``,
    ``{"kind": "interval_union", "c": 1.0, "d": 2.0}``,
    ``{"kind": "tabulated", "grid": [[x, F], ...]}``.
    """
    if isinstance(spec, str):
        try:
            spec = json.loads(spec)
        except json.JSONDecodeError as exc:
            raise DistributionError(f"distribution spec is not valid JSON: {exc}") from exc
    if not isinstance(spec, dict) or "kind" not in spec:
        raise DistributionError("distribution spec must be an object with a 'kind' field")
    kind = spec["kind"]
    if kind not in _KINDS:
        raise DistributionError(f"unknown distribution kind {kind!r}; known: {sorted(_KINDS)}")
    try:
        return _KINDS[kind](spec)
    except KeyError as exc:
        raise DistributionError(f"distribution spec for {kind!r} is missing field {exc}") from exc


def builtin_suite() -> dict[str, SymmetricDistribution]:
    """One representative of every built-in family, for cross-cutting checks."""
    return {
        "uniform": Uniform(1.0),
        "laplace": Laplace(1.0),
        "powerfold": PowerFold(2.0),
        "interval_union": IntervalUnionUniform(1.0, 2.0),
        "tabulated": TabulatedCdf([[0.0, 0.5], [0.2, 0.58], [0.5, 0.75], [0.8, 0.9], [1.2, 1.0]]),
    }

"""The three-step full-information solution.

After the first step lands at x, the best expected rank achievable by
taking at least one more step is a continuation curve with closed
dF-integral expressions, one branch for x > 0 and one for x < 0.  The
positive branch decreases from 9/4 (at 0+) to 15/8 (far out), so it
crosses the stop payoff 2 at a threshold x1*; the optimal rule stops at
time 1 exactly on (0, x1*].  Integrating the stage-1 value over the first
step gives the optimal expected rank V.

All dF-integrals are evaluated in u-space through the substitution
u = F(y), so unbounded supports never appear explicitly and the error
control is uniform across distributions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .distributions import SymmetricDistribution
from .numerics import (
    BracketError,
    QuadratureConfig,
    RootConfig,
    find_root,
    integrate_detailed,
)
from .walkcore import FULL_INFORMATION, StoppingPolicy

__all__ = [
    "V_LOWER_BOUND",
    "V_UPPER_BOUND",
    "THRESHOLD_QUANTILE_BOUND",
    "FullInfoSolution",
    "ThresholdError",
    "stage2_value",
    "continuation_value_pos",
    "continuation_value_neg",
    "continuation_value",
    "solve_threshold",
    "solve_full_info",
    "stage2_stop_region",
    "full_info_policy",
    "lower_bound_check",
]

#: Universal bounds on the optimal three-step expected rank.
V_LOWER_BOUND = (109.0 - math.sqrt(2.0)) / 48.0
V_UPPER_BOUND = 55.0 / 24.0
#: F(x1*) always sits at least this high.
THRESHOLD_QUANTILE_BOUND = 0.5 + math.sqrt(2.0) / 4.0

# u-space integrals are clipped to [EPS_U, 1 - EPS_U]; the integrands are
# bounded by constants, so the truncation error is below every tolerance
# used in this package.
_EPS_U = 1e-13

# Inner (continuation-curve) quadratures sit two decades below the outer
# tolerance so the outer refinement never chases the inner noise floor.
_INNER_CFG = QuadratureConfig(abs_tol=1e-12, rel_tol=1e-12)
_OUTER_CFG = QuadratureConfig(abs_tol=1e-10, rel_tol=1e-10)
_BOUND_TOL = 1e-9


class ThresholdError(RuntimeError):
    """The continuation curve never comes down to the stop payoff."""


@dataclass(frozen=True)
class FullInfoSolution:
    """Solved three-step full-information problem for one distribution."""

    x1_star: float
    value: float
    F_at_threshold: float
    diagnostics: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.x1_star > 0:
            raise ValueError(f"threshold must be positive, got {self.x1_star}")
        if self.F_at_threshold < THRESHOLD_QUANTILE_BOUND - _BOUND_TOL:
            raise ValueError(
                f"F(x1*) = {self.F_at_threshold} below the universal bound {THRESHOLD_QUANTILE_BOUND}"
            )
        if not (V_LOWER_BOUND - _BOUND_TOL <= self.value <= V_UPPER_BOUND + _BOUND_TOL):
            raise ValueError(
                f"value {self.value} outside [{V_LOWER_BOUND}, {V_UPPER_BOUND}]"
            )


def _df_integral(dist, x_shift, u_lo, u_hi, cfg):
    """(value, bound) of the dF-integral of F(y - x_shift) over a u-interval.

    The integrand u -> F(Q(u) - x) kinks where Q(u) - x crosses a CDF knot
    and where Q itself kinks; both sets are handed to the integrator as
    panel edges.
    """
    lo = max(float(u_lo), _EPS_U)
    hi = min(float(u_hi), 1.0 - _EPS_U)
    if hi <= lo:
        return 0.0, 0.0
    knots = dist.cdf_break_points()
    cuts = dist.cdf(np.concatenate([knots + x_shift, knots])) if len(knots) else None
    val, err, _ = integrate_detailed(
        lambda u: dist.cdf(dist.ppf(u) - x_shift), lo, hi, cfg, break_points=cuts
    )
    return val, err


def stage2_value(dist: SymmetricDistribution, x1: float, x2: float) -> float:
    """Best expected rank after observing the first two steps.

    The stop payoff is the relative rank of S_2 plus 1/2 for the remaining
    step; the continuation payoff is 3.5 - F(x2) - F(x1 + x2).
    """
    s1, s2 = x1, x1 + x2
    r2 = 1 + (s2 <= 0.0) + (s2 <= s1)
    stop = r2 + 0.5
    cont = 3.5 - float(dist.cdf(x2)) - float(dist.cdf(x1 + x2))
    return min(stop, cont)


def _continue_pos(dist, x, cfg):
    fx = float(dist.cdf(x))
    fh = float(dist.cdf(0.5 * x))
    i1, e1 = _df_integral(dist, x, 0.5, fh, cfg)
    i2, e2 = _df_integral(dist, x, fx, 1.0, cfg)
    value = 15.0 / 8.0 + i1 + i2 + fx - fh - 0.5 * (fx * fx - fh * fh)
    return value, e1 + e2


def _continue_neg(dist, x, cfg):
    fx = float(dist.cdf(x))
    fh = float(dist.cdf(0.5 * x))
    j1, e1 = _df_integral(dist, x, fx, fh, cfg)
    j2, e2 = _df_integral(dist, x, 0.5, 1.0, cfg)
    value = 19.0 / 8.0 + j1 + j2 - fh + 0.5 * (fh * fh - fx * fx)
    return value, e1 + e2


def continuation_value_pos(dist: SymmetricDistribution, x: float,
                           cfg: QuadratureConfig | None = None) -> float:
    """Expected rank from continuing past a first step x > 0, played optimally."""
    x = float(x)
    if x <= 0:
        raise ValueError(f"positive-branch continuation needs x > 0, got {x}")
    return _continue_pos(dist, x, cfg or _INNER_CFG)[0]


def continuation_value_neg(dist: SymmetricDistribution, x: float,
                           cfg: QuadratureConfig | None = None) -> float:
    """Expected rank from continuing past a first step x < 0 (forced: running minimum)."""
    x = float(x)
    if x >= 0:
        raise ValueError(f"negative-branch continuation needs x < 0, got {x}")
    return _continue_neg(dist, x, cfg or _INNER_CFG)[0]


def continuation_value(dist: SymmetricDistribution, x: float,
                       cfg: QuadratureConfig | None = None) -> float:
    """Continuation curve on either side; both one-sided limits at 0 equal 9/4."""
    x = float(x)
    if x == 0.0:
        return 2.25
    if x > 0:
        return continuation_value_pos(dist, x, cfg)
    return continuation_value_neg(dist, x, cfg)


def solve_threshold(dist: SymmetricDistribution,
                    quad_cfg: QuadratureConfig | None = None,
                    root_cfg: RootConfig | None = None) -> float:
    """The positive first-step threshold where continuing stops paying.

    Scans the continuation curve minus 2 for its last sign change on a
    geometric grid over (0, quantile(1 - 1e-12)] and refines by bracketed
    root search; the curve is nonincreasing, but if it is flat at level 2
    this picks the largest crossing, which maximizes the stop region and
    keeps the result reproducible.  For distributions whose curve stays
    above 2 inside the support and only reaches 2 at the edge (no mass
    near the origin), the scan finds no sign change and the support edge
    itself satisfies the residual tolerance.
    """
    quad_cfg = quad_cfg or _INNER_CFG
    root_cfg = root_cfg or RootConfig(x_tol=1e-13, f_tol=1e-10)
    hi = dist.quantile(1.0 - 1e-12)
    if hi <= 0:
        raise ThresholdError("distribution has no usable positive support")

    def g(x):
        return _continue_pos(dist, x, quad_cfg)[0] - 2.0

    grid = hi * np.geomspace(1e-8, 1.0, 96)
    values = np.array([g(x) for x in grid])
    sign_changes = np.nonzero((values[:-1] > 0) & (values[1:] <= 0))[0]
    if len(sign_changes) == 0:
        if values[-1] > 0:
            if abs(values[-1]) <= _BOUND_TOL:
                return float(grid[-1])  # curve meets 2 only at the support edge
            raise ThresholdError(
                f"continuation curve stays above 2 on (0, {hi}]: residual {values[-1]}"
            )
        # Above 2 never observed: the crossing sits below the scan grid.
        lo_bracket, hi_bracket = grid[0] * 1e-8, grid[0]
    else:
        i = sign_changes[-1]
        lo_bracket, hi_bracket = grid[i], grid[i + 1]
    try:
        return find_root(g, lo_bracket, hi_bracket, root_cfg)
    except BracketError as exc:  # pragma: no cover - noise at the 1e-10 level
        raise ThresholdError(f"could not bracket the threshold: {exc}") from exc


def solve_full_info(dist: SymmetricDistribution,
                    quad_cfg: QuadratureConfig | None = None) -> FullInfoSolution:
    """Threshold, optimal expected rank, and diagnostics for one distribution.

    V splits exactly at 0 and at the threshold: the first-step integral of
    the continuation curve over the negative half, the flat stop payoff 2
    on (0, x1*], and the continuation curve again beyond x1*.
    """
    inner_cfg = quad_cfg or _INNER_CFG
    x1s = solve_threshold(dist, inner_cfg)
    f_at = float(dist.cdf(x1s))
    residual = _continue_pos(dist, x1s, inner_cfg)[0] - 2.0

    def curve_of_u_neg(us):
        xs = dist.ppf(np.asarray(us, dtype=float))
        return np.array([_continue_neg(dist, x, inner_cfg)[0] for x in xs])

    def curve_of_u_pos(us):
        xs = dist.ppf(np.asarray(us, dtype=float))
        return np.array([_continue_pos(dist, x, inner_cfg)[0] for x in xs])

    # The continuation curve changes analytic form whenever the first step
    # or its half crosses a CDF knot.
    knots = dist.cdf_break_points()
    cuts = dist.cdf(np.concatenate([knots, 2.0 * knots])) if len(knots) else None
    neg_val, neg_err, _ = integrate_detailed(curve_of_u_neg, _EPS_U, 0.5, _OUTER_CFG,
                                             break_points=cuts)
    hi_u = 1.0 - _EPS_U
    if f_at < hi_u:
        pos_val, pos_err, _ = integrate_detailed(curve_of_u_pos, f_at, hi_u, _OUTER_CFG,
                                                 break_points=cuts)
    else:
        pos_val, pos_err = 0.0, 0.0
    value = neg_val + 2.0 * (f_at - 0.5) + pos_val
    return FullInfoSolution(
        x1_star=x1s,
        value=value,
        F_at_threshold=f_at,
        diagnostics={
            "threshold_residual": residual,
            "quadrature_error_bound": neg_err + pos_err,
            "scan_upper": dist.quantile(1.0 - 1e-12),
        },
    )


def stage2_stop_region(x1, x2):
    """Stop/continue classification after two observed steps; vectorized.

    Distribution-free: stop when S_2 is a prefix maximum, or when it has
    middle rank and sits weakly below the halfway fallback point -X1/2
    (ties stop).  Continue at a prefix minimum or when the middle-rank
    position is above -X1/2.
    """
    x1 = np.asarray(x1, dtype=float)
    x2 = np.asarray(x2, dtype=float)
    pos = (x1 > 0.0) & ((x2 > 0.0) | ((x2 > -x1) & (x2 <= -0.5 * x1)))
    neg = (x1 <= 0.0) & ((x2 > -x1) | ((x2 > 0.0) & (x2 <= -0.5 * x1)))
    return pos | neg


def full_info_policy(dist: SymmetricDistribution, x1_star: float | None = None) -> StoppingPolicy:
    """The optimal three-step rule under full information.

    Stop at 1 on 0 < X1 <= x1*; at time 2 stop on the stage-2 stop region
    (the region rule is used unrestricted: on the band 0 < X1 <= x1* play
    has already stopped, so its value there never matters); stop at 3.
    """
    x1s = float(x1_star) if x1_star is not None else solve_threshold(dist)

    def rule(k, observed):
        n = observed.shape[0]
        if k == 0:
            return np.zeros(n, dtype=bool)
        if k == 1:
            x1 = observed[:, 0]
            return (x1 > 0.0) & (x1 <= x1s)
        if k == 2:
            return stage2_stop_region(observed[:, 0], observed[:, 1])
        return np.ones(n, dtype=bool)

    return StoppingPolicy(FULL_INFORMATION, 3, "full_info_optimal", rule)


@dataclass(frozen=True)
class LowerBoundReport:
    """Pointwise check of the closed-form floor under the continuation curve."""

    max_violation: float
    worst_x: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return self.max_violation <= self.tolerance


def lower_bound_check(dist: SymmetricDistribution, n_points: int = 100,
                      tolerance: float = 1e-8) -> LowerBoundReport:
    """Verify the continuation curve dominates its closed-form lower estimates.

    For x > 0 the floor is 15/8 + F(x)(1 - F(x)); for x < 0 it is
    23/8 - F(x) - F(x/2)/2 + F(x/2)^2/2.  Both sides are evaluated
    independently on a grid; the report carries the worst signed gap.
    """
    hi = dist.quantile(1.0 - 1e-9)
    xs = hi * np.geomspace(1e-4, 1.0, n_points)
    worst, worst_x = -math.inf, 0.0
    for x in xs:
        fx = float(dist.cdf(x))
        floor = 15.0 / 8.0 + fx * (1.0 - fx)
        gap = floor - _continue_pos(dist, x, _INNER_CFG)[0]
        if gap > worst:
            worst, worst_x = gap, x
    for x in -xs:
        fx = float(dist.cdf(x))
        fh = float(dist.cdf(0.5 * x))
        floor = 23.0 / 8.0 - fx - 0.5 * fh + 0.5 * fh * fh
        gap = floor - _continue_neg(dist, x, _INNER_CFG)[0]
        if gap > worst:
            worst, worst_x = gap, x
    return LowerBoundReport(max_violation=worst, worst_x=worst_x, tolerance=tolerance)

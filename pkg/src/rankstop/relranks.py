"""The three-step solution when only relative ranks are observed.

Everything here reduces to two numbers p and q: the probabilities that the
walk makes three ascending positive records with the third step below,
respectively above, the sum of the first two.  Symmetry forces
p + q = 1/48, and q has a two-dimensional folded-CDF integral

    q = (1/16) * integral over (0,1)^2 of {1 - G(Ginv(u) + Ginv(v))} du dv,

so p is computed as 1/48 - q.  The probabilities of all 24 strict
orderings of S_0..S_3 are affine in (p, q); the table drives both the
optimal rank rule and the exact policy-enumeration oracle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .distributions import SymmetricDistribution
from .numerics import QuadratureConfig, integrate_detailed
from .walkcore import RELATIVE_RANKS, StoppingPolicy

__all__ = [
    "PQ_SUM",
    "PQParams",
    "TableRow",
    "PermutationTable",
    "ALL_ORDERINGS",
    "ordering_string",
    "compute_pq",
    "shift_concentration_check",
    "ConcentrationReport",
    "permutation_table",
    "optimal_rank_policy",
    "rank_policy_a",
    "rank_policy_b",
    "optimal_rank_value",
    "two_step_case_values",
    "CaseValueReport",
]

#: p + q for every continuous symmetric step distribution.
PQ_SUM = Fraction(1, 48)

_PQ_TOL = 1e-9
_EPS_U = 1e-13


@dataclass(frozen=True)
class PQParams:
    """The pair (p, q) for one distribution, with provenance and error bound."""

    p: float
    q: float
    method: str = "quadrature"
    error_bound: float = 0.0

    def __post_init__(self):
        q = self.q
        if -1e-12 <= q < 0.0:  # quadrature of a vanishing integrand
            q = 0.0
            object.__setattr__(self, "q", q)
        if not self.p > 0:
            raise ValueError(f"p must be strictly positive, got {self.p}")
        if q < 0:
            raise ValueError(f"q must be nonnegative, got {q}")
        slack = max(self.error_bound, _PQ_TOL)
        if abs(self.p + q - float(PQ_SUM)) > slack:
            raise ValueError(f"p + q = {self.p + q} is not 1/48 within {slack}")


def compute_pq(dist: SymmetricDistribution,
               cfg: QuadratureConfig | None = None) -> PQParams:
    """Evaluate q by iterated folded-CDF quadrature and set p = 1/48 - q.

    When the support is bounded the inner integral is cut at the u where
    the folded sum leaves the support (the integrand is identically zero
    beyond), which keeps the quadrature from chasing a hard kink.
    """
    # The outer tolerance must sit well above the inner quadrature's noise
    # floor or the outer refinement chases deterministic noise.
    inner_cfg = cfg or QuadratureConfig(abs_tol=1e-13, rel_tol=1e-13)
    outer_cfg = cfg or QuadratureConfig(abs_tol=1e-11, rel_tol=1e-11)
    upper = dist.support[1]

    inner_errs = []

    fold_knots = np.abs(dist.cdf_break_points())
    fold_knots = np.unique(fold_knots[fold_knots > 0])

    def inner(v: float) -> float:
        y = float(dist.folded_ppf(v))
        if math.isfinite(upper):
            u_edge = float(dist.folded_cdf(max(upper - y, 0.0)))
            u_hi = min(u_edge, 1.0 - _EPS_U)
        else:
            u_hi = 1.0 - _EPS_U
        if u_hi <= _EPS_U:
            return 0.0

        def h(us):
            x = dist.folded_ppf(np.asarray(us, dtype=float))
            arg = np.minimum(x + y, upper) if math.isfinite(upper) else x + y
            return 1.0 - dist.folded_cdf(arg)

        # Kinks: the folded sum crossing a knot, and the folded quantile's own.
        if len(fold_knots):
            cuts = np.concatenate([
                dist.folded_cdf(np.maximum(fold_knots - y, 0.0)),
                dist.folded_cdf(fold_knots),
            ])
        else:
            cuts = None
        val, err, _ = integrate_detailed(h, _EPS_U, u_hi, inner_cfg, break_points=cuts)
        inner_errs.append(err)
        return val

    def outer(vs):
        return np.array([inner(v) for v in np.asarray(vs, dtype=float)])

    outer_cuts = dist.folded_cdf(fold_knots) if len(fold_knots) else None
    total, outer_err, _ = integrate_detailed(outer, _EPS_U, 1.0 - _EPS_U, outer_cfg,
                                             break_points=outer_cuts)
    q = total / 16.0
    err = (outer_err + (max(inner_errs) if inner_errs else 0.0)) / 16.0 + 1e-14
    p = float(PQ_SUM) - q
    return PQParams(p=p, q=q, method="quadrature", error_bound=err)


@dataclass(frozen=True)
class ConcentrationReport:
    """Grid check of F(x) - F(0) >= F(x + y) - F(y) for x, y > 0."""

    member: bool
    max_violation: float
    worst_pair: tuple[float, float]
    n_checked: int


def shift_concentration_check(dist: SymmetricDistribution, xs=None, ys=None,
                              tol: float = 1e-12) -> ConcentrationReport:
    """Check that an interval at the origin always carries at least as much
    mass as an equal-length interval shifted away from it.

    This is the defining property of the class of distributions (all
    symmetric unimodal ones included) for which p <= 1/96 is guaranteed.
    A grid check can only ever exhibit violations, not prove membership.
    """
    hi = dist.quantile(1.0 - 1e-9)
    if xs is None:
        xs = hi * np.geomspace(1e-4, 1.0, 100)
    if ys is None:
        ys = hi * np.geomspace(1e-4, 1.0, 100)
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    if np.any(xs <= 0) or np.any(ys <= 0):
        raise ValueError("grid points must be strictly positive")
    f0 = float(dist.cdf(0.0))
    lhs = dist.cdf(xs)[:, None] - f0
    rhs = dist.cdf(xs[:, None] + ys[None, :]) - dist.cdf(ys)[None, :]
    gaps = rhs - lhs
    i, j = np.unravel_index(np.argmax(gaps), gaps.shape)
    worst = float(gaps[i, j])
    return ConcentrationReport(
        member=worst <= tol,
        max_violation=worst,
        worst_pair=(float(xs[i]), float(ys[j])),
        n_checked=gaps.size,
    )


# ---------------------------------------------------------------------------
# The 24-ordering probability table.
#
# Orderings are descending chains of position indices: (2, 0, 3, 1) means
# S2 > S0 > S3 > S1 (index 0 is the origin S0 = 0).  Each row pairs an
# ordering having S1 < 0 with its sign flip, which has the same
# probability.  Probabilities are affine in (p, q) with p + q = 1/48.
# ---------------------------------------------------------------------------

_ROW_SPEC = [
    # (negative chain, Fraction const, p coeff, q coeff)
    ((0, 1, 2, 3), Fraction(1, 8), 0, 0),
    ((0, 1, 3, 2), Fraction(1, 16), 0, 0),
    ((0, 2, 1, 3), Fraction(1, 24), 0, 0),
    ((0, 2, 3, 1), Fraction(1, 48), 0, 0),
    ((0, 3, 1, 2), Fraction(1, 48), 2, 0),
    ((0, 3, 2, 1), Fraction(0), 0, 2),
    ((2, 0, 1, 3), Fraction(1, 48), 0, 0),
    ((2, 0, 3, 1), Fraction(0), 2, 0),
    ((2, 3, 0, 1), Fraction(0), 0, 2),
    ((3, 0, 1, 2), Fraction(0), 0, 2),
    ((3, 0, 2, 1), Fraction(1, 48), 2, 0),
    ((3, 2, 0, 1), Fraction(1, 16), 0, 0),
]


def _reflect(chain: tuple[int, ...]) -> tuple[int, ...]:
    """Sign flip of the walk reverses the chain."""
    return tuple(reversed(chain))


def ordering_string(chain: tuple[int, ...], ascending: bool = False) -> str:
    """Render a descending chain, optionally in ascending (mirrored) form."""
    names = ["0" if i == 0 else f"S{i}" for i in chain]
    if ascending:
        return "<".join(reversed(names))
    return ">".join(names)


@dataclass(frozen=True)
class TableRow:
    negative: tuple[int, ...]   # chain with S1 < 0
    positive: tuple[int, ...]   # its reflection, with S1 > 0
    const: Fraction
    p_coeff: int
    q_coeff: int

    def probability(self, p, q):
        """Row probability at (p, q); exact for Fraction inputs."""
        return self.const + self.p_coeff * p + self.q_coeff * q


#: Canonical order of all 24 chains: table rows top to bottom, negative
#: column first, then the mirrored column.
ALL_ORDERINGS: list[tuple[int, ...]] = [row for row, *_ in _ROW_SPEC] + [
    _reflect(row) for row, *_ in _ROW_SPEC
]


@dataclass(frozen=True)
class PermutationTable:
    """All 24 strict orderings of S_0..S_3 with their probabilities."""

    p: float | Fraction
    q: float | Fraction
    rows: tuple[TableRow, ...]

    def probability(self, chain: tuple[int, ...]):
        chain = tuple(chain)
        for row in self.rows:
            if chain in (row.negative, row.positive):
                return row.probability(self.p, self.q)
        raise KeyError(f"not an ordering of four positions: {chain}")

    def probabilities(self):
        """Probabilities of ALL_ORDERINGS, in canonical order."""
        one_column = [row.probability(self.p, self.q) for row in self.rows]
        return one_column + one_column

    def total(self):
        return sum(self.probabilities())

    def as_records(self) -> list[dict]:
        out = []
        for row in self.rows:
            out.append({
                "ordering": ordering_string(row.negative),
                "reflection": ordering_string(row.positive, ascending=True),
                "constant": str(row.const),
                "p_coefficient": row.p_coeff,
                "q_coefficient": row.q_coeff,
                "probability": float(row.probability(self.p, self.q)),
            })
        return out


def permutation_table(p, q) -> PermutationTable:
    """Instantiate the 24-row ordering table at a given (p, q)."""
    if float(p) < 0 or float(q) < 0:
        raise ValueError(f"p and q must be nonnegative, got p={p}, q={q}")
    if abs(float(p) + float(q) - float(PQ_SUM)) > _PQ_TOL:
        raise ValueError(f"p + q must equal 1/48, got {float(p) + float(q)}")
    rows = tuple(TableRow(neg, _reflect(neg), c, cp, cq) for neg, c, cp, cq in _ROW_SPEC)
    return PermutationTable(p=p, q=q, rows=rows)


# ---------------------------------------------------------------------------
# Optimal rank rules and values.
# ---------------------------------------------------------------------------


def rank_policy_a() -> StoppingPolicy:
    """Stop at 1 on a new maximum; else stop at 2 unless S_2 is a new minimum."""

    def rule(k, observed):
        n = observed.shape[0]
        if k == 0:
            return np.zeros(n, dtype=bool)
        if k == 1:
            return observed[:, 1] == 1
        if k == 2:
            return (observed[:, 1] == 2) & (observed[:, 2] <= 2)
        return np.ones(n, dtype=bool)

    return StoppingPolicy(RELATIVE_RANKS, 3, "rank_rule_a", rule)


def rank_policy_b() -> StoppingPolicy:
    """Stop at 1 on a new maximum; else stop at 2 only on a new maximum."""

    def rule(k, observed):
        n = observed.shape[0]
        if k == 0:
            return np.zeros(n, dtype=bool)
        if k == 1:
            return observed[:, 1] == 1
        if k == 2:
            return (observed[:, 1] == 2) & (observed[:, 2] == 1)
        return np.ones(n, dtype=bool)

    return StoppingPolicy(RELATIVE_RANKS, 3, "rank_rule_b", rule)


def optimal_rank_policy(pq) -> tuple[StoppingPolicy, str]:
    """The optimal rank rule for given (p, q) and its branch tag 'a' or 'b'.

    Branch a applies when p <= q, branch b when p > q; at p = q the two
    rules achieve the same value and branch a is returned for determinism.
    """
    p, q = _pq_pair(pq)
    if p <= q:
        return rank_policy_a(), "a"
    return rank_policy_b(), "b"


def _pq_pair(pq):
    if isinstance(pq, PQParams):
        return pq.p, pq.q
    p, q = pq
    return p, q


def optimal_rank_value(p):
    """Optimal expected rank min(55/24, 109/48 + 2p).

    Accepts a PQParams, a float, or a Fraction; Fraction input yields an
    exact Fraction, which is what the enumeration oracle compares against.
    The p -> 0 limit (109/48) is evaluable even though no continuous
    distribution attains it.
    """
    if isinstance(p, PQParams):
        p = p.p
    if isinstance(p, Fraction):
        return min(Fraction(55, 24), Fraction(109, 48) + 2 * p)
    p = float(p)
    if p < 0:
        raise ValueError(f"p must be nonnegative, got {p}")
    return min(55.0 / 24.0, 109.0 / 48.0 + 2.0 * p)


@dataclass(frozen=True)
class CaseValueReport:
    """Stop/continue payoffs for the six two-step configurations.

    Values are affine in (p, q) and derived from the ordering table; the
    stage aggregates recombine them into the one-step values and the
    overall optimum, which must match the closed-form rank value.
    """

    case1_stop: object            # S2 > S1 > 0: stop
    case2_stop: object
    case2_continue: object        # S1 > S2 > 0
    case3_continue: object        # S1 > 0 > S2: forced continue
    case4_stop: object            # S2 > 0 > S1: stop
    case5_stop: object
    case5_continue: object        # 0 > S2 > S1
    case6_continue: object        # 0 > S1 > S2: forced continue
    s1_positive_continue: object  # value of continuing past a positive first step
    s1_negative_value: object     # value after a negative first step (forced continue)
    overall: object


def two_step_case_values(p, q) -> CaseValueReport:
    """Evaluate every two-step case payoff at (p, q); exact for Fractions."""
    if abs(float(p) + float(q) - float(PQ_SUM)) > _PQ_TOL:
        raise ValueError(f"p + q must equal 1/48, got {float(p) + float(q)}")
    half = Fraction(1, 2) if isinstance(p, Fraction) else 0.5
    one = 1 if isinstance(p, Fraction) else 1.0

    def frac(a, b):
        return Fraction(a, b) if isinstance(p, Fraction) else a / b

    stop_mid = frac(5, 2)
    case2_cont = frac(7, 3) + 16 * p
    case3_cont = frac(17, 6) + 16 * q
    case5_cont = frac(7, 3) + 16 * q
    case6_cont = frac(37, 12) + 8 * p

    v2_case2 = min(stop_mid, case2_cont)
    v2_case5 = min(stop_mid, case5_cont)
    s1_pos = half * frac(3, 2) + frac(1, 4) * v2_case2 + frac(1, 4) * case3_cont
    s1_neg = frac(1, 4) * frac(3, 2) + frac(1, 4) * v2_case5 + half * case6_cont
    overall = half * min(2 * one, s1_pos) + half * s1_neg
    return CaseValueReport(
        case1_stop=frac(3, 2),
        case2_stop=stop_mid,
        case2_continue=case2_cont,
        case3_continue=case3_cont,
        case4_stop=frac(3, 2),
        case5_stop=stop_mid,
        case5_continue=case5_cont,
        case6_continue=case6_cont,
        s1_positive_continue=s1_pos,
        s1_negative_value=s1_neg,
        overall=overall,
    )

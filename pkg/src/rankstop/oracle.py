"""Independent brute-force verifiers.

Two oracles certify the closed-form solutions without sharing code paths
with them:

* Exhaustive enumeration of every rank-adapted stopping rule (512 rules
  for three steps, 8 for two), with expected ranks kept exact as rationals
  in the ordering-table parameters.

* A dynamic program on the walk with steps discretized into equiprobable
  quantile atoms, which approximates the full-information value and the
  stop regions from nothing but backward induction.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import product

import numpy as np

from .distributions import SymmetricDistribution
from .relranks import ALL_ORDERINGS, PQ_SUM, permutation_table
from .walkcore import RELATIVE_RANKS, StoppingPolicy

__all__ = [
    "RankPolicyTable",
    "EnumerationResult",
    "enumerate_rank_policies",
    "canonical_rules",
    "GridDPResult",
    "grid_dp_full_info",
    "stage2_disagreement",
    "stage2_disagreement_csv",
]

# Strict orderings of (0, S1, S2) as descending index chains, with their
# probabilities.  Sign of X1, sign of X2 and the comparison |X2| vs |X1|
# are independent fair coins, which pins every chain: e.g.
# P(S1 > S2 > 0) = P(X1 > 0) P(X2 < 0) P(|X2| < |X1|) = 1/8, while
# S2 > S1 > 0 needs only two coins (X1 > 0, X2 > 0) = 1/4.
_TWO_STEP_ORDERINGS = [
    ((2, 1, 0), Fraction(1, 4)),
    ((1, 2, 0), Fraction(1, 8)),
    ((1, 0, 2), Fraction(1, 8)),
    ((0, 1, 2), Fraction(1, 4)),
    ((0, 2, 1), Fraction(1, 8)),
    ((2, 0, 1), Fraction(1, 8)),
]

#: Decision-slot order for the three-step bit tables: stop-at-start, the
#: two first-step rank histories, then the six (first, second) rank pairs.
SECOND_STEP_HISTORIES = [(1, 1), (1, 2), (1, 3), (2, 1), (2, 2), (2, 3)]


@dataclass(frozen=True)
class RankPolicyTable:
    """A total rank-adapted rule for the three-step walk as nine stop bits."""

    bits: tuple[int, ...]

    def __post_init__(self):
        if len(self.bits) != 9 or any(b not in (0, 1) for b in self.bits):
            raise ValueError("a three-step rank policy needs nine 0/1 decision bits")
        object.__setattr__(self, "bits", tuple(int(b) for b in self.bits))

    @property
    def stop_at_start(self) -> bool:
        return bool(self.bits[0])

    def stop_first(self, r1: int) -> bool:
        return bool(self.bits[r1])

    def stop_second(self, r1: int, r2: int) -> bool:
        return bool(self.bits[3 + SECOND_STEP_HISTORIES.index((r1, r2))])

    def stopping_time(self, rel_ranks: tuple[int, ...]) -> int:
        """First stop index on a relative-rank history (forced stop at 3)."""
        if self.stop_at_start:
            return 0
        if self.stop_first(rel_ranks[1]):
            return 1
        if self.stop_second(rel_ranks[1], rel_ranks[2]):
            return 2
        return 3

    def to_policy(self) -> StoppingPolicy:
        bits = self.bits

        def rule(k, observed):
            n = observed.shape[0]
            if k == 0:
                return np.full(n, bool(bits[0]))
            if k == 1:
                r1 = observed[:, 1].astype(int)
                return np.array(bits)[r1].astype(bool)
            if k == 2:
                r1 = observed[:, 1].astype(int)
                r2 = observed[:, 2].astype(int)
                slot = 3 + 3 * (r1 - 1) + (r2 - 1)
                return np.array(bits)[slot].astype(bool)
            return np.ones(n, dtype=bool)

        return StoppingPolicy(RELATIVE_RANKS, 3, f"rank_table_{''.join(map(str, bits))}", rule)

    def describe(self) -> str:
        if self.stop_at_start:
            return "stop immediately"
        first = [r for r in (1, 2) if self.stop_first(r)]
        second = [h for h in SECOND_STEP_HISTORIES if not self.stop_first(h[0]) and self.stop_second(*h)]
        parts = []
        parts.append(f"stop at 1 if rank in {first}" if first else "never stop at 1")
        parts.append(f"stop at 2 if history in {second}" if second else "never stop at 2")
        return "; ".join(parts)


def _ranks_of_chain(chain: tuple[int, ...]):
    """Overall and relative rank sequences implied by a descending chain."""
    n = len(chain) - 1
    position = {idx: slot for slot, idx in enumerate(chain)}
    overall = tuple(position[k] + 1 for k in range(n + 1))
    relative = tuple(
        1 + sum(1 for i in range(k) if position[i] < position[k]) for k in range(n + 1)
    )
    return overall, relative


@dataclass(frozen=True)
class EnumerationResult:
    optimal_value: Fraction
    minimizers: tuple[tuple[int, ...], ...]
    policy_count: int
    values: dict
    n: int
    p: Fraction | None = None
    q: Fraction | None = None

    def is_minimizer(self, bits) -> bool:
        """Whether a bit table is behaviorally one of the minimizers.

        Policies are compared by the stopping times they realize on every
        ordering, so unreachable decision bits do not matter.
        """
        target = self._behavior(tuple(int(b) for b in bits))
        return any(self._behavior(m) == target for m in self.minimizers)

    def _behavior(self, bits):
        orderings = ALL_ORDERINGS if self.n == 3 else [c for c, _ in _TWO_STEP_ORDERINGS]
        taus = []
        for chain in orderings:
            _, rel = _ranks_of_chain(chain)
            taus.append(_stop_time(bits, rel, self.n))
        return tuple(taus)


def _stop_time(bits, rel_ranks, n):
    if n == 3:
        return RankPolicyTable(bits).stopping_time(rel_ranks)
    if bits[0]:
        return 0
    if bits[rel_ranks[1]]:
        return 1
    return 2


def enumerate_rank_policies(p=None, q=None, n: int = 3) -> EnumerationResult:
    """Exact expected rank of every total rank-adapted rule; returns the optimum.

    For n = 3 the expectation of each rule is affine in (p, q) through the
    ordering table, so with Fraction inputs the minimum and the set of
    minimizers are exact.  For n = 2 the ordering probabilities are
    distribution-free and no parameters are needed.
    """
    if n == 2:
        orderings = _TWO_STEP_ORDERINGS
        n_bits = 3
        p = q = None
    elif n == 3:
        if p is None:
            raise ValueError("three-step enumeration needs p (and optionally q)")
        p = p if isinstance(p, Fraction) else Fraction(p).limit_denominator(10**12)
        q = PQ_SUM - p if q is None else (q if isinstance(q, Fraction) else Fraction(q).limit_denominator(10**12))
        if p + q != PQ_SUM:
            raise ValueError(f"p + q must be exactly 1/48, got {p} + {q}")
        if p < 0 or q < 0:
            raise ValueError("p and q must be nonnegative")
        table = permutation_table(p, q)
        orderings = list(zip(ALL_ORDERINGS, table.probabilities()))
        n_bits = 9
    else:
        raise ValueError("enumeration supports horizons 2 and 3 only")

    prepared = []
    for chain, prob in orderings:
        overall, relative = _ranks_of_chain(chain)
        prepared.append((prob, overall, relative))

    values = {}
    for bits in product((0, 1), repeat=n_bits):
        total = Fraction(0)
        for prob, overall, relative in prepared:
            total += prob * overall[_stop_time(bits, relative, n)]
        values[bits] = total
    best = min(values.values())
    minimizers = tuple(sorted(bits for bits, v in values.items() if v == best))
    return EnumerationResult(
        optimal_value=best,
        minimizers=minimizers,
        policy_count=len(values),
        values=values,
        n=n,
        p=p,
        q=q,
    )


def canonical_rules(n: int = 3) -> dict[str, tuple[int, ...]]:
    """Reference bit tables for the named rules."""
    if n == 2:
        return {
            "two_step_rule": (0, 1, 0),   # stop at 1 on a new maximum
            "stop_at_start": (1, 0, 0),
            "stop_at_end": (0, 0, 0),
        }
    return {
        # stop at 1 on a new maximum; at 2 unless at a new minimum
        "rank_rule_a": (0, 1, 0, 0, 0, 0, 1, 1, 0),
        # stop at 1 on a new maximum; at 2 only on a new maximum
        "rank_rule_b": (0, 1, 0, 0, 0, 0, 1, 0, 0),
        "stop_at_start": (1,) + (0,) * 8,
        "stop_at_end": (0,) * 9,
    }


# ---------------------------------------------------------------------------
# Quantile-atom dynamic program for the full-information problem.
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GridDPResult:
    """Backward induction on the walk with steps atomized at midpoint quantiles."""

    value: float
    m: int
    horizon: int
    atoms: np.ndarray
    stop_first: np.ndarray          # (m,) stop decision after one step
    stop_second: np.ndarray | None  # (m, m) stop decision after two steps (horizon 3)
    stop_at_start: bool

    def __post_init__(self):
        if not 1.5 - 1e-9 <= self.value <= 2.5 + 1e-9:
            raise ValueError(f"DP value {self.value} escaped [1.5, 2.5]")


def grid_dp_full_info(dist: SymmetricDistribution, m: int = 2001,
                      horizon: int = 3, block: int = 256) -> GridDPResult:
    """Exact backward induction on the atomized walk.

    The step is discretized into m equiprobable atoms at the midpoint
    quantiles (j - 1/2)/m; odd m keeps the atom set sign-symmetric with 0
    represented.  Ties among atom sums, impossible in the continuous
    model, are broken lexicographically by step indices, which makes the
    later position win every tie: comparisons use strict inequality for
    "earlier above later" and weak for the reverse.  The discretization
    error carries no analytic guarantee; tolerances for comparisons
    against exact values were chosen by an m-refinement study.
    """
    if m < 101 or m % 2 == 0:
        raise ValueError(f"atom count must be odd and at least 101, got {m}")
    if horizon not in (2, 3):
        raise ValueError("the DP supports horizons 2 and 3 only")
    u = (np.arange(m) + 0.5) / m
    atoms = np.asarray(dist.ppf(u), dtype=float)
    atoms = 0.5 * (atoms - atoms[::-1])  # exact sign symmetry, middle atom 0

    n_lt_zero = int(np.searchsorted(atoms, 0.0, side="left"))   # (m-1)/2
    p_step_up = (m - n_lt_zero) / m                             # P(X >= 0), ties up

    if horizon == 2:
        w1 = np.empty(m)
        for lo in range(0, m, block):
            s1 = atoms[lo : lo + block]
            cnt = np.searchsorted(atoms, -s1, side="left")
            # E[R2 | x1] = 1 + P(x2 < -s1) + P(x2 < 0)
            w1[lo : lo + block] = 1.0 + cnt / m + n_lt_zero / m
        stop1 = 1.0 + (atoms < 0.0) + p_step_up
        v1 = np.minimum(stop1, w1)
        d1 = stop1 <= w1
        w0 = float(v1.mean())
        # E[R0] = 1 + P(S1 above) + P(S2 above); P(x1 + x2 >= 0) = (m + 1) / (2 m)
        stop0 = 1.0 + p_step_up + (m + 1) / (2 * m)
        return GridDPResult(
            value=float(min(stop0, w0)), m=m, horizon=2, atoms=atoms,
            stop_first=d1, stop_second=None, stop_at_start=stop0 <= w0,
        )

    w1 = np.empty(m)
    d2 = np.empty((m, m), dtype=bool)
    p_s3_below_origin_acc = 0.0
    cnt_neg_step = np.searchsorted(atoms, -atoms, side="left")  # P(x3 < -x2) counts
    for lo in range(0, m, block):
        s1 = atoms[lo : lo + block, None]
        s2 = s1 + atoms[None, :]
        cnt_origin = np.searchsorted(atoms, -s2, side="left")
        # W2 = 1 + P(S3 < 0) + P(S3 < S1) + P(S3 < S2), later wins ties
        w2 = 1.0 + (cnt_origin + cnt_neg_step[None, :] + n_lt_zero) / m
        r2 = 1.0 + (s2 < 0.0) + (atoms[None, :] < 0.0)
        stop2 = r2 + p_step_up
        v2 = np.minimum(stop2, w2)
        d2[lo : lo + block] = stop2 <= w2
        w1[lo : lo + block] = v2.mean(axis=1)
        p_s3_below_origin_acc += float(cnt_origin.sum())

    stop1 = 1.0 + (atoms < 0.0) + p_step_up + (m + 1) / (2 * m)
    v1 = np.minimum(stop1, w1)
    d1 = stop1 <= w1
    w0 = float(v1.mean())
    p_s3_up = 1.0 - p_s3_below_origin_acc / m**3
    stop0 = 1.0 + p_step_up + (m + 1) / (2 * m) + p_s3_up
    return GridDPResult(
        value=float(min(stop0, w0)), m=m, horizon=3, atoms=atoms,
        stop_first=d1, stop_second=d2, stop_at_start=stop0 <= w0,
    )


def _stage2_rule_blocks(dp: GridDPResult, policy: StoppingPolicy, block: int):
    for lo in range(0, dp.m, block):
        x1 = dp.atoms[lo : lo + block]
        n1 = len(x1)
        pairs = np.empty((n1 * dp.m, 2))
        pairs[:, 0] = np.repeat(x1, dp.m)
        pairs[:, 1] = np.tile(dp.atoms, n1)
        yield lo, policy.batch_rule(2, pairs).reshape(n1, dp.m)


def stage2_disagreement(dp: GridDPResult, policy: StoppingPolicy, block: int = 256) -> float:
    """Fraction of (x1, x2) atom cells where the DP stop decision at the
    second step differs from a full-information policy's."""
    if dp.stop_second is None:
        raise ValueError("two-step DP has no second-step decision grid")
    mismatched = 0
    for lo, rule in _stage2_rule_blocks(dp, policy, block):
        mismatched += int(np.count_nonzero(rule != dp.stop_second[lo : lo + rule.shape[0]]))
    return mismatched / dp.m**2


def stage2_disagreement_csv(dp: GridDPResult, policy: StoppingPolicy, block: int = 256) -> str:
    """CSV of the disagreeing (x1, x2) cells: the sparse disagreement map.

    Only mismatched cells are listed (a thin band along the decision
    boundaries when everything works), so the file stays small even for
    fine grids.
    """
    if dp.stop_second is None:
        raise ValueError("two-step DP has no second-step decision grid")
    lines = ["x1,x2,dp_stop,rule_stop"]
    for lo, rule in _stage2_rule_blocks(dp, policy, block):
        diff = rule != dp.stop_second[lo : lo + rule.shape[0]]
        rows, cols = np.nonzero(diff)
        for r, c in zip(rows.tolist(), cols.tolist()):
            dp_stop = bool(dp.stop_second[lo + r, c])
            lines.append(
                f"{dp.atoms[lo + r]!r},{dp.atoms[c]!r},{int(dp_stop)},{int(not dp_stop)}"
            )
    return "\n".join(lines) + "\n"

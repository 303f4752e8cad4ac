"""Sharp partial identification of principal-stratum probabilities.

Experimental data alone fix the two outcome margins

    m1 = P(Y=1 under a=1 | l) = P(S=1|l) + P(S=3|l)
    m0 = P(Y=1 under a=0 | l) = P(S=2|l) + P(S=3|l)

so the whole stratum distribution is a one-parameter family in
``p = P(S=1|l)``:

    (P(S=1), P(S=2), P(S=3), P(S=4)) = (p, p - (m1 - m0), m1 - p, 1 - m0 - p)

Non-negativity of the four coordinates yields the classical interval

    p in [max(0, m1 - m0), min(m1, 1 - m0)]

which collapses to a point whenever either margin is 0 or 1 (an outcome
predicted with certainty in one arm).

Adding the observational block tightens the lower endpoint.  The closed
form retained here is the four-term maximum

    max{ 0,  m1 - m0,  P(Y=1|l,R=0) - m0,  m1 - P(Y=1|l,R=0) }

Two further candidate terms built from the trial-block marginal
``P(Y=1|l,R=1)`` are provably redundant: that marginal is a convex
combination of the two arm means, so those differences never exceed
``max(0, m1 - m0)``.  Tests assert the redundancy rather than carrying the
terms.

Independently of the closed forms, :func:`sharp_bounds_lp` certifies
sharpness by brute force.  The identified set is the polytope of joint
cell probabilities ``q(s, a) = P(S=s, A*=a | l)`` over the 8 cells,
cut by the linear equalities the observed blocks impose; any linear
functional attains its extrema at vertices, which are enumerated exactly
with rational arithmetic (every 64-bit float is a rational, so float
inputs lose nothing).  Equality slack ``tol`` absorbs input-level noise;
the upper endpoint of the fused interval is produced only by this oracle.

The module also carries the regime machinery used by the brute-force
verification sweeps: for any treatment rule ``g``, measurable in the
level, the intention and the stratum (plus exogenous noise),

    E[Y under a=1] - E[Y under g]

is a valid lower bound for ``P(S=1)``, and for rules driven by noise
alone it equals the never-treat contrast scaled by ``P(g assigns 0)``,
exactly.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import combinations
from typing import Callable, Mapping, NamedTuple

from .errors import IncompatibleLawsError
from .identify import DEFAULT_TOL, att_atu, exp_potential_mean
from .laws import STRATA, FullLaw, ObservedLaw, potential_outcome, validate_full_law

#: Variable order for the joint-cell polytope: (stratum, intention).
Q_CELLS = tuple((s, astar) for s in STRATA for astar in (0, 1))

_SOURCES = ("experimental-only", "fused", "true-law")


@dataclass(frozen=True)
class StrataBounds:
    """Interval identification of the stratum distribution at one level.

    The feasible set is the one-parameter family above restricted to
    ``p in [p_lo, p_hi]``; per-stratum intervals are its coordinate
    projections.  ``source`` records which data produced the range.
    """

    level: str
    p_y1: float
    p_y0: float
    p_lo: float
    p_hi: float
    source: str

    def __post_init__(self) -> None:
        if self.source not in _SOURCES:
            raise ValueError(f"unknown bounds source {self.source!r}")
        if self.p_lo > self.p_hi + 1e-12:
            raise IncompatibleLawsError(
                f"empty identified set at level {self.level!r}: "
                f"p range [{self.p_lo:.6g}, {self.p_hi:.6g}]")

    @property
    def ate(self) -> float:
        return self.p_y1 - self.p_y0

    def family(self, p: float) -> tuple[float, float, float, float]:
        """Stratum distribution at parameter value ``p``."""
        return (p, p - self.ate, self.p_y1 - p, 1.0 - self.p_y0 - p)

    @property
    def intervals(self) -> tuple[tuple[float, float], ...]:
        """Per-stratum ``[lo, hi]`` intervals in stratum-code order."""
        at_lo = self.family(self.p_lo)
        at_hi = self.family(self.p_hi)
        out = []
        for i in range(4):
            lo, hi = sorted((at_lo[i], at_hi[i]))
            out.append((_clamp01(lo), _clamp01(hi)))
        return tuple(out)

    def interval(self, s: int) -> tuple[float, float]:
        return self.intervals[s - 1]

    def is_point(self, tol: float = 1e-12) -> bool:
        return self.p_hi - self.p_lo <= tol


def _clamp01(x: float) -> float:
    return min(1.0, max(0.0, x))


def family_bounds(level: str, p_y1: float, p_y0: float, p_lo: float, p_hi: float,
                  source: str) -> StrataBounds:
    """Build bounds from margins and a feasible parameter range, clamped to the family."""
    ate = p_y1 - p_y0
    lo_feas = max(0.0, ate)
    hi_feas = min(p_y1, 1.0 - p_y0)
    return StrataBounds(level=level, p_y1=p_y1, p_y0=p_y0,
                        p_lo=max(p_lo, lo_feas), p_hi=min(p_hi, hi_feas),
                        source=source)


def exp_bounds(obs: ObservedLaw, l: str) -> StrataBounds:
    """Sharp bounds from the trial block alone."""
    p_y1 = exp_potential_mean(obs, 1, l)
    p_y0 = exp_potential_mean(obs, 0, l)
    return family_bounds(l, p_y1, p_y0, 0.0, 1.0, source="experimental-only")


def true_bounds(law: FullLaw, l: str) -> StrataBounds:
    """Degenerate bounds at the true stratum distribution of a full law."""
    probs = law.strata_marginal(l)
    p_y1 = probs[0] + probs[2]
    p_y0 = probs[1] + probs[2]
    return StrataBounds(level=l, p_y1=p_y1, p_y0=p_y0,
                        p_lo=probs[0], p_hi=probs[0], source="true-law")


def fused_lower_bound_s1(obs: ObservedLaw, l: str) -> float:
    """Closed-form lower bound on ``P(S=1|l)`` using both data blocks."""
    p_y1 = exp_potential_mean(obs, 1, l)
    p_y0 = exp_potential_mean(obs, 0, l)
    factual = obs.p_y(l, r=0)
    return max(0.0, p_y1 - p_y0, factual - p_y0, p_y1 - factual)


def fused_bounds(obs: ObservedLaw, l: str, tol: float = DEFAULT_TOL) -> StrataBounds:
    """Sharp bounds from both blocks; the parameter range comes from the LP oracle."""
    p_y1 = exp_potential_mean(obs, 1, l)
    p_y0 = exp_potential_mean(obs, 0, l)
    system = strata_system(obs, l, fuse=True)
    lo, hi = sharp_bounds_lp(system, stratum_target(1), tol=tol)
    return family_bounds(l, p_y1, p_y0, lo, hi, source="fused")


# ---------------------------------------------------------------------------
# Linear-constraint oracle
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LinearConstraintSystem:
    """Equality constraints ``A q = b`` over the 8 joint cells, with ``q >= 0`` implicit.

    Coefficients and right-hand sides are exact rationals.  ``row_labels``
    name the constraints for error messages.
    """

    cells: tuple[tuple[int, int], ...]
    rows: tuple[tuple[Fraction, ...], ...]
    rhs: tuple[Fraction, ...]
    row_labels: tuple[str, ...]


def strata_system(obs: ObservedLaw, l: str, fuse: bool = False) -> LinearConstraintSystem:
    """Constraint system the observed blocks impose on the joint cells at level ``l``.

    Always includes the two trial-margin equalities and normalization.
    With ``fuse`` the four observational cells are added (normalization is
    then implied and omitted).
    """
    p_y1 = exp_potential_mean(obs, 1, l)
    p_y0 = exp_potential_mean(obs, 0, l)

    rows: list[tuple[Fraction, ...]] = []
    rhs: list[Fraction] = []
    labels: list[str] = []

    def add(cells_in: set[tuple[int, int]], value: float, label: str) -> None:
        rows.append(tuple(Fraction(1) if c in cells_in else Fraction(0) for c in Q_CELLS))
        rhs.append(Fraction(value))
        labels.append(label)

    add({(s, a) for (s, a) in Q_CELLS if s in (1, 3)}, p_y1, "margin Y under a=1")
    add({(s, a) for (s, a) in Q_CELLS if s in (2, 3)}, p_y0, "margin Y under a=0")
    if fuse:
        for y in (0, 1):
            for a in (0, 1):
                cells_in = {(s, aa) for (s, aa) in Q_CELLS
                            if aa == a and potential_outcome(s, a) == y}
                add(cells_in, obs.p_joint(y, a, l, 0), f"observational cell (Y={y}, A={a})")
    else:
        add(set(Q_CELLS), 1.0, "normalization")

    return LinearConstraintSystem(cells=Q_CELLS, rows=tuple(rows), rhs=tuple(rhs),
                                  row_labels=tuple(labels))


def stratum_target(s: int) -> dict[tuple[int, int], float]:
    """Linear functional selecting the marginal probability of stratum ``s``."""
    if s not in STRATA:
        raise ValueError(f"stratum must be in {STRATA}, got {s!r}")
    return {(s, 0): 1.0, (s, 1): 1.0}


def polytope_vertices(system: LinearConstraintSystem,
                      tol: float = DEFAULT_TOL) -> list[tuple[Fraction, ...]]:
    """All basic feasible solutions of the system, in exact rationals.

    ``tol`` is the slack for (i) dropping dependent rows whose right-hand
    sides disagree by rounding, and (ii) accepting marginally negative
    vertex coordinates; both only matter for noisy plug-in inputs.

    The coefficient side of the elimination depends only on the constraint
    structure, so the invertible bases and their inverses are cached
    across calls; per call only the right-hand side is propagated.
    """
    ftol = Fraction(tol)
    reduced_rows, reduced_rhs = _echelon(system, ftol)
    rank = len(reduced_rows)
    n = len(system.cells)
    key = tuple(tuple(row) for row in reduced_rows)
    vertices: list[tuple[Fraction, ...]] = []
    for basis, inverse in _invertible_bases(key, n):
        basic = [sum(inverse[i][k] * reduced_rhs[k] for k in range(rank))
                 for i in range(rank)]
        if any(x < -ftol for x in basic):
            continue
        full = [Fraction(0)] * n
        for value, j in zip(basic, basis):
            full[j] = value
        vertices.append(tuple(full))
    if not vertices:
        raise IncompatibleLawsError("incompatible observed law: the constraint polytope is empty")
    return vertices


def sharp_bounds_lp(system: LinearConstraintSystem,
                    target: Mapping[tuple[int, int], float],
                    tol: float = DEFAULT_TOL,
                    vertices: list[tuple[Fraction, ...]] | None = None) -> tuple[float, float]:
    """Exact min and max of ``target`` over the feasible polytope.

    A linear functional attains its extrema at vertices, which are
    enumerated in rational arithmetic; pass ``vertices`` (from
    :func:`polytope_vertices`) to evaluate several targets on one
    enumeration.
    """
    unknown = set(target) - set(system.cells)
    if unknown:
        raise ValueError(f"target references unknown cells: {sorted(unknown)}")
    coef = tuple(Fraction(target.get(c, 0.0)) for c in system.cells)
    if vertices is None:
        vertices = polytope_vertices(system, tol)
    values = [sum(c * x for c, x in zip(coef, v)) for v in vertices]
    return float(min(values)), float(max(values))


def _echelon(system: LinearConstraintSystem,
             ftol: Fraction) -> tuple[list[list[Fraction]], list[Fraction]]:
    """Forward elimination to an independent row set; raises on inconsistency.

    Coefficient rows are exact, so rank decisions are exact; a row whose
    coefficients vanish is dropped when its residual right-hand side is
    within ``ftol`` and is an infeasibility certificate otherwise.
    """
    work = [list(row) + [b] for row, b in zip(system.rows, system.rhs)]
    n = len(system.cells)
    reduced: list[list[Fraction]] = []
    pivot_cols: list[int] = []
    for row_idx, row in enumerate(work):
        for r, pc in zip(reduced, pivot_cols):
            factor = row[pc]
            if factor != 0:
                for j in range(n + 1):
                    row[j] -= factor * r[j]
        pivot = next((j for j in range(n) if row[j] != 0), None)
        if pivot is None:
            if abs(row[n]) > ftol:
                raise IncompatibleLawsError(
                    f"incompatible observed law: constraint "
                    f"{system.row_labels[row_idx]!r} is off by {float(row[n]):.3g}")
            continue
        inv = Fraction(1) / row[pivot]
        reduced.append([v * inv for v in row])
        pivot_cols.append(pivot)
    return [r[:n] for r in reduced], [r[n] for r in reduced]


@lru_cache(maxsize=128)
def _invertible_bases(reduced_rows: tuple[tuple[Fraction, ...], ...],
                      n: int) -> tuple[tuple[tuple[int, ...], tuple[tuple[Fraction, ...], ...]], ...]:
    """Every column basis of the reduced matrix with its exact inverse."""
    rank = len(reduced_rows)
    out = []
    for basis in combinations(range(n), rank):
        inverse = _invert([[reduced_rows[i][j] for j in basis] for i in range(rank)])
        if inverse is not None:
            out.append((basis, tuple(tuple(row) for row in inverse)))
    return tuple(out)


def _invert(matrix: list[list[Fraction]]) -> list[list[Fraction]] | None:
    """Gauss-Jordan inverse of a square rational matrix; None when singular."""
    m = len(matrix)
    work = [list(row) + [Fraction(int(i == j)) for j in range(m)]
            for i, row in enumerate(matrix)]
    for col in range(m):
        pivot_row = next((i for i in range(col, m) if work[i][col] != 0), None)
        if pivot_row is None:
            return None
        work[col], work[pivot_row] = work[pivot_row], work[col]
        inv = Fraction(1) / work[col][col]
        work[col] = [v * inv for v in work[col]]
        for i in range(m):
            if i != col and work[i][col] != 0:
                factor = work[i][col]
                work[i] = [v - factor * w for v, w in zip(work[i], work[col])]
    return [row[m:] for row in work]


# ---------------------------------------------------------------------------
# Treatment regimes and regime-based lower bounds
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Regime:
    """A treatment rule: probability of assigning ``a=1`` per (level, intention, stratum).

    Exogenous randomization is folded into the probability; deterministic
    rules return 0 or 1.
    """

    name: str
    treat_prob: Callable[[str, int, int], float]

    @staticmethod
    def always() -> "Regime":
        return Regime("always-treat", lambda l, astar, s: 1.0)

    @staticmethod
    def never() -> "Regime":
        return Regime("never-treat", lambda l, astar, s: 0.0)

    @staticmethod
    def factual() -> "Regime":
        """The rule generating the observational data: follow the intention."""
        return Regime("factual", lambda l, astar, s: float(astar))

    @staticmethod
    def noise(q: float) -> "Regime":
        """Treat with probability ``q`` regardless of any patient feature."""
        if not 0.0 <= q <= 1.0:
            raise ValueError("q must lie in [0, 1]")
        return Regime(f"noise({q:g})", lambda l, astar, s: q)

    @staticmethod
    def from_table(name: str, table: Mapping[tuple[str, int, int], float]) -> "Regime":
        return Regime(name, lambda l, astar, s: table[(l, astar, s)])


def regime_value(law: FullLaw, regime: Regime) -> float:
    """``P(Y=1)`` when treatment is assigned by ``regime``, by cell enumeration."""
    validate_full_law(law)
    total = 0.0
    for l in law.levels:
        for astar in (0, 1):
            w_astar = law.p_astar[l] if astar == 1 else 1.0 - law.p_astar[l]
            block = law.p_strata[(l, astar)]
            for s in STRATA:
                weight = law.p_level[l] * w_astar * block[s - 1]
                if weight == 0.0:
                    continue
                g = regime.treat_prob(l, astar, s)
                if not 0.0 <= g <= 1.0:
                    raise ValueError(
                        f"regime {regime.name!r} returned {g!r} at ({l!r}, {astar}, {s})")
                total += weight * (g * potential_outcome(s, 1)
                                   + (1.0 - g) * potential_outcome(s, 0))
    return total


def regime_lower_bound(law: FullLaw, regime: Regime) -> float:
    """``E[Y under a=1] - E[Y under regime]``; never exceeds ``P(S=1)``.

    ``P(S=1)`` minus this quantity is exactly the mass of outcome-responsive
    strata the regime sends to their unfavorable arm (stratum 1 treated,
    stratum 2 untreated), which is non-negative for every law.
    """
    return law.marginal_potential_mean(1) - regime_value(law, regime)


class ImprovementResult(NamedTuple):
    improves: bool
    att: float
    atu: float


def improvement_test(obs: ObservedLaw, l: str, tol: float = DEFAULT_TOL) -> ImprovementResult:
    """Whether the observational block strictly tightens the lower bound on ``P(S=1|l)``.

    Holds exactly when the intention-group effects have strictly opposite
    signs; sign ties within ``tol`` count as no improvement.
    """
    att, atu = att_atu(obs, l, tol)
    improves = (att > tol and atu < -tol) or (att < -tol and atu > tol)
    return ImprovementResult(improves, att, atu)

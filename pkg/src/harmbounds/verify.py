"""Brute-force verification sweeps over random laws.

Each sweep draws random full laws (and where needed random regimes),
checks a claimed identity or inequality against direct enumeration, and
reports pass counts plus a bounded list of failure descriptions.  The
sweeps are deterministic in their seed.

``s4`` additionally hunts for a counterexample to the *unclipped* claim
"the never-treat effect dominates every noise-only regime effect": the
exact product identity makes that claim false whenever the never-treat
effect is negative, and the sweep reports one concrete instance, while
verifying the clipped form that survives.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .bounds import (Regime, exp_bounds, fused_lower_bound_s1, improvement_test,
                     polytope_vertices, regime_lower_bound, sharp_bounds_lp,
                     strata_system, stratum_target)
from .identify import fused_potential_mean
from .laws import STRATA, FullLaw, observed_from_full, stratum_margins
from .simulate import random_law

MAX_FAILURES = 5


@dataclass
class SweepResult:
    name: str
    trials: int
    passes: int
    failures: list[str] = field(default_factory=list)
    notes: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.passes == self.trials


def _law_seeds(seed: int, trials: int) -> np.ndarray:
    return np.random.default_rng(seed).integers(0, 2**63, size=trials)


def _law_for_trial(i: int, law_seed: int, confounding: bool = True) -> FullLaw:
    return random_law(int(law_seed), n_levels=1 + i % 3, confounding=confounding)


def _record(result: SweepResult, ok: bool, message: str) -> None:
    if ok:
        result.passes += 1
    elif len(result.failures) < MAX_FAILURES:
        result.failures.append(message)


def _random_regime(law: FullLaw, rng: np.random.Generator) -> Regime:
    """A random rule over (level, intention, stratum) cells, half deterministic."""
    table = {}
    deterministic = rng.random() < 0.5
    for l in law.levels:
        for astar in (0, 1):
            for s in STRATA:
                g = rng.random()
                table[(l, astar, s)] = float(round(g)) if deterministic else float(g)
    return Regime.from_table("random", table)


def sweep_s3(trials: int, seed: int, regimes_per_law: int = 10) -> SweepResult:
    """Any regime effect versus always-treat never exceeds the harm probability.

    Also cross-checks the enumeration against the mass-accounting identity
    ``effect = P(S=1) - (P(S=1, treated) + P(S=2, untreated))``.
    """
    result = SweepResult("s3", trials, 0)
    seeds = _law_seeds(seed, trials)
    rng = np.random.default_rng(seed + 1)
    for i in range(trials):
        law = _law_for_trial(i, seeds[i])
        p_harm = law.marginal_stratum_prob(1)
        ok = True
        msg = ""
        for _ in range(regimes_per_law):
            regime = _random_regime(law, rng)
            tau_g = regime_lower_bound(law, regime)
            matched = 0.0
            for l in law.levels:
                for astar in (0, 1):
                    w_a = law.p_astar[l] if astar == 1 else 1.0 - law.p_astar[l]
                    block = law.p_strata[(l, astar)]
                    g1 = regime.treat_prob(l, astar, 1)
                    g2 = regime.treat_prob(l, astar, 2)
                    matched += law.p_level[l] * w_a * (block[0] * g1 + block[1] * (1.0 - g2))
            if tau_g > p_harm + 1e-12:
                ok, msg = False, f"trial {i}: effect {tau_g:.3g} exceeds P(S=1) {p_harm:.3g}"
                break
            if abs(tau_g - (p_harm - matched)) > 1e-12:
                ok, msg = False, f"trial {i}: mass accounting off by {tau_g - (p_harm - matched):.3g}"
                break
        _record(result, ok, msg)
    return result


def sweep_s4(trials: int, seed: int) -> SweepResult:
    """Noise-only regimes: exact product identity and the clipped dominance."""
    result = SweepResult("s4", trials, 0)
    seeds = _law_seeds(seed, trials)
    rng = np.random.default_rng(seed + 1)
    counterexample: str | None = None
    for i in range(trials):
        law = _law_for_trial(i, seeds[i])
        tau0 = law.marginal_potential_mean(1) - law.marginal_potential_mean(0)
        q = float(rng.uniform(0.0, 1.0))
        tau_g = regime_lower_bound(law, Regime.noise(q))
        identity_ok = abs(tau_g - tau0 * (1.0 - q)) <= 1e-12
        clipped_ok = max(0.0, tau0) >= max(0.0, tau_g) - 1e-12
        _record(result, identity_ok and clipped_ok,
                f"trial {i}: tau_g={tau_g:.6g} tau0={tau0:.6g} q={q:.3g}")
        if counterexample is None and tau0 < -1e-6 and q > 1e-6:
            # tau_g = tau0 (1 - q) > tau0 here, so the unclipped claim fails.
            counterexample = (f"unclipped dominance fails at trial {i}: "
                              f"tau0={tau0:.6f} < tau_g={tau_g:.6f} (noise q={q:.3f})")
    if counterexample is not None:
        result.notes.append(counterexample)
    else:
        result.notes.append("no unclipped counterexample arose (no negative-effect law drawn)")
    return result


def sweep_s5(trials: int, seed: int, tol: float = 1e-9) -> SweepResult:
    """Opposite-sign intention effects iff the observational block tightens the bound.

    When the signs strictly differ the tightening is at least the smaller
    effect scaled by its group probability, far above rounding; when they
    do not, the four-term bound coincides with the experimental one up to
    rounding.  Effects within ``tol`` of zero are genuine sign ties and
    are skipped.
    """
    result = SweepResult("s5", trials, 0)
    seeds = _law_seeds(seed, trials)
    skipped = 0
    for i in range(trials):
        law = _law_for_trial(i, seeds[i], confounding=True)
        obs = observed_from_full(law)
        ok = True
        msg = ""
        for l in law.levels:
            test = improvement_test(obs, l, tol)
            _, _, tau0 = stratum_margins(law, l)
            gain = fused_lower_bound_s1(obs, l) - max(0.0, tau0)
            if min(abs(test.att), abs(test.atu)) <= tol:
                skipped += 1
                continue
            if test.improves != (gain > 1e-12):
                ok = False
                msg = (f"trial {i} level {l}: improves={test.improves} "
                       f"but bound gain={gain:.3g}")
                break
        _record(result, ok, msg)
    if skipped:
        result.notes.append(f"{skipped} level(s) skipped as sign ties within {tol:g}")
    return result


def sweep_sharpness(trials: int, seed: int, tol: float = 1e-9) -> SweepResult:
    """LP oracle against the closed forms, plus redundancy of the mixture terms."""
    result = SweepResult("sharpness", trials, 0)
    seeds = _law_seeds(seed, trials)
    for i in range(trials):
        law = _law_for_trial(i, seeds[i])
        obs = observed_from_full(law)
        ok = True
        msg = ""
        for l in law.levels:
            closed = exp_bounds(obs, l)
            exp_system = strata_system(obs, l, fuse=False)
            exp_vertices = polytope_vertices(exp_system)
            for s in STRATA:
                lo, hi = sharp_bounds_lp(exp_system, stratum_target(s), vertices=exp_vertices)
                clo, chi = closed.interval(s)
                if abs(lo - clo) > tol or abs(hi - chi) > tol:
                    ok, msg = False, (f"trial {i} level {l}: LP [{lo:.6g}, {hi:.6g}] vs "
                                      f"closed [{clo:.6g}, {chi:.6g}] for stratum {s}")
                    break
            if not ok:
                break

            fused_lb = fused_lower_bound_s1(obs, l)
            lp_lo, lp_hi = sharp_bounds_lp(strata_system(obs, l, fuse=True), stratum_target(1))
            if abs(lp_lo - fused_lb) > tol:
                ok, msg = False, (f"trial {i} level {l}: LP lower {lp_lo:.6g} vs "
                                  f"four-term {fused_lb:.6g}")
                break

            # The trial marginal is a convex combination of the arm means, so
            # differences built from it cannot beat the retained terms.
            trial_marginal = obs.p_y(l, 1)
            redundant = max(trial_marginal - closed.p_y0, closed.p_y1 - trial_marginal)
            if redundant > fused_lb + tol:
                ok, msg = False, f"trial {i} level {l}: redundant term {redundant:.6g} sharpens"
                break

            truth = law.strata_marginal(l)
            if not (lp_lo - tol <= truth[0] <= lp_hi + tol):
                ok, msg = False, f"trial {i} level {l}: truth {truth[0]:.6g} escapes LP interval"
                break
            for s in STRATA:
                clo, chi = closed.interval(s)
                if not (clo - tol <= truth[s - 1] <= chi + tol):
                    ok, msg = False, f"trial {i} level {l}: truth escapes stratum {s} interval"
                    break
            if not ok:
                break
        _record(result, ok, msg)
    return result


def sweep_fusion(trials: int, seed: int, tol: float = 1e-12) -> SweepResult:
    """Fused means recover the direct conditional means of the generating law."""
    result = SweepResult("fusion", trials, 0)
    seeds = _law_seeds(seed, trials)
    for i in range(trials):
        law = _law_for_trial(i, seeds[i])
        obs = observed_from_full(law)
        ok = True
        msg = ""
        for l in law.levels:
            p_astar = law.p_astar[l]
            for a in (0, 1):
                mix = 0.0
                for astar in (0, 1):
                    ident = fused_potential_mean(obs, a, astar, l)
                    direct = law.potential_mean_given_astar(a, astar, l)
                    if abs(ident - direct) > tol:
                        ok, msg = False, (f"trial {i} level {l}: fused mean {ident:.9g} vs "
                                          f"direct {direct:.9g} (a={a}, astar={astar})")
                        break
                    mix += ident * (p_astar if astar == 1 else 1.0 - p_astar)
                if not ok:
                    break
                marginal = obs.p_y_given_a(a, l, 1)
                if abs(mix - marginal) > tol:
                    ok, msg = False, f"trial {i} level {l}: mixture {mix:.9g} vs {marginal:.9g}"
                    break
            if not ok:
                break
        _record(result, ok, msg)
    return result


def sweep_excess(trials: int, seed: int) -> SweepResult:
    """Stratum-driven policies never beat the outcome minimizer on outcomes.

    Uses survival preferences with a random positive charge on treating
    stratum 1; notes the fraction of laws where the excess is strictly
    positive.
    """
    from .decide import excess_outcome
    from .utility import UtilitySpec, harm_penalized_gamma, survival_spec

    result = SweepResult("excess", trials, 0)
    seeds = _law_seeds(seed, trials)
    rng = np.random.default_rng(seed + 1)
    strict = 0
    for i in range(trials):
        law = _law_for_trial(i, seeds[i])
        base = survival_spec()
        penalty = float(rng.uniform(0.5, 5.0))
        scale = float(rng.uniform(0.5, 3.0))
        shift = float(rng.uniform(-2.0, 2.0))
        gamma = {k: scale * v + shift
                 for k, v in harm_penalized_gamma(base.mu, penalty).items()}
        cf_spec = UtilitySpec(mu=base.mu, gamma=gamma)
        excess = excess_outcome(law, cf_spec, base)
        _record(result, excess >= -1e-12, f"trial {i}: excess {excess:.6g} negative")
        if excess > 1e-9:
            strict += 1
    result.notes.append(f"strictly positive excess on {strict}/{trials} laws "
                        f"({100.0 * strict / trials:.1f}%)")
    return result


PROPS = {
    "s3": sweep_s3,
    "s4": sweep_s4,
    "s5": sweep_s5,
    "sharpness": sweep_sharpness,
    "fusion": sweep_fusion,
    "excess": sweep_excess,
}


def run_sweeps(props: list[str], trials: int, seed: int) -> list[SweepResult]:
    unknown = [p for p in props if p not in PROPS]
    if unknown:
        raise ValueError(f"unknown properties: {', '.join(unknown)} "
                         f"(available: {', '.join(PROPS)})")
    return [PROPS[p](trials, seed) for p in props]

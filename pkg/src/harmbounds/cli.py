"""Command-line surface.

Subcommands: ``simulate``, ``identify``, ``bounds``, ``decide``,
``compare``, ``verify``.  Reports are plain-text tables with fixed
6-decimal formatting; ``--machine`` switches to one record per line of
tab-separated ``key:value`` pairs.  Output is byte-identical for identical
arguments, seeds and input files.

Exit codes: 0 success, 1 usage error (or failed verification sweep),
2 validation or file-format error, 3 identification impossible for the
request.
"""

from __future__ import annotations

import argparse
import sys

from .bounds import exp_bounds, fused_bounds, fused_lower_bound_s1
from .decide import (CRITERIA, DecisionReport, counterfactual_report,
                     interventionist_report, policy_value, true_law_policies)
from .errors import (FileFormatError, GainEqualityError, GammaMissingError,
                     IncompatibleLawsError, LawValidationError,
                     NotPointIdentifiedError, PartialPolicyError, PositivityError)
from .identify import identified_means
from .laws import STRATA, observed_from_full, read_law_file
from .simulate import estimate_observed_law, format_dataset_csv, read_dataset_file, sample_dataset
from .utility import UtilitySpec, read_utility_file
from .verify import PROPS, run_sweeps

_USAGE_EXIT = 1
_FORMAT_EXIT = 2
_IDENT_EXIT = 3

_FORMAT_ERRORS = (FileFormatError, LawValidationError, GammaMissingError,
                  GainEqualityError, PartialPolicyError, ValueError, OSError)
_IDENT_ERRORS = (PositivityError, IncompatibleLawsError, NotPointIdentifiedError)


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # noqa: A003 - argparse hook
        raise UsageError(message)


def _fmt(x: float) -> float | str:
    return f"{x:.6f}"


def _machine_line(kind: str, **fields) -> str:
    parts = [f"kind:{kind}"]
    parts += [f"{k}:{v}" for k, v in fields.items()]
    return "\t".join(parts)


def build_parser() -> _Parser:
    parser = _Parser(prog="harmbounds",
                     description="principal-stratum bounds and treatment choice "
                                 "from trial and observational data")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    def common(p: _Parser) -> None:
        p.add_argument("--law", help="law specification file")
        p.add_argument("--data", help="dataset CSV file")
        p.add_argument("--utility", help="utility specification file")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--n", type=int, default=1000)
        p.add_argument("--smoothing", type=float, default=0.0,
                       help="add-lambda smoothing for dataset estimation")
        p.add_argument("--fuse", action="store_true",
                       help="use the observational block in addition to the trial block")
        p.add_argument("--use-astar", action="store_true", dest="use_astar",
                       help="condition decisions on the intention variable (needs fusion)")
        p.add_argument("--criterion", choices=CRITERIA)
        p.add_argument("--trials", type=int, default=100)
        p.add_argument("--oracle", action="store_true",
                       help="emit hidden intention and stratum columns when simulating")
        p.add_argument("--machine", action="store_true",
                       help="tab-separated key:value records instead of tables")
        p.add_argument("--tol", type=float, default=1e-9,
                       help="model-compatibility slack for fused identification "
                            "(raise for finite-sample inputs)")

    p_sim = sub.add_parser("simulate", help="sample a dataset from a law")
    common(p_sim)
    p_sim.add_argument("--out", help="write the CSV here instead of standard output")
    p_sim.set_defaults(func=cmd_simulate)

    for name, func, text in (
            ("identify", cmd_identify, "identified potential-outcome means"),
            ("bounds", cmd_bounds, "stratum-probability intervals"),
            ("decide", cmd_decide, "treatment choice under a criterion"),
            ("compare", cmd_compare, "outcome cost of stratum-level decision making"),
            ("verify", cmd_verify, "brute-force property sweeps over random laws")):
        p = sub.add_parser(name, help=text)
        common(p)
        if name == "verify":
            p.add_argument("--props", help=f"comma-separated subset of: {', '.join(PROPS)}")
        p.set_defaults(func=func)
    return parser


def _load_observed(args):
    if args.law and args.data:
        raise UsageError("give either --law or --data, not both")
    if args.law:
        return observed_from_full(read_law_file(args.law))
    if args.data:
        return estimate_observed_law(read_dataset_file(args.data), smoothing=args.smoothing)
    raise UsageError("an input is required: --law PATH or --data PATH")


def cmd_simulate(args) -> int:
    if not args.law:
        raise UsageError("simulate requires --law")
    law = read_law_file(args.law)
    data = sample_dataset(law, args.n, args.seed, oracle=args.oracle)
    text = format_dataset_csv(data)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


def cmd_identify(args) -> int:
    obs = _load_observed(args)
    means = identified_means(obs, fuse=args.fuse, tol=args.tol)
    lines = []
    for l in obs.levels:
        if args.machine:
            for a in (1, 0):
                lines.append(_machine_line("exp_mean", level=l, a=a, value=_fmt(means.exp_mean(l, a))))
            lines.append(_machine_line("ate", level=l, value=_fmt(means.ate(l))))
        else:
            lines.append(f"level {l}")
            lines.append(f"  E[Y^1 | l]          {_fmt(means.exp_mean(l, 1)):>12}")
            lines.append(f"  E[Y^0 | l]          {_fmt(means.exp_mean(l, 0)):>12}")
            lines.append(f"  ATE                 {_fmt(means.ate(l)):>12}")
        if means.has_fused:
            att = means.fused_mean(l, 1, 1) - means.fused_mean(l, 0, 1)
            atu = means.fused_mean(l, 1, 0) - means.fused_mean(l, 0, 0)
            if args.machine:
                lines.append(_machine_line("p_astar", level=l, value=_fmt(means.p_astar[l])))
                for a in (1, 0):
                    for astar in (1, 0):
                        lines.append(_machine_line("fused_mean", level=l, a=a, astar=astar,
                                                   value=_fmt(means.fused_mean(l, a, astar))))
                lines.append(_machine_line("att", level=l, value=_fmt(att)))
                lines.append(_machine_line("atu", level=l, value=_fmt(atu)))
            else:
                lines.append(f"  P(A*=1 | l)         {_fmt(means.p_astar[l]):>12}")
                for a in (1, 0):
                    for astar in (1, 0):
                        lines.append(f"  E[Y^{a} | A*={astar}, l]    "
                                     f"{_fmt(means.fused_mean(l, a, astar)):>12}")
                lines.append(f"  ATT                 {_fmt(att):>12}")
                lines.append(f"  ATU                 {_fmt(atu):>12}")
    print("\n".join(lines))
    return 0


def cmd_bounds(args) -> int:
    obs = _load_observed(args)
    lines = []
    for l in obs.levels:
        b = fused_bounds(obs, l, tol=args.tol) if args.fuse else exp_bounds(obs, l)
        if args.machine:
            for s in STRATA:
                lo, hi = b.interval(s)
                lines.append(_machine_line("stratum_bound", level=l, s=s, lo=_fmt(lo),
                                           hi=_fmt(hi), source=b.source))
            if args.fuse:
                lines.append(_machine_line("lower_bound_s1", level=l,
                                           value=_fmt(fused_lower_bound_s1(obs, l))))
            lines.append(_machine_line("p_range", level=l, lo=_fmt(b.p_lo), hi=_fmt(b.p_hi)))
        else:
            for s in STRATA:
                lo, hi = b.interval(s)
                lines.append(f"P(S={s}|{l}) ∈ [{_fmt(lo)}, {_fmt(hi)}] ({b.source})")
            if args.fuse:
                lines.append(f"four-term lower bound P(S=1|{l}) >= "
                             f"{_fmt(fused_lower_bound_s1(obs, l))}")
            lines.append(f"free parameter p = P(S=1|{l}) ∈ [{_fmt(b.p_lo)}, {_fmt(b.p_hi)}]")
    print("\n".join(lines))
    return 0


_VALUE_LABELS = {
    "eu_a1": "E[U | a=1]",
    "eu_a0": "E[U | a=0]",
    "gain_lo": None,  # folded into the interval line
    "gain_hi": None,
    "gain": "gain",
    "gain_mean": "gain mean",
}


def _render_report(report: DecisionReport, machine: bool) -> list[str]:
    lines = []
    if not machine:
        lines.append(f"criterion {report.criterion}")
    for cell in report.cells:
        if machine:
            fields: dict = {"level": cell.features[0]}
            if len(cell.features) > 1:
                fields["astar"] = cell.features[1]
            fields["action"] = cell.action
            for key, value in cell.values.items():
                fields[key] = _fmt(value)
            if cell.regret is not None:
                fields["regret_a1"] = _fmt(cell.regret[1])
                fields["regret_a0"] = _fmt(cell.regret[0])
            fields["tie"] = int(cell.tie)
            lines.append(_machine_line("decision", **fields))
            continue
        feat = f"l={cell.features[0]}"
        if len(cell.features) > 1:
            feat += f" a*={cell.features[1]}"
        lines.append(f"feature {feat}")
        lines.append(f"  action              {cell.action:>12}")
        if "gain_lo" in cell.values:
            interval = f"[{_fmt(cell.values['gain_lo'])}, {_fmt(cell.values['gain_hi'])}]"
            lines.append(f"  gain interval       {interval:>12}")
        for key, value in cell.values.items():
            label = _VALUE_LABELS.get(key, key)
            if label is None:
                continue
            lines.append(f"  {label:<20}{_fmt(value):>12}")
        if cell.regret is not None:
            lines.append(f"  regret a=1          {_fmt(cell.regret[1]):>12}")
            lines.append(f"  regret a=0          {_fmt(cell.regret[0]):>12}")
        lines.append(f"  tie                 {'yes' if cell.tie else 'no':>12}")
    return lines


def cmd_decide(args) -> int:
    if not args.utility:
        raise UsageError("decide requires --utility")
    if not args.criterion:
        raise UsageError("decide requires --criterion")
    spec = read_utility_file(args.utility)
    obs = _load_observed(args)
    if args.criterion == "interventionist":
        means = identified_means(obs, fuse=args.use_astar or args.fuse, tol=args.tol)
        report = interventionist_report(means, spec, use_astar=args.use_astar)
    else:
        if args.use_astar:
            raise UsageError("--use-astar applies only to --criterion interventionist")
        if args.fuse:
            bmap = {l: fused_bounds(obs, l, tol=args.tol) for l in obs.levels}
        else:
            bmap = {l: exp_bounds(obs, l) for l in obs.levels}
        report = counterfactual_report(bmap, spec, args.criterion)
    print("\n".join(_render_report(report, args.machine)))
    return 0


def cmd_compare(args) -> int:
    if not args.law:
        raise UsageError("compare requires --law (policy evaluation needs the full law)")
    if not args.utility:
        raise UsageError("compare requires --utility")
    law = read_law_file(args.law)
    spec = read_utility_file(args.utility)
    if not spec.has_gamma:
        raise GammaMissingError("compare needs a utility file with a GAMMA table")
    int_spec = UtilitySpec(mu=spec.mu, gamma=None)
    criterion = args.criterion or "cf-point"
    cf_policy, int_policy = true_law_policies(law, spec, int_spec, criterion)
    cf_value = policy_value(law, cf_policy)
    int_value = policy_value(law, int_policy)
    if args.machine:
        print(_machine_line("compare", cf_value=_fmt(cf_value), int_value=_fmt(int_value),
                            excess=_fmt(cf_value - int_value)))
    else:
        print(f"outcome-level policy value   {_fmt(int_value):>12}")
        print(f"stratum-level policy value   {_fmt(cf_value):>12}")
        print(f"excess outcome               {_fmt(cf_value - int_value):>12}")
    return 0


def cmd_verify(args) -> int:
    props = args.props.split(",") if getattr(args, "props", None) else list(PROPS)
    try:
        results = run_sweeps([p.strip() for p in props], args.trials, args.seed)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    lines = []
    all_ok = True
    for r in results:
        all_ok = all_ok and r.ok
        if args.machine:
            lines.append(_machine_line("verify", prop=r.name, passes=r.passes, trials=r.trials))
        else:
            lines.append(f"{r.name}: {r.passes}/{r.trials} pass")
        for note in r.notes:
            lines.append(f"  note: {note}")
        for failure in r.failures:
            lines.append(f"  FAIL: {failure}")
    print("\n".join(lines))
    return 0 if all_ok else 1


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return _USAGE_EXIT
    if not getattr(args, "command", None):
        parser.print_usage(sys.stderr)
        return _USAGE_EXIT
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return _USAGE_EXIT
    except _IDENT_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return _IDENT_EXIT
    except _FORMAT_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return _FORMAT_EXIT


def entry() -> None:
    raise SystemExit(main())


if __name__ == "__main__":
    entry()

"""Command-line front end.

Every subcommand parses its flags into library objects, calls one library
function and prints the result as ``key = value`` text or CSV. Exit status is
0 on success, 1 on bad input and 2 when an internal invariant fails.

Flag values may also come from ``--config FILE``, a flat ``key = value`` file
(``#`` starts a comment); flags given on the command line take precedence.
"""

from __future__ import annotations

import argparse
import io
import sys
from fractions import Fraction
from pathlib import Path

from .audit import (
    SLACK,
    audit,
    audit_local,
    estimation_error_check,
    hypothesis_analysis,
    induced_relation,
    lowest_point,
)
from .errors import DomainError, InvariantViolation, PreconditionError, SearchLimitError
from .games import (
    POLICIES,
    GameConfig,
    GameResult,
    PanelFormatError,
    ProfilePanel,
    format_epsilon,
    ingest_csv,
    play_game,
    synthesize_panel,
)
from .measures import (
    ChannelSpec,
    PriorSpec,
    differential_entropy0,
    hartley_entropy,
    maximal_leakage,
    maximin_information,
    nonstochastic_information,
    nonstochastic_leakage,
    pentagon_channel,
    symmetrized_leakage,
    zero_error_code_search,
)
from .mechanisms import (
    Constant,
    Identity,
    LinearQuantizer,
    Mechanism,
    quantizer_levels,
    synthesize_quantizer,
)
from .ranges import DatasetSpec, FiniteRange, IntervalUnion, JointRelation, QuerySpec, exact, fmt


class UsageError(PreconditionError):
    """Bad command line or config file."""


class _Parser(argparse.ArgumentParser):
    # argparse exits with status 2 by default, which is reserved here
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}\n{self.format_usage()}")


# ---------------------------------------------------------------- grammars


def parse_value(text: str):
    text = text.strip()
    if not text:
        raise UsageError("empty value")
    return exact(text)


def parse_interval_union(text: str) -> IntervalUnion:
    pieces = []
    for part in text.split("|"):
        lo, sep, hi = part.partition("..")
        if not sep:
            raise UsageError(f"interval {part!r} must look like lo..hi")
        pieces.append((_number(lo), _number(hi)))
    return IntervalUnion(pieces)


def _number(text: str) -> Fraction:
    v = parse_value(text)
    if isinstance(v, str):
        raise UsageError(f"{text!r} is not a number")
    return Fraction(v)


def parse_domains(text: str) -> tuple:
    """``"0,1;0..1"``: individuals split by ``;``, each a comma list or ``lo..hi`` pieces joined by ``|``."""
    domains = []
    for part in text.split(";"):
        part = part.strip()
        if ".." in part:
            domains.append(parse_interval_union(part))
        else:
            domains.append(FiniteRange(parse_value(v) for v in part.split(",")))
    return tuple(domains)


def parse_query(text: str) -> QuerySpec:
    """``mean``, ``sum`` or ``affine:w1,w2[@offset]``."""
    kind, _, arg = text.strip().partition(":")
    if kind == "mean" and not arg:
        return QuerySpec.mean()
    if kind == "sum" and not arg:
        return QuerySpec.sum()
    if kind == "affine" and arg:
        weights, _, offset = arg.partition("@")
        return QuerySpec.affine([_number(w) for w in weights.split(",")], _number(offset) if offset else 0)
    raise UsageError(f"unknown query {text!r}; use mean, sum or affine:w1,w2[@offset]")


def parse_mechanism(text: str, dataset: DatasetSpec | None = None) -> Mechanism:
    """``identity``, ``constant:c`` or ``quantizer:q[:lo..hi]``.

    A quantizer without a range spans the dataset's output bounds.
    """
    kind, _, arg = text.strip().partition(":")
    if kind == "identity" and not arg:
        return Identity()
    if kind == "constant" and arg:
        return Constant(parse_value(arg))
    if kind == "quantizer" and arg:
        levels, _, span = arg.partition(":")
        try:
            q = int(levels)
        except ValueError:
            raise UsageError(f"quantizer level count {levels!r} is not an integer") from None
        if span:
            iv = parse_interval_union(span)
            if len(iv) != 1:
                raise UsageError("quantizer range must be a single interval")
            lo, hi = iv.intervals[0]
        elif dataset is not None:
            lo, hi = dataset.output_bounds
        else:
            raise UsageError("quantizer range is required without a dataset")
        return LinearQuantizer(q, lo, hi)
    raise UsageError(f"unknown mechanism {text!r}; use identity, constant:c or quantizer:q[:lo..hi]")


def parse_relation(text: str) -> JointRelation:
    """``"1:a,2:a,3:b"``: comma-separated ``x:y`` pairs."""
    pairs = []
    for item in text.split(","):
        x, sep, y = item.partition(":")
        if not sep:
            raise UsageError(f"relation pair {item!r} must look like x:y")
        pairs.append((parse_value(x), parse_value(y)))
    return JointRelation(pairs)


def parse_masses(text: str) -> dict:
    masses = {}
    for item in text.split(","):
        x, sep, w = item.partition(":")
        if not sep:
            raise UsageError(f"prior entry {item!r} must look like x:mass")
        masses[parse_value(x)] = _number(w)
    return masses


def parse_panel(text: str) -> ProfilePanel:
    """``synthetic:COUNTxHORIZON:SEED`` or a path to a profile CSV."""
    if text.startswith("synthetic:"):
        try:
            _, shape, seed = text.split(":")
            count, horizon = (int(v) for v in shape.lower().split("x"))
            return synthesize_panel(count, horizon, int(seed))
        except ValueError:
            raise UsageError(f"synthetic panel {text!r} must look like synthetic:300x48:1") from None
    return ingest_csv(text)


def parse_epsilons(text: str) -> list[float]:
    """Comma list of budgets; ``a..b`` expands to the integers in between; ``inf`` allowed."""
    values = []
    for part in text.split(","):
        part = part.strip()
        if ".." in part:
            lo, hi = (int(v) for v in part.split(".."))
            values.extend(float(v) for v in range(lo, hi + 1))
        else:
            try:
                values.append(float(part))
            except ValueError:
                raise UsageError(f"budget {part!r} is not a number") from None
    if not values:
        raise UsageError("empty budget grid")
    return values


def parse_ints(text: str) -> list[int]:
    try:
        return [int(v) for v in text.split(",")]
    except ValueError:
        raise UsageError(f"{text!r} is not a comma list of integers") from None


def read_config(path) -> dict:
    """Flat ``key = value`` lines; ``#`` comments; keys use flag names without dashes."""
    out = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep or not key.strip():
            raise UsageError(f"{path}:{lineno}: expected 'key = value'")
        out[key.strip().replace("-", "_")] = value.strip()
    return out


# ---------------------------------------------------------------- helpers


def _dataset(args) -> DatasetSpec:
    if not args.domains:
        raise UsageError("--domains is required")
    return DatasetSpec(parse_domains(args.domains), parse_query(args.query))


def _individual(args, dataset: DatasetSpec) -> int:
    i = int(args.individual) - 1
    if not 0 <= i < dataset.n:
        raise UsageError(f"--individual must lie in 1..{dataset.n}")
    return i


def _others(args, dataset: DatasetSpec, i: int) -> tuple:
    if args.others is None:
        return tuple(lowest_point(d) for j, d in enumerate(dataset.domains) if j != i)
    values = tuple(parse_value(v) for v in args.others.split(",")) if args.others else ()
    if len(values) != dataset.n - 1:
        raise UsageError(f"--others needs {dataset.n - 1} values")
    for j, v in zip([j for j in range(dataset.n) if j != i], values):
        if v not in dataset.domains[j]:
            raise DomainError(f"value {fmt(v)} for individual {j + 1} lies outside its domain")
    return values


def _records(pairs) -> str:
    return "".join(f"{k} = {v}\n" for k, v in pairs)


def _csv(header: str, rows) -> str:
    return header + "\n" + "".join(r + "\n" for r in rows)


def _bits(v) -> str:
    return repr(float(v))


def _require_seed(args):
    if args.seed is None:
        raise UsageError(f"{args.command} is stochastic and needs an explicit --seed")
    return int(args.seed)


# ---------------------------------------------------------------- commands


def cmd_audit(args) -> str:
    dataset = _dataset(args)
    mech = parse_mechanism(args.mech, dataset)
    step = parse_value(args.grid_step) if args.grid_step else None
    report = (audit_local if args.local else audit)(dataset, mech, step)
    if args.format == "csv":
        return _csv(report.CSV_HEADER, report.csv_rows())
    return report.to_text()


def cmd_synth(args) -> str:
    if args.epsilon is None:
        raise UsageError("synth needs --epsilon")
    eps = float(args.epsilon)
    if args.domains:
        dataset = _dataset(args)
        spec = synthesize_quantizer(dataset, eps, rule=args.rule, max_levels=int(args.max_levels),
                                    grid_step=parse_value(args.grid_step) if args.grid_step else None)
        q, lo, hi = spec.levels, spec.x_min, spec.x_max
    else:
        missing = [f for f in ("ymin", "ymax", "sens") if getattr(args, f) is None]
        if missing:
            raise UsageError("synth needs --domains or all of --ymin, --ymax, --sens")
        lo, hi = _number(args.ymin), _number(args.ymax)
        q = quantizer_levels(eps, lo, hi, _number(args.sens), rule=args.rule, max_levels=int(args.max_levels))
    if args.format == "csv":
        return _csv("q,rule,epsilon,x_min,x_max", [f"{q},{args.rule},{format_epsilon(eps)},{fmt(lo)},{fmt(hi)}"])
    return _records([("q", q), ("rule", args.rule), ("x_min", fmt(lo)), ("x_max", fmt(hi))])


def cmd_measure(args) -> str:
    rows = []
    if args.interval:
        rows.append(("h0_nats", _bits(differential_entropy0(parse_interval_union(args.interval)))))
    if args.relation:
        rel = parse_relation(args.relation)
        bits, part = maximin_information(rel)
        rows += [
            ("h0_x_bits", _bits(hartley_entropy(rel.x_range))),
            ("h0_y_bits", _bits(hartley_entropy(rel.y_range))),
            ("i0_xy", _bits(nonstochastic_information(rel, "xy"))),
            ("i0_yx", _bits(nonstochastic_information(rel, "yx"))),
            ("l0_xy", _bits(nonstochastic_leakage(rel, "xy"))),
            ("l0_yx", _bits(nonstochastic_leakage(rel, "yx"))),
            ("l0_symmetrized", _bits(symmetrized_leakage(rel))),
            ("maximin", _bits(bits)),
            ("blocks", " ".join("{" + ",".join(fmt(x) for x in b) + "}" for b in part.blocks)),
        ]
        if args.prior:
            channel = {x: rel.given_x(x) for x in rel.x_range}
            if any(len(ys) != 1 for ys in channel.values()):
                raise UsageError("maximal leakage needs a deterministic relation (one y per x)")
            rows.append(("maximal_leakage", _bits(maximal_leakage({x: ys[0] for x, ys in channel.items()},
                                                                  PriorSpec.discrete(parse_masses(args.prior))))))
    if not rows:
        raise UsageError("measure needs --relation and/or --interval")
    if args.format == "csv":
        return _csv(",".join(k for k, _ in rows), [",".join(str(v) for _, v in rows)])
    return _records(rows)


def cmd_hypothesis(args) -> str:
    dataset = _dataset(args)
    mech = parse_mechanism(args.mech, dataset)
    i = _individual(args, dataset)
    if args.xa is None or args.xb is None:
        raise UsageError("hypothesis needs --xa and --xb")
    report = hypothesis_analysis(dataset, mech, i, parse_value(args.xa), parse_value(args.xb),
                                     _others(args, dataset, i))
    if args.format == "csv":
        perf = "" if report.best_test_performance is None else repr(report.best_test_performance)
        return _csv("symmetric_difference_size,bound,best_test_performance",
                    [f"{len(report.symmetric_difference)},{report.bound!r},{perf}"])
    return report.to_text()


def cmd_capacity(args) -> str:
    k_max = int(args.k_max)
    if args.channel == "pentagon":
        channel, eps = pentagon_channel(), None
    elif args.channel:
        raise UsageError(f"unknown channel {args.channel!r}; only 'pentagon' is built in")
    else:
        dataset = _dataset(args)
        mech = parse_mechanism(args.mech, dataset)
        i = _individual(args, dataset)
        rel = induced_relation(dataset, mech, i, _others(args, dataset, i))
        channel = ChannelSpec(rel.x_range, {x: rel.given_x(x) for x in rel.x_range})
        eps = audit(dataset, mech).epsilon_star
    results = [zero_error_code_search(channel, k, cap=int(args.cap)) for k in range(1, k_max + 1)]
    if args.format == "csv":
        return _csv("k,size,rate", [f"{r.block_length},{r.size},{r.rate!r}" for r in results])
    rows = []
    for r in results:
        rows += [(f"k{r.block_length}_size", r.size), (f"k{r.block_length}_rate", repr(r.rate))]
    if eps is not None:
        rows += [("epsilon_star", repr(eps)), ("passed", str(all(r.rate <= eps + SLACK for r in results)).lower())]
    return _records(rows)


def cmd_t4check(args) -> str:
    seed = _require_seed(args)
    dataset = _dataset(args)
    mech = parse_mechanism(args.mech, dataset)
    i = _individual(args, dataset)
    prior = PriorSpec.uniform(dataset.domains[i])
    others = _others(args, dataset, i) if args.others is not None else None
    check = estimation_error_check(dataset, mech, i, prior, int(args.p), seed=seed,
                                       trials=int(args.trials), others=others)
    rows = [
        ("empirical", repr(check.empirical)),
        ("standard_error", repr(check.standard_error)),
        ("bound", repr(check.bound)),
        ("epsilon_star", repr(check.epsilon)),
        ("trials", check.trials),
        ("degenerate", str(check.degenerate).lower()),
        ("passed", str(check.passed).lower()),
    ]
    if args.format == "csv":
        return _csv(",".join(k for k, _ in rows), [",".join(str(v) for _, v in rows)])
    return _records(rows)


def emit_sweep(panel: ProfilePanel, policies, group_sizes, epsilons, trials: int, seed: int,
               horizon: int | None = None) -> str:
    """CSV of game results over the grid ``policies x group_sizes x epsilons``.

    Rows follow the grid order, so the same arguments give the same bytes.
    """
    if not policies or not group_sizes or not epsilons:
        raise UsageError("sweep grid is empty")
    rows = []
    for policy in policies:
        for n in group_sizes:
            for eps in epsilons:
                cfg = GameConfig(n, eps, trials, seed, policy, horizon)
                rows.append(play_game(panel, cfg).csv_row())
    return _csv(GameResult.CSV_HEADER, rows)


def cmd_game(args) -> str:
    seed = _require_seed(args)
    panel = parse_panel(args.panel)
    policies = list(POLICIES) if args.policy == "all" else [p.strip() for p in args.policy.split(",")]
    horizon = int(args.horizon) if args.horizon else None
    csv_text = emit_sweep(panel, policies, parse_ints(args.n), parse_epsilons(args.epsilon),
                          int(args.trials), seed, horizon)
    if args.format == "text":
        header, *rows = csv_text.splitlines()
        keys = header.split(",")
        return "\n".join(_records(zip(keys, row.split(","))) for row in rows)
    return csv_text


def cmd_panel(args) -> str:
    if not args.panel:
        raise UsageError("panel needs --panel")
    panel = parse_panel(args.panel)
    if args.format == "text":
        return _records([
            ("individuals", panel.count),
            ("horizon", panel.horizon),
            ("max", repr(float(panel.profiles.max()))),
            ("mean", repr(float(panel.profiles.mean()))),
        ])
    buf = io.StringIO()
    panel.write_csv(buf)
    return buf.getvalue()


# ---------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="noiseless", description="Noiseless privacy: audits, synthesis, measures and games.")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    def command(name, fn, help_text, default_format="text"):
        p = sub.add_parser(name, help=help_text, description=help_text)
        p.set_defaults(handler=fn)
        p.add_argument("--config", help="key = value file supplying defaults for these flags")
        p.add_argument("--output", help="write the report here instead of standard output")
        p.add_argument("--format", choices=("text", "csv"), default=default_format)
        return p

    def dataset_flags(p, mech=True):
        p.add_argument("--domains", help='per-individual domains, e.g. "0,1;0,1" or "0..1;0..1"')
        p.add_argument("--query", default="mean", help="mean | sum | affine:w1,w2[@offset]")
        if mech:
            p.add_argument("--mech", default="identity", help="identity | constant:c | quantizer:q[:lo..hi]")

    def target_flags(p):
        p.add_argument("--individual", default="1", help="1-based index of the individual under attack")
        p.add_argument("--others", help="comma list of the other individuals' values, in index order")

    p = command("audit", cmd_audit, "Exact privacy budget of a mechanism.")
    dataset_flags(p)
    p.add_argument("--grid-step", help="grid step for continuous domains (gives a lower bound)")
    p.add_argument("--local", action="store_true", help="audit per-individual identity queries instead")

    p = command("synth", cmd_synth, "Quantizer level count for a budget.")
    dataset_flags(p, mech=False)
    p.add_argument("--epsilon")
    p.add_argument("--ymin")
    p.add_argument("--ymax")
    p.add_argument("--sens")
    p.add_argument("--rule", choices=("strict", "nominal"), default="strict")
    p.add_argument("--max-levels", default=str(2**20))
    p.add_argument("--grid-step")

    p = command("measure", cmd_measure, "Non-stochastic information measures of a relation.")
    p.add_argument("--relation", help='pairs "x:y,..." of the joint range')
    p.add_argument("--interval", help='interval union "lo..hi|lo..hi" for h0')
    p.add_argument("--prior", help='masses "x:p,..." for maximal leakage of a deterministic relation')

    p = command("hypothesis", cmd_hypothesis, "Best test between two values of one individual.")
    dataset_flags(p)
    target_flags(p)
    p.add_argument("--xa")
    p.add_argument("--xb")

    p = command("capacity", cmd_capacity, "Zero-error code search on an induced or built-in channel.")
    dataset_flags(p)
    target_flags(p)
    p.add_argument("--channel", help="built-in channel instead of a dataset (pentagon)")
    p.add_argument("--k-max", default="3")
    p.add_argument("--cap", default=str(10**6))

    p = command("t4check", cmd_t4check, "Monte Carlo estimation error against its lower bound.")
    dataset_flags(p)
    target_flags(p)
    p.add_argument("--p", default="2", help="error moment order")
    p.add_argument("--trials", default="100000")
    p.add_argument("--seed")

    p = command("game", cmd_game, "Membership-inference game; lists sweep a grid.", default_format="csv")
    p.add_argument("--policy", default="correlation", help="policy, comma list, or 'all'")
    p.add_argument("--n", default="4", help="group size or comma list")
    p.add_argument("--epsilon", default="2", help="budget, comma list, a..b range or inf")
    p.add_argument("--trials", default="2000")
    p.add_argument("--seed")
    p.add_argument("--panel", default="synthetic:300x48:1", help="synthetic:COUNTxHORIZON:SEED or a CSV path")
    p.add_argument("--horizon")

    p = command("panel", cmd_panel, "Write a synthetic or ingested panel as CSV.", default_format="csv")
    p.add_argument("--panel", help="synthetic:COUNTxHORIZON:SEED or a CSV path")
    return parser


def _parse(argv) -> argparse.Namespace:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command is None:
        raise UsageError(parser.format_usage())
    if args.config:
        sub = parser._subparsers._group_actions[0].choices[args.command]
        known = {a.dest for a in sub._actions}
        config = read_config(args.config)
        unknown = sorted(set(config) - known - {"config"})
        if unknown:
            raise UsageError(f"{args.config}: unknown key(s) {', '.join(unknown)} for {args.command}")
        flags = {a.dest for a in sub._actions if a.nargs == 0}
        for key in flags & set(config):
            if config[key].lower() not in ("true", "false"):
                raise UsageError(f"{args.config}: {key} must be true or false")
            config[key] = config[key].lower() == "true"
        sub.set_defaults(**config)
        args = parser.parse_args(argv)
    return args


def run(argv=None, stdout=None, stderr=None) -> int:
    """Execute one command; returns the process exit status."""
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    try:
        args = _parse(sys.argv[1:] if argv is None else list(argv))
        text = args.handler(args)
        if args.output:
            with open(args.output, "w", newline="\n") as fh:
                fh.write(text)
        else:
            stdout.write(text)
        return 0
    except (InvariantViolation, AssertionError) as exc:
        print(f"internal invariant violated: {exc}", file=stderr)
        return 2
    except (PreconditionError, DomainError, PanelFormatError, SearchLimitError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=stderr)
        return 1


def main() -> None:
    sys.exit(run())

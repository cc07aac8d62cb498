"""
Command-line harness - one subcommand per module.

Every command writes its result files under --out-dir plus a manifest.json
with sha256 digests of the outputs. Exit codes:

    0  success
    1  negative mathematical verdict (no factor, not a member, ...)
    2  usage error or ill-posed input
    3  budget exhausted before a verdict
"""
import argparse
import json
import logging
import sys
import time
from fractions import Fraction
from pathlib import Path
from typing import Any, Callable, Sequence

from pydantic import ValidationError

from src.config.settings import DEFAULT_BUDGET_MS, DEFAULT_SEED, LOG_FORMAT, LOG_LEVEL, SAMPLED_REGULARITY_TRIALS
from src.models.common import parse_rational
from src.models.factor import FactorCertificate
from src.models.gadget import GadgetDocument
from src.models.graph import GraphDocument, GraphError
from src.models.pipeline import PipelineConfig, Template
from src.models.regularity import RegularityParams
from src.services.factor_service import FactorError, IndivisibleTargetError, find_ct_factor, verify_factor
from src.services.gadget_service import (
    GadgetError,
    build_absorber,
    build_ct_tree,
    build_ladder,
    build_switcher,
    contract_fconn,
    remove_root_trees,
    verify_absorber_properties,
)
from src.services.graph_service import load_graph, load_partitioned, to_dot, two_density_exact, two_density_flow
from src.services.random_service import (
    RandomLabError,
    attack_half_cut,
    attack_second_neighborhood,
    empirical_edge_bound,
    empirical_k_expansion,
    sample_gnp,
)
from src.services.regularity_service import (
    RegularityError,
    check_gexp_membership,
    typical_fraction,
    typicality_census,
)
from src.services.report_service import (
    ReportError,
    emit_report,
    file_digest,
    role_color,
    write_manifest,
)
from src.services.template_service import TemplateError, build_template, find_failing_subset
from src.workflow import PipelineError, run_pipeline

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_NEGATIVE = 1
EXIT_USAGE = 2
EXIT_UNKNOWN = 3

# Domain errors raised for ill-posed input
INPUT_ERRORS = (
    GraphError,
    FactorError,
    GadgetError,
    RegularityError,
    RandomLabError,
    TemplateError,
    ReportError,
    ValidationError,
    FileNotFoundError,
    json.JSONDecodeError,
)

# Options that name input files; their digests go into the config hash
INPUT_OPTIONS = ("input", "config", "certificate")

Outcome = tuple[int, list[Path]]


def configure_logging(verbose: int) -> None:
    """WARNING by default (or LOG_LEVEL), INFO with -v, DEBUG with -vv; always to stderr."""
    if verbose >= 2:
        level: int | str = logging.DEBUG
    elif verbose == 1:
        level = logging.INFO
    else:
        level = LOG_LEVEL.upper()
    logging.basicConfig(level=level, format=LOG_FORMAT, stream=sys.stderr, force=True)


def _rational(text: str) -> Fraction:
    try:
        return parse_rational(text)
    except ValueError as e:
        raise argparse.ArgumentTypeError(str(e)) from e


def _status_code(status: str) -> int:
    return {"found": EXIT_OK, "none": EXIT_NEGATIVE}.get(status, EXIT_UNKNOWN)


def _result_stem(name: str) -> str:
    """File name for --out, without a .json, .csv or .dot suffix."""
    path = Path(name)
    return str(path.with_suffix("")) if path.suffix in (".json", ".csv", ".dot") else name


def _source_graph(args: argparse.Namespace):
    """Graph from --input, or a G(n, p) draw from --n/--p/--seed."""
    if args.input:
        return load_graph(args.input)
    if args.n is None or args.p is None:
        raise GraphError("give --input, or both --n and --p")
    return sample_gnp(args.n, args.p, args.seed).graph


# GADGET

def _build_gadget(args: argparse.Namespace):
    if args.kind == "ladder":
        if args.a is None or args.b is None or args.l is None:
            raise GadgetError("ladder needs --a, --b and --l")
        return build_ladder(args.a, args.b, args.l)
    if args.t is None or args.k is None:
        raise GadgetError(f"{args.kind} needs --t and --k")
    if args.kind in ("tree", "ct_tree"):
        return build_ct_tree(args.t, args.k)
    if args.kind == "switcher":
        return build_switcher(args.t, args.k)
    absorber = build_absorber(args.t, args.k)
    if args.kind == "fconn":
        return contract_fconn(absorber)
    if args.kind == "fabs_minus":
        return remove_root_trees(absorber)
    return absorber


def cmd_gadget_build(args: argparse.Namespace) -> Outcome:
    gadget = _build_gadget(args)
    doc = GadgetDocument.from_gadget(gadget)
    rows = [{"vertex": v, "role": r} for v, r in sorted(gadget.roles.items())]
    dot = to_dot(
        gadget.graph,
        roles=gadget.roles,
        colors={v: role_color(r) for v, r in gadget.roles.items()},
        name=gadget.kind,
    )
    path = emit_report(args.out_dir, "gadget", args.format, payload=doc.model_dump(mode="json"),
                       rows=rows, columns=["vertex", "role"], dot=dot)
    print(f"{gadget.kind}: {gadget.graph.n} vertices, {gadget.graph.num_edges} edges")
    return EXIT_OK, [path]


def cmd_gadget_verify(args: argparse.Namespace) -> Outcome:
    checks = verify_absorber_properties(args.t, args.k, budget_ms=args.budget_ms)
    rows = [check.model_dump() for check in checks]
    path = emit_report(args.out_dir, "properties", args.format, payload=rows, rows=rows,
                       columns=["name", "status", "detail"])
    for check in checks:
        print(f"{check.status:7} {check.name}")
    if any(check.status == "fail" for check in checks):
        return EXIT_NEGATIVE, [path]
    if any(check.status == "unknown" for check in checks):
        return EXIT_UNKNOWN, [path]
    return EXIT_OK, [path]


# M2

def cmd_m2(args: argparse.Namespace) -> Outcome:
    g = load_graph(args.input)
    result = two_density_exact(g) if args.method == "exact" else two_density_flow(g)
    path = emit_report(args.out_dir, "m2", args.format, payload=result.model_dump(mode="json"))
    print(result.value)
    return EXIT_OK, [path]


# FACTOR

def cmd_factor_solve(args: argparse.Namespace) -> Outcome:
    if args.parts:
        pg = load_partitioned(args.input)
        g, canonical = pg.graph, pg
    else:
        g, canonical = load_graph(args.input), None
    try:
        result = find_ct_factor(g, args.t, canonical_parts=canonical, budget_ms=args.budget_ms)
    except IndivisibleTargetError as e:
        # no factor can exist when n is not a multiple of t
        logger.info("factor search refused: %s", e)
        payload: dict[str, Any] = {"status": "none", "reason": str(e), "certificate": None}
    else:
        payload = result.model_dump(mode="json")
    path = emit_report(args.out_dir, "factor", args.format, payload=payload)
    print(payload["status"])
    return _status_code(payload["status"]), [path]


def _load_certificate(path: str) -> FactorCertificate:
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    if isinstance(data, dict) and "certificate" in data:
        data = data["certificate"]
    if data is None:
        raise GraphError(f"{path} carries no certificate")
    return FactorCertificate.model_validate(data)


def cmd_factor_verify(args: argparse.Namespace) -> Outcome:
    g = load_graph(args.input)
    cert = _load_certificate(args.certificate)
    valid = verify_factor(g, cert, args.t, range(g.n))
    path = emit_report(args.out_dir, "verify", args.format,
                       payload={"t": args.t, "cycles": len(cert.cycles), "valid": valid})
    print("valid" if valid else "invalid")
    return (EXIT_OK if valid else EXIT_NEGATIVE), [path]


# REGCHECK

def cmd_regcheck(args: argparse.Namespace) -> Outcome:
    pg = load_partitioned(args.input)
    params = RegularityParams(epsilon=args.epsilon, p=args.p, alpha=args.alpha)

    if args.census:
        census = typicality_census(pg, args.t, args.k, params, trials=args.trials, seed=args.seed)
        clauses = sorted({row.clause for row in census})
        by_vertex: dict[int, dict[str, Any]] = {}
        for row in census:
            entry = by_vertex.setdefault(row.vertex, {"vertex": row.vertex})
            entry[row.clause] = row.passed
        rows = []
        for v in sorted(by_vertex):
            entry = by_vertex[v]
            entry["typical"] = all(entry[c] for c in clauses)
            rows.append(entry)
        payload = {"fraction_typical": str(typical_fraction(census)), "rows": rows}
        path = emit_report(args.out_dir, "census", args.format, payload=payload, rows=rows,
                           columns=["vertex", *clauses, "typical"])
        print(f"typical fraction {payload['fraction_typical']}")
        return EXIT_OK, [path]

    report = check_gexp_membership(pg, args.t, args.k, params, trials=args.trials, seed=args.seed)
    payload = report.model_dump(mode="json")
    payload["member"] = report.member
    path = emit_report(args.out_dir, "membership", args.format, payload=payload)
    print("member" if report.member else f"not a member ({len(report.failing_vertices())} failing vertices, "
                                         f"{len(report.pair_failures)} failing pairs)")
    return (EXIT_OK if report.member else EXIT_NEGATIVE), [path]


# GNP

def cmd_gnp_sample(args: argparse.Namespace) -> Outcome:
    sample = sample_gnp(args.n, args.p, args.seed)
    doc = GraphDocument.from_graph(sample.graph)
    path = emit_report(args.out_dir, "gnp", args.format, payload=doc.model_dump(mode="json"),
                       dot=to_dot(sample.graph, name="gnp"))
    print(f"G({sample.n}, {sample.p}): {sample.edge_count} edges")
    return EXIT_OK, [path]


def cmd_gnp_probe(args: argparse.Namespace) -> Outcome:
    sample = sample_gnp(args.n, args.p, args.seed)
    # probe draws use their own stream, apart from the sampler's per-row keys
    probe_seed = args.seed + 1
    if args.probe == "edge-bound":
        report = empirical_edge_bound(sample, args.trials, args.c, probe_seed)
    else:
        report = empirical_k_expansion(sample, args.k, args.nu, args.trials, probe_seed)
    rows = [row.model_dump(by_alias=True) for row in report.rows]
    payload = report.model_dump(mode="json", by_alias=True)
    payload["pass_rate"] = report.pass_rate
    path = emit_report(args.out_dir, "probe", args.format, payload=payload, rows=rows,
                       columns=["trial", "quantity", "threshold", "pass"])
    print(f"{report.probe} ({report.regime}): {report.violations}/{len(report.rows)} violations")
    return EXIT_OK, [path]


# ATTACK

def cmd_attack_second_neighborhood(args: argparse.Namespace) -> Outcome:
    g = _source_graph(args)
    _, report = attack_second_neighborhood(g, args.vertex)
    path = emit_report(args.out_dir, "attack", args.format, payload=report.model_dump(mode="json"))
    print(f"vertex {report.target[0]} on C5 afterwards: {report.post_value}; "
          f"max deleted-degree fraction {float(report.max_deleted_degree_fraction):.4f}")
    return EXIT_OK, [path]


def cmd_attack_half_cut(args: argparse.Namespace) -> Outcome:
    g = _source_graph(args)
    _, report = attack_half_cut(g, args.t, seed=args.seed if args.random_cut else None,
                                budget_ms=args.budget_ms)
    path = emit_report(args.out_dir, "attack", args.format, payload=report.model_dump(mode="json"))
    print(f"{report.post_property} afterwards: {report.post_status}")
    return (EXIT_UNKNOWN if report.post_status == "unknown" else EXIT_OK), [path]


# PIPELINE

def cmd_pipeline_run(args: argparse.Namespace) -> Outcome:
    data = json.loads(Path(args.config).read_text(encoding="utf-8"))
    if args.seed_given:
        data["seed"] = args.seed
    if args.budget_given:
        for key in ("template_budget_ms", "embed_budget_ms", "bulk_budget_ms", "leftover_budget_ms"):
            data[key] = args.budget_ms
    cfg = PipelineConfig.model_validate(data)
    pg = load_partitioned(args.input)

    stem = _result_stem(args.out)
    try:
        result = run_pipeline(pg, cfg)
    except PipelineError as e:
        trace = [step.model_dump(mode="json") for step in e.partial.get("trace", [])]
        payload = {"status": "failed", "phase": e.phase, "message": e.message, "trace": trace, "certificate": None}
        path = emit_report(args.out_dir, stem, args.format, payload=payload)
        print(f"[error] pipeline failed in {e.phase}: {e.message}", file=sys.stderr)
        return EXIT_NEGATIVE, [path]

    payload = result.model_dump(mode="json")
    payload["status"] = "found"
    path = emit_report(args.out_dir, stem, args.format, payload=payload)
    print(f"C_{cfg.t}-factor with {len(result.certificate.cycles)} cycles (m={result.m})")
    return EXIT_OK, [path]


# TEMPLATE

def cmd_template_build(args: argparse.Namespace) -> Outcome:
    tpl = build_template(args.t, args.m, max_degree=args.max_degree, seed=args.seed, verify_cap=args.verify_cap)
    path = emit_report(args.out_dir, "template", args.format, payload=tpl.model_dump(mode="json"))
    print(f"template t={tpl.t} m={tpl.m}: {len(tpl.edges)} edges, Δ={tpl.degree()}, verified={tpl.verified}")
    return EXIT_OK, [path]


def cmd_template_verify(args: argparse.Namespace) -> Outcome:
    tpl = Template.model_validate_json(Path(args.input).read_text(encoding="utf-8"))
    failing = find_failing_subset(tpl)
    payload = {"t": tpl.t, "m": tpl.m, "valid": failing is None,
               "failing_subset": sorted(failing) if failing is not None else None}
    path = emit_report(args.out_dir, "template_verify", args.format, payload=payload)
    print("valid" if failing is None else f"invalid: Z={sorted(failing)}")
    return (EXIT_OK if failing is None else EXIT_NEGATIVE), [path]


# PARSER

def _common_options() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None, help=f"master seed (default {DEFAULT_SEED})")
    common.add_argument("--budget-ms", type=int, default=None,
                        help=f"time budget in milliseconds (default {DEFAULT_BUDGET_MS})")
    common.add_argument("--out-dir", type=Path, default=Path("out"), help="directory for result files")
    common.add_argument("--format", choices=["json", "csv", "dot"], default="json", help="result file format")
    common.add_argument("-v", "--verbose", action="count", default=0, help="-v for INFO, -vv for DEBUG")
    return common


def build_parser() -> argparse.ArgumentParser:
    common = _common_options()
    parser = argparse.ArgumentParser(prog="cycle-factors", description="Cycle-factor and absorbing-method toolkit")
    commands = parser.add_subparsers(dest="command", required=True)

    def leaf(sub, name: str, handler: Callable[[argparse.Namespace], Outcome], help_text: str):
        p = sub.add_parser(name, parents=[common], help=help_text)
        p.set_defaults(handler=handler)
        return p

    # gadget build|verify
    gadget = commands.add_parser("gadget", help="build or verify gadgets").add_subparsers(dest="action", required=True)
    p = leaf(gadget, "build", cmd_gadget_build, "build a gadget")
    p.add_argument("--kind", choices=["tree", "ct_tree", "ladder", "switcher", "absorber", "fconn", "fabs_minus"],
                   default="absorber")
    p.add_argument("--t", type=int)
    p.add_argument("--k", type=int)
    p.add_argument("--a", type=int)
    p.add_argument("--b", type=int)
    p.add_argument("--l", type=int)
    p = leaf(gadget, "verify", cmd_gadget_verify, "run the absorber property suite")
    p.add_argument("--t", type=int, required=True)
    p.add_argument("--k", type=int, required=True)

    # m2
    p = leaf(commands, "m2", cmd_m2, "exact 2-density of a graph")
    p.add_argument("--input", required=True)
    p.add_argument("--method", choices=["flow", "exact"], default="flow")

    # factor solve|verify
    factor = commands.add_parser("factor", help="C_t-factor search").add_subparsers(dest="action", required=True)
    p = leaf(factor, "solve", cmd_factor_solve, "search for a C_t-factor")
    p.add_argument("--t", type=int, required=True)
    p.add_argument("--input", required=True)
    p.add_argument("--parts", action="store_true", help="input is partitioned; use canonical copies only")
    p = leaf(factor, "verify", cmd_factor_verify, "check a certificate")
    p.add_argument("--t", type=int, required=True)
    p.add_argument("--input", required=True)
    p.add_argument("--certificate", required=True)

    # regcheck
    p = leaf(commands, "regcheck", cmd_regcheck, "G_exp^k membership or typicality census")
    p.add_argument("--input", required=True)
    p.add_argument("--t", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--epsilon", type=_rational, default=Fraction(1, 10))
    p.add_argument("--p", type=_rational, default=Fraction(1))
    p.add_argument("--alpha", type=_rational, default=Fraction(1))
    p.add_argument("--trials", type=int, default=SAMPLED_REGULARITY_TRIALS)
    p.add_argument("--census", action="store_true", help="per-vertex typicality table instead of membership")

    # gnp sample|probe
    gnp = commands.add_parser("gnp", help="random graph experiments").add_subparsers(dest="action", required=True)
    p = leaf(gnp, "sample", cmd_gnp_sample, "draw G(n, p)")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--p", required=True, help='density, e.g. "0.1", "1/20", "n^-3/5", "10*ln(n)/n"')
    p = leaf(gnp, "probe", cmd_gnp_probe, "empirical edge-bound or k-expansion probe")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--p", required=True)
    p.add_argument("--probe", choices=["edge-bound", "k-expansion"], required=True)
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--c", type=float, default=4.0)
    p.add_argument("--k", type=int, default=2)
    p.add_argument("--nu", type=_rational, default=Fraction(1, 10))

    # attack second-neighborhood|half-cut
    attack = commands.add_parser("attack", help="resilience attacks").add_subparsers(dest="action", required=True)
    for name, handler in (("second-neighborhood", cmd_attack_second_neighborhood), ("half-cut", cmd_attack_half_cut)):
        p = leaf(attack, name, handler, f"{name} attack")
        p.add_argument("--input")
        p.add_argument("--n", type=int)
        p.add_argument("--p")
    attack.choices["second-neighborhood"].add_argument("--vertex", type=int)
    attack.choices["half-cut"].add_argument("--t", type=int, required=True)
    attack.choices["half-cut"].add_argument("--random-cut", action="store_true", help="seeded random cut side")

    # pipeline run
    pipeline = commands.add_parser("pipeline", help="absorbing pipeline").add_subparsers(dest="action", required=True)
    p = leaf(pipeline, "run", cmd_pipeline_run, "run every phase and write the certificate")
    p.add_argument("--config", required=True, help="PipelineConfig JSON")
    p.add_argument("--input", required=True, help="partitioned host graph JSON")
    p.add_argument("--out", default="certificate", help="result file name; a .json, .csv or .dot suffix is optional")

    # template build|verify
    template = commands.add_parser("template", help="template hypergraphs").add_subparsers(dest="action", required=True)
    p = leaf(template, "build", cmd_template_build, "build a template")
    p.add_argument("--t", type=int, required=True)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--max-degree", type=int)
    p.add_argument("--verify-cap", type=int)
    p = leaf(template, "verify", cmd_template_verify, "exhaustively verify a template")
    p.add_argument("--input", required=True)

    return parser


def _options_for_manifest(args: argparse.Namespace) -> dict[str, Any]:
    options = {}
    for key, value in sorted(vars(args).items()):
        if key in ("handler", "verbose", "seed_given", "budget_given"):
            continue
        options[key] = value if isinstance(value, (int, float, bool, type(None))) else str(value)
    for key in INPUT_OPTIONS:
        if getattr(args, key, None):
            options[f"{key}_sha256"] = file_digest(Path(getattr(args, key)))
    return options


def dispatch(argv: Sequence[str] | None = None) -> int:
    """
    Parse argv, run one subcommand and write its outputs and manifest.

    Returns:
        Exit code (0 ok, 1 negative verdict, 2 usage, 3 unknown)
    """
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_USAGE if e.code else EXIT_OK

    configure_logging(args.verbose)
    args.seed_given = args.seed is not None
    args.budget_given = args.budget_ms is not None
    if not args.seed_given:
        args.seed = DEFAULT_SEED
    if not args.budget_given:
        args.budget_ms = DEFAULT_BUDGET_MS
    if args.seed < 0:
        print("[error] --seed must be non-negative", file=sys.stderr)
        return EXIT_USAGE

    started = time.monotonic()
    try:
        code, outputs = args.handler(args)
    except INPUT_ERRORS as e:
        print(f"[error] {e}", file=sys.stderr)
        return EXIT_USAGE

    write_manifest(
        args.out_dir,
        command=argv,
        options=_options_for_manifest(args),
        seed=args.seed,
        outputs=outputs,
        wall_time_s=time.monotonic() - started,
        exit_code=code,
    )
    return code


def main() -> int:
    return dispatch()

"""Command-line interface.

Exit codes: 0 success / healthy, 1 repair triggered (``diagnose`` only), 2 error.
"""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from typing import Optional, Sequence

from . import __version__
from .agent import LlmClientSpec, refine_via_llm
from .analysis import format_correlation_table, format_w1_table, spearman_matrix, transfer_report
from .config import ConfigError, GlobalConfig, load_config
from .fixtures import GEN_PARADIGMS, generate
from .graph import build_graph
from .health import HealthBase, HealthBaseError, InsufficientDataError, load_base, save_base
from .homology import trace_persistence
from .indicators import METRIC_LABELS, METRICS
from .pipeline import build_base, diagnose, profile_corpus, profile_trace
from .trace import TraceError, load_corpus, parse_trace, sequential_deps, write_corpus

EXIT_OK, EXIT_TRIGGERED, EXIT_ERROR = 0, 1, 2

log = logging.getLogger("reasontopo")


class CliError(Exception):
    pass


def _dumps(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def _cfg(args) -> GlobalConfig:
    overrides = {
        "format": getattr(args, "format", None),
        "quantile_cfg": getattr(args, "quantiles", None),
        "band_mode": getattr(args, "mode", None),
        "base": getattr(args, "base", None),
        "w_threshold": getattr(args, "w_threshold", None),
    }
    return load_config(args.config, overrides)


def _read_trace(path: str):
    with open(path, "rb") as fh:
        trace = parse_trace(fh)
    return trace


def _select(traces, labels: str, task: Optional[str] = None):
    out = [t for t in traces if (labels == "all" or t.label == "correct") and (task is None or t.task_type == task)]
    if not out:
        raise CliError("no traces left after filtering (labels=%s%s)" % (labels, f", task={task}" if task else ""))
    return out


def _fmt_profile(p) -> str:
    return "".join(f"{METRIC_LABELS[m]:<14}{p[m]:.6f}\n" for m in METRICS)


def cmd_profile(args, out) -> int:
    cfg = _cfg(args)
    trace = _read_trace(args.trace)
    if args.sequential:
        trace = sequential_deps(trace)
    prof = profile_trace(trace, cfg)
    if args.dump_graph:
        with open(args.dump_graph, "w", encoding="utf-8") as fh:
            fh.write(build_graph(trace, cfg.distance, cfg.w_threshold).dump())
    if args.dump_diagram:
        with open(args.dump_diagram, "w", encoding="utf-8") as fh:
            fh.write(trace_persistence(trace, cfg.distance, cfg.w_threshold).dump())
    out.write(_dumps(prof.to_dict()) if cfg.format == "json" else _fmt_profile(prof))
    return EXIT_OK


def cmd_build_bands(args, out) -> int:
    cfg = _cfg(args)
    path = cfg.base
    if not path:
        raise CliError("build-bands needs --base (output health base path)")
    traces = load_corpus(args.corpus)
    base = load_base(path) if os.path.exists(path) and not args.overwrite else HealthBase()
    base = build_base(traces, args.task, cfg, base, corpus_id=os.path.basename(args.corpus))
    save_base(base, path)
    bands = base.bands(args.task)
    if cfg.format == "json":
        out.write(_dumps({"task": args.task, "base": path, "bands": {m: bands[m].to_dict() for m in METRICS}}))
    else:
        out.write(f"task {args.task}: {base.provenance[args.task]['n_traces']} correct traces -> {path}\n")
        for m in METRICS:
            b = bands[m]
            out.write(f"{METRIC_LABELS[m]:<14}[{b.lower:.4f}, {b.upper:.4f}]  sigma={b.sigma:.4f}  {b.mode}\n")
    return EXIT_OK


def cmd_diagnose(args, out) -> int:
    cfg = _cfg(args)
    if not cfg.base:
        raise CliError("diagnose needs --base (health base path)")
    base = load_base(cfg.base)
    trace = _read_trace(args.trace)
    if args.sequential:
        trace = sequential_deps(trace)
    task = args.task or trace.task_type
    bands_task = args.bands_from or task
    if bands_task not in base.entries:
        raise CliError(f"task {bands_task!r} not present in health base {cfg.base}")
    result = diagnose(trace, base, task, cfg, question=args.question, prompt=args.prompt, bands_task=bands_task)
    if args.llm_endpoint:
        client = LlmClientSpec(endpoint=args.llm_endpoint, model=args.llm_model, timeout=args.llm_timeout,
                               token_env=args.llm_token_env)
        report = refine_via_llm(result.report, client, task_type=task,
                                question=args.question if args.question is not None else (trace.question or ""),
                                original_prompt=args.prompt if args.prompt is not None else (trace.prompt or ""),
                                features=result.profile.to_dict(), bands=base.bands(bands_task))
        result = type(result)(task=result.task, profile=result.profile, deviation=result.deviation, report=report)
    if cfg.format == "json":
        out.write(_dumps(result.to_dict()))
    else:
        dev, rep = result.deviation, result.report
        out.write(f"task: {task}" + (f" (bands from {bands_task})" if bands_task != task else "") + "\n")
        out.write(f"triggered: {'yes' if dev.triggered else 'no'}  severity: {dev.severity:.4f}  "
                  f"violations: {dev.violations}\n")
        bands = base.bands(bands_task)
        for m in METRICS:
            b = bands[m]
            out.write(f"{METRIC_LABELS[m]:<14}{dev.values[m]:>10.4f}  [{b.lower:.4f}, {b.upper:.4f}]  "
                      f"e={dev.e[m]:.4f}\n")
        out.write("\n[diagnosis]\n" + rep.r_diag + "\n\n[analysis]\n" + rep.r_analysis +
                  "\n\n[prompt]\n" + rep.r_prompt + "\n")
        if rep.fallback:
            out.write(f"\n[note] LLM refinement fell back to the deterministic report: {rep.note}\n")
    return EXIT_TRIGGERED if result.deviation.triggered else EXIT_OK


def cmd_compare(args, out) -> int:
    cfg = _cfg(args)
    a = _select(load_corpus(args.corpus_a), args.labels, args.task)
    b = _select(load_corpus(args.corpus_b), args.labels, args.task)
    w1 = transfer_report(profile_corpus(a, cfg), profile_corpus(b, cfg))
    name = f"{os.path.basename(args.corpus_a)}->{os.path.basename(args.corpus_b)}"
    if cfg.format == "json":
        out.write(_dumps({"scale": "raw", "pair": name, "w1": w1}))
    else:
        out.write(format_w1_table({name: w1}))
    return EXIT_OK


def cmd_correlate(args, out) -> int:
    cfg = _cfg(args)
    traces = _select(load_corpus(args.corpus), args.labels, args.task)
    cm = spearman_matrix(profile_corpus(traces, cfg))
    out.write(_dumps(cm.to_dict()) if cfg.format == "json" else format_correlation_table(cm))
    return EXIT_OK


def cmd_gen_fixtures(args, out) -> int:
    traces = generate(args.paradigm, args.n, args.seed, task_type=args.task or "synthetic")
    if args.output and args.output != "-":
        with open(args.output, "w", encoding="utf-8") as fh:
            write_corpus(traces, fh)
    else:
        write_corpus(traces, out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="TOML config file")
    common.add_argument("--format", choices=("text", "json"), help="output format")
    common.add_argument("--w-threshold", type=float, dest="w_threshold",
                        help="edge weight at which non-cited step pairs are linked")

    parser = argparse.ArgumentParser(prog="reasontopo", description="Topological diagnosis of reasoning traces.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("profile", parents=[common], help="six-indicator profile of one trace")
    p.add_argument("trace")
    p.add_argument("--sequential", action="store_true", help="add implicit i-1 -> i dependencies first")
    p.add_argument("--dump-graph", metavar="FILE")
    p.add_argument("--dump-diagram", metavar="FILE")
    p.set_defaults(func=cmd_profile)

    p = sub.add_parser("build-bands", parents=[common], help="fit health bands from a corpus")
    p.add_argument("corpus")
    p.add_argument("--task", required=True)
    p.add_argument("--base", help="health base file to create or update")
    p.add_argument("--quantiles", choices=("Q1Q3", "Q1Q4", "Q2Q3", "Q2Q4"))
    p.add_argument("--mode", choices=("auto", "gaussian", "iqr"))
    p.add_argument("--overwrite", action="store_true", help="start a fresh base instead of updating")
    p.set_defaults(func=cmd_build_bands)

    p = sub.add_parser("diagnose", parents=[common], help="score a trace and render the repair report")
    p.add_argument("trace")
    p.add_argument("--base")
    p.add_argument("--task", help="task type (defaults to the trace's task_type)")
    p.add_argument("--bands-from", dest="bands_from", help="diagnose with another task's bands")
    p.add_argument("--question")
    p.add_argument("--prompt")
    p.add_argument("--sequential", action="store_true")
    p.add_argument("--llm-endpoint", dest="llm_endpoint")
    p.add_argument("--llm-model", dest="llm_model", default="default")
    p.add_argument("--llm-timeout", dest="llm_timeout", type=float, default=30.0)
    p.add_argument("--llm-token-env", dest="llm_token_env", help="environment variable holding the API token")
    p.set_defaults(func=cmd_diagnose)

    for name, helptext, func in (("compare", "per-metric W1 between two corpora", cmd_compare),
                                 ("correlate", "Spearman matrix of the six metrics", cmd_correlate)):
        p = sub.add_parser(name, parents=[common], help=helptext)
        if name == "compare":
            p.add_argument("corpus_a")
            p.add_argument("corpus_b")
        else:
            p.add_argument("corpus")
        p.add_argument("--task", help="restrict to one task type")
        p.add_argument("--labels", choices=("correct", "all"), default="correct")
        p.set_defaults(func=func)

    p = sub.add_parser("gen-fixtures", parents=[common], help="write a synthetic corpus")
    p.add_argument("--paradigm", choices=GEN_PARADIGMS, required=True)
    p.add_argument("-n", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--task")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_gen_fixtures)
    return parser


def main(argv: Optional[Sequence[str]] = None, out=None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_OK
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args, out)
    except (TraceError, HealthBaseError, InsufficientDataError, ConfigError, CliError, OSError,
            KeyError, ValueError) as exc:
        msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
        print(f"reasontopo: error: {msg}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())

"""Command-line interface: sampling, exact tables, verification, benchmarks.

Exit codes: 0 on success, 1 on validation/usage errors, 2 when a size cap
or a retry/rejection budget is exhausted.  Every run writes a manifest
next to its outputs; identical manifests reproduce outputs byte for byte.
"""

from __future__ import annotations

import json
import math
import sys
import time
from pathlib import Path

import click
import numpy as np

from . import formats
from .bs import BsRequest, gadget_bias_report, sample_bs_batch
from .corpus import random_graph
from .errors import (
    AnnealDiverged,
    DimensionError,
    NoPerfectMatching,
    NotPerfect,
    NotSymmetric,
    RejectionBudgetExceeded,
    RetryBudgetExceeded,
    SizeLimit,
    ZeroNormalizer,
)
from .exact import (
    enumerate_matchings,
    exact_bs_distribution,
    exact_gadget_distribution,
    exact_gbs_distribution,
)
from .gbs import GbsRequest, acceptance_rate_probe, sample_gbs_batch
from .graphs import bs_gadget
from .matching_chain import ChainConfig, required_steps
from .verify import corpus_chain_config, empirical_distribution, run_all

_VALIDATION_ERRORS = (
    ValueError,
    DimensionError,
    NotPerfect,
    NotSymmetric,
    ZeroNormalizer,
    NoPerfectMatching,
    FileNotFoundError,
)
_BUDGET_ERRORS = (SizeLimit, RetryBudgetExceeded, RejectionBudgetExceeded, AnnealDiverged)


def _fail(exc: BaseException, code: int) -> None:
    click.echo(f"error: {exc}", err=True)
    sys.exit(code)


def _guard(fn, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except _BUDGET_ERRORS as exc:
        _fail(exc, 2)
    except _VALIDATION_ERRORS as exc:
        _fail(exc, 1)


def _print_version(ctx, param, value):
    if not value or ctx.resilient_parsing:
        return
    click.echo(f"bosonmatch {formats.ARTIFACT_VERSION} (format {formats.FORMAT_VERSION})")
    ctx.exit(0)


@click.group()
@click.option("--version", is_flag=True, callback=_print_version, expose_value=False, is_eager=True,
              help="Print artifact and format versions and exit.")
def main() -> None:
    """Classical samplers for matching-based boson-sampling distributions."""


def _chain_config(seed: int, epsilon: float, step_constant: float, max_steps: int | None) -> ChainConfig:
    return ChainConfig(
        seed=seed, epsilon=epsilon, step_constant=step_constant, max_steps_override=max_steps
    )


@main.command("sample-gbs")
@click.option("--graph", "graph_path", required=True, type=click.Path(exists=True))
@click.option("--c", "c", required=True, type=float, help="Subset-size scale, c > 0.")
@click.option("--epsilon", default=0.05, show_default=True, type=float)
@click.option("--samples", required=True, type=int)
@click.option("--seed", default=0, show_default=True, type=int)
@click.option("--out", "out_path", required=True, type=click.Path())
@click.option("--step-constant", default=1.0, show_default=True, type=float)
@click.option("--max-steps", default=None, type=int, help="Override the step formula.")
@click.option("--desk-steps", is_flag=True,
              help="Use the empirically calibrated desk-scale step budget.")
@click.option("--summary", "summary_path", default=None, type=click.Path(),
              help="Also write the empirical distribution table as JSON.")
@click.option("--workers", default=1, show_default=True, type=int)
def sample_gbs_cmd(graph_path, c, epsilon, samples, seed, out_path, step_constant,
                   max_steps, desk_steps, summary_path, workers):
    """Sample vertex subsets; one sorted JSON list per output line."""
    if samples < 1:
        _fail(ValueError("samples must be >= 1"), 1)
    g = _guard(formats.load_graph, graph_path)
    if desk_steps and max_steps is None:
        chain = _guard(corpus_chain_config, g, c, min(0.25, epsilon / 2), seed)
    else:
        chain = _guard(_chain_config, seed, min(0.25, epsilon / 2), step_constant, max_steps)
    req = _guard(GbsRequest, graph=g, c=c, epsilon=epsilon, chain=chain)
    draws = _guard(sample_gbs_batch, req, samples, workers=workers)
    lines = [json.dumps(sorted(s)) for s in draws]
    formats.atomic_write_text(out_path, "\n".join(lines) + "\n")
    manifest = formats.build_manifest(
        "sample-gbs",
        {"graph": graph_path},
        seed,
        {
            "c": c,
            "epsilon": epsilon,
            "samples": samples,
            "step_constant": step_constant,
            "max_steps": max_steps,
            "desk_steps": desk_steps,
            "workers": workers,
        },
    )
    formats.write_manifest(manifest, out_path)
    if summary_path:
        table = empirical_distribution(tuple(sorted(s)) for s in draws)
        formats.atomic_write_text(
            summary_path, json.dumps(formats.table_to_json(table), indent=2) + "\n"
        )
    click.echo(f"wrote {samples} samples to {out_path}")


@main.command("sample-bs")
@click.option("--matrix", "matrix_path", required=True, type=click.Path(exists=True))
@click.option("--epsilon", default=0.1, show_default=True, type=float)
@click.option("--samples", required=True, type=int)
@click.option("--seed", default=0, show_default=True, type=int)
@click.option("--out", "out_path", required=True, type=click.Path())
@click.option("--k", "k_override", default=None, type=int, help="Override the copy count.")
@click.option("--pm-weight-mode", default="auto", show_default=True,
              type=click.Choice(["auto", "oracle", "anneal"]))
@click.option("--anneal-stages", default=8, show_default=True, type=int)
@click.option("--retry-budget", default=None, type=int)
@click.option("--retry-steps", default=None, type=int)
@click.option("--step-constant", default=1.0, show_default=True, type=float)
@click.option("--max-steps", default=None, type=int)
@click.option("--summary", "summary_path", default=None, type=click.Path())
@click.option("--workers", default=1, show_default=True, type=int)
def sample_bs_cmd(matrix_path, epsilon, samples, seed, out_path, k_override, pm_weight_mode,
                  anneal_stages, retry_budget, retry_steps, step_constant, max_steps,
                  summary_path, workers):
    """Sample occupancy patterns; one length-m JSON list per output line."""
    if samples < 1:
        _fail(ValueError("samples must be >= 1"), 1)
    a = _guard(formats.load_matrix, matrix_path)
    chain = _guard(_chain_config, seed, epsilon / 2, step_constant, max_steps)
    req = _guard(BsRequest, matrix=a, epsilon=epsilon, chain=chain, k_override=k_override)
    draws = _guard(
        sample_bs_batch,
        req,
        samples,
        workers=workers,
        pm_weight_mode=pm_weight_mode,
        anneal_stages=anneal_stages,
        retry_budget=retry_budget,
        retry_steps=retry_steps,
    )
    lines = [json.dumps(list(z)) for z in draws]
    formats.atomic_write_text(out_path, "\n".join(lines) + "\n")
    manifest = formats.build_manifest(
        "sample-bs",
        {"matrix": matrix_path},
        seed,
        {
            "epsilon": epsilon,
            "samples": samples,
            "k": k_override,
            "pm_weight_mode": pm_weight_mode,
            "anneal_stages": anneal_stages,
            "retry_budget": retry_budget,
            "retry_steps": retry_steps,
            "step_constant": step_constant,
            "max_steps": max_steps,
            "workers": workers,
        },
    )
    formats.write_manifest(manifest, out_path)
    if summary_path:
        table = empirical_distribution(draws)
        formats.atomic_write_text(
            summary_path, json.dumps(formats.table_to_json(table), indent=2) + "\n"
        )
    click.echo(f"wrote {samples} samples to {out_path}")


@main.group("exact")
def exact_group() -> None:
    """Exact brute-force tables (desk scale)."""


def _emit_table(table, out_path: str | None) -> None:
    text = json.dumps(formats.table_to_json(table), indent=2) + "\n"
    if out_path:
        formats.atomic_write_text(out_path, text)
        click.echo(f"wrote table to {out_path}")
    else:
        click.echo(text, nl=False)


@exact_group.command("gbs")
@click.option("--graph", "graph_path", required=True, type=click.Path(exists=True))
@click.option("--c", "c", required=True, type=float)
@click.option("--out", "out_path", default=None, type=click.Path())
def exact_gbs_cmd(graph_path, c, out_path):
    g = _guard(formats.load_graph, graph_path)
    table = _guard(exact_gbs_distribution, g, c)
    _emit_table(table, out_path)


@exact_group.command("bs")
@click.option("--matrix", "matrix_path", required=True, type=click.Path(exists=True))
@click.option("--out", "out_path", default=None, type=click.Path())
def exact_bs_cmd(matrix_path, out_path):
    a = _guard(formats.load_matrix, matrix_path)
    table = _guard(exact_bs_distribution, a)
    _emit_table(table, out_path)


@exact_group.command("gadget")
@click.option("--matrix", "matrix_path", required=True, type=click.Path(exists=True))
@click.option("--k", "k", required=True, type=int)
@click.option("--out", "out_path", default=None, type=click.Path())
def exact_gadget_cmd(matrix_path, k, out_path):
    a = _guard(formats.load_matrix, matrix_path)
    gadget = _guard(bs_gadget, a, k)
    table = _guard(exact_gadget_distribution, gadget)
    _emit_table(table, out_path)


@exact_group.command("matchings")
@click.option("--graph", "graph_path", required=True, type=click.Path(exists=True))
@click.option("--out", "out_path", default=None, type=click.Path())
def exact_matchings_cmd(graph_path, out_path):
    """Matchings grouped by size, with per-size counts."""
    g = _guard(formats.load_graph, graph_path)
    grouped = _guard(enumerate_matchings, g)
    payload = {
        "sizes": {str(k): len(v) for k, v in sorted(grouped.items())},
        "matchings": {
            str(k): [sorted(m.edges) for m in v] for k, v in sorted(grouped.items())
        },
    }
    text = json.dumps(payload, indent=2) + "\n"
    if out_path:
        formats.atomic_write_text(out_path, text)
        click.echo(f"wrote matchings to {out_path}")
    else:
        click.echo(text, nl=False)


@main.command("bias-report")
@click.option("--matrix", "matrix_path", required=True, type=click.Path(exists=True))
@click.option("--k", "k", required=True, type=int)
@click.option("--out", "out_path", default=None, type=click.Path())
def bias_report_cmd(matrix_path, k, out_path):
    """Per-pattern multiplicative gadget bias as CSV."""
    a = _guard(formats.load_matrix, matrix_path)
    report = _guard(gadget_bias_report, a, k)
    lines = ["pattern,factor"]
    for z, f in sorted(report.items()):
        lines.append(f"\"{' '.join(str(x) for x in z)}\",{f!r}")
    text = "\n".join(lines) + "\n"
    if out_path:
        formats.atomic_write_text(out_path, text)
        click.echo(f"wrote bias report to {out_path}")
    else:
        click.echo(text, nl=False)


_CHECK_SETS = {
    "all": ("lemma2", "logconcavity", "pm-percent", "tv-gbs", "tv-bs", "gadget-bias"),
    "lemma2": ("lemma2",),
    "logconcavity": ("logconcavity",),
    "pm-percent": ("pm-percent",),
    "tv-gbs": ("tv-gbs",),
    "tv-bs": ("tv-bs",),
    "gadget-bias": ("gadget-bias",),
}


@main.command("verify")
@click.argument("which", type=click.Choice(sorted(_CHECK_SETS)))
@click.option("--corpus-max-n", default=6, show_default=True, type=int)
@click.option("--samples", default=100_000, show_default=True, type=int)
@click.option("--probe-trials", default=10_000, show_default=True, type=int)
@click.option("--seed", default=20250810, show_default=True, type=int)
@click.option("--out", "out_path", default=None, type=click.Path(),
              help="JSONL report file (default: stdout).")
@click.option("--workers", default=1, show_default=True, type=int)
def verify_cmd(which, corpus_max_n, samples, probe_trials, seed, out_path, workers):
    """Run verification checks; exit 0 iff every report passes."""
    reports = _guard(
        run_all,
        checks=_CHECK_SETS[which],
        corpus_max_n=corpus_max_n,
        samples=samples,
        probe_trials=probe_trials,
        seed=seed,
        workers=workers,
        progress=lambda msg: click.echo(f"# {msg}", err=True),
    )
    lines = [json.dumps(r.as_dict(), sort_keys=True) for r in reports]
    if out_path:
        formats.atomic_write_text(out_path, "\n".join(lines) + "\n")
    else:
        for line in lines:
            click.echo(line)
    failed = [r for r in reports if not r.passed]
    click.echo(f"{len(reports) - len(failed)}/{len(reports)} checks passed", err=True)
    if failed:
        for r in failed:
            click.echo(f"FAIL {r.check_name} {r.corpus_item}", err=True)
        sys.exit(1)


@main.command("bench")
@click.argument("which", type=click.Choice(["gbs", "bs"]))
@click.option("--sizes", default="4,6,8", show_default=True,
              help="Comma-separated vertex counts (gbs) or row counts (bs).")
@click.option("--samples", default=200, show_default=True, type=int)
@click.option("--epsilon", default=0.1, show_default=True, type=float)
@click.option("--c", "c", default=1.0, show_default=True, type=float)
@click.option("--seed", default=1, show_default=True, type=int)
@click.option("--out", "out_path", default=None, type=click.Path())
def bench_cmd(which, sizes, samples, epsilon, c, seed, out_path):
    """Timing grid; CSV of (n, m, c, epsilon, seconds/sample, steps, acceptance)."""
    size_list = [int(s) for s in sizes.split(",") if s]
    rows = ["n,m,c,epsilon,sec_per_sample,chain_steps,acceptance_rate"]
    points = []
    for n in size_list:
        if which == "gbs":
            g = random_graph(n, 0.5, seed + n)
            chain = corpus_chain_config(g, c, min(0.25, epsilon / 2), seed)
            req = GbsRequest(graph=g, c=c, epsilon=epsilon, chain=chain)
            steps = chain.max_steps_override
            t0 = time.perf_counter()
            _guard(sample_gbs_batch, req, samples)
            dt = (time.perf_counter() - t0) / samples
            rate = _guard(acceptance_rate_probe, req, max(200, samples))
            rows.append(f"{n},{g.edge_count},{c},{epsilon},{dt!r},{steps},{rate!r}")
        else:
            a = np.ones((n, 2))
            chain = ChainConfig(seed=seed, epsilon=epsilon / 2)
            req = BsRequest(matrix=a, epsilon=epsilon, chain=chain, k_override=2)
            from .verify import gadget_chain_plan

            gadget = bs_gadget(a, 2)
            burn, retry = gadget_chain_plan(gadget.graph, gadget.part_size)
            chain = ChainConfig(seed=seed, epsilon=epsilon / 2, max_steps_override=burn)
            req = BsRequest(matrix=a, epsilon=epsilon, chain=chain, k_override=2)
            t0 = time.perf_counter()
            _guard(sample_bs_batch, req, samples, retry_budget=8192, retry_steps=retry)
            dt = (time.perf_counter() - t0) / samples
            rows.append(f"{n},{a.shape[1]},{c},{epsilon},{dt!r},{burn},")
        points.append((n, dt))
    if len(points) >= 2:
        xs = np.log([p[0] for p in points])
        ys = np.log([max(p[1], 1e-12) for p in points])
        slope = float(np.polyfit(xs, ys, 1)[0])
        rows.append(f"# log-log slope of sec/sample vs n: {slope:.3f}")
    text = "\n".join(rows) + "\n"
    if out_path:
        formats.atomic_write_text(out_path, text)
        click.echo(f"wrote benchmark to {out_path}")
    else:
        click.echo(text, nl=False)


if __name__ == "__main__":
    main()

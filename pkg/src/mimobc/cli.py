"""Command-line front end.

Subcommands:
  region       boundary CSV of the superposition rate region for a channel
  verify       run the full inequality suite on a source, emit JSON reports
  walkthrough  replay the converse chain on a channel + source/hierarchy
  selftest     run the built-in acceptance checks on bundled fixtures

Exit codes: 0 all checks pass, 1 a mathematical check failed, 2 invalid
input or configuration. Outputs are byte-identical for identical inputs,
seeds and flags.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys

import numpy as np

from . import fixtures, verifier
from .errors import InadmissibleSourceError, InputFormatError, NumericalError
from .estimators import entropy_unconditional
from .model import (
    aggregate_covariance,
    channel_from_dict,
    gaussian_entropy,
    hierarchy_from_dict,
    source_from_dict,
    validate_channel,
)
from .region import OptimizerConfig, rate_tuple, scalar_region, trace_boundary

LN2 = math.log(2.0)


def _worker_cap() -> int:
    """Worker-count cap from MIMO_BC_THREADS (0 or unset = auto). The
    implementation runs checks sequentially, which is always a valid
    schedule under the cap."""
    raw = os.environ.get("MIMO_BC_THREADS", "0")
    try:
        v = int(raw)
    except ValueError:
        raise InputFormatError("MIMO_BC_THREADS must be an integer")
    if v < 0:
        raise InputFormatError("MIMO_BC_THREADS must be >= 0")
    return v


def _load_json(path: str) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            obj = json.load(fh)
    except OSError as exc:
        raise InputFormatError(f"cannot read input: {exc}")
    except json.JSONDecodeError as exc:
        raise InputFormatError(f"malformed JSON: {exc}")
    if not isinstance(obj, dict):
        raise InputFormatError("top-level JSON value must be an object")
    return obj


def _write(text: str, output: str | None) -> None:
    if output is None or output == "-":
        sys.stdout.write(text)
    else:
        with open(output, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


def _weight_sweep(num_users: int, grid: int) -> list[tuple[float, ...]]:
    """Quarter-circle sweep for two users, simplex grid for more."""
    if num_users == 2:
        thetas = np.linspace(0.0, math.pi / 2.0, grid)
        return [(math.cos(t), math.sin(t)) for t in thetas]
    g = 1
    while math.comb(g + num_users - 1, num_users - 1) < grid:
        g += 1

    def comps(total, parts):
        if parts == 1:
            yield (total,)
            return
        for head in range(total + 1):
            for rest in comps(total - head, parts - 1):
                yield (head,) + rest

    return [tuple(c / g for c in comp) for comp in comps(g, num_users)]


def _rates_csv(weight_list, results, bits: bool) -> str:
    K = len(weight_list[0])
    header = ",".join([f"w_{k + 1}" for k in range(K)] + [f"R_{k + 1}" for k in range(K)])
    lines = [header]
    scale = 1.0 / LN2 if bits else 1.0
    for w, (_, rates) in zip(weight_list, results):
        row = [f"{x:.12g}" for x in w] + [f"{r * scale:.12g}" for r in rates]
        lines.append(",".join(row))
    return "\n".join(lines) + "\n"


def _extract_channel(obj: dict):
    return channel_from_dict(obj["channel"] if "channel" in obj else obj)


def _extract_source_or_hierarchy(obj: dict):
    if "hierarchy" in obj:
        return hierarchy_from_dict(obj["hierarchy"])
    if "source" in obj:
        d = obj["source"]
        if "transitions" in d:
            return hierarchy_from_dict(d)
        return source_from_dict(d)
    raise InputFormatError("input must contain a 'source' or 'hierarchy' object")


def cmd_region(cfg) -> int:
    obj = _load_json(cfg.input)
    ch = _extract_channel(obj)
    report = validate_channel(ch, cfg.tol if cfg.tol is not None else None)
    if not report.passed:
        bad = [r.label for r in report.residuals if r.value < -report.tolerance_used]
        raise InputFormatError(f"channel validation failed: {', '.join(bad)}")
    weights = _weight_sweep(ch.num_users, cfg.grid)
    opt = OptimizerConfig(seed=cfg.seed)
    results = trace_boundary(ch, weights, opt)
    _write(_rates_csv(weights, results, cfg.bits), cfg.output)
    return 0


def cmd_verify(cfg) -> int:
    obj = _load_json(cfg.input)
    thing = _extract_source_or_hierarchy(obj)
    ch = channel_from_dict(obj["channel"]) if "channel" in obj else None
    from .model import MarkovHierarchy

    if isinstance(thing, MarkovHierarchy):
        src, hierarchy = thing.base, thing
    else:
        src, hierarchy = thing, None
    reports = verifier.run_inequality_suite(src, ch=ch, hierarchy=hierarchy, tol=cfg.tol)
    payload = json.dumps([r.to_dict() for r in reports], indent=2, sort_keys=True) + "\n"
    _write(payload, cfg.output)
    return 0 if all(r.passed for r in reports) else 1


def cmd_walkthrough(cfg) -> int:
    obj = _load_json(cfg.input)
    ch = _extract_channel(obj)
    thing = _extract_source_or_hierarchy(obj)
    try:
        report = verifier.converse_walkthrough(
            thing, ch, samples=cfg.samples, seed=cfg.seed
        )
    except InadmissibleSourceError as exc:
        raise InputFormatError(
            f"{exc}; the converse presumes the input covariance constraint"
        )
    d = report.to_dict()
    if cfg.bits:
        d["achieved_rates_bits"] = [r / LN2 for r in report.achieved_rates]
        d["region_rates_bits"] = [r / LN2 for r in report.region_rates]
    payload = json.dumps(d, indent=2, sort_keys=True) + "\n"
    _write(payload, cfg.output)
    return 0 if report.passed else 1


def _selftest_checks(cfg):
    """Curated fixture checks; yields (name, passed) pairs."""
    tol = cfg.tol
    ch = fixtures.scalar_channel()
    from .region import CovarianceSplit

    split = CovarianceSplit(parts=(np.array([[0.5]]), np.array([[0.5]])))
    r = rate_tuple(ch, split)
    yield (
        "scalar_rate_exactness",
        abs(r[0] - 0.5 * math.log(1.5)) < 1e-12 and abs(r[1] - 0.5 * math.log(1.2)) < 1e-12,
    )
    sweep = scalar_region(1.0, [1.0, 2.0], 21)
    agree = all(
        max(
            abs(a - b)
            for a, b in zip(
                rt,
                rate_tuple(
                    ch, CovarianceSplit(parts=(np.array([[k / 20]]), np.array([[1 - k / 20]])))
                ),
            )
        )
        < 1e-12
        for k, rt in enumerate(sweep)
    )
    yield ("scalar_region_agreement", agree)

    gsrc = fixtures.gaussian_source(np.array([[0.8]]))
    msrc = fixtures.two_component_scalar_source()
    for name, src in [("gaussian_fixture", gsrc), ("mixture_fixture", msrc)]:
        reports = verifier.run_inequality_suite(src, ch=ch, tol=tol)
        yield (f"inequality_suite_{name}", all(rep.passed for rep in reports))

    fp = verifier.solve_fixed_point(gsrc, ch, 2, ch.input_cap, tol=1e-10)
    yield ("fixed_point_gaussian_t0", fp.t_star == 0.0 and abs(fp.A[0, 0] - 0.8) < 1e-8)

    wt = verifier.converse_walkthrough(
        msrc, fixtures.scalar_channel(S=2.5), samples=cfg.samples, seed=cfg.seed
    )
    yield ("walkthrough_two_user", wt.passed)
    wt_g = verifier.converse_walkthrough(
        fixtures.gaussian_source(np.array([[1.0]])), ch, samples=cfg.samples, seed=cfg.seed
    )
    tight = max(
        abs(a - r) for a, r in zip(wt_g.achieved_rates, wt_g.region_rates)
    ) < 3.0 * max(wt_g.achieved_stderrs) + 1e-6
    yield ("walkthrough_gaussian_tight", wt_g.passed and tight)

    rng = fixtures.rng_for(cfg.seed, 77)
    h3 = fixtures.random_hierarchy(rng, 1, (3, 2))
    ch3 = fixtures.admissible_channel_for(aggregate_covariance(h3.base), rng, 3)
    wt3 = verifier.converse_walkthrough(h3, ch3, samples=cfg.samples, seed=cfg.seed)
    yield ("walkthrough_three_user", wt3.passed)

    h_est, se = entropy_unconditional(gsrc, np.array([[0.2]]), cfg.samples, cfg.seed)
    exact = gaussian_entropy(np.array([[1.0]]))
    yield ("mc_entropy_3sigma", abs(h_est - exact) <= 3.0 * se)

    # equality case with genuine round-off: exercises the tolerance plumbing
    from .model import MixtureSource

    eq_src = MixtureSource(
        weights=np.array([1.0 / 3.0, 2.0 / 3.0]),
        means=np.array([[0.0, 0.0], [1.0, 0.5]]),
        comp_covs=np.stack([np.array([[1.3, 0.4], [0.4, 0.9]])] * 2),
    )
    yield (
        "equality_case_tolerance",
        verifier.check_cramer_rao(eq_src, np.eye(2), tol=tol).passed,
    )


def cmd_selftest(cfg) -> int:
    failures = 0
    for name, ok in _selftest_checks(cfg):
        print(f"{name:32s} {'PASS' if ok else 'FAIL'}")
        if not ok:
            failures += 1
    print(f"{'selftest':32s} {'PASS' if failures == 0 else 'FAIL'}")
    return 0 if failures == 0 else 1


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="mimobc",
        description="Degraded Gaussian vector broadcast channel: rate region "
        "computation and numerical verification of the Fisher-information converse.",
    )
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, needs_input=True):
        if needs_input:
            sp.add_argument("input", help="path to the input JSON file")
        sp.add_argument("--seed", type=int, default=42)
        sp.add_argument("--samples", type=int, default=100_000)
        sp.add_argument("--tol", type=float, default=1e-8)
        sp.add_argument("--grid", type=int, default=101)
        sp.add_argument("--output", default=None, help="output path (default stdout)")
        sp.add_argument("--bits", action="store_true", help="report rates in bits")

    for name, fn, needs_input in [
        ("region", cmd_region, True),
        ("verify", cmd_verify, True),
        ("walkthrough", cmd_walkthrough, True),
        ("selftest", cmd_selftest, False),
    ]:
        sp = sub.add_parser(name)
        common(sp, needs_input)
        sp.set_defaults(fn=fn)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        cfg = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code not in (0, None) else 0
    try:
        if cfg.samples < 2 or cfg.grid < 2 or cfg.tol < 0:
            raise InputFormatError("samples and grid must be >= 2, tol >= 0")
        _worker_cap()
        return cfg.fn(cfg)
    except InputFormatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except NumericalError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

"""Command-line driver.

Subcommands: validate, classify, decompose, entropy, purity, majorize,
additivity, strictgap, wehrl, berezinlieb, selftest.

Exit codes: 0 success / all assertions pass; 2 assertion failure (report
carries the worst offender); 1 usage or IO error.  Reports are JSON
(sorted keys, LF endings) and embed the configuration echo, the library
version, the tolerances in force, and truncation-leakage statistics, so a
repeated run with the same configuration is byte-identical.  Randomized
commands require an explicit --seed; there is no wall-clock default.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import os
import sys
from dataclasses import dataclass

import numpy as np

from . import __version__, fock, husimi as hu, majorization as mj, suite
from .channels import (
    channel_to_dict,
    classify,
    decompose,
    load_channel,
    strictness_conditions,
)
from .errors import FileFormatError, GaussLabError, UsageError, ValidityError
from .majorization import rows_to_csv, to_jsonable
from .states import (
    minimal_output_entropy,
    minimal_output_renyi,
    output_purity,
    purity_determinant,
)

LN2 = float(np.log(2.0))


@dataclass(frozen=True)
class RunConfig:
    """Echo of the options a command actually ran with."""

    command: str
    channels: tuple[str, ...] = ()
    p: float | None = None
    samples: int | None = None
    seed: int | None = None
    cutoff: int | None = None
    grid_radius: float | None = None
    grid_step: float | None = None
    tolerance: float | None = None
    threads: int = 1
    output: str | None = None
    format: str = "json"
    extra: tuple[tuple[str, object], ...] = ()


def _threads_default() -> int:
    env = os.environ.get("GAUSSLAB_THREADS", "")
    try:
        return max(1, int(env)) if env else 1
    except ValueError:
        return 1


def _emit(report: dict, out_path: str | None) -> None:
    text = json.dumps(to_jsonable(report), indent=2, sort_keys=True) + "\n"
    if out_path:
        with open(out_path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _summarize(line: str) -> None:
    print(line, file=sys.stderr)


def _report(config: RunConfig, results: dict, tolerances: dict,
            leakage: dict | None = None, passed: bool | None = None) -> dict:
    body = {
        "command": config.command,
        "config": {k: v for k, v in dataclasses.asdict(config).items() if v not in (None, ())},
        "version": __version__,
        "tolerances": tolerances,
        "results": results,
    }
    body["leakage"] = leakage or {}
    if passed is not None:
        body["pass"] = passed
    return body


def _leakage_stats(rows) -> dict:
    if not rows:
        return {"max": 0.0, "rejected": 0}
    return {"max": max(r.leakage for r in rows), "rejected": 0}


def _functional(name: str, p: float) -> mj.ConcaveFunctional:
    if name == "vn":
        return mj.von_neumann_functional()
    if name == "renyi":
        return mj.renyi_functional(p)
    raise UsageError(f"unknown functional '{name}' (use vn or renyi)")


# ---------------------------------------------------------------------------
# Subcommand handlers.  Each returns (report dict, passed flag or None).
# ---------------------------------------------------------------------------

def _cmd_validate(args) -> tuple[dict, bool, RunConfig]:
    config = RunConfig(command="validate", channels=(args.channel,),
                       tolerance=args.tol, output=args.out)
    try:
        ch = load_channel(args.channel, tol=args.tol)
    except ValidityError as exc:
        report = _report(config, {"valid": False, "reason": str(exc)},
                         {"validity": args.tol}, passed=False)
        return report, False, config
    cls = classify(ch, tol=args.tol)
    report = _report(config, {"valid": True, "class": cls.value, "modes": ch.modes},
                     {"validity": args.tol}, passed=True)
    return report, True, config


def _cmd_classify(args) -> tuple[dict, bool, RunConfig]:
    config = RunConfig(command="classify", channels=(args.channel,),
                       tolerance=args.tol, output=args.out)
    ch = load_channel(args.channel, tol=args.tol)
    strict = strictness_conditions(ch, tol=args.tol)
    results = {
        "class": classify(ch, tol=args.tol).value,
        "condition_a": strict.condition_a,
        "condition_b": strict.condition_b,
        "min_singular_value": strict.min_singular_value,
    }
    return _report(config, results, {"classification": args.tol}), True, config


def _cmd_decompose(args) -> tuple[dict, bool, RunConfig]:
    config = RunConfig(command="decompose", channels=(args.channel,),
                       tolerance=args.tol, output=args.out)
    ch = load_channel(args.channel, tol=args.tol)
    dec = decompose(ch)
    rec = dec.reconstruct()
    err = max(float(np.abs(rec.K - ch.K).max()), float(np.abs(rec.mu - ch.mu).max()))
    results = {
        "attenuator": channel_to_dict(dec.attenuator),
        "amplifier": channel_to_dict(dec.amplifier),
        "roundtrip_error": err,
    }
    return _report(config, results, {"roundtrip": 1e-10}, passed=err <= 1e-10), err <= 1e-10, config


def _cmd_entropy(args) -> tuple[dict, bool, RunConfig]:
    config = RunConfig(command="entropy", channels=(args.channel,), p=args.p,
                       output=args.out)
    ch = load_channel(args.channel)
    unit = LN2 if args.bits else 1.0
    results = {
        "von_neumann": minimal_output_entropy(ch) / unit,
        "unit": "bits" if args.bits else "nats",
    }
    if args.p is not None:
        results[f"renyi_{args.p:g}"] = minimal_output_renyi(ch, args.p) / unit
    return _report(config, results, {}), True, config


def _cmd_purity(args) -> tuple[dict, bool, RunConfig]:
    config = RunConfig(command="purity", channels=(args.channel,), p=args.p,
                       output=args.out)
    ch = load_channel(args.channel)
    # both the determinant and its reciprocal are reported; the reciprocal is
    # the physical purity (Tr rho^p <= 1)
    results = {
        "nu_p": output_purity(ch, args.p),
        "det_value": purity_determinant(ch, args.p),
        "p": args.p,
    }
    return _report(config, results, {}), True, config


def _cmd_majorize(args) -> tuple[dict, bool, RunConfig]:
    config = RunConfig(command="majorize", channels=(args.channel,),
                       samples=args.samples, seed=args.seed, cutoff=args.cutoff,
                       threads=args.threads, output=args.out,
                       extra=(("sample_support", args.support),))
    ch = load_channel(args.channel)
    fs = mj.default_functionals()
    reports = mj.optimality_sweep(ch, fs, n_samples=args.samples, seed=args.seed,
                                  cutoff=args.cutoff, sample_support=args.support,
                                  include_coherent_probes=False, threads=args.threads)
    sweep = mj.majorization_sweep(ch, n_samples=args.samples, seed=args.seed,
                                  cutoff=args.cutoff, sample_support=args.support,
                                  threads=args.threads)
    min_gap = min(r.gap for r in reports)
    passed = min_gap >= -1e-8 and sweep.worst_deficit <= 1e-8
    all_rows = [row for rep in reports for row in rep.rows] + list(sweep.rows)
    if args.csv:
        rows_to_csv(all_rows, args.csv)
    results = {
        "optimality": {rep.functional: {"vacuum_value": rep.vacuum_value,
                                        "gap": rep.gap,
                                        "best_input": rep.best_input_descriptor}
                       for rep in reports},
        "majorization": {"passes": sweep.passes, "total": sweep.total,
                         "worst_deficit": sweep.worst_deficit,
                         "worst_input": sweep.worst_input},
        "min_gap": min_gap,
    }
    leak = {"max": max(r.leakage for r in all_rows),
            "rejected": reports[0].rejected + sweep.rejected}
    return _report(config, results, {"gap": 1e-8, "partial_sums": 1e-8}, leak,
                   passed), passed, config


def _cmd_additivity(args) -> tuple[dict, bool, RunConfig]:
    config = RunConfig(command="additivity", channels=(args.channel_a, args.channel_b),
                       p=args.p, samples=args.samples, seed=args.seed,
                       cutoff=args.cutoff, threads=args.threads, output=args.out)
    a = load_channel(args.channel_a)
    b = load_channel(args.channel_b)
    rep = mj.additivity_test(a, b, args.p, n_samples=args.samples, seed=args.seed,
                             cutoff=args.cutoff, threads=args.threads)
    passed = (rep.max_sample_value <= rep.bound + 1e-8
              and abs(rep.vacuum_value - rep.bound) <= 1e-6)
    if args.csv:
        rows_to_csv(rep.rows, args.csv)
    results = {"bound": rep.bound, "vacuum_value": rep.vacuum_value,
               "max_sample_value": rep.max_sample_value, "samples": rep.samples}
    leak = {"max": max((r.leakage for r in rep.rows), default=0.0),
            "rejected": rep.rejected}
    return _report(config, results, {"bound_slack": 1e-8, "vacuum": 1e-6}, leak,
                   passed), passed, config


def _cmd_strictgap(args) -> tuple[dict, bool, RunConfig]:
    config = RunConfig(command="strictgap", channels=(args.channel,),
                       cutoff=args.cutoff, output=args.out,
                       extra=(("functional", args.f),))
    ch = load_channel(args.channel)
    f = _functional(args.f, args.p)
    rep = mj.strict_gap_probe(ch, f, cutoff=args.cutoff)
    passed = rep.min_gap > 1e-4 and abs(rep.coherent_gap) <= 1e-6
    results = {
        "vacuum_value": rep.vacuum_value,
        "min_gap": rep.min_gap,
        "coherent_gap": rep.coherent_gap,
        "condition_a": rep.condition_a,
        "condition_b": rep.condition_b,
        "probes": [{"label": r.label, "kind": r.kind, "value": r.value, "gap": r.gap}
                   for r in rep.rows],
    }
    return _report(config, results, {"strict_gap": 1e-4, "coherent": 1e-6},
                   passed=passed), passed, config


def _cmd_wehrl(args) -> tuple[dict, bool, RunConfig]:
    config = RunConfig(command="wehrl", samples=args.samples, seed=args.seed,
                       grid_radius=args.grid_radius, grid_step=args.grid_step,
                       threads=args.threads, output=args.out,
                       extra=(("a0", args.a0), ("probe_dim", args.probe_dim)))
    grid = hu.make_grid(args.grid_radius, args.grid_step)
    f = _functional(args.f, args.p)
    rep = hu.wehrl_optimality_test(args.a0, n_samples=args.samples, seed=args.seed,
                                   grid=grid, f=f, probe_dim=args.probe_dim,
                                   threads=args.threads)
    passed = rep.gap >= -1e-3
    if args.csv:
        rows_to_csv(rep.rows, args.csv)
    results = {"coherent_value": rep.vacuum_value, "min_value": rep.best_sampled_value,
               "gap": rep.gap, "best_input": rep.best_input_descriptor}
    leak = {"max_tail_mass": max((r.leakage for r in rep.rows), default=0.0),
            "rejected": rep.rejected}
    return _report(config, results, {"gap": 1e-3}, leak, passed), passed, config


_PROBE_BUILDERS = {
    "vacuum": lambda space: fock.vacuum_state(space),
    "fock1": lambda space: fock.number_state(space, 1),
    "fock2": lambda space: fock.number_state(space, 2),
}


def _parse_probe(name: str, space: fock.FockSpace) -> fock.PureState:
    if name in _PROBE_BUILDERS:
        return _PROBE_BUILDERS[name](space)
    if name.startswith("coherent:"):
        return fock.coherent_state(complex(name.split(":", 1)[1]), space)
    raise UsageError(f"unknown probe '{name}' (vacuum, fock1, fock2, coherent:<z>)")


def _cmd_berezinlieb(args) -> tuple[dict, bool, RunConfig]:
    config = RunConfig(command="berezinlieb", cutoff=args.cutoff,
                       grid_radius=args.grid_radius, grid_step=args.grid_step,
                       output=args.out,
                       extra=(("c", args.c), ("a0", args.a0), ("a0p", args.a0p),
                              ("probe", args.probe), ("functional", args.f)))
    grid = hu.make_grid(args.grid_radius, args.grid_step)
    space = fock.FockSpace(1, 40)
    probe = _parse_probe(args.probe, space)
    f = _functional(args.f, args.p)
    rep = hu.berezin_lieb_check(probe, args.c, args.a0, args.a0p, f, grid,
                                cutoff=args.cutoff)
    conv = hu.convolution_check(probe, args.c, args.a0, args.a0p, grid,
                                cutoff=args.cutoff)
    passed = rep.sandwiched(1e-3) and conv.sup_deviation <= 2e-3
    if args.field_csv:
        field = hu.upper_symbol(probe, args.c, args.a0, args.a0p, grid,
                                cutoff=args.cutoff)
        hu.field_to_csv(field, args.field_csv)
    results = {"lower": rep.lower, "middle": rep.middle, "upper": rep.upper,
               "min_slack": rep.min_slack, "convolution_deviation": conv.sup_deviation}
    return _report(config, results, {"sandwich_slack": 1e-3, "convolution": 2e-3},
                   passed=passed), passed, config


def _cmd_selftest(args) -> tuple[dict, bool, RunConfig]:
    config = RunConfig(command="selftest", output=args.out,
                       extra=(("scale", args.scale),))
    results = suite.run_all(scale=args.scale, verbose=not args.quiet)
    passed = all(r.passed for r in results)
    body = {
        "criteria": [{"id": r.cid, "name": r.name, "pass": r.passed,
                      "details": r.details} for r in results],
        "all_pass": passed,
    }
    return _report(config, body, {"scale": args.scale}, passed=passed), passed, config


# ---------------------------------------------------------------------------
# Parser.
# ---------------------------------------------------------------------------

def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gausslab",
        description="Gaussian gauge-covariant channel algebra and verification suites",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, channel_args=("channel",)):
        for name in channel_args:
            p.add_argument(name, help="channel JSON file")
        p.add_argument("--out", help="write the JSON report here instead of stdout")

    p = sub.add_parser("validate", help="validate a channel file")
    add_common(p)
    p.add_argument("--tol", type=float, default=1e-10)

    p = sub.add_parser("classify", help="classify a channel")
    add_common(p)
    p.add_argument("--tol", type=float, default=1e-10)

    p = sub.add_parser("decompose", help="quantum-limited factorization")
    add_common(p)
    p.add_argument("--tol", type=float, default=1e-10)

    p = sub.add_parser("entropy", help="minimal output entropies (vacuum input)")
    add_common(p)
    p.add_argument("--p", type=float, default=None, help="also report this Renyi order")
    p.add_argument("--bits", action="store_true", help="report in bits instead of nats")

    p = sub.add_parser("purity", help="maximal output purity nu_p")
    add_common(p)
    p.add_argument("--p", type=float, required=True)

    p = sub.add_parser("majorize", help="vacuum-optimality and majorization sweep")
    add_common(p)
    p.add_argument("--samples", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--cutoff", type=int, default=40)
    p.add_argument("--support", type=int, default=4, help="sample occupation bound")
    p.add_argument("--threads", type=int, default=_threads_default())
    p.add_argument("--csv", help="write per-sample rows here")

    p = sub.add_parser("additivity", help="output-purity multiplicativity check")
    p.add_argument("channel_a")
    p.add_argument("channel_b")
    p.add_argument("--out")
    p.add_argument("--p", type=float, default=2.0)
    p.add_argument("--samples", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--cutoff", type=int, default=30)
    p.add_argument("--threads", type=int, default=_threads_default())
    p.add_argument("--csv")

    p = sub.add_parser("strictgap", help="strict-minimizer gap probes")
    add_common(p)
    p.add_argument("--f", default="vn", choices=("vn", "renyi"))
    p.add_argument("--p", type=float, default=2.0)
    p.add_argument("--cutoff", type=int, default=40)

    p = sub.add_parser("wehrl", help="classical-functional minimality sweep")
    p.add_argument("--out")
    p.add_argument("--a0", type=float, default=0.5)
    p.add_argument("--samples", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--grid-radius", type=float, default=6.0)
    p.add_argument("--grid-step", type=float, default=0.05)
    p.add_argument("--f", default="vn", choices=("vn", "renyi"))
    p.add_argument("--p", type=float, default=2.0)
    p.add_argument("--probe-dim", type=int, default=16)
    p.add_argument("--threads", type=int, default=_threads_default())
    p.add_argument("--csv")

    p = sub.add_parser("berezinlieb", help="sandwich and convolution identity check")
    p.add_argument("--out")
    p.add_argument("--c", type=float, required=True)
    p.add_argument("--a0", type=float, default=0.5)
    p.add_argument("--a0p", type=float, default=0.5)
    p.add_argument("--probe", default="vacuum")
    p.add_argument("--f", default="vn", choices=("vn", "renyi"))
    p.add_argument("--p", type=float, default=2.0)
    p.add_argument("--cutoff", type=int, default=128)
    p.add_argument("--grid-radius", type=float, default=6.0)
    p.add_argument("--grid-step", type=float, default=0.05)
    p.add_argument("--field-csv", help="dump the upper-symbol field (x, y, p)")

    p = sub.add_parser("selftest", help="run the acceptance criteria at reduced scale")
    p.add_argument("--out")
    p.add_argument("--scale", type=float, default=0.12)
    p.add_argument("--quiet", action="store_true")
    return parser


_HANDLERS = {
    "validate": _cmd_validate,
    "classify": _cmd_classify,
    "decompose": _cmd_decompose,
    "entropy": _cmd_entropy,
    "purity": _cmd_purity,
    "majorize": _cmd_majorize,
    "additivity": _cmd_additivity,
    "strictgap": _cmd_strictgap,
    "wehrl": _cmd_wehrl,
    "berezinlieb": _cmd_berezinlieb,
    "selftest": _cmd_selftest,
}


def run(argv=None) -> int:
    """Parse arguments, dispatch, emit the report; returns the exit code."""
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 1 if exc.code not in (0, None) else 0
    try:
        report, passed, config = _HANDLERS[args.command](args)
    except (FileFormatError, UsageError, FileNotFoundError, IsADirectoryError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except GaussLabError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    _emit(report, getattr(args, "out", None))
    status = "ok" if passed else "FAILED"
    _summarize(f"gausslab {args.command}: {status}")
    return 0 if passed else 2


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()

"""Command-line entry point: ``keyregion <command> ...``.

Exit codes: 0 success, 2 bad input, 3 a resource cap would be exceeded.
Every command writes its outputs atomically and drops a ``*.manifest.json``
next to them.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile
import time
from pathlib import Path

import numpy as np

from . import __version__
from . import gaussian as g
from .binning import ResourceCapError
from .discrete import INNER_TERMS, DiscreteCompoundModel, TestChannelPair, default_caps
from .info import DistributionError
from .search import ParetoSet, default_directions, outer_intersection, search_inner_region
from .selfcheck import CHECKS, FIG3_CASES, run_selfcheck
from .simulate import ConfigError, SimConfig, run_trials

EXIT_OK, EXIT_INPUT, EXIT_CAP = 0, 2, 3
FLOAT_FMT = "{:.10g}"


class InputError(Exception):
    pass


def write_atomic(path: Path, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="\n") as f:
            f.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_manifest(out: Path, command: str, inputs: list, seed, started: float, outputs: list | None = None) -> None:
    out = Path(out)
    target = out / "manifest.json" if out.is_dir() else out.with_name(out.name + ".manifest.json")
    manifest = {
        "command": command,
        "inputs": [str(p) for p in inputs],
        "seed": seed,
        "output": str(out),
        "files": [str(p) for p in (outputs or [out])],
        "version": __version__,
        "duration_s": round(time.perf_counter() - started, 3),
    }
    write_atomic(target, json.dumps(manifest, indent=2) + "\n")


def csv_text(header: list[str], rows) -> str:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(FLOAT_FMT.format(float(v)) for v in row))
    return "\n".join(lines) + "\n"


def _load(loader, path):
    try:
        return loader(path)
    except FileNotFoundError:
        raise InputError(f"no such file: {path}") from None
    except json.JSONDecodeError as e:
        raise InputError(f"{path}: malformed JSON ({e})") from None
    except (g.ModelError, DistributionError, ConfigError, TypeError, ValueError) as e:
        raise InputError(f"{path}: {e}") from None


def parse_caps(text: str) -> tuple[int, int]:
    try:
        u, v = (int(p) for p in text.lower().split("x"))
    except ValueError:
        raise InputError(f"--caps must look like UxV, e.g. 4x3; got {text!r}") from None
    if u < 1 or v < 1:
        raise InputError(f"--caps entries must be >= 1, got {text!r}")
    return u, v


# --- commands ----------------------------------------------------------------


def cmd_gaussian_region(args) -> int:
    started = time.perf_counter()
    m = _load(g.CompoundGaussianModel.load, args.model)
    if args.points < 2:
        raise InputError("--points must be >= 2")
    k, l = g.saddle_indices(m)
    degraded = g.degradedness_check(m)
    print(f"saddle indices: k*={k} l*={l}; degraded: {'yes' if degraded else 'no'}")
    if degraded:
        text = g.trace_curve(m, args.kind, args.points).to_csv()
    else:
        print("warning: eavesdropper is stronger than the decoder; only r_s = 0 is achievable", file=sys.stderr)
        text = "# non-degraded model: only r_s = 0 is achievable\nalpha,r_s,r_j,r_l\n"
    write_atomic(args.out, text)
    write_manifest(Path(args.out), "gaussian-region", [args.model], None, started)
    return EXIT_OK


FIG3A_GRID = np.linspace(0.0, 6.0, 200)
FIG3CD_GRID = np.concatenate([[0.0], np.geomspace(1e-3, 50.0, 199)])
FIG3CD_GRID[-1] = 50.0


def fig3_tables() -> dict[str, str]:
    """The four Fig. 3 tables as CSV text, keyed by file name."""
    c1, c2, c3 = (FIG3_CASES[c] for c in ("case1", "case2", "case3"))
    a = [[r] + [g.key_rate_vs_storage(m, r) for m in (c1, c2, c3)] for r in FIG3A_GRID]
    b = g.trace_curve(c3, "gs", 200).as_array()[:, :3]
    c, d = [], []
    for r in FIG3CD_GRID:
        pts = [g.rate_point(c2, g.alpha_from_storage(c2, r, kind), kind) for kind in g.KINDS]
        c.append([r, pts[0].r_s, pts[1].r_s])
        d.append([r, pts[0].r_l, pts[1].r_l])
    return {
        "fig3a_key_vs_storage.csv": csv_text(["r_j", "case1_r_s", "case2_r_s", "case3_r_s"], a),
        "fig3b_case3_alpha.csv": csv_text(["alpha", "r_s", "r_j"], b),
        "fig3c_case2_key_gs_cs.csv": csv_text(["r_j", "gs_r_s", "cs_r_s"], c),
        "fig3d_case2_leak_gs_cs.csv": csv_text(["r_j", "gs_r_l", "cs_r_l"], d),
    }


def cmd_fig3(args) -> int:
    started = time.perf_counter()
    out = Path(args.out)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as e:
        raise InputError(f"cannot create {out}: {e}") from None
    if not os.access(out, os.W_OK):
        raise InputError(f"{out} is not writable")
    tables = fig3_tables()
    for name, text in tables.items():
        write_atomic(out / name, text)
    write_manifest(out, "fig3", [], None, started, [out / n for n in tables])
    return EXIT_OK


def discrete_bounds_tables(m: DiscreteCompoundModel, kind: str, budget: int, caps, seed: int) -> dict[str, str]:
    """Inner Pareto set, outer support table and, for one state pair, the gap."""
    inner_caps = caps or default_caps(m)
    outer_caps = caps or default_caps(m, outer=True)
    directions = default_directions()
    front = search_inner_region(m, kind, budget, inner_caps, seed, directions)
    table = outer_intersection(m, kind, budget, outer_caps, seed + 1, directions)
    rows = [list(p.triple.as_tuple()) + [p.terms[t] for t in INNER_TERMS] for p in front]
    out = {"inner": csv_text(["r_s", "r_j", "r_l", *INNER_TERMS], rows)}
    pair_cols = [f"k{k}_l{l}" for k in range(m.K) for l in range(m.L)]
    per_pair = table.per_pair.reshape(m.K * m.L, -1).T
    out["outer"] = csv_text(
        ["w_s", "w_j", "w_l", "support", *pair_cols],
        [list(w) + [s] + list(p) for w, s, p in zip(directions, table.support, per_pair)],
    )
    if m.K == 1 and m.L == 1:
        acc = ParetoSet()
        for p in front:
            acc.add(p)
        inner = acc.support(directions)
        gaps = table.support - inner
        report = {
            "max_gap": float(gaps.max()),
            "directions": directions.tolist(),
            "inner_support": inner.tolist(),
            "outer_support": table.support.tolist(),
        }
        out["gap"] = json.dumps(report, indent=2) + "\n"
    return out


def cmd_discrete_bounds(args) -> int:
    started = time.perf_counter()
    m = _load(DiscreteCompoundModel.load, args.model)
    caps = parse_caps(args.caps) if args.caps else None
    if args.budget < 1:
        raise InputError("--budget must be >= 1")
    tables = discrete_bounds_tables(m, args.kind, args.budget, caps, args.seed)
    out = Path(args.out)
    files = {"inner": out, "outer": out.with_suffix(".outer.csv"), "gap": out.with_suffix(".gap.json")}
    for key, text in tables.items():
        write_atomic(files[key], text)
    write_manifest(out, "discrete-bounds", [args.model], args.seed, started, [files[k] for k in tables])
    return EXIT_OK


def cmd_simulate(args) -> int:
    started = time.perf_counter()
    m = _load(DiscreteCompoundModel.load, args.model)
    t = _load(TestChannelPair.load, args.channels)
    cfg = _load(SimConfig.load, args.config)
    overrides = {}
    if args.exact:
        overrides["mode"] = "exact"
    if args.trials is not None:
        overrides["trials"] = args.trials
    if args.seed is not None:
        overrides["seed"] = args.seed
    if overrides:
        try:
            cfg = SimConfig.from_dict({**cfg.to_dict(), **overrides})
        except ConfigError as e:
            raise InputError(str(e)) from None
    if t.u_given_xt.n_in != m.n_xt:
        raise InputError(f"{args.channels}: P(U|Xt) expects {t.u_given_xt.n_in} Xt symbols, model has {m.n_xt}")
    report = run_trials(m, t, cfg)
    write_atomic(args.out, report.to_json())
    write_manifest(Path(args.out), "simulate", [args.model, args.channels, args.config], cfg.seed, started)
    print(f"max error {report.max_error:.6g}; key TV {report.key_tv_uniform:.6g}; storage {report.storage_bits:.6g} bits")
    return EXIT_OK


def cmd_selfcheck(args) -> int:
    try:
        results = run_selfcheck(args.perturb)
    except KeyError as e:
        raise InputError(str(e)) from None
    for r in results:
        print(r.line())
    return EXIT_OK if all(r.passed for r in results) else 1


# --- parser ------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="keyregion", description="Key, storage and leakage rate regions for compound sources.")
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("gaussian-region", help="trace the Gaussian GS/CS boundary curve")
    s.add_argument("--model", required=True)
    s.add_argument("--kind", choices=g.KINDS, default="gs")
    s.add_argument("--points", type=int, default=200)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_gaussian_region)

    s = sub.add_parser("fig3", help="write the four built-in Gaussian comparison tables")
    s.add_argument("--out", required=True, help="output directory")
    s.set_defaults(func=cmd_fig3)

    s = sub.add_parser("discrete-bounds", help="search inner and outer bounds of a discrete model")
    s.add_argument("--model", required=True)
    s.add_argument("--kind", choices=g.KINDS, default="gs")
    s.add_argument("--budget", type=int, default=10_000)
    s.add_argument("--caps", help="auxiliary alphabet sizes UxV (default: sufficient cardinalities)")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_discrete_bounds)

    s = sub.add_parser("simulate", help="run the binning scheme on a discrete model")
    s.add_argument("--model", required=True)
    s.add_argument("--channels", required=True, help="test-channel JSON")
    s.add_argument("--config", required=True, help="simulation config JSON")
    s.add_argument("--exact", action="store_true", help="exact enumeration instead of sampling")
    s.add_argument("--trials", type=int)
    s.add_argument("--seed", type=int)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_simulate)

    s = sub.add_parser("selfcheck", help="run the identity suite")
    s.add_argument("--perturb", choices=sorted(CHECKS), help=argparse.SUPPRESS)
    s.set_defaults(func=cmd_selfcheck)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except InputError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INPUT
    except ResourceCapError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_CAP


if __name__ == "__main__":
    sys.exit(main())

"""Command-line driver: check a distribution, reproduce a result, list an orbit.

Exit codes: 0 when every check passes, 1 on a failed check, 2 on a usage or
parse error. Every run writes ``manifest.json`` next to its outputs.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
from pathlib import Path

from . import __version__, bell, catalog, entropy, polytope, symmetry
from .distributions import Distribution, is_no_signalling
from .errors import BellError, ParseError, UnknownTarget
from .experiments import TARGETS, RunConfig, TargetReport, run_target, to_csv

FUNCTIONALS = {
    "chsh": bell.chsh,
    "chsh2233": bell.chsh_2233,
    "i2233": bell.i2233,
}


def load_distribution(spec: str) -> Distribution:
    """``builtin:NAME[:ARGS]`` or a path to a JSON or CSV distribution file."""
    if spec.startswith("builtin:"):
        return catalog.resolve(spec[len("builtin:"):])
    path = Path(spec)
    if not path.is_file():
        raise ParseError(f"no such distribution file or builtin: {spec!r}")
    text = path.read_text()
    try:
        if path.suffix.lower() == ".csv":
            return Distribution.from_csv(text)
        return Distribution.from_json(text)
    except (ValueError, KeyError, TypeError) as exc:
        raise ParseError(f"malformed distribution file {spec}: {exc}") from exc


def load_functional(spec: str) -> bell.BellFunctional:
    name = spec[len("functional:"):]
    if name.lower() in FUNCTIONALS:
        return FUNCTIONALS[name.lower()]()
    path = Path(name)
    if not path.is_file():
        raise ParseError(f"unknown functional {name!r}; builtins: {sorted(FUNCTIONALS)}")
    try:
        return bell.BellFunctional.from_json(path.read_text())
    except (ValueError, KeyError, TypeError) as exc:
        raise ParseError(f"malformed functional file {name}: {exc}") from exc


def config_hash(cfg: RunConfig) -> str:
    blob = json.dumps(cfg.to_json(), sort_keys=True).encode()
    return hashlib.sha256(blob).hexdigest()[:16]


def write_manifest(cfg: RunConfig, out: Path, extra: dict | None = None) -> None:
    out.mkdir(parents=True, exist_ok=True)
    manifest = {"command": cfg.command, "target": cfg.target, "seed": cfg.seed,
                "version": __version__, "config_hash": config_hash(cfg), "config": cfg.to_json()}
    manifest.update(extra or {})
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")


def _print_report(rep: TargetReport) -> None:
    for c in rep.checks:
        tail = f"  [{c.detail}]" if c.detail else ""
        print(f"{'PASS' if c.passed else 'FAIL'}  {rep.target}: {c.name}{tail}")


# subcommands ------------------------------------------------------------------

def cmd_check(args, cfg: RunConfig) -> int:
    d = load_distribution(args.dist)
    qs = cfg.q or [1.0]
    out = Path(cfg.out)
    ns = is_no_signalling(d)
    print(f"distribution: {args.dist}  scenario {d.scenario}")
    print(f"no-signalling: {ns}")
    summary = {"dist": args.dist, "no_signalling": ns}
    if d.scenario.shape == (2, 2, 3, 3):
        vs = bell.violated_set(d)
        i1 = bell.evaluate(bell.i2233(), d)
        print(f"I2233^1 = {i1}")
        print(f"CHSH-type violations: {len(vs.chsh_violations)}  I2233 violations: {len(vs.i2233_violations)}")
        for v in vs.chsh_violations + vs.i2233_violations:
            print(f"  #{v.index}: value {v.value} > {v.bound}")
        summary["i2233_1"] = str(i1)
        summary["violations"] = vs.to_json()
    elif d.scenario.shape == (2, 2, 2, 2):
        vals = [bell.evaluate(f, d) for f in bell.chsh_orbit(d.scenario)]
        print(f"max CHSH = {max(vals)} (bound 3)")
        summary["chsh_max"] = str(max(vals))
    if ns:
        lw = polytope.local_weight(d)
        print(f"local weight = {lw.objective}  (certificate verified: {lw.verify()})")
        summary["local_weight"] = str(lw.objective)
        rows = []
        if d.scenario.shape[:2] == (2, 2):
            for q in qs:
                ev = entropy.entropy_vector(d, q)
                res = entropy.bc_values(ev, cfg.tol)
                print(f"q={q}: H = " + ", ".join(f"{k}:{v:.10g}" for k, v in ev.as_dict().items()))
                print(f"q={q}: BC1..BC4 = " + ", ".join(f"{v:.10g}" for v in res.values)
                      + f"  violated: {[i + 1 for i, b in enumerate(res.violated) if b]}")
                rows.append([q, *ev.components, *res.values])
            (out).mkdir(parents=True, exist_ok=True)
            (out / "check_entropy.csv").write_text(to_csv(
                ["q", *entropy.COMPONENTS, "BC1", "BC2", "BC3", "BC4"], rows))
    write_manifest(cfg, out)
    (out / "check.json").write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")
    return 0


def cmd_reproduce(args, cfg: RunConfig) -> int:
    names = list(TARGETS) if args.target == "all" else [args.target]
    out = Path(cfg.out)
    status = {}
    for name in names:
        cfg.target = name
        rep = run_target(name, cfg)
        _print_report(rep)
        tdir = out / rep.target
        write_manifest(cfg, tdir, {"passed": rep.passed})
        for fname, text in sorted(rep.artifacts.items()):
            (tdir / fname).write_text(text)
        (tdir / "checks.csv").write_text(to_csv(["check", "passed", "detail"],
                                               [(c.name, c.passed, c.detail) for c in rep.checks]))
        status[rep.target] = rep.passed
    bad = [k for k, ok in status.items() if not ok]
    print(f"{len(status) - len(bad)}/{len(status)} targets passed" + (f"; failing: {bad}" if bad else ""))
    return 1 if bad else 0


def cmd_orbit(args, cfg: RunConfig) -> int:
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    if args.seed_obj.startswith("functional:"):
        f = load_functional(args.seed_obj)
        if args.lift:
            if f.family_tag != bell.CHSH_TAG:
                raise ParseError("--lift applies to CHSH functionals only")
            members = bell.chsh_orbit(f.scenario)
        else:
            members = bell.functional_orbit(f, exchange=args.exchange)
        rows = [(k, json.dumps(m.generating_symmetry), " ".join(str(c) for c in m.flat()), str(m.bound))
                for k, m in enumerate(members, start=1)]
        header = ["label", "generated_by", "coeffs", "bound"]
    else:
        d = load_distribution(args.seed_obj)
        members = symmetry.orbit(d, exchange=args.exchange)
        rows = [(k, json.dumps(m.op.to_json()), " ".join(str(p) for p in m.distribution.flat()))
                for k, m in enumerate(members, start=1)]
        header = ["label", "generated_by", "probs"]
    print(f"orbit of {args.seed_obj}: {len(rows)} distinct members")
    (out / "orbit.csv").write_text(to_csv(header, rows))
    write_manifest(cfg, out, {"orbit_size": len(rows)})
    return 0


# argument handling --------------------------------------------------------------

def _q_list(text: str) -> list[float]:
    try:
        qs = [float(t) for t in text.split(",") if t.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad q list {text!r}") from exc
    if not qs or any(q <= 0 for q in qs):
        raise argparse.ArgumentTypeError("q values must be positive")
    return qs


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--q", type=_q_list, help="comma-separated Tsallis orders (1 = Shannon)")
    common.add_argument("--eps", help="exact eps override, e.g. 4/7")
    common.add_argument("--v", help="exact v override")
    common.add_argument("--grid", type=int, default=201)
    common.add_argument("--restarts", type=int, default=200)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--tol", type=float, default=entropy.TOL)
    common.add_argument("--out", default="results")
    common.add_argument("--jobs", type=int, default=None, help="worker processes (default: all cores)")

    p = argparse.ArgumentParser(prog="entropic-bell", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)
    c = sub.add_parser("check", parents=[common], help="report on one distribution")
    c.add_argument("dist", help="builtin:NAME[:ARGS] or a JSON/CSV file")
    r = sub.add_parser("reproduce", parents=[common], help="run a reproduction target")
    r.add_argument("target", help=f"one of {', '.join(TARGETS)} or 'all'")
    o = sub.add_parser("orbit", parents=[common], help="list the symmetry orbit of a seed")
    o.add_argument("seed_obj", metavar="seed", help="builtin:NAME, a file, or functional:{chsh,chsh2233,i2233,FILE}")
    o.add_argument("--exchange", action="store_true", help="include the party exchange")
    o.add_argument("--lift", action="store_true", help="add coarse-graining lifts (CHSH in (2,2,3,3))")
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    cfg = RunConfig(command=args.command, target=getattr(args, "target", None), seed=args.seed,
                    restarts=args.restarts, grid=args.grid, q=args.q, eps=args.eps, v=args.v,
                    tol=args.tol, out=args.out, jobs=args.jobs)
    handler = {"check": cmd_check, "reproduce": cmd_reproduce, "orbit": cmd_orbit}[args.command]
    try:
        return handler(args, cfg)
    except UnknownTarget as exc:
        print(f"error: unknown target {exc.args[0]!r}; choose from {', '.join(TARGETS)} or 'all'", file=sys.stderr)
        return 2
    except (ParseError, BellError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

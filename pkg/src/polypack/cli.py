"""Batch front end: ``polypack <subcommand> [flags]``.

Every subcommand writes JSON or CSV to stdout and diagnostics to stderr.
Exit codes: 0 success, 1 invariant violation, 2 budget exhausted, 3 invalid input.

Settings come from built-in defaults, then an optional ``--config`` file of
``key = value`` lines, then command-line flags (flags win).
"""

from __future__ import annotations

import argparse
import configparser
import csv
import io
import json
import logging
import random
import sys
from dataclasses import dataclass
from typing import Callable

from . import cayley, cosetlab, orbits, solgeo, spectral
from .errors import BudgetExceeded, CertificationError, InvariantViolation, PolypackError
from .group import Presentation

log = logging.getLogger("polypack")

EXIT_OK, EXIT_INVARIANT, EXIT_BUDGET, EXIT_INPUT = 0, 1, 2, 3

# key -> (type, default); flags and config file share these names
SETTINGS: dict[str, tuple[Callable, object]] = {
    "matrix": (str, None),
    "radius": (int, None),
    "window": (int, None),
    "box": (int, None),
    "pool_bound": (int, 40),
    "rmax": (int, None),
    "seed": (int, 0),
    "format": (str, None),
    "budget_elements": (int, cayley.DEFAULT_MAX_ELEMENTS),
    # config-file only
    "delta": (float, 0.1),
    "trials": (int, 20),
    "distance": (float, 2.0),
    "count": (int, 100),
}

FLAG_KEYS = ("matrix", "radius", "window", "box", "pool_bound", "rmax", "seed", "format",
             "budget_elements")


class InputError(ValueError):
    pass


@dataclass(frozen=True)
class ExperimentConfig:
    command: str
    values: dict

    def __getitem__(self, key):
        return self.values[key]

    def get(self, key, fallback):
        v = self.values.get(key)
        return fallback if v is None else v

    def presentation(self) -> Presentation:
        lit = self.values.get("matrix")
        if not lit:
            raise InputError("--matrix is required (e.g. --matrix '2,1;1,1')")
        return Presentation.from_literal(lit)


def read_config_file(path: str) -> dict:
    parser = configparser.ConfigParser(interpolation=None)
    try:
        with open(path, encoding="utf-8") as fh:
            parser.read_string("[polypack]\n" + fh.read(), source=path)
    except OSError as exc:
        raise InputError(f"cannot read config {path}: {exc}") from None
    except configparser.Error as exc:
        raise InputError(f"malformed config {path}: {exc}") from None
    out = {}
    for raw_key, raw in parser["polypack"].items():
        key = raw_key.replace("-", "_")
        if key not in SETTINGS:
            raise InputError(f"unknown config key {raw_key!r}")
        out[key] = _convert(key, raw)
    return out


def _convert(key: str, raw):
    kind = SETTINGS[key][0]
    try:
        return kind(raw)
    except (TypeError, ValueError):
        raise InputError(f"bad value {raw!r} for {key}") from None


def resolve(command: str, flags: dict, config_path: str | None) -> ExperimentConfig:
    values = {k: default for k, (_, default) in SETTINGS.items()}
    if config_path:
        values.update(read_config_file(config_path))
    values.update({k: v for k, v in flags.items() if v is not None})
    fmt = values.get("format")
    if fmt is not None and fmt not in ("json", "csv"):
        raise InputError(f"--format must be json or csv, got {fmt!r}")
    return ExperimentConfig(command, values)


# --------------------------------------------------------------------------
# output


def dump_json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, allow_nan=False) + "\n"


def dump_csv(header: list[str], rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


@dataclass
class Outcome:
    text: str
    code: int = EXIT_OK


def _vec(v) -> str:
    return ",".join(map(str, v))


# --------------------------------------------------------------------------
# subcommands


def cmd_analyze(cfg: ExperimentConfig) -> Outcome:
    p = cfg.presentation()
    s = p.spectral
    report = s.to_dict()
    report["matrix"] = p.phi.literal()
    try:
        report["adapted_norm"] = spectral.adapted_norm(p.phi, cfg["delta"], seed=cfg["seed"]).certificate()
    except CertificationError as exc:
        log.warning("adapted norm not certified: %s", exc)
        report["adapted_norm"] = None
    if cfg.get("format", "json") == "csv":
        rows = []
        for i, ev in enumerate(s.eigenvalues):
            rows.append([i, repr(ev.real), repr(ev.imag), repr(abs(ev))])
        return Outcome(dump_csv(["index", "re", "im", "modulus"], rows))
    return Outcome(dump_json(report))


def cmd_ball(cfg: ExperimentConfig) -> Outcome:
    p = cfg.presentation()
    radius = cfg.get("radius", cfg.get("rmax", 10))
    b = cayley.ball(p, radius)
    fit = cayley.fit_growth(b.counts) if radius >= 4 else None
    if fit is not None:
        log.info("growth fit: %s", fit.summary())
    if cfg.get("format", "csv") == "json":
        return Outcome(dump_json({"counts": list(b.counts),
                                  "fit": fit.summary() if fit else None}))
    return Outcome(dump_csv(["r", "count"], [[r, c] for r, c in enumerate(b.counts)]))


def cmd_orbit_intersect(cfg: ExperimentConfig) -> Outcome:
    p = cfg.presentation()
    results = orbits.intersection_sweep(p, cfg.get("box", 3), cfg.get("window", 25))
    results = sorted(results, key=lambda r: (r.z, r.w, r.a))
    worst = max((r.count for r in results), default=0)
    uncertified = sum(not r.certified for r in results)
    log.info("%d triples, max count %d, %d uncertified", len(results), worst, uncertified)
    code = EXIT_OK
    if worst > 2:
        log.error("intersection count %d exceeds 2", worst)
        code = EXIT_INVARIANT
    if cfg.get("format", "csv") == "json":
        rows = [{"z": list(r.z), "w": list(r.w), "a": list(r.a), "count": r.count,
                 "certified": r.certified} for r in results]
        return Outcome(dump_json({"max_count": worst, "rows": rows}), code)
    return Outcome(dump_csv(["z", "w", "a", "count", "certified"], [r.csv_row() for r in results]), code)


def cmd_packing(cfg: ExperimentConfig) -> Outcome:
    p = cfg.presentation()
    d, box, trials = cfg["distance"], cfg.get("box", 50), cfg["trials"]
    bound = orbits.packing_bound(p, d)
    rng = random.Random(cfg["seed"])
    domain = range(-box, box + 1)
    size = bound + 1
    if size > len(domain) ** p.n:
        raise InputError(f"box {box} holds fewer than {size} points")
    rows, code = [], EXIT_OK
    for t in range(trials):
        pts, seen = [], set()
        while len(pts) < size:
            x = tuple(rng.choice(domain) for _ in range(p.n))
            if x not in seen:
                seen.add(x)
                pts.append(x)
        res = orbits.find_separated_pair(p, pts, d)
        if isinstance(res, orbits.SeparatedPair):
            rows.append([t, _vec(pts[res.i]), _vec(pts[res.j]), res.profile.minimum, "true"])
        else:
            log.error("trial %d: %d points without a %s-separated pair", t, size, d)
            rows.append([t, "", "", "", "false"])
            code = EXIT_INVARIANT
    found = sum(r[-1] == "true" for r in rows)
    if cfg.get("format", "json") == "csv":
        return Outcome(dump_csv(["trial", "x", "y", "min_separation", "found"], rows), code)
    return Outcome(dump_json({"D": d, "packing_bound": bound, "points_per_trial": size,
                              "box": box, "trials": trials, "found": found,
                              "pairs": [{"trial": r[0], "x": r[1], "y": r[2], "min_separation": r[3]}
                                        for r in rows if r[-1] == "true"]}), code)


SOL_GRID = (2, 10, 100, 1000, 10000)


def cmd_sol(cfg: ExperimentConfig) -> Outcome:
    p = cfg.presentation()
    rmax = cfg.get("rmax", cfg.get("radius", 14))
    fit = solgeo.distortion_check(p, rmax=rmax)
    emb = solgeo.LatticeEmbedding.from_presentation(p)
    code = EXIT_OK
    bounds = []
    for dx in SOL_GRID:
        for dy in SOL_GRID:
            lo = solgeo.sol_lower_bound((0, 0, 0), (dx, dy, 0))
            up = solgeo.sol_upper_bound((0, 0, 0), (dx, dy, 0))
            ok = lo <= up.length <= 2 * lo + 3
            if not ok:
                code = EXIT_INVARIANT
                log.error("sandwich fails at (%d, %d)", dx, dy)
            bounds.append({"dx": dx, "dy": dy, "lower": lo, "upper": up.length,
                           "closed_form": up.closed_form})
    if fit.violations:
        code = EXIT_INVARIANT
        log.error("%d distortion violations", len(fit.violations))
    log.info("distortion fit: %s", fit.summary())
    if cfg.get("format", "json") == "csv":
        return Outcome(dump_csv(["ax", "ay", "dP", "l1", "log_l1"], fit.csv_rows()), code)
    gens = {str(g): list(emb(g).astuple()) for g in p.generators}
    return Outcome(dump_json({"bounds": bounds,
                              "embedding": {"loglambda": emb.loglambda, "generators": gens},
                              "distortion": dict(fit.summary(), violations=len(fit.violations))}),
                   code)


def cmd_coset_growth(cfg: ExperimentConfig) -> Outcome:
    p = cfg.presentation()
    rmax = cfg.get("rmax", cfg.get("radius", 6))
    fit = solgeo.distortion_check(p, rmax=14) if p.n == 2 and cosetlab.tabulates(p) else None
    series = cosetlab.coset_growth(p, None, rmax, cfg["pool_bound"], fit)
    code = EXIT_OK
    for r, (v, c) in enumerate(zip(series.upper, series.chain_bounds)):
        if c is not None and v > c:
            log.error("f_H(%d) upper value %d exceeds chain bound %d", r, v, c)
            code = EXIT_INVARIANT
    log.info("fit: %s", series.fit_summary())
    if cfg.get("format", "csv") == "json":
        return Outcome(dump_json(dict(series.fit_summary(), values=list(series.values),
                                      exact=list(series.exact), pool_bound=series.pool_bound)), code)
    return Outcome(dump_csv(["r", "f_H", "exact"], series.csv_rows()), code)


def cmd_demo(cfg: ExperimentConfig) -> Outcome:
    p = cfg.presentation()
    r = cfg.get("radius", 1)
    rep = cosetlab.ball_vs_clump_demo(p, None, r, cfg["count"])
    log.info("%d distinct cosets at distance 1; largest clump in the family %d",
             len(rep.reps), rep.family_clump)
    if cfg.get("format", "json") == "csv":
        return Outcome(dump_csv(["rep", "coset_distance"],
                                [[_vec(v), d] for v, d in zip(rep.reps, rep.certified_distance)]))
    return Outcome(dump_json([list(v) for v in rep.reps]))


COMMANDS = {
    "analyze": (cmd_analyze, "spectral report and adapted norm"),
    "ball": (cmd_ball, "BFS growth series"),
    "orbit-intersect": (cmd_orbit_intersect, "orbit intersection sweep"),
    "packing": (cmd_packing, "separated-pair experiments against 2|S|^2"),
    "sol": (cmd_sol, "Sol bounds, embedding and distortion"),
    "coset-growth": (cmd_coset_growth, "clump series and exponential fit"),
    "demo-ball-vs-clump": (cmd_demo, "cosets at distance 1 from H"),
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--matrix", help="phi as rows 'a,b;c,d'")
    for name in ("radius", "window", "box", "pool-bound", "rmax", "seed", "budget-elements"):
        common.add_argument(f"--{name}", type=int)
    common.add_argument("--format", choices=("json", "csv"))
    common.add_argument("--config", metavar="FILE", help="key = value settings; flags win")
    common.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    parser = argparse.ArgumentParser(prog="polypack", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name, (_, help_text) in COMMANDS.items():
        sub.add_parser(name, parents=[common], help=help_text)
    return parser


def run(argv: list[str] | None = None, stdout=None) -> int:
    stdout = sys.stdout if stdout is None else stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_INPUT
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="polypack: %(message)s", stream=sys.stderr, force=True)
    flags = {k: getattr(args, k) for k in FLAG_KEYS}
    handler = COMMANDS[args.command][0]
    try:
        cfg = resolve(args.command, flags, args.config)
        with cayley.element_budget(cfg["budget_elements"]):
            out = handler(cfg)
    except BudgetExceeded as exc:
        print(f"polypack: budget exhausted: {exc} (last complete radius {exc.last_radius})",
              file=sys.stderr)
        return EXIT_BUDGET
    except InvariantViolation as exc:
        print(f"polypack: invariant violated: {exc}", file=sys.stderr)
        return EXIT_INVARIANT
    except (ValueError, PolypackError) as exc:
        print(f"polypack: invalid input: {exc}", file=sys.stderr)
        return EXIT_INPUT
    stdout.write(out.text)
    stdout.flush()
    return out.code


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()

"""Command-line entry point: ``unionholes <command> [flags]``.

Exit codes: 0 when every asserted identity holds, 2 for construction,
validation or resource failures, 3 when a computed count disagrees with the
expected one.
"""

from __future__ import annotations

import argparse
import csv
import datetime as _dt
import io
import json
import random
import sys
from dataclasses import dataclass, field
from pathlib import Path

from . import __version__
from .construction import (
    ConstructionError,
    ConstructionParams,
    build_body,
    build_family,
    build_warmup_family,
    choose_epsilon,
    epsilon_bounds,
    expected_holes,
    expected_two_simplices,
    predicted_nerve,
    verify_witnesses,
)
from .exact import Q, decimal_string, format_rational, parse_rational
from .geometry import convex_hull, family_of, write_obj
from .oracle import DEFAULT_CELL_BUDGET, GridTooLarge, default_resolution, oracle_hole_count, rasterize, write_occupancy_rle
from .topology import CSV_HEADER, hole_count, hole_count_from_complex, nerve_skeleton, verify_nerve_matches

SCHEMA = 1
EXIT_OK, EXIT_FAILURE, EXIT_MISMATCH = 0, 2, 3
COMMANDS = ("warmup", "holes", "random-bound", "export", "oracle")

_RATIONAL_KEYS = {"eps", "zeta2", "zeta3", "t", "resolution"}
_INT_KEYS = {"m", "depth", "gamma_len", "threads", "seed", "trials", "n", "digits", "cell_budget"}


def tagged(value, provenance: str = "computed") -> dict:
    if not isinstance(value, (int, bool, str)) and value is not None:
        value = format_rational(value)
    return {"value": value, "provenance": provenance}


@dataclass
class RunConfig:
    command: str
    m: int | None = None
    depth: int | None = None
    gamma_len: int | None = None
    zeta2: object = None
    zeta3: object = None
    t: object = None
    eps: object = None
    resolution: object = None
    out: str | None = None
    threads: int = 1
    seed: int = 0
    trials: int = 50
    n: int = 8
    digits: int = 6
    cell_budget: int = DEFAULT_CELL_BUDGET
    family: str = "extremal"
    dump: str | None = None

    def params(self) -> ConstructionParams:
        if self.m is None:
            raise ValueError(f"{self.command} needs --m")
        return ConstructionParams.for_m(
            self.m,
            path_depth=self.depth,
            gamma_length=self.gamma_len,
            t=self.t,
            zeta2=self.zeta2,
            zeta3=self.zeta3,
        )

    def validate(self) -> None:
        if self.command in ("holes", "export") or (self.command == "oracle" and self.family == "extremal"):
            self.params()
        if self.eps is not None and self.eps <= 0:
            raise ValueError("--eps must be positive")
        if self.resolution is not None and self.resolution <= 0:
            raise ValueError("--resolution must be positive")
        if self.threads < 1:
            raise ValueError("--threads must be at least 1")


def read_config(path: str) -> dict:
    """``key=value`` lines; ``#`` starts a comment, rationals as ``p/q``."""
    values = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            key, sep, value = line.partition("=")
            if not sep:
                raise ValueError(f"{path}:{lineno}: expected key=value")
            values[key.strip().replace("-", "_")] = value.strip()
    return values


def _convert(key: str, value):
    if value is None:
        return None
    if key in _RATIONAL_KEYS:
        return parse_rational(value) if isinstance(value, str) else Q(value)
    if key in _INT_KEYS:
        return int(value)
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="unionholes", description="Hole counts of unions of convex translates.")
    parser.add_argument("--version", action="version", version=__version__)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--m", type=int)
    common.add_argument("--eps", help="translate spacing override, p/q")
    common.add_argument("--zeta2", help="surrogate for zeta(2), p/q")
    common.add_argument("--zeta3", help="surrogate for zeta(3), p/q")
    common.add_argument("--depth", type=int, help="eta steps before the limit vertex")
    common.add_argument("--gamma-len", type=int, help="gamma steps before the limit vertex")
    common.add_argument("--t", help="back displacement, p/q")
    common.add_argument("--resolution", help="oracle cell size h, p/q")
    common.add_argument("--cell-budget", type=int)
    common.add_argument("--threads", type=int)
    common.add_argument("--seed", type=int)
    common.add_argument("--trials", type=int)
    common.add_argument("--n", type=int, help="maximum family size for random-bound")
    common.add_argument("--digits", type=int, help="decimal digits in OBJ files")
    common.add_argument("--family", choices=("extremal", "warmup"))
    common.add_argument("--dump", help="write the coarse occupancy grid here (run-length text)")
    common.add_argument("--out", help="output directory")
    common.add_argument("--config", help="key=value file; flags given on the command line win")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sub.add_parser(name, parents=[common])
    return parser


def config_from_args(argv=None) -> RunConfig:
    ns = build_parser().parse_args(argv)
    merged = read_config(ns.config) if ns.config else {}
    for key, value in vars(ns).items():
        if key in ("config", "command"):
            continue
        if value is not None:
            merged[key] = value
    cfg = RunConfig(ns.command)
    for key, value in merged.items():
        if not hasattr(cfg, key) or key == "command":
            raise ValueError(f"unknown configuration key {key!r}")
        setattr(cfg, key, _convert(key, value))
    cfg.validate()
    return cfg


# --------------------------------------------------------------------------
# Commands
# --------------------------------------------------------------------------


@dataclass
class Outcome:
    report: dict
    exit_code: int = EXIT_OK
    csv_rows: list = field(default_factory=list)
    csv_header: list = field(default_factory=list)
    artifacts: dict = field(default_factory=dict)  # in-memory results, never serialized


def _identity(name: str, computed, expected, holds: bool | None = None) -> dict:
    ok = computed == expected if holds is None else holds
    return {
        "name": name,
        "computed": tagged(computed),
        "expected": tagged(expected, "formula-expected"),
        "holds": ok,
    }


def _oracle_block(family, h, cell_budget: int, expected: int | None) -> tuple[dict, bool]:
    rep = oracle_hole_count(family, h, cell_budget)
    block = rep.as_dict()
    agrees = rep.stable and (expected is None or rep.count == expected)
    block["agrees_with_homology"] = agrees
    return block, agrees


def cmd_holes(cfg: RunConfig) -> Outcome:
    params = cfg.params()
    m = params.m
    ub = build_body(params)
    prediction = predicted_nerve(m)
    cache = {}

    def validate(fam):
        cx = nerve_skeleton(fam, 3, cfg.threads)
        cache["complex"], cache["family"] = cx, fam
        return verify_nerve_matches(cx, prediction)

    if cfg.eps is None:
        budget = choose_epsilon(ub, validate)
        eps_block = budget.as_dict()
        eps_block["eps"] = tagged(budget.eps)
        check = budget.certificate
        eps = budget.eps
    else:
        eps = cfg.eps
        eps1, eps2 = epsilon_bounds(ub)
        check = validate(build_family(ub, eps))
        eps_block = {
            "eps": tagged(cfg.eps, "override"),
            "eps1": format_rational(eps1),
            "eps2_squared": format_rational(eps2),
            "nerve_matches": bool(check),
        }
    family, cx = cache["family"], cache["complex"]
    witnesses = verify_witnesses(ub, family)
    holes = hole_count_from_complex(cx, len(family), 3, expected_holes(m))
    identities = [
        _identity("holes = m^3 - m + 1", holes.hole_count, expected_holes(m)),
        _identity("two-simplices", holes.simplex_counts[2], expected_two_simplices(m)),
        _identity("betti2 = m^3 - m", holes.betti.betti, m**3 - m),
        _identity("holes <= C(n,3) + 1", holes.hole_count, holes.upper_bound, holes.hole_count <= holes.upper_bound),
        {"name": "nerve matches prediction", "holds": bool(check)},
        {"name": "witness points", "holds": witnesses.passed},
    ]
    report = {
        "params": params.as_dict(),
        "body": {"vertices": len(ub.body.vertices), "facets": len(ub.body.facets)},
        "epsilon": eps_block,
        "nerve_check": check.as_dict(),
        "witnesses": witnesses.as_dict(),
        "holes": holes.as_dict(),
        "identities": identities,
    }
    if cfg.resolution is not None:
        block, agrees = _oracle_block(family, cfg.resolution, cfg.cell_budget, holes.hole_count)
        report["oracle"] = block
        identities.append({"name": "oracle agrees", "holds": agrees})
    code = EXIT_OK if all(i["holds"] for i in identities) else EXIT_MISMATCH
    artifacts = {"body": ub, "family": family, "complex": cx, "eps": eps}
    return Outcome(report, code, [holes.csv_row(m)], CSV_HEADER, artifacts)


def cmd_warmup(cfg: RunConfig) -> Outcome:
    if cfg.m is None or cfg.m < 2:
        raise ValueError(f"the warm-up needs m >= 2, got {cfg.m}")
    m = cfg.m
    family, layout = build_warmup_family(m)
    holes = hole_count(family, workers=cfg.threads)
    h = cfg.resolution if cfg.resolution is not None else default_resolution(layout.feature_size)
    block, agrees = _oracle_block(family, h, cfg.cell_budget, holes.hole_count)
    identities = [
        _identity("holes >= m(m-1)", holes.hole_count, m * (m - 1), holes.hole_count >= m * (m - 1)),
        {"name": "oracle agrees", "holds": agrees},
    ]
    report = {
        "params": {"m": m, **layout.as_dict()},
        "holes": holes.as_dict(),
        "bounded_holes": tagged(holes.hole_count - 1),
        "oracle": block,
        "identities": identities,
    }
    code = EXIT_OK if all(i["holds"] for i in identities) else EXIT_MISMATCH
    return Outcome(report, code, [holes.csv_row(m) + [block["count_h_half"]["value"]]], CSV_HEADER + ["oracle"])


def _box(lo, hi):
    return convex_hull([(x, y, z) for x in (lo[0], hi[0]) for y in (lo[1], hi[1]) for z in (lo[2], hi[2])])


def random_family(rng: random.Random, size: int):
    """``size`` random hulls: lattice blobs mixed with plates around one cell.

    Blobs are hulls of 4-8 half-integer points near a random centre. Plates
    are thin slabs covering a face of the unit-2 cell at the origin (or of a
    random neighbour), so some families enclose cavities.
    """
    items = []
    quarter = Q(1, 4)
    for _ in range(size):
        if rng.random() < 0.5:
            centre = [rng.randint(0, 6) for _ in range(3)]
            pts = [
                tuple(Q(centre[c] + rng.randint(-3, 3), 2) for c in range(3))
                for _ in range(rng.randint(4, 8))
            ]
            items.append((convex_hull(pts), (0, 0, 0)))
            continue
        cell = [0, 0, 0] if rng.random() < 0.8 else [2 * rng.randint(-1, 1) for _ in range(3)]
        axis, side = rng.randrange(3), rng.randint(0, 1)
        lo = [Q(c) - quarter for c in cell]
        hi = [Q(c + 2) + quarter for c in cell]
        lo[axis] = Q(cell[axis] + 2 * side) - quarter
        hi[axis] = Q(cell[axis] + 2 * side) + quarter
        items.append((_box(lo, hi), (0, 0, 0)))
    return family_of(items, "random")


def cmd_random_bound(cfg: RunConfig) -> Outcome:
    if cfg.n < 1 or cfg.trials < 0:
        raise ValueError("random-bound needs n >= 1 and trials >= 0")
    rng = random.Random(cfg.seed)
    trials, rows = [], []
    for index in range(cfg.trials):
        size = rng.randint(1, cfg.n)
        family = random_family(rng, size)
        rep = hole_count(family, workers=cfg.threads)
        holds = rep.hole_count <= rep.upper_bound
        trials.append({"trial": index, "n": size, "holes": tagged(rep.hole_count), "bound": tagged(rep.upper_bound, "C(n,3)+1"), "holds": holds})
        rows.append([index, size, rep.hole_count, rep.upper_bound, holds])
    report = {
        "params": {"n": cfg.n, "trials": cfg.trials, "seed": cfg.seed},
        "trials": trials,
        "max_holes": tagged(max((r[2] for r in rows), default=0)),
        "all_hold": all(r[4] for r in rows),
    }
    code = EXIT_OK if report["all_hold"] else EXIT_MISMATCH
    return Outcome(report, code, rows, ["trial", "n", "holes", "bound", "holds"])


def _extremal_family(cfg: RunConfig):
    ub = build_body(cfg.params())
    eps = cfg.eps if cfg.eps is not None else choose_epsilon(ub).eps
    return ub, build_family(ub, eps), eps


def cmd_export(cfg: RunConfig) -> Outcome:
    if not cfg.out:
        raise ValueError("export needs --out")
    dest = Path(cfg.out)
    dest.mkdir(parents=True, exist_ok=True)
    ub, family, eps = _extremal_family(cfg)
    write_obj(ub.body, dest / "body.obj", digits=cfg.digits)
    files = ["body.obj"]
    translates = {}
    for t in family:
        write_obj(t.body, dest / f"{t.name}.obj", t.offset, cfg.digits)
        files.append(f"{t.name}.obj")
        translates[t.name] = [format_rational(c) for c in t.offset]
    report = {
        "params": cfg.params().as_dict(),
        "eps": tagged(eps, "override" if cfg.eps is not None else "computed"),
        "files": files,
        "body_vertices": [
            {"exact": [format_rational(c) for c in v], "decimal": [decimal_string(c, cfg.digits) for c in v]}
            for v in ub.body.vertices
        ],
        "translate_offsets": translates,
    }
    return Outcome(report)


def cmd_oracle(cfg: RunConfig) -> Outcome:
    if cfg.family == "warmup":
        if cfg.m is None or cfg.m < 2:
            raise ValueError(f"the warm-up needs m >= 2, got {cfg.m}")
        family, layout = build_warmup_family(cfg.m)
        feature = layout.feature_size
        params = {"family": "warmup", **layout.as_dict()}
    else:
        _, family, feature = _extremal_family(cfg)
        params = {"family": "extremal", **cfg.params().as_dict(), "eps": format_rational(feature)}
    h = cfg.resolution if cfg.resolution is not None else default_resolution(feature)
    if cfg.dump:
        grid = rasterize(family, h, cfg.cell_budget)
        with open(cfg.dump, "w", encoding="utf-8") as fh:
            write_occupancy_rle(grid, fh)
        del grid
    block = oracle_hole_count(family, h, cfg.cell_budget).as_dict()
    report = {"params": params, "oracle": block}
    code = EXIT_OK if block["stable"] else EXIT_MISMATCH
    return Outcome(report, code, [[cfg.m, format_rational(h), block["count_h"]["value"], block["count_h_half"]["value"], block["stable"]]],
                   ["m", "h", "count_h", "count_h_half", "stable"])


HANDLERS = {
    "warmup": cmd_warmup,
    "holes": cmd_holes,
    "random-bound": cmd_random_bound,
    "export": cmd_export,
    "oracle": cmd_oracle,
}


# --------------------------------------------------------------------------
# Output
# --------------------------------------------------------------------------


def render_json(command: str, body: dict, timestamp: str | None = None) -> str:
    """Report text; the timestamp lives only in ``header``."""
    doc = {
        "schema": SCHEMA,
        "header": {"tool": "unionholes", "version": __version__, "generated": timestamp or _now()},
        "command": command,
        **body,
    }
    return json.dumps(doc, indent=2, sort_keys=False) + "\n"


def render_csv(header: list, rows: list) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def _now() -> str:
    return _dt.datetime.now(_dt.timezone.utc).replace(microsecond=0).isoformat()


def _stem(cfg: RunConfig) -> str:
    name = cfg.command.replace("-", "_")
    return f"{name}_m{cfg.m}" if cfg.m is not None else name


def main(argv=None) -> int:
    command = None
    try:
        cfg = config_from_args(argv)
        command = cfg.command
        outcome = HANDLERS[cfg.command](cfg)
    except (ConstructionError, ValueError, GridTooLarge, OSError) as exc:
        error = {"error": type(exc).__name__, "message": str(exc)}
        if isinstance(exc, ConstructionError):
            error["certificate"] = exc.certificate
        sys.stdout.write(render_json(command or "unknown", error))
        return EXIT_FAILURE
    text = render_json(cfg.command, {**outcome.report, "exit_code": outcome.exit_code})
    if cfg.out:
        dest = Path(cfg.out)
        dest.mkdir(parents=True, exist_ok=True)
        (dest / f"{_stem(cfg)}.json").write_text(text, encoding="utf-8")
        if outcome.csv_rows:
            (dest / f"{_stem(cfg)}.csv").write_text(render_csv(outcome.csv_header, outcome.csv_rows), encoding="utf-8")
    sys.stdout.write(text)
    return outcome.exit_code


if __name__ == "__main__":
    raise SystemExit(main())

"""Command line front end: ``singcert {analyze|dual|deflate|separation|certify|corpus}``."""
from __future__ import annotations

import argparse
import dataclasses
import enum
import json
import logging
import math
import os
import sys
import time
from importlib import resources
from pathlib import Path

import numpy as np

from . import __version__
from .certify import (
    NotSimpleMultiple,
    SingularOperator,
    certify_cluster,
    jacobian_frame,
    separation_analysis,
)
from .deflate import (
    RegularRoot,
    build_characterization_matrix,
    deflate_once,
    is_simple_multiple,
    one_step_equivalence_check,
)
from .dualspace import MacaulayTooLarge, NotStabilized, dual_invariants
from .numlin import DEFAULT_RANK_TOL
from .polyexpr import DimensionError, ParseError, PolySystem, evaluate, load_point, parse_system

log = logging.getLogger("singcert")

EXIT_OK = 0
EXIT_NOT_CERTIFIED = 1
EXIT_USAGE = 2
EXIT_DIMENSION = 3
EXIT_NOT_STABILIZED = 4


class UsageError(Exception):
    pass


@dataclasses.dataclass(frozen=True)
class RunConfig:
    rank_tol: float = DEFAULT_RANK_TOL
    res_tol: float = 1e-6
    seed: int = 0
    kmax: int = 12
    d_variant: str = "kappa"
    output: str = "text"
    gamma_override: float | None = None
    trials: int = 20

    def __post_init__(self):
        for name in ("rank_tol", "res_tol"):
            v = getattr(self, name)
            if not 0 < v < 1:
                raise UsageError(f"{name} must lie in (0, 1), got {v}")
        if self.kmax < 1:
            raise UsageError("kmax must be >= 1")
        if self.trials < 1:
            raise UsageError("trials must be >= 1")
        if self.gamma_override is not None and not self.gamma_override >= 1:
            raise UsageError("gamma override must be >= 1")


# ------------------------------------------------------------ serialization

def to_jsonable(obj):
    """Plain JSON structure: complex numbers become ``[re, im]``, arrays lists."""
    if isinstance(obj, enum.Enum):
        return obj.value
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else None
    if isinstance(obj, (complex, np.complexfloating)):
        return [to_jsonable(obj.real), to_jsonable(obj.imag)]
    if isinstance(obj, np.ndarray):
        return [to_jsonable(v) for v in obj.tolist()] if obj.ndim else to_jsonable(obj.item())
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if dataclasses.is_dataclass(obj):
        return {f.name: to_jsonable(getattr(obj, f.name)) for f in dataclasses.fields(obj)}
    if obj is None or isinstance(obj, str):
        return obj
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def emit_json(report: dict) -> str:
    # json writes floats with repr, the shortest string that round-trips
    return json.dumps(to_jsonable(report), indent=2, allow_nan=False)


def _format_value(v) -> str:
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, list) and len(v) == 2 and all(isinstance(t, float) for t in v):
        return f"{v[0]!r}{'+' if v[1] >= 0 else '-'}{abs(v[1])!r}i"
    if isinstance(v, list):
        return "[" + ", ".join(_format_value(t) for t in v) + "]"
    return str(v)


def emit_text(report: dict) -> str:
    lines = [f"command: {report['command']}"]
    result = to_jsonable(report["result"])
    if report["command"] == "corpus":
        lines.append(format_corpus_table(result["rows"]))
    else:
        for key, val in result.items():
            if isinstance(val, dict):
                lines.append(f"{key}:")
                lines.extend(f"  {k}: {_format_value(v)}" for k, v in val.items())
            else:
                lines.append(f"{key}: {_format_value(val)}")
    lines.append(f"wall_time: {report['wall_time']:.3f}s")
    return "\n".join(lines)


# ------------------------------------------------------------------ inputs

def read_system(path) -> PolySystem:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise UsageError(f"cannot read system file {path}: {exc}") from exc
    return parse_system(text)


def read_point(path, f: PolySystem) -> np.ndarray:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise UsageError(f"cannot read point file {path}: {exc}") from exc
    try:
        x = load_point(text)
    except (ValueError, TypeError) as exc:
        raise UsageError(f"malformed point file {path}: {exc}") from exc
    if x.shape != (f.nvars,):
        raise DimensionError(f"point has {x.size} coordinates but the system has {f.nvars} variables")
    return x


# ---------------------------------------------------------------- commands

def cmd_dual(f, x, cfg: RunConfig):
    inv = dual_invariants(f, x, cfg.kmax, cfg.rank_tol, cfg.res_tol)
    kappa = jacobian_frame(f, x, cfg.rank_tol).kappa
    out = {"kappa": kappa, **inv.as_dict(), "isolation": "assumed (dual space dimensions stabilized)"}
    return out, EXIT_OK


def cmd_analyze(f, x, cfg: RunConfig):
    frame = jacobian_frame(f, x, cfg.rank_tol, cfg.seed)
    verdict = is_simple_multiple(f, x, cfg.seed, cfg.rank_tol, cfg.res_tol)
    out = {
        "kappa": frame.kappa,
        "verdict": verdict,
        "residual_norm": float(np.linalg.norm(evaluate(f, x))),
        "jacobian_sigma": frame.sigma,
    }
    try:
        inv = dual_invariants(f, x, cfg.kmax, cfg.rank_tol, cfg.res_tol)
        out.update(breadth=inv.breadth, depth=inv.depth, multiplicity=inv.multiplicity, dual_dims=inv.dims,
                   isolation="assumed (dual space dimensions stabilized)")
    except (NotStabilized, MacaulayTooLarge) as exc:
        out.update(breadth=None, depth=None, multiplicity=None, dual_dims=getattr(exc, "dims", None),
                   isolation=f"unknown ({exc})")
    if frame.kappa >= 1 and f.is_square():
        B = build_characterization_matrix(f, x, frame)
        out["B_sigma_min"] = B.sigma_min
        out["B_rel_sigma_min"] = B.rel_sigma_min
    return out, EXIT_OK


def cmd_deflate(f, x, cfg: RunConfig):
    frame = jacobian_frame(f, x, cfg.rank_tol, cfg.seed)
    if frame.kappa == 0:
        raise RegularRoot("Df(x) has trivial kernel; x is a regular root and needs no deflation")
    step = deflate_once(f, x, frame, np.random.default_rng(cfg.seed), cfg.rank_tol)
    B = build_characterization_matrix(f, x, frame)
    eq = one_step_equivalence_check(f, x, cfg.trials, cfg.seed, cfg.rank_tol)
    out = {
        "kappa": frame.kappa,
        "deflated": step.as_summary(),
        "B_full_rank": B.full_rank(cfg.rank_tol),
        "B_rel_sigma_min": B.rel_sigma_min,
        "equivalence": {
            "trials": eq.trials, "agree": eq.agree, "borderline": eq.borderline,
            "B_full": eq.b_full, "Dg_full": eq.dg_full,
        },
        "deflated_system": str(step.g),
    }
    return out, EXIT_OK


def cmd_separation(f, x, cfg: RunConfig):
    res = separation_analysis(f, x, cfg.seed, cfg.rank_tol, cfg.res_tol, cfg.d_variant, cfg.gamma_override)
    out = {
        "radius": res.radius,
        "kappa": res.kappa,
        "gamma": res.gamma.gamma,
        "gamma_source": res.gamma.source,
        "gamma_per_k": [list(t) for t in res.gamma.per_k],
        "d": res.d.d,
        "d_variant": res.d.variant,
        "inv_norm_A": res.inv_norm_A,
    }
    return out, EXIT_OK


def cmd_certify(f, x, cfg: RunConfig):
    rep = certify_cluster(f, x, cfg.seed, cfg.rank_tol, cfg.d_variant, cfg.gamma_override)
    code = EXIT_OK if rep.verdict == "Certified" else EXIT_NOT_CERTIFIED
    return dataclasses.asdict(rep), code


def corpus_row(name: str, f: PolySystem, x, cfg: RunConfig) -> dict:
    row = {"name": name, "kappa": None, "depth": None, "multiplicity": None, "mu_ge_2kappa": None,
           "verdict": None, "one_step": None, "frame_agreement": None, "certified": None, "error": None}
    frame = jacobian_frame(f, x, cfg.rank_tol, cfg.seed)
    row["kappa"] = frame.kappa
    row["verdict"] = str(is_simple_multiple(f, x, cfg.seed, cfg.rank_tol, cfg.res_tol))
    inv = dual_invariants(f, x, cfg.kmax, cfg.rank_tol, cfg.res_tol)
    row["depth"], row["multiplicity"] = inv.depth, inv.multiplicity
    row["mu_ge_2kappa"] = inv.multiplicity >= 2 ** frame.kappa
    if frame.kappa >= 1:
        step = deflate_once(f, x, frame, np.random.default_rng(cfg.seed), cfg.rank_tol)
        row["one_step"] = step.full_rank
        eq = one_step_equivalence_check(f, x, cfg.trials, cfg.seed, cfg.rank_tol)
        row["frame_agreement"] = f"{eq.agree}/{eq.trials}"
    row["certified"] = certify_cluster(f, x, cfg.seed, cfg.rank_tol, cfg.d_variant, cfg.gamma_override).verdict
    return row


def _check_expected(row: dict, expected: dict) -> list:
    return [k for k, v in expected.items() if k in row and row[k] != v]


def bundled_corpus() -> Path:
    return Path(str(resources.files("singcert") / "corpus"))


def cmd_corpus(directory, cfg: RunConfig):
    root = Path(directory) if directory is not None else bundled_corpus()
    if not root.is_dir():
        raise UsageError(f"{root} is not a directory")
    rows = []
    mismatched = 0
    for case in sorted(p for p in root.iterdir() if p.is_dir()):
        try:
            f = read_system(case / "system.txt")
            x = read_point(case / "point.json", f)
            row = corpus_row(case.name, f, x, cfg)
        except Exception as exc:  # one bad entry must not stop the run
            log.warning("corpus entry %s failed: %s", case.name, exc)
            row = {"name": case.name, "error": f"{type(exc).__name__}: {exc}"}
        exp_path = case / "expected.json"
        if exp_path.exists():
            bad = _check_expected(row, json.loads(exp_path.read_text()))
            row["expected_mismatch"] = bad
            mismatched += bool(bad)
        rows.append(row)
    return {"directory": str(root), "rows": rows}, EXIT_NOT_CERTIFIED if mismatched else EXIT_OK


CORPUS_COLUMNS = ("name", "kappa", "depth", "multiplicity", "mu_ge_2kappa", "verdict", "one_step",
                  "frame_agreement", "certified")


def format_corpus_table(rows) -> str:
    header = ["name", "kappa", "rho", "mu", "mu>=2^k", "verdict", "one-step", "agree", "certified"]
    table = [header]
    for r in rows:
        if r.get("error"):
            table.append([r["name"], "error: " + r["error"]] + [""] * (len(header) - 2))
        else:
            table.append(["-" if r.get(c) is None else str(r.get(c)) for c in CORPUS_COLUMNS])
    widths = [max(len(row[i]) for row in table) for i in range(len(header))]
    return "\n".join("  ".join(c.ljust(w) for c, w in zip(row, widths)).rstrip() for row in table)


COMMANDS = {
    "analyze": cmd_analyze,
    "dual": cmd_dual,
    "deflate": cmd_deflate,
    "separation": cmd_separation,
    "certify": cmd_certify,
}


# ------------------------------------------------------------------ parser

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--rank-tol", type=float, default=DEFAULT_RANK_TOL, help="relative rank tolerance")
    common.add_argument("--res-tol", type=float, default=1e-6, help="residual tolerance for |f(x)|")
    common.add_argument("--seed", type=int, default=None, help="random seed (default: $SINGCERT_SEED or 0)")
    common.add_argument("--kmax", type=int, default=12, help="largest dual space order tried")
    common.add_argument("--d-variant", choices=("kappa", "kappa2"), default="kappa",
                        help="equation defining the universal constant d")
    common.add_argument("--gamma-override", type=float, default=None,
                        help="use an externally computed gamma bound (flagged in the report)")
    common.add_argument("--trials", type=int, default=20, help="random frames in the one-step check")
    common.add_argument("--json", action="store_true", help="emit a JSON report")
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="singcert", description="Certify simple multiple roots of polynomial systems.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sp = sub.add_parser(name, parents=[common], help=COMMANDS[name].__name__.replace("cmd_", ""))
        sp.add_argument("system", help="system file (vars header plus ';'-separated polynomials)")
        sp.add_argument("point", help="JSON point file, a list of [re, im] pairs")
    sp = sub.add_parser("corpus", parents=[common], help="run every case of a corpus directory")
    sp.add_argument("directory", nargs="?", default=None, help="corpus root (default: bundled corpus)")
    return p


def _resolve_seed(seed):
    if seed is not None:
        return seed
    env = os.environ.get("SINGCERT_SEED")
    if env is None:
        return 0
    try:
        return int(env)
    except ValueError as exc:
        raise UsageError(f"SINGCERT_SEED must be an integer, got {env!r}") from exc


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    start = time.perf_counter()
    try:
        cfg = RunConfig(args.rank_tol, args.res_tol, _resolve_seed(args.seed), args.kmax, args.d_variant,
                        "json" if args.json else "text", args.gamma_override, args.trials)
        if args.command == "corpus":
            inputs = {"directory": args.directory}
            result, code = cmd_corpus(args.directory, cfg)
        else:
            inputs = {"system": args.system, "point": args.point}
            f = read_system(args.system)
            x = read_point(args.point, f)
            result, code = COMMANDS[args.command](f, x, cfg)
    except (ParseError, UsageError) as exc:
        print(f"singcert: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DimensionError as exc:
        print(f"singcert: dimension mismatch: {exc}", file=sys.stderr)
        return EXIT_DIMENSION
    except (NotStabilized, MacaulayTooLarge) as exc:
        print(f"singcert: {exc}", file=sys.stderr)
        return EXIT_NOT_STABILIZED
    except (NotSimpleMultiple, SingularOperator, RegularRoot) as exc:
        print(f"singcert: {exc}", file=sys.stderr)
        return EXIT_NOT_CERTIFIED
    report = {
        "command": args.command,
        "inputs": inputs,
        "config": dataclasses.asdict(cfg),
        "result": result,
        "wall_time": time.perf_counter() - start,
    }
    print(emit_json(report) if cfg.output == "json" else emit_text(report))
    return code


if __name__ == "__main__":
    sys.exit(main())

"""Command-line front end.

Exit codes: 0 success, 1 invalid input or failed computation (a JSON reason
is written to stderr), 2 a ``verify`` suite reported a failing check.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import inspect
import io
import json
import math
import os
import sys
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

import numpy as np

from diracfam import __version__
from diracfam import bar_homology as bh
from diracfam import char_classes as cc
from diracfam import family_index as fi
from diracfam import spectral_flow as sf
from diracfam import torus_dirac as td
from diracfam.clifford import MAX_DIM
from diracfam.verify import SUITES, verify_suite

THREADS_ENV = "DIRACFAM_THREADS"
MAX_MODES = 2_000_000
COMMANDS = ("spectrum", "flow", "index-family", "chern", "ahat", "index-formula", "bar", "verify")
FORMATS = ("json", "csv", "table")


class InputError(ValueError):
    """Invalid configuration; reported with exit code 1."""

    def __init__(self, reason: str, code: str = "invalid_input"):
        super().__init__(reason)
        self.code = code


def _default_threads() -> int:
    raw = os.environ.get(THREADS_ENV, "1")
    try:
        value = int(raw)
    except ValueError:
        raise InputError(f"{THREADS_ENV} must be a positive integer, got {raw!r}") from None
    return value


@dataclass
class RunConfig:
    """One CLI invocation. ``None`` means "use the command's default"."""

    command: str | None = None
    dim: int | None = None
    twist: list | None = None
    cutoff: int | None = None
    grid: int | None = None
    radius: float | None = None
    samples: int | None = None
    tolerance: float | None = None
    format: str = "json"
    out: str | None = None
    path: object = None
    numeric: bool = False
    betti: int | None = None
    cup: str = ""
    rank: int = 1
    c1: str | None = None
    c2: str | None = None
    kind: str = "pontryagin"
    pontryagin: dict = field(default_factory=dict)
    suite: str | None = None
    max_dim: int | None = None
    scan: int | None = None
    endpoints: str = "strict"
    threads: int | None = None

    def validate(self) -> None:
        if self.command not in COMMANDS:
            raise InputError(f"unknown command {self.command!r}; choose from {', '.join(COMMANDS)}")
        if self.format not in FORMATS:
            raise InputError(f"format must be one of {', '.join(FORMATS)}")
        if self.format == "csv" and self.command != "spectrum":
            raise InputError("csv output is only available for spectrum")
        _check_int(self, "dim", 1, MAX_DIM)
        _check_int(self, "cutoff", 1, 10_000)
        _check_int(self, "grid", 2, 1024)
        _check_int(self, "samples", 8, 1_000_000)
        _check_int(self, "betti", 0, 12)
        _check_int(self, "max_dim", 1, MAX_DIM)
        _check_int(self, "scan", 0, 4)
        _check_int(self, "threads", 1, 1024)
        _check_int(self, "rank", 0, 10**9)
        if self.radius is not None and not 0 < self.radius < 1:
            raise InputError("radius must lie in (0, 1)")
        if self.tolerance is not None and not self.tolerance > 0:
            raise InputError("tolerance must be positive")
        if self.endpoints not in ("strict", "left-continuous"):
            raise InputError("endpoints must be strict or left-continuous")
        if self.kind not in ("pontryagin", "family-torus", "odd-family"):
            raise InputError("kind must be pontryagin, family-torus or odd-family")
        if self.dim is not None and self.cutoff is not None and self.command in ("spectrum", "flow"):
            if (2 * self.cutoff + 1) ** self.dim > MAX_MODES:
                raise InputError(f"mode box (2K+1)^n exceeds {MAX_MODES} modes")


def _check_int(cfg: RunConfig, name: str, lo: int, hi: int) -> None:
    value = getattr(cfg, name)
    if value is None:
        return
    if isinstance(value, bool) or not isinstance(value, int):
        raise InputError(f"{name} must be an integer")
    if not lo <= value <= hi:
        raise InputError(f"{name} must lie in [{lo}, {hi}], got {value}")


# parsing ---------------------------------------------------------------


def _parse_number(text: str):
    """Decimal or ``p/q`` strings become exact rationals."""
    try:
        return Fraction(text.strip())
    except (ValueError, ZeroDivisionError):
        raise InputError(f"not a rational number: {text!r}") from None


def _parse_twist(text: str) -> list:
    return [_parse_number(t) for t in text.split(",") if t.strip()]


def _parse_pontryagin(items) -> dict:
    out = {}
    for item in items:
        for part in filter(None, (p.strip() for p in item.split(","))):
            key, sep, val = part.partition("=")
            if not sep:
                raise InputError(f"Pontryagin number must be NAME=VALUE, got {part!r}")
            out[key.strip()] = val.strip()
    return out


class _Parser(argparse.ArgumentParser):
    # usage errors are invalid input (exit 1); exit 2 is reserved for verify failures
    def error(self, message):
        raise InputError(f"{self.prog}: {message}")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="diracfam",
        description="Twisted Dirac operators on flat tori and their index invariants.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--config", help="JSON file with RunConfig fields; flags override it")
    parser.add_argument("--threads", type=int, default=argparse.SUPPRESS,
                        help=f"worker threads (default from {THREADS_ENV}, else 1)")
    sub = parser.add_subparsers(dest="command")

    def add(name, help_text):
        p = sub.add_parser(name, help=help_text, argument_default=argparse.SUPPRESS)
        p.add_argument("--format", choices=FORMATS)
        p.add_argument("--out", help="write the report to this file instead of stdout")
        return p

    p = add("spectrum", "eigenvalues with multiplicity of the twisted Dirac operator")
    p.add_argument("--dim", type=int, help="torus dimension n")
    p.add_argument("--twist", type=_parse_twist, help='comma-separated twist, e.g. "1/4,0"')
    p.add_argument("--cutoff", type=int, help="mode box cutoff K")

    p = add("flow", "spectral flow along a piecewise-linear path of twists")
    p.add_argument("--path", help="JSON file: list of vertices or {vertices, closed}")
    p.add_argument("--dim", type=int)
    p.add_argument("--cutoff", type=int)
    p.add_argument("--numeric", action="store_true", help="also run eigenvalue branch tracking")
    p.add_argument("--samples", type=int, help="samples per segment for --numeric")
    p.add_argument("--tolerance", type=float, help="zero tolerance for --numeric")
    p.add_argument("--endpoints", choices=("strict", "left-continuous"),
                   help="--numeric treatment of endpoint zero modes (default strict)")

    p = add("index-family", "first Chern class of the index bundle over the parameter torus")
    p.add_argument("--dim", type=int)
    p.add_argument("--cutoff", type=int)
    p.add_argument("--grid", type=int, help="W-construction grid resolution m (m x m)")
    p.add_argument("--radius", type=float, help="loop radius around each kernel jump")
    p.add_argument("--samples", type=int, help="samples on each loop")

    p = add("chern", "Chern character rank + c1 + (c1^2 - 2 c2)/2")
    p.add_argument("--rank", type=int)
    p.add_argument("--c1", help="name of the formal degree-2 class, or 0")
    p.add_argument("--c2", help="name of the formal degree-4 class, or 0")

    p = add("ahat", "A-hat series truncated at the given dimension")
    p.add_argument("--dim", type=int)

    p = add("index-formula", "evaluate an index formula")
    p.add_argument("--kind", choices=("pontryagin", "family-torus", "odd-family"))
    p.add_argument("--dim", type=int)
    p.add_argument("--pontryagin", action="append", type=str,
                   help='Pontryagin numbers, e.g. "p1=-48" or "p1^2=..,p2=.."')
    p.add_argument("--betti", type=int)
    p.add_argument("--cup", help='cup form, e.g. "1,2,3:1; 4,5,6:1"')

    p = add("bar", "ranks of the bar complex of a triple cup product")
    p.add_argument("--betti", type=int)
    p.add_argument("--cup")
    p.add_argument("--scan", type=int, help="also scan all forms with |zeta_ijk| <= SCAN")

    p = add("verify", "run a named verification suite")
    p.add_argument("suite", choices=tuple(SUITES))
    p.add_argument("--max-dim", dest="max_dim", type=int)
    p.add_argument("--dim", type=int)
    p.add_argument("--cutoff", type=int)
    p.add_argument("--grid", type=int)
    return parser


def load_config_file(path: str) -> dict:
    try:
        data = json.loads(Path(path).read_text())
    except OSError as exc:
        raise InputError(f"cannot read config {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise InputError(f"config {path} is not valid JSON: {exc}") from None
    if not isinstance(data, dict):
        raise InputError("config must be a JSON object")
    known = {f.name for f in dataclasses.fields(RunConfig)}
    unknown = sorted(set(data) - known)
    if unknown:
        raise InputError(f"unknown config keys: {', '.join(unknown)}")
    if isinstance(data.get("twist"), str):
        data["twist"] = _parse_twist(data["twist"])
    elif isinstance(data.get("twist"), list):
        data["twist"] = [_parse_number(v) if isinstance(v, str) else v for v in data["twist"]]
    if isinstance(data.get("pontryagin"), list):
        data["pontryagin"] = _parse_pontryagin(data["pontryagin"])
    return data


def make_config(argv=None) -> RunConfig:
    parser = build_parser()
    args = vars(parser.parse_args(argv))
    merged: dict = {}
    config_path = args.pop("config", None)
    if config_path:
        merged.update(load_config_file(config_path))
    if args.get("command") is None:
        args.pop("command", None)
    if "pontryagin" in args:
        args["pontryagin"] = _parse_pontryagin(args["pontryagin"])
    merged.update(args)
    cfg = RunConfig(**merged)
    if cfg.threads is None:
        cfg.threads = _default_threads()
    cfg.validate()
    return cfg


# serialization ---------------------------------------------------------


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, Fraction):
        return str(obj.numerator) if obj.denominator == 1 else f"{obj.numerator}/{obj.denominator}"
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        value = float(obj)
        if not math.isfinite(value):
            raise ValueError("non-finite value in report")
        return value
    return obj


def render_json(report: dict) -> str:
    return json.dumps(_jsonable(report), indent=2) + "\n"


def _csv_cell(v):
    if isinstance(v, float):
        return format(v, ".17g")
    return v


def render_csv(header, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_csv_cell(v) for v in row])
    return buf.getvalue()


def render_table(report: dict) -> str:
    lines = []

    def walk(prefix, obj):
        if isinstance(obj, dict):
            for k, v in obj.items():
                walk(f"{prefix}.{k}" if prefix else str(k), v)
        elif isinstance(obj, list) and obj and isinstance(obj[0], (dict, list)):
            for i, v in enumerate(obj):
                walk(f"{prefix}[{i}]", v)
        else:
            lines.append(f"{prefix}: {json.dumps(obj)}")

    walk("", _jsonable(report))
    return "\n".join(lines) + "\n"


# commands --------------------------------------------------------------


def _need(cfg: RunConfig, name: str, default=None):
    value = getattr(cfg, name)
    if value is None:
        if default is None:
            raise InputError(f"--{name.replace('_', '-')} is required for {cfg.command}")
        return default
    return value


def cmd_spectrum(cfg: RunConfig):
    n = _need(cfg, "dim")
    K = _need(cfg, "cutoff")
    twist = cfg.twist if cfg.twist is not None else [0] * n
    if len(twist) != n:
        raise InputError(f"twist has {len(twist)} coordinates, expected {n}")
    s = td.spectrum(n, twist, K)
    if cfg.format == "csv":
        return None, render_csv(["n", "c", "K", "completeness_radius", "lambda", "multiplicity"], s.csv_rows())
    if cfg.format == "table":
        lines = [f"n={s.n} c=({', '.join(str(v) for v in s.to_dict()['c'])}) K={s.K} "
                 f"complete for |lambda| <= {s.to_dict()['completeness_radius']}"]
        lines += [f"{lam!s:>24}  x{m}" for lam, m in s.to_dict()["entries"]]
        return None, "\n".join(lines) + "\n"
    return s.to_dict(), None


def _load_path(cfg: RunConfig) -> sf.ParamPath:
    spec = _need(cfg, "path")
    if isinstance(spec, str):
        try:
            spec = json.loads(Path(spec).read_text())
        except OSError as exc:
            raise InputError(f"cannot read path file: {exc.strerror}") from None
        except json.JSONDecodeError as exc:
            raise InputError(f"path file is not valid JSON: {exc}") from None
    closed = False
    if isinstance(spec, dict):
        unknown = set(spec) - {"vertices", "closed"}
        if unknown:
            raise InputError(f"unknown path keys: {', '.join(sorted(unknown))}")
        closed = bool(spec.get("closed", False))
        spec = spec.get("vertices")
    if not isinstance(spec, list):
        raise InputError("path must be a list of vertices")
    verts = []
    for v in spec:
        v = v if isinstance(v, list) else [v]
        verts.append([_parse_number(x) if isinstance(x, str) else x for x in v])
    return sf.ParamPath(verts, closed=closed)


def cmd_flow(cfg: RunConfig):
    path = _load_path(cfg)
    n = cfg.dim if cfg.dim is not None else path.n
    K = cfg.cutoff if cfg.cutoff is not None else int(math.floor(path.sup_norm())) + 2
    report = {"n": n, "K": K, "path": path.to_dict(), "exact_flow": sf.exact_flow(n, path, K),
              "convention": "crossings from < 0 to >= 0 count +1"}
    if cfg.numeric:
        family = sf.dirac_family(n, path, K, samples=cfg.samples or 65)
        report["numeric_flow"] = sf.numeric_flow(family, tol=cfg.tolerance or 1e-9,
                                                 endpoints=cfg.endpoints)
    return report, None


def cmd_index_family(cfg: RunConfig):
    n = cfg.dim if cfg.dim is not None else 2
    if n != 2:
        raise InputError("index-family computes c1 numerically only for --dim 2")
    K = cfg.cutoff if cfg.cutoff is not None else 3
    m = cfg.grid if cfg.grid is not None else 16
    r = cfg.radius if cfg.radius is not None else 0.1
    samples = cfg.samples if cfg.samples is not None else 64
    report = fi.total_first_chern(n, K, r, samples)
    w = fi.build_w_construction(n, K, m, workers=cfg.threads or 1)
    report["w_construction"] = {
        "W": [list(k) for k in w.W],
        "grid": [m, m],
        "fiber_dims": sorted(set(w.fiber_dims.tolist())),
        "rank": w.index,
        "min_certificate": float(w.certificates.min()),
    }
    return report, None


def _class_arg(value):
    if value is None or value.strip() == "0":
        return None
    return value.strip()


def cmd_chern(cfg: RunConfig):
    el = cc.chern_character(cfg.rank, _class_arg(cfg.c1), _class_arg(cfg.c2))
    return {"element": el.to_dict(), "rendered": str(el)}, None


def cmd_ahat(cfg: RunConfig):
    n = _need(cfg, "dim")
    el = cc.a_hat(n) if n <= 8 else cc.a_hat(n, 0, 0)
    return {"dim": n, "element": el.to_dict(), "rendered": str(el)}, None


def _cup(cfg: RunConfig) -> bh.CupForm:
    b = _need(cfg, "betti", default=-1)
    if b < 0:
        raise InputError(f"--betti is required for {cfg.command}")
    return bh.CupForm.parse(b, cfg.cup or "")


def cmd_index_formula(cfg: RunConfig):
    if cfg.kind == "pontryagin":
        n = _need(cfg, "dim")
        numbers = {k: _parse_number(str(v)) for k, v in cfg.pontryagin.items()}
        return cc.index_from_pontryagin(n, numbers).to_dict(), None
    if cfg.kind == "family-torus":
        return cc.family_ch_torus(_need(cfg, "dim")).to_dict(), None
    zeta = _cup(cfg)
    el = cc.odd_family_ch(zeta.b, zeta)
    return {"cup": str(zeta), "element": el.to_dict(), "rendered": str(el),
            "degree_1": str(el.component(1)), "degree_3": str(el.component(3))}, None


def cmd_bar(cfg: RunConfig):
    zeta = _cup(cfg)
    cert = bh.nonvanishing_check(zeta)
    report = cert.to_dict()
    report["betti"] = zeta.b
    report["cup"] = str(zeta)
    if cfg.scan is not None:
        if zeta.b > 6:
            raise InputError("--scan is limited to betti <= 6")
        report["scan"] = bh.scan_nonvanishing(zeta.b, cfg.scan)
    return report, None


_VERIFY_PARAMS = {"max_dim": "max_dim", "dim": "dim", "cutoff": "cutoff", "grid": "grid"}


def cmd_verify(cfg: RunConfig):
    fn = SUITES[cfg.suite]
    accepted = inspect.signature(fn).parameters
    params = {}
    for attr, pname in _VERIFY_PARAMS.items():
        value = getattr(cfg, attr)
        if value is None:
            continue
        if pname not in accepted:
            raise InputError(f"--{attr.replace('_', '-')} does not apply to suite {cfg.suite}")
        params[pname] = value
    return verify_suite(cfg.suite, **params), None


HANDLERS = {
    "spectrum": cmd_spectrum,
    "flow": cmd_flow,
    "index-family": cmd_index_family,
    "chern": cmd_chern,
    "ahat": cmd_ahat,
    "index-formula": cmd_index_formula,
    "bar": cmd_bar,
    "verify": cmd_verify,
}


def run(cfg: RunConfig) -> tuple[int, str]:
    """Execute one validated config; returns ``(exit_code, output_text)``."""
    report, text = HANDLERS[cfg.command](cfg)
    if text is None:
        text = render_table(report) if cfg.format == "table" else render_json(report)
    code = 0
    if cfg.command == "verify" and not report["passed"]:
        code = 2
    return code, text


def _fail(code: str, reason: str) -> int:
    sys.stderr.write(json.dumps({"error": code, "reason": reason}) + "\n")
    return 1


def main(argv=None) -> int:
    try:
        cfg = make_config(argv)
        code, text = run(cfg)
    except InputError as exc:
        return _fail(exc.code, str(exc))
    except fi.SurjectivityError as exc:
        return _fail("surjectivity_certificate_failed", str(exc))
    except sf.NonConvergenceError as exc:
        return _fail("non_convergence", str(exc))
    except sf.AliasingError as exc:
        return _fail("aliasing", str(exc))
    except (ValueError, ZeroDivisionError, TypeError) as exc:
        return _fail("invalid_input", str(exc))
    if cfg.out:
        try:
            Path(cfg.out).write_text(text)
        except OSError as exc:
            return _fail("io_error", f"cannot write {cfg.out}: {exc.strerror}")
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())

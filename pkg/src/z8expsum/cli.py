"""Command-line front end: verify | sum | fit | table.

Configuration is a flat key=value file.  Values are layered as
defaults < --config file < Z8EXPSUM_<KEY> environment variables < flags.
Exit codes: 0 pass, 1 verification failure, 2 usage or hypothesis error.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import io
import json
import os
import re
import sys
from dataclasses import dataclass, fields, replace
from typing import Sequence

ENV_PREFIX = "Z8EXPSUM_"


class UsageError(Exception):
    """Invalid configuration; reported with exit code 2."""


@dataclass
class RunConfig:
    command: str = "verify"
    # verification
    suite: str = "all"
    sweep: str = "quick"
    threshold_scale: float = 1.0
    # series
    field: str = "z"  # z | ring
    poly: str = "1,0,0,0"
    kind: str = "quartic_lhs"
    A: str = "1"
    B: str = "4"
    F: str = "0"
    D: str = "1"
    char: str = "trivial"
    psi_a: float = 0.5
    psi_b: float = 2.0
    weight_mode: str = "sqrt"
    X_min: float = 0.0  # 0 selects the per-field default grid
    X_max: float = 0.0
    X_ratio: float = 2.0
    timing: bool = False
    # fit
    input: str = ""
    window: int = 0
    expected: float = 0.0  # 0 derives the exponent from poly
    band_lo: float = 0.0
    band_hi: float = 0.0
    # tables
    table: str = "ptp"  # ptp | theta
    prime: int = 17
    max_j: int = 4
    s_values: str = "1.26,1.35,1.5"
    cutoffs: str = "2500,5000,10000,20000"
    # common
    mode: str = ""  # empty: different for verify, plain for series
    seed: int = 0
    workers: int = 1
    out: str = ""

    def canonical(self) -> str:
        """Sorted key=value lines; parsing them back gives an equal config."""
        lines = []
        for f in sorted(fields(self), key=lambda f: f.name):
            lines.append(f"{f.name}={_format(getattr(self, f.name))}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "RunConfig":
        cfg = cls()
        cfg.update(parse_kv_text(text))
        return cfg

    def update(self, values: dict[str, str]) -> None:
        known = {f.name: f for f in fields(self)}
        lookup = {k.lower(): k for k in known}
        for key, raw in values.items():
            name = lookup.get(key.replace("-", "_").lower())
            if name is None:
                raise UsageError(f"unknown config key {key!r}")
            setattr(self, name, _coerce(known[name], raw))


def _format(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _coerce(f: dataclasses.Field, raw):
    typ = f.type if isinstance(f.type, str) else f.type.__name__
    if not isinstance(raw, str):
        return raw
    raw = raw.strip()
    try:
        if typ == "bool":
            if raw.lower() in ("1", "true", "yes", "on"):
                return True
            if raw.lower() in ("0", "false", "no", "off"):
                return False
            raise ValueError(raw)
        if typ == "int":
            return int(raw)
        if typ == "float":
            return float(raw)
    except ValueError as exc:
        raise UsageError(f"bad value for {f.name}: {raw!r}") from exc
    return raw


def parse_kv_text(text: str) -> dict[str, str]:
    out = {}
    for n, line in enumerate(text.splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise UsageError(f"config line {n}: expected key=value, got {line!r}")
        k, v = line.split("=", 1)
        out[k.strip()] = v.strip()
    return out


def env_overrides(environ=None) -> dict[str, str]:
    environ = os.environ if environ is None else environ
    names = {f.name.lower() for f in fields(RunConfig)}
    out = {}
    for key, val in environ.items():
        if key.startswith(ENV_PREFIX):
            name = key[len(ENV_PREFIX):].lower()
            if name in names:
                out[name] = val
    return out


_TERM = re.compile(r"([+-]?)(\d*)(w(?:\^(\d+))?)?")


def parse_ring_element(text: str):
    """'5', '1;4;0;4' (coordinates) or '1+4w+4w^3' style."""
    from .ring import CycInt

    t = text.replace(" ", "")
    if not t:
        raise UsageError("empty ring element")
    if ";" in t:
        parts = t.split(";")
        if len(parts) != 4:
            raise UsageError(f"need 4 coordinates in {text!r}")
        try:
            return CycInt(*(int(p) for p in parts))
        except ValueError as exc:
            raise UsageError(f"bad ring element {text!r}") from exc
    coords = [0, 0, 0, 0]
    pos = 0
    while pos < len(t):
        m = _TERM.match(t, pos)
        if not m or m.end() == pos:
            raise UsageError(f"bad ring element {text!r}")
        sign, digits, wpart, exp = m.groups()
        if not digits and not wpart:
            raise UsageError(f"bad ring element {text!r}")
        coef = int(digits) if digits else 1
        if sign == "-":
            coef = -coef
        k = 0 if not wpart else int(exp) if exp else 1
        if k > 7:
            raise UsageError(f"exponent too large in {text!r}")
        # w^4 = -1
        if k >= 4:
            coef, k = -coef, k - 4
        coords[k] += coef
        pos = m.end()
    return CycInt(*coords)


def build_config(args: argparse.Namespace, environ=None) -> RunConfig:
    cfg = RunConfig(command=args.command)
    if args.config:
        try:
            with open(args.config) as fh:
                cfg.update(parse_kv_text(fh.read()))
        except OSError as exc:
            raise UsageError(f"cannot read config: {exc}") from exc
    cfg.update(env_overrides(environ))
    flag_map = {
        "suite": args.suite, "poly": args.poly, "X_min": args.X_min, "X_max": args.X_max,
        "X_ratio": args.X_ratio, "char": args.char, "mode": args.mode, "seed": args.seed,
        "workers": args.workers, "out": args.out, "sweep": args.sweep, "kind": args.kind,
        "field": args.field, "input": args.input, "table": args.table, "prime": args.prime,
        "threshold_scale": args.threshold_scale,
    }
    cfg.update({k: str(v) for k, v in flag_map.items() if v is not None})
    for item in args.set or []:
        if "=" not in item:
            raise UsageError(f"--set needs key=value, got {item!r}")
        k, v = item.split("=", 1)
        cfg.update({k: v})
    cfg.command = args.command
    if cfg.workers < 1:
        raise UsageError("workers must be >= 1")
    return cfg


# ---------------------------------------------------------------------------
# helpers shared by commands


def _mode(cfg: RunConfig, default: str):
    from .characters import AdditiveMode

    try:
        return AdditiveMode.parse(cfg.mode or default)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def select_character(selector: str, D):
    from .characters import CharacterGroup, symbol_character, trivial_character
    from .ring import Modulus

    sel = selector.strip().lower()
    unit_D = abs(D.norm()) == 1
    if sel == "trivial":
        return None if unit_D else trivial_character(Modulus(D))
    if unit_D:
        raise UsageError(f"character {selector!r} needs a modulus D with N(D) > 1")
    if sel == "quadratic":
        return symbol_character(Modulus(D), 2)
    if sel == "quartic":
        return symbol_character(Modulus(D), 4)
    if sel.startswith("idx:"):
        try:
            idx = int(sel[4:])
        except ValueError as exc:
            raise UsageError(f"bad character index in {selector!r}") from exc
        G = CharacterGroup(D)
        if not 0 <= idx < len(G):
            raise UsageError(f"character index {idx} out of range (0..{len(G) - 1})")
        return G[idx]
    raise UsageError(f"unknown character selector {selector!r}")


def _grid(cfg: RunConfig) -> list:
    from .series import SeriesError, geometric_grid

    lo, hi = (2.0**10, 2.0**17) if cfg.field == "z" else (2.0**6, 2.0**14)
    x_min = cfg.X_min or lo
    x_max = cfg.X_max or hi
    try:
        return geometric_grid(x_min, x_max, cfg.X_ratio)
    except SeriesError as exc:
        raise UsageError(str(exc)) from exc


def _open_out(path: str):
    if not path or path == "-":
        return sys.stdout, False
    try:
        return open(path, "w", newline=""), True
    except OSError as exc:
        raise UsageError(f"cannot write {path}: {exc}") from exc


def _write_csv(points, path: str, timing: bool) -> None:
    from .series import SeriesPoint

    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SeriesPoint.CSV_HEADER)
    for pt in points:
        w.writerow(pt.csv_row(with_time=timing))
    fh, close = _open_out(path)
    fh.write(buf.getvalue())
    if close:
        fh.close()


def read_series_csv(path: str):
    from .series import SeriesPoint

    try:
        with open(path, newline="") as fh:
            rows = list(csv.DictReader(fh))
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc}") from exc
    pts = []
    for row in rows:
        try:
            pts.append(SeriesPoint(float(row["X"]), complex(float(row["re"]), float(row["im"])),
                                   int(row.get("term_count") or 0),
                                   float(row.get("elapsed_ms") or 0) / 1000))
        except (KeyError, ValueError) as exc:
            raise UsageError(f"bad series CSV row {row}") from exc
    return pts


# ---------------------------------------------------------------------------
# commands


def run_verify(cfg: RunConfig) -> int:
    from .verify import SUITES, report_json, run_all

    names = list(SUITES) if cfg.suite in ("all", "") else [s.strip() for s in cfg.suite.split(",")]
    unknown = [s for s in names if s not in SUITES]
    if unknown:
        raise UsageError(f"unknown suite(s) {', '.join(unknown)}; choose from {', '.join(SUITES)}")
    if cfg.sweep not in ("quick", "full"):
        raise UsageError("sweep must be quick or full")
    if cfg.threshold_scale < 0:
        raise UsageError("threshold_scale must be >= 0")
    report = run_all(names, cfg.seed, _mode(cfg, "different"), cfg.sweep, cfg.threshold_scale)
    report["config"] = cfg.canonical()
    text = report_json(report)
    fh, close = _open_out(cfg.out)
    fh.write(text + "\n")
    if close:
        fh.close()
    for s in report["suites"]:
        status = "PASS" if s["passed"] else "FAIL"
        print(f"{status} {s['statement_id']}: worst {s['worst_residual']:.3e} "
              f"(threshold {s['threshold']:.1e}, {s['cases']} cases)", file=sys.stderr)
    return 0 if report["passed"] else 1


def compute_series(cfg: RunConfig):
    from .expsums import HypothesisError, PolySpec
    from .series import (SeriesError, SmoothWeight, patterson_series_int, quad_main_term,
                         weighted_series)

    grid = _grid(cfg)
    if cfg.field == "z":
        try:
            f = PolySpec.parse(cfg.poly)
            f.int_terms()
        except ValueError as exc:
            raise UsageError(str(exc)) from exc
        if any(x != int(x) for x in grid):
            raise UsageError("X grid over Z must consist of integers")
        return patterson_series_int(f, [int(x) for x in grid], cfg.workers), "patterson_z"
    if cfg.field != "ring":
        raise UsageError(f"field must be z or ring, got {cfg.field!r}")
    A, B, F, D = (parse_ring_element(v) for v in (cfg.A, cfg.B, cfg.F, cfg.D))
    try:
        psi = SmoothWeight(cfg.psi_a, cfg.psi_b)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    theta = select_character(cfg.char, D)
    mode = _mode(cfg, "plain")
    # "quadratic_residual": quadratic series minus its sqrt(X) main term, for
    # looking at lower-order growth; fit reports its slope without a verdict
    residual = cfg.kind == "quadratic_residual"
    kind = "quadratic_lhs" if residual else cfg.kind
    pts = []
    try:
        for X in grid:
            pt = weighted_series(kind, A, B, F, D, theta, psi, X, mode, cfg.weight_mode,
                                 cfg.workers)
            if residual:
                pt = replace(pt, value=pt.value - quad_main_term(A, B, F, D, theta, psi, X),
                             meta=dict(pt.meta, kind=cfg.kind))
            pts.append(pt)
    except (HypothesisError, SeriesError) as exc:
        raise UsageError(f"hypothesis violated: {exc}") from exc
    return pts, cfg.kind


def run_sum(cfg: RunConfig) -> int:
    pts, kind = compute_series(cfg)
    for pt in pts:
        v = complex(pt.value)
        print(f"{kind} X={pt.X:g} value={v.real:.10g}{v.imag:+.10g}i |S|={abs(v):.6g} "
              f"terms={pt.term_count} {pt.elapsed * 1000:.1f}ms", file=sys.stderr)
    _write_csv(pts, cfg.out, cfg.timing)
    return 0


def run_fit(cfg: RunConfig) -> int:
    from .expsums import PolySpec
    from .series import SeriesError, expected_exponent, fit_exponent

    if cfg.input:
        pts = read_series_csv(cfg.input)
        kind = os.path.basename(cfg.input)
    else:
        pts, kind = compute_series(cfg)
    try:
        fit = fit_exponent(pts, cfg.window or None)
    except SeriesError as exc:
        raise UsageError(str(exc)) from exc
    expected = cfg.expected
    if not expected and cfg.field == "z" and cfg.poly:
        expected = expected_exponent(PolySpec.parse(cfg.poly).int_terms())
    lo, hi = cfg.band_lo, cfg.band_hi
    report_only = not (expected or lo or hi) and cfg.kind == "quadratic_residual"
    if not (lo or hi) and not report_only:
        if not expected:
            raise UsageError("no expected exponent: set expected=, band_lo/band_hi or poly")
        lo, hi = expected - 0.1, expected + 0.1
    if report_only:
        verdict, lo, hi = "none", None, None
    else:
        verdict = "pass" if lo <= fit.slope <= hi else "fail"
    report = {"kind": kind, "slope": fit.slope, "intercept": fit.intercept, "stderr": fit.stderr,
              "window": cfg.window or fit.points_used, "points_used": fit.points_used,
              "expected_exponent": expected or None, "band": [lo, hi], "verdict": verdict}
    fh, close = _open_out(cfg.out)
    fh.write(json.dumps(report, sort_keys=True) + "\n")
    if close:
        fh.close()
    return 1 if verdict == "fail" else 0


def _split_prime(pr: int):
    from .ring import prime_ideals_above
    from sympy import isprime

    if pr < 3 or not isprime(pr) or pr % 8 != 1:
        raise UsageError(f"prime selector {pr} must be a rational prime = 1 mod 8 (split in Z[w])")
    return prime_ideals_above(pr)[0]


def run_table(cfg: RunConfig) -> int:
    from .series import SeriesError, ptp_table, theta_partial_report, enumerate_odd_ideals

    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    ok = True
    if cfg.table == "ptp":
        if not 0 <= cfg.max_j <= 6:
            raise UsageError("max_j must be in [0, 6]")
        p = _split_prime(cfg.prime)
        rows = ptp_table(p, range(cfg.max_j + 1))
        w.writerow(["prime", "norm", "order", "j", "table", "primitive_sum", "literal_sum", "match"])
        for r in rows:
            w.writerow([r["prime"], r["norm"], r["order"], r["j"], r["table"], r["primitive"],
                        r["literal"], "yes" if r["match"] else "no"])
            ok &= r["match"]
    elif cfg.table == "theta":
        D = parse_ring_element(cfg.D)
        theta = select_character(cfg.char, D)
        try:
            svals = [float(v) for v in cfg.s_values.split(",")]
            cuts = sorted(int(v) for v in cfg.cutoffs.split(","))
        except ValueError as exc:
            raise UsageError("bad s_values or cutoffs") from exc
        ideals = enumerate_odd_ideals(cuts[-1])
        w.writerow(["s", "T", "partial_re", "partial_im", "l_ratio_re", "l_ratio_im",
                    "restricted_count", "ideal_count"])
        for s in svals:
            for T in cuts:
                try:
                    rep = theta_partial_report(theta, s, T, ideals)
                except SeriesError as exc:
                    raise UsageError(str(exc)) from exc
                w.writerow([repr(s), T, repr(rep.partial_sum.real), repr(rep.partial_sum.imag),
                            repr(rep.l_ratio_partial.real), repr(rep.l_ratio_partial.imag),
                            rep.restricted_count, rep.ideal_count])
    else:
        raise UsageError(f"table must be ptp or theta, got {cfg.table!r}")
    fh, close = _open_out(cfg.out)
    fh.write(buf.getvalue())
    if close:
        fh.close()
    return 0 if ok else 1


COMMANDS = {"verify": run_verify, "sum": run_sum, "fit": run_fit, "table": run_table}


def make_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="z8expsum", description=__doc__.splitlines()[0])
    ap.add_argument("command", choices=sorted(COMMANDS))
    ap.add_argument("--config", metavar="PATH")
    ap.add_argument("--suite", metavar="NAME")
    ap.add_argument("--sweep", choices=("quick", "full"))
    ap.add_argument("--threshold-scale", type=float, dest="threshold_scale")
    ap.add_argument("--field", choices=("z", "ring"))
    ap.add_argument("--poly", metavar="SPEC", help="dense 'a_n,...,a_0' or sparse 'a4=1,a2=4'")
    ap.add_argument("--kind", help="quartic_lhs | quadratic_lhs | kloosterman_rhs | cross_rhs | quadratic_residual")
    ap.add_argument("--X-min", type=float, dest="X_min")
    ap.add_argument("--X-max", type=float, dest="X_max")
    ap.add_argument("--X-ratio", type=float, dest="X_ratio")
    ap.add_argument("--char", metavar="SEL", help="trivial | quadratic | quartic | idx:N")
    ap.add_argument("--mode", choices=("plain", "different"))
    ap.add_argument("--seed", type=int)
    ap.add_argument("--workers", type=int)
    ap.add_argument("--input", metavar="CSV")
    ap.add_argument("--table", choices=("ptp", "theta"))
    ap.add_argument("--prime", type=int)
    ap.add_argument("--out", metavar="PATH")
    ap.add_argument("--set", action="append", metavar="KEY=VALUE", help="override any config key")
    return ap


def main(argv: Sequence[str] | None = None, environ=None) -> int:
    parser = make_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        cfg = build_config(args, environ)
        return COMMANDS[cfg.command](cfg)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def main_entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    main_entry()

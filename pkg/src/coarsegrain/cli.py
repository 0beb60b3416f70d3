"""Command-line front end.

Subcommands:

    exact     kappa and pi at one x
    estimate  enclosure of kappa(x) by one of the estimates
    sweep     CSV of the enclosures over a xi grid
    verify    pnt | sturm | sandwich self-checks

Exit status is 0 on success, 1 when a check fails, 2 for usage errors and
3 when a resource or accuracy limit is hit.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np

from . import closedform, integral
from .closedform import ShapeParams, c_hat, interval_factor
from .errors import AccuracyError, DomainError, ResourceError
from .exact import GrainParams, classify_case, grain_primes, kappa_exact, pi_exact
from .integral import QuadratureConfig
from .multiplicity import ordered_bell
from .primes import ErrorBoundMode, verify_pnt
from .sturmverify import sturm_table, sturm_table_csv

EXIT_OK, EXIT_CHECK, EXIT_USAGE, EXIT_RESOURCE = 0, 1, 2, 3
METHODS = ("lambda", "nu", "eta", "kappa")
NORMALIZATIONS = ("absolute", "per_x", "relative")


def fmt(v) -> str:
    """17 significant digits, enough to round-trip a double."""
    if v is None or (isinstance(v, float) and math.isnan(v)):
        return ""
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return f"{float(v):.16e}"


def parse_number(text: str):
    """An int when the value is integral and exactly representable, else a float."""
    text = text.strip().replace("_", "")
    try:
        return int(text)
    except ValueError:
        pass
    v = float(text)
    if v.is_integer() and abs(v) < 2**53:
        return int(v)
    return v


def parse_alpha(text: str) -> float:
    """alpha, or the exponent 1 + alpha when suffixed with 'exp' (1.25exp -> 0.25)."""
    text = text.strip()
    if text.endswith("exp"):
        return float(text[:-3]) - 1.0
    return float(text)


def parse_k_range(text: str) -> list[int]:
    """'5', '3..7' or '3,4,6'."""
    if ".." in text:
        lo, hi = text.split("..")
        return list(range(int(lo), int(hi) + 1))
    return [int(v) for v in text.split(",")]


def params_from_args(args) -> GrainParams:
    B = parse_number(args.B)
    if (args.C is None) == (args.alpha is None):
        raise DomainError("give exactly one of --C and --alpha")
    if args.C is not None:
        return GrainParams(B, parse_number(args.C), args.k)
    alpha = parse_alpha(args.alpha)
    if isinstance(B, int):
        return GrainParams.from_alpha(B, alpha, args.k)
    return GrainParams(B, B ** (1.0 + alpha), args.k)


def x_from_args(args, params: GrainParams):
    if (args.x is None) == (args.xi is None):
        raise DomainError("give exactly one of --x and --xi")
    if args.x is not None:
        return parse_number(args.x)
    return params.x_of(float(args.xi))


def emit(record: dict, as_json: bool, out=None) -> None:
    out = out or sys.stdout
    if as_json:
        out.write(json.dumps(record, indent=2, default=float) + "\n")
    else:
        for key, value in record.items():
            out.write(f"{key}: {value}\n")


# --------------------------------------------------------------------------
# exact / estimate


def cmd_exact(params: GrainParams, x) -> dict:
    if not params.is_integral:
        raise DomainError("exact counting needs integer B and C")
    return {"kappa": kappa_exact(params, x), "pi": pi_exact(params, x)}


def cmd_estimate(params: GrainParams, x, method: str, mode, cfg: QuadratureConfig):
    return integral.estimate_interval(params, x, method, mode, cfg)


# --------------------------------------------------------------------------
# sweep


@dataclass(frozen=True)
class SweepSpec:
    params: GrainParams
    xi_start: float
    xi_stop: float
    xi_step: float
    methods: tuple[str, ...] = METHODS
    mode: ErrorBoundMode = ErrorBoundMode.RIEMANN
    normalize: str = "absolute"
    cfg: QuadratureConfig = field(default_factory=QuadratureConfig)

    def __post_init__(self):
        if not self.xi_step > 0:
            raise DomainError("xi step must be positive")
        if not self.xi_start < self.xi_stop:
            raise DomainError("xi start must be below xi stop")
        if not self.methods:
            raise DomainError("at least one method is needed")
        bad = set(self.methods) - set(METHODS)
        if bad:
            raise DomainError(f"unknown methods {sorted(bad)}")
        if self.normalize not in NORMALIZATIONS:
            raise DomainError(f"normalize must be one of {NORMALIZATIONS}")
        if self.params.k < 1:
            raise DomainError("sweeps need k >= 1")

    @property
    def grid(self) -> np.ndarray:
        n = int(math.floor((self.xi_stop - self.xi_start) / self.xi_step + 1e-9)) + 1
        return self.xi_start + self.xi_step * np.arange(n)


def _modes_for(params: GrainParams) -> list[ErrorBoundMode]:
    return [m for m in ErrorBoundMode if m.valid_at(float(params.B))]


def sweep_rows(spec: SweepSpec) -> tuple[list[str], list[dict]]:
    """Rows of the sweep in xi order; failures are noted per row."""
    p = spec.params
    k = p.k
    sp = ShapeParams.from_grain(p)
    alpha = sp.alpha
    relative = spec.normalize == "relative"
    need_kappa = "kappa" in spec.methods or relative
    columns = ["xi", "x"]
    for m in spec.methods:
        columns += [f"{m}_lower", f"{m}_upper"]
    if need_kappa:
        columns.append("kappa_tilde")
    modes = _modes_for(p)
    if relative:
        columns += ["lambda_tilde_err", "eta_tilde_err", "nonsquarefree_bound"]
        for mode in modes:
            v = mode.value
            columns += [f"lambda_hat_bound_{v}", f"lambda_hat_{v}", f"kappa_hat_{v}"]
    columns.append("note")

    nsf = (2 ** (k - 1) * math.factorial(k) - ordered_bell(k)) / p.B
    rows = []
    for xi in spec.grid:
        x = p.x_of(float(xi))
        row: dict = {"xi": float(xi), "x": x}
        try:
            kt = integral.kappa_tilde(p, x, spec.cfg) if need_kappa else None
            scale = {"absolute": 1.0, "per_x": 1.0 / x}.get(spec.normalize)
            if scale is None:
                scale = 1.0 / kt if kt else math.nan
                if not kt:
                    row["note"] = "kappa_tilde vanishes; relative values undefined"
            for m in spec.methods:
                enc = integral.estimate_interval(p, x, m, spec.mode, spec.cfg)
                row[f"{m}_lower"] = enc.lower * scale
                row[f"{m}_upper"] = enc.upper * scale
            if need_kappa:
                row["kappa_tilde"] = kt * scale
            if relative:
                lt = closedform.lambda_tilde(sp, xi)
                et = closedform.eta_tilde(sp, xi)
                row["lambda_tilde_err"] = (1.0 - interval_factor("lambda", alpha, k)) * lt * scale
                row["eta_tilde_err"] = (1.0 - interval_factor("eta", alpha, k)) * et * scale
                row["nonsquarefree_bound"] = nsf * x * scale
                for mode in modes:
                    v = mode.value
                    row[f"lambda_hat_bound_{v}"] = alpha**k * c_hat(k, sp.B, alpha, mode) * x * scale
                    row[f"lambda_hat_{v}"] = integral.lambda_hat(sp, k, xi, mode, spec.cfg) * scale
                    row[f"kappa_hat_{v}"] = integral.kappa_hat(p, x, mode, spec.cfg) * scale
        except (AccuracyError, ResourceError, DomainError) as exc:
            row["note"] = f"{type(exc).__name__}: {exc}"
        rows.append(row)
    return columns, rows


def sweep_header(spec: SweepSpec) -> list[str]:
    p = spec.params
    return [
        f"B = {p.B}",
        f"C = {p.C}",
        f"k = {p.k}",
        f"alpha = {fmt(p.alpha)}",
        f"xi = {spec.xi_start} .. {spec.xi_stop} step {spec.xi_step}",
        f"methods = {','.join(spec.methods)}",
        f"mode = {spec.mode.value}",
        f"normalize = {spec.normalize}",
        f"rel_tol = {spec.cfg.rel_tol}, abs_tol = {spec.cfg.abs_tol}, max_depth = {spec.cfg.max_depth}",
    ]


def cmd_sweep(spec: SweepSpec, out=None, as_json: bool = False) -> str:
    """Write the sweep as CSV (or JSON) to ``out`` if given; returns the text."""
    columns, rows = sweep_rows(spec)
    if as_json:
        payload = {
            "header": sweep_header(spec),
            "columns": columns,
            "rows": [[row.get(c) for c in columns] for row in rows],
        }
        text = json.dumps(payload, indent=1, default=float) + "\n"
    else:
        buf = io.StringIO()
        for line in sweep_header(spec):
            buf.write(f"# {line}\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(columns)
        for row in rows:
            w.writerow([row.get(c, "") if c == "note" else fmt(row.get(c)) for c in columns])
        text = buf.getvalue()
    if out is not None:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    return text


# --------------------------------------------------------------------------
# verify


@dataclass
class SandwichCheck:
    x: int
    case: int
    kappa: int
    kappa_tilde: float
    kappa_hat: float

    @property
    def ok(self) -> bool:
        return abs(self.kappa - self.kappa_tilde) <= self.kappa_hat


def sandwich_grid(params: GrainParams, points: int) -> list[int]:
    """Integer x spanning every case, including both sides of each boundary."""
    k = params.k
    lo = 0.5 * params.boundary(0)
    hi = 2.0 * params.boundary(k)
    xs = {int(v) for v in np.geomspace(lo, hi, points)}
    for j in range(k + 1):
        b = params.boundary(j)
        xs |= {b - 1, b, b + 1}
    return sorted(xs)


def verify_sandwich(
    params: GrainParams,
    points: int = 60,
    mode: ErrorBoundMode | str = ErrorBoundMode.RIEMANN,
    cfg: QuadratureConfig = integral.DEFAULT_CONFIG,
) -> list[SandwichCheck]:
    """|kappa - kappa~| <= kappa^ on a grid spanning all cases."""
    if not params.is_integral:
        raise DomainError("the sandwich check counts exactly; B and C must be integers")
    P = grain_primes(params)
    xs = sandwich_grid(params, points)
    kt = integral.kappa_tilde(params, np.array(xs, dtype=float), cfg)
    kh = integral.kappa_hat(params, np.array(xs, dtype=float), mode, cfg)
    return [
        SandwichCheck(x, classify_case(params, x).j, kappa_exact(params, x, primes=P), float(t), float(h))
        for x, t, h in zip(xs, kt, kh)
    ]


def cmd_verify(args) -> int:
    if args.target == "pnt":
        report = verify_pnt(float(args.max), ErrorBoundMode.parse(args.mode))
        sys.stdout.write(report.to_json() + "\n" if args.json else report.to_text() + "\n")
        return EXIT_OK if report.all_pass else EXIT_CHECK
    if args.target == "sturm":
        try:
            rows = sturm_table(parse_k_range(args.k_range))
        except ResourceError as exc:
            sys.stderr.write(f"certificate not found: {exc}\n")
            return EXIT_CHECK
        if args.json:
            sys.stdout.write(json.dumps([asdict(r) for r in rows], indent=2) + "\n")
        else:
            sys.stdout.write(sturm_table_csv(rows))
        return EXIT_OK
    if args.target == "sandwich":
        params = params_from_args(args)
        cfg = QuadratureConfig(rel_tol=args.rel_tol)
        checks = verify_sandwich(params, args.points, args.mode, cfg)
        if args.json:
            sys.stdout.write(
                json.dumps([dict(asdict(c), ok=c.ok) for c in checks], indent=2, default=float) + "\n"
            )
        else:
            for c in checks:
                flag = "ok" if c.ok else "FAIL"
                sys.stdout.write(
                    f"{flag:4s} x={c.x} case={c.case} kappa={c.kappa} "
                    f"tilde={c.kappa_tilde:.6f} hat={c.kappa_hat:.6f}\n"
                )
        failed = sum(not c.ok for c in checks)
        sys.stdout.write(f"{len(checks) - failed}/{len(checks)} passed\n")
        return EXIT_OK if failed == 0 else EXIT_CHECK
    raise DomainError(f"unknown verify target {args.target!r}")


# --------------------------------------------------------------------------
# argument parsing


def _add_params(p: argparse.ArgumentParser, k_default: int | None = None) -> None:
    p.add_argument("--B", required=True, help="lower prime bound (exclusive)")
    p.add_argument("--C", help="upper prime bound (inclusive)")
    p.add_argument("--alpha", help="C = B^(1+alpha); suffix 'exp' to give 1+alpha")
    p.add_argument("--k", type=int, required=k_default is None, default=k_default)


def _add_numeric(p: argparse.ArgumentParser) -> None:
    p.add_argument("--mode", choices=[m.value for m in ErrorBoundMode], default="riemann")
    p.add_argument("--rel-tol", type=float, default=1e-8)
    p.add_argument("--json", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="coarsegrain", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("exact", help="exact kappa and pi")
    _add_params(p)
    p.add_argument("--x")
    p.add_argument("--xi", type=float)
    p.add_argument("--json", action="store_true")

    p = sub.add_parser("estimate", help="enclosure of kappa(x)")
    _add_params(p)
    p.add_argument("--x")
    p.add_argument("--xi", type=float)
    p.add_argument("--method", choices=METHODS, default="kappa")
    _add_numeric(p)

    p = sub.add_parser("sweep", help="CSV of enclosures over a xi grid")
    _add_params(p)
    p.add_argument("--xi-start", type=float, default=0.0)
    p.add_argument("--xi-stop", type=float, default=None, help="default k")
    p.add_argument("--xi-step", type=float, default=None, help="default (stop-start)/99")
    p.add_argument("--methods", default=",".join(METHODS))
    p.add_argument("--normalize", choices=NORMALIZATIONS, default="absolute")
    p.add_argument("--out")
    _add_numeric(p)

    p = sub.add_parser("verify", help="self-checks")
    vsub = p.add_subparsers(dest="target", required=True)
    v = vsub.add_parser("pnt", help="|pi - li| < E up to --max")
    v.add_argument("--max", default="1e7")
    _add_numeric(v)
    v = vsub.add_parser("sturm", help="minimal Sturm certificates")
    v.add_argument("--k", dest="k_range", default="3..7")
    v.add_argument("--json", action="store_true")
    v = vsub.add_parser("sandwich", help="|kappa - kappa~| <= kappa^ at desk scale")
    _add_params(v)
    v.add_argument("--points", type=int, default=60)
    _add_numeric(v)
    return parser


def _run(args) -> int:
    if args.command == "verify":
        return cmd_verify(args)
    params = params_from_args(args)
    if args.command == "exact":
        x = x_from_args(args, params)
        emit({"B": params.B, "C": params.C, "k": params.k, "x": x, **cmd_exact(params, x)}, args.json)
        return EXIT_OK
    cfg = QuadratureConfig(rel_tol=args.rel_tol)
    mode = ErrorBoundMode.parse(args.mode)
    if args.command == "estimate":
        x = x_from_args(args, params)
        enc = cmd_estimate(params, x, args.method, mode, cfg)
        emit(asdict(enc), args.json)
        return EXIT_OK
    if args.command == "sweep":
        stop = float(params.k) if args.xi_stop is None else args.xi_stop
        step = args.xi_step or (stop - args.xi_start) / 99.0
        spec = SweepSpec(
            params,
            args.xi_start,
            stop,
            step,
            tuple(m.strip() for m in args.methods.split(",") if m.strip()),
            mode,
            args.normalize,
            cfg,
        )
        text = cmd_sweep(spec, args.out, args.json)
        if args.out is None:
            sys.stdout.write(text)
        return EXIT_OK
    raise DomainError(f"unknown command {args.command!r}")


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _run(args)
    except DomainError as exc:
        parser.print_usage(sys.stderr)
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_USAGE
    except (ResourceError, AccuracyError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_RESOURCE


if __name__ == "__main__":
    sys.exit(main())

"""Command-line front end.

Subcommands: ``score``, ``matrix``, ``density`` and ``bench``. JSON output is
a single line; CSV output carries ``seed``, ``config_hash`` and ``version``
columns. A short human summary goes to standard error.

Exit codes: 0 success, 2 input error, 3 precondition violation, 4 numeric
failure.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import math
import sys
from dataclasses import dataclass

from mickit import __version__
from mickit.bench import (
    CSV_HEADER,
    BenchConfig,
    StatCache,
    equitability_report,
    power_function,
    resolve_statistic,
    uncertain_set,
)
from mickit.density import DensitySpec, PrecisionParams, mic_d, mic_star
from mickit.estimators import BPolicy, SampleData, char_matrix_e, mic_approx, mic_e

EXIT_OK, EXIT_INPUT, EXIT_PRECONDITION, EXIT_NUMERIC = 0, 2, 3, 4
SAMPLE_STATS = ("mic_e", "mic_approx", "mic_d")


class InputError(Exception):
    """Malformed input file or inconsistent flags (exit 2)."""


class PreconditionError(Exception):
    """Valid input that does not meet a statistic's requirements (exit 3)."""


@dataclass(frozen=True)
class RunConfig:
    command: str
    input: str
    stat: str = "mic_e"
    alpha: float | None = None
    epsilon: float | None = None
    smax: int | None = None
    seed: int | None = None
    out: str = "-"
    format: str = "json"

    def __post_init__(self):
        precision = self.epsilon is not None or self.smax is not None
        if precision and not (self.command == "density" or self.stat == "mic_d" or self.command == "bench"):
            raise InputError("--epsilon/--smax apply only to density, bench and --stat mic_d")
        if self.alpha is not None and self.command == "density":
            raise InputError("--alpha does not apply to density")
        if self.alpha is not None and not 0 < self.alpha < 1:
            raise InputError(f"--alpha must lie in (0, 1), got {self.alpha}")
        if self.command == "matrix" and self.stat != "mic_e":
            raise InputError("matrix supports only --stat mic_e")

    def policy(self) -> BPolicy:
        return BPolicy(alpha=0.6 if self.alpha is None else self.alpha)

    def precision(self) -> PrecisionParams:
        defaults = PrecisionParams()
        try:
            return PrecisionParams(
                epsilon=defaults.epsilon if self.epsilon is None else self.epsilon,
                s_max=defaults.s_max if self.smax is None else self.smax,
            )
        except ValueError as exc:
            raise InputError(str(exc)) from exc

    def canonical(self) -> dict:
        return {
            "command": self.command,
            "stat": self.stat,
            "alpha": self.alpha,
            "epsilon": self.epsilon,
            "smax": self.smax,
            "seed": self.effective_seed,
            "format": self.format,
        }

    @property
    def effective_seed(self) -> int:
        return 0 if self.seed is None else self.seed


def _read_bytes(path: str) -> bytes:
    try:
        if path == "-":
            return sys.stdin.buffer.read()
        with open(path, "rb") as fh:
            return fh.read()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from exc


def config_hash(cfg: RunConfig, payload: bytes, extra: dict | None = None) -> str:
    h = hashlib.sha256()
    body = dict(cfg.canonical(), extra=extra or {})
    h.update(json.dumps(body, sort_keys=True, separators=(",", ":")).encode())
    h.update(hashlib.sha256(payload).digest())
    return h.hexdigest()


def _is_number(text: str) -> bool:
    try:
        float(text)
    except ValueError:
        return False
    return True


def parse_sample_csv(payload: bytes) -> SampleData:
    """Two numeric columns; a first row with a non-numeric cell is a header."""
    try:
        text = payload.decode("utf-8-sig")
    except UnicodeDecodeError as exc:
        raise InputError("input is not UTF-8") from exc
    rows = [(i, r) for i, r in enumerate(csv.reader(io.StringIO(text)), start=1) if any(c.strip() for c in r)]
    if rows and not all(_is_number(c) for c in rows[0][1]):
        rows = rows[1:]
    xs, ys = [], []
    for line, row in rows:
        if len(row) != 2:
            raise InputError(f"row {line}: expected 2 columns, got {len(row)}")
        try:
            x, y = float(row[0]), float(row[1])
        except ValueError as exc:
            raise InputError(f"row {line}: non-numeric value") from exc
        if not (math.isfinite(x) and math.isfinite(y)):
            raise InputError(f"row {line}: NaN or infinite value")
        xs.append(x)
        ys.append(y)
    if not xs:
        raise PreconditionError("no data rows")
    return SampleData(xs, ys)


def _json_value(v):
    if isinstance(v, float) and not math.isfinite(v):
        return None
    return v


def _emit(cfg: RunConfig, records: list[dict], header: tuple, meta: dict) -> None:
    if cfg.format == "json":
        if len(records) == 1 and not header:
            body = dict(records[0], **meta)
        else:
            body = dict(meta, rows=[{k: _json_value(r.get(k)) for k in header} for r in records])
        text = json.dumps({k: _json_value(v) for k, v in body.items()}, separators=(",", ":")) + "\n"
    else:
        cols = tuple(header or records[0].keys()) + ("seed", "config_hash", "version")
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(cols)
        for r in records:
            merged = dict(r, **meta)
            writer.writerow(["" if _json_value(merged.get(c)) is None else merged.get(c) for c in cols])
        text = buf.getvalue()
    if cfg.out == "-":
        sys.stdout.write(text)
    else:
        with open(cfg.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


def _meta(cfg: RunConfig, payload: bytes, extra: dict | None = None) -> dict:
    return {"seed": cfg.effective_seed, "config_hash": config_hash(cfg, payload, extra), "version": __version__}


def cmd_score(cfg: RunConfig) -> int:
    payload = _read_bytes(cfg.input)
    sample = parse_sample_csv(payload)
    minimum = 16 if cfg.stat == "mic_d" else 4
    if sample.n < minimum:
        raise PreconditionError(f"{cfg.stat} needs at least {minimum} points, got {sample.n}")
    policy = cfg.policy()
    record = {"statistic": cfg.stat, "value": None, "argmax_k": None, "argmax_l": None, "n": sample.n}
    if cfg.stat == "mic_d":
        record["value"] = mic_d(sample, cfg.precision())
        record.update(B=None, alpha=None)
    else:
        func = mic_e if cfg.stat == "mic_e" else mic_approx
        value, (k, l) = func(sample, policy, return_argmax=True)
        record.update(value=value, argmax_k=k, argmax_l=l, B=policy.effective(sample.n), alpha=policy.alpha)
    _emit(cfg, [record], (), _meta(cfg, payload))
    print(f"{cfg.stat} = {record['value']:.6f} (n={sample.n})", file=sys.stderr)
    return EXIT_OK


def cmd_matrix(cfg: RunConfig) -> int:
    payload = _read_bytes(cfg.input)
    sample = parse_sample_csv(payload)
    if sample.n < 4:
        raise PreconditionError(f"need at least 4 points, got {sample.n}")
    cm = char_matrix_e(sample, cfg.policy())
    records = [{"k": k, "l": l, "value": v} for (k, l), v in sorted(cm.entries.items())]
    _emit(cfg, records, ("k", "l", "value"), _meta(cfg, payload))
    print(f"{len(records)} entries, B={cm.budget}, max {cm.max():.6f} at {cm.argmax()}", file=sys.stderr)
    return EXIT_OK


def cmd_density(cfg: RunConfig) -> int:
    payload = _read_bytes(cfg.input)
    try:
        spec = DensitySpec.from_json(payload.decode("utf-8"))
    except (ValueError, TypeError, UnicodeDecodeError) as exc:
        raise InputError(f"malformed density spec: {exc}") from exc
    params = cfg.precision()
    result = mic_star(spec, params)
    record = {
        "mic_star": result.score,
        "error_bound": result.error_bound,
        "s_reached": result.s_reached,
        "quadrature_error": result.quadrature_error,
        "epsilon": params.epsilon,
        "s_max": params.s_max,
    }
    _emit(cfg, [record], (), _meta(cfg, payload))
    print(f"MIC* = {result.score:.6f} +/- {result.error_bound:.4f} (s={result.s_reached}); {result.caveat}", file=sys.stderr)
    return EXIT_OK


_BENCH_KEYS = {"statistic", "functions", "models", "n", "trials", "alpha", "seed", "grid_step", "power_x0", "reports"}


def load_bench_config(payload: bytes, seed_override: int | None) -> tuple[str, BenchConfig, list, list]:
    try:
        data = json.loads(payload.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise InputError(f"bench config is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise InputError("bench config must be a JSON object")
    unknown = set(data) - _BENCH_KEYS
    if unknown:
        raise InputError(f"unknown bench config keys: {sorted(unknown)}")
    try:
        cfg = BenchConfig(
            functions=tuple(data.get("functions", ("linear", "quadratic"))),
            models=tuple(data.get("models", ("Y,U",))),
            n=int(data.get("n", 500)),
            trials=int(data.get("trials", 500)),
            seed=int(data.get("seed", 0) if seed_override is None else seed_override),
            alpha=float(data.get("alpha", 0.05)),
            grid_step=float(data.get("grid_step", 0.05)),
        )
    except (ValueError, TypeError) as exc:
        raise InputError(f"invalid bench config: {exc}") from exc
    reports = list(data.get("reports", ["equitability", "power"]))
    if set(reports) - {"equitability", "power"}:
        raise InputError(f"unknown reports {reports}")
    x0s = [float(v) for v in data.get("power_x0", [0.0])]
    return str(data.get("statistic", "mic_e")), cfg, reports, x0s


def bench_rows(stat_name: str, cfg: BenchConfig, reports: list, x0s: list, policy=None, precision=None) -> list[dict]:
    """Report rows in the fixed ``CSV_HEADER`` layout (plus ``value``)."""
    stat = resolve_statistic(stat_name, policy, precision)
    cache = StatCache(stat, cfg)
    rows = []
    if "equitability" in reports:
        rep = equitability_report(stat, cfg, cache)
        for y, lo, hi, width in rep.rows:
            rows.append({"kind": "interpretable", "y": y, "lo": lo, "hi": hi, "width": width})
        rows.append({"kind": "worst_width", "value": rep.worst_width})
        rows.append({"kind": "average_reciprocal", "value": rep.average_reciprocal})
    if "power" in reports:
        for x0 in x0s:
            xs = [x for x in cfg.grid() if x >= x0 - 1e-12]
            curve = power_function(stat, x0, xs, cfg.alpha, cfg, cache)
            for x, p in zip(curve.xs, curve.power):
                rows.append({"kind": "power", "x0": x0, "x": x, "power": p, "critical": curve.critical})
            us = uncertain_set(curve)
            rows.append({"kind": "uncertain_set", "x0": x0, "lo": us.lo, "hi": us.hi, "width": us.diameter})
    return rows


def cmd_bench(cfg: RunConfig) -> int:
    payload = _read_bytes(cfg.input)
    stat_name, bench_cfg, reports, x0s = load_bench_config(payload, cfg.seed)
    if stat_name not in ("mic_e", "mic_approx", "mic_d", "r2-oracle", "constant"):
        raise InputError(f"unknown statistic {stat_name!r}")
    rows = bench_rows(stat_name, bench_cfg, reports, x0s, cfg.policy(), cfg.precision())
    meta = _meta(cfg, payload)
    meta["seed"] = bench_cfg.seed
    _emit(cfg, rows, CSV_HEADER + ("value",), meta)
    print(f"bench {stat_name}: {len(rows)} rows", file=sys.stderr)
    return EXIT_OK


COMMANDS = {"score": cmd_score, "matrix": cmd_matrix, "density": cmd_density, "bench": cmd_bench}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mickit", description="MIC-family dependence statistics.")
    parser.add_argument("--version", action="version", version=f"mickit {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    helps = {
        "score": "score a two-column CSV sample",
        "matrix": "characteristic matrix of a CSV sample",
        "density": "MIC* of a density spec (JSON)",
        "bench": "equitability benchmark from a JSON config",
    }
    for name, text in helps.items():
        p = sub.add_parser(name, help=text)
        p.add_argument("--input", required=True, help="input path, or - for stdin")
        p.add_argument("--stat", default="mic_e", choices=SAMPLE_STATS)
        p.add_argument("--alpha", type=float, help="grid-budget exponent (default 0.6)")
        p.add_argument("--epsilon", type=float, help="master-grid parameter (density, mic_d)")
        p.add_argument("--smax", type=int, help="largest boundary index (density, mic_d)")
        p.add_argument("--seed", type=int, help="random seed (default 0; overrides a bench config)")
        p.add_argument("--out", default="-", help="output path, or - for stdout")
        p.add_argument("--format", default="csv" if name in ("matrix", "bench") else "json", choices=("json", "csv"))
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_INPUT
    try:
        cfg = RunConfig(
            args.command, args.input, args.stat, args.alpha, args.epsilon, args.smax, args.seed, args.out, args.format
        )
        return COMMANDS[cfg.command](cfg)
    except InputError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except PreconditionError as exc:
        print(f"precondition violated: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION
    except (ArithmeticError, FloatingPointError, MemoryError) as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as exc:
        print(f"precondition violated: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION


if __name__ == "__main__":
    sys.exit(main())

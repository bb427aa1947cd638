"""Batch runner for the verification campaigns.

    kahlerenv envelope-verify --config run.json --out results/
    kahlerenv tian --config run.json --out results/ [--divergence]
    kahlerenv gm-check --config run.json --out results/

Every CSV starts with one ``# generated: <timestamp>`` line followed by
``#``-prefixed metadata; everything after the timestamp line is a
deterministic function of the config. Each CSV has a JSON mirror, and each
subcommand writes ``<command>_report.json``.

Exit codes: 0 pass, 1 verification failure, 2 usage or config error.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Optional

import numpy as np

from . import core
from .envelope import GridSpec, psi_M_field, verify_center_bound, verify_envelope
from .errors import ConfigError, KahlerEnvError, ZeroTuple
from .geometry import gM_det_formula, gM_metric
from .hermitian import complex_hessian, relative_deviation
from .integrals import (MAX_QUAD_DIM, IntegralEstimate, dirichlet_oracle, divergence_sweep,
                        sweep_increments, tian_mc_integral, tian_psi_integral, tian_psi_mc)
from .projective import (ChartPoint, ProjectivePoint, TupleShape, check_invariance,
                         random_chart_points)
from .testfuncs import (FAMILIES, CubeGrid, TestFunctionSpec, calibrated_test_function,
                        default_specs, make_test_function)

EXIT_OK, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2

CONFIG_KEYS = {
    "shape", "a_m", "grid", "alpha_list", "seeds", "test_functions", "tol", "monotone_tol",
    "invariance_tol", "invariance_samples", "calibration_points", "sup_points",
    "mc_samples", "ratio_tol", "divergence", "gm", "output_path",
}


@dataclass
class RunConfig:
    shape: TupleShape = TupleShape(2, 2)
    a_m: float = 4.0
    grid: GridSpec = GridSpec()
    alpha_list: tuple = (0.25, 0.5, 0.75)
    seeds: tuple = (0,)
    test_functions: Optional[list] = None
    tol: float = 1e-6
    monotone_tol: float = 1e-7
    invariance_tol: float = 1e-10
    invariance_samples: int = 20
    calibration_points: int = 6
    sup_points: int = 11
    mc_samples: int = 1_000_000
    ratio_tol: float = 1e-3
    divergence: dict = field(default_factory=lambda: {
        "alpha": 1.0, "m": 1, "cutoffs": [10.0, 100.0, 1000.0], "min_increment_ratio": 0.5})
    gm: dict = field(default_factory=lambda: {
        "points": 50, "det_tol": 1e-5, "hessian_tol": 1e-5, "extra_points": []})
    output_path: Optional[str] = None

    @property
    def m(self) -> int:
        return self.shape.m

    def specs(self) -> list[tuple[TestFunctionSpec, bool]]:
        """(spec, calibrate) pairs; an explicit epsilon disables calibration."""
        if self.test_functions is None:
            return [(s, True) for s in default_specs(self.shape, self.a_m)]
        return [_parse_spec(d, self.shape, self.a_m) for d in self.test_functions]

    def to_json(self) -> dict:
        return {"shape": self.shape.to_json(), "a_m": self.a_m, "grid": self.grid.to_json(),
                "alpha_list": list(self.alpha_list), "seeds": list(self.seeds),
                "test_functions": self.test_functions, "tol": self.tol,
                "monotone_tol": self.monotone_tol, "invariance_tol": self.invariance_tol,
                "invariance_samples": self.invariance_samples,
                "calibration_points": self.calibration_points, "sup_points": self.sup_points,
                "mc_samples": self.mc_samples, "ratio_tol": self.ratio_tol,
                "divergence": self.divergence, "gm": self.gm}


def _parse_spec(d: dict, shape: TupleShape, a_m: float) -> tuple[TestFunctionSpec, bool]:
    if not isinstance(d, dict) or d.get("family") not in FAMILIES:
        raise ConfigError(f"test function entries need a family in {FAMILIES}: {d!r}")
    unknown = set(d) - {"family", "degree", "weights", "epsilon"}
    if unknown:
        raise ConfigError(f"unknown test function keys {sorted(unknown)}")
    eps = d.get("epsilon")
    spec = TestFunctionSpec(d["family"], 1.0 if eps is None else float(eps), shape, a_m,
                            degree=int(d.get("degree", 2)),
                            weights=tuple(float(w) for w in d.get("weights", ())))
    make_test_function(spec)  # validates
    return spec, eps is None


def _positive_int(value, key: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int) or value < 1:
        raise ConfigError(f"{key} must be a positive integer")
    return value


def parse_config(data) -> RunConfig:
    """Validate a decoded JSON config; raises ConfigError on any problem."""
    if not isinstance(data, dict):
        raise ConfigError("config must be a JSON object")
    unknown = set(data) - CONFIG_KEYS
    if unknown:
        raise ConfigError(f"unknown config keys {sorted(unknown)}")
    cfg = RunConfig()
    try:
        if "shape" in data:
            cfg.shape = TupleShape.from_json(data["shape"])
        a_m = data.get("a_m", "chern")
        cfg.a_m = float(cfg.m + 1) if a_m == "chern" else float(a_m)
        if not cfg.a_m > 0:
            raise ConfigError("a_m must be positive")
        if "grid" in data:
            g = data["grid"]
            cfg.grid = GridSpec(float(g.get("delta", 1e-3)),
                                _positive_int(g.get("points_per_axis", 41), "points_per_axis"),
                                bool(g.get("log_spacing", True)))
        if "alpha_list" in data:
            cfg.alpha_list = tuple(float(a) for a in data["alpha_list"])
        if any(not 0 < a < 1 for a in cfg.alpha_list):
            raise ConfigError("alpha_list values must lie in (0, 1); use the divergence section "
                              "for alpha >= 1")
        if "seeds" in data:
            cfg.seeds = tuple(int(s) for s in data["seeds"])
            if not cfg.seeds or any(s < 0 for s in cfg.seeds):
                raise ConfigError("seeds must be a non-empty list of non-negative integers")
        if "test_functions" in data:
            cfg.test_functions = list(data["test_functions"])
        for key in ("tol", "monotone_tol", "invariance_tol", "ratio_tol"):
            if key in data:
                setattr(cfg, key, float(data[key]))
                if getattr(cfg, key) < 0:
                    raise ConfigError(f"{key} must be non-negative")
        for key in ("invariance_samples", "calibration_points", "sup_points", "mc_samples"):
            if key in data:
                setattr(cfg, key, _positive_int(data[key], key))
        if "divergence" in data:
            div = dict(cfg.divergence, **data["divergence"])
            if float(div["alpha"]) < 1:
                raise ConfigError("divergence alpha must be >= 1")
            cfg.divergence = div
        if "gm" in data:
            gm = dict(cfg.gm, **data["gm"])
            _positive_int(gm["points"], "gm.points")
            cfg.gm = gm
        cfg.output_path = data.get("output_path")
        cfg.specs()
    except ConfigError:
        raise
    except (KahlerEnvError, TypeError, ValueError, KeyError, AttributeError) as exc:
        raise ConfigError(f"invalid config: {exc}") from exc
    return cfg


def load_config(path) -> RunConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"malformed JSON in {path}: {exc}") from exc
    return parse_config(data)


# -- output ------------------------------------------------------------------------

def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def _jsonable(v):
    if isinstance(v, (np.floating, float)):
        v = float(v)
        return v if math.isfinite(v) else repr(v)
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (np.bool_,)):
        return bool(v)
    if isinstance(v, dict):
        return {k: _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple, np.ndarray)):
        return [_jsonable(x) for x in v]
    return v


def write_table(out_dir: Path, name: str, columns: list, rows: list, meta: dict,
                timestamp: str):
    """Write ``name.csv`` (timestamp line, metadata, data) and ``name.json``."""
    buf = io.StringIO()
    buf.write(f"# generated: {timestamp}\n")
    for key, value in meta.items():
        buf.write(f"# {key}: {json.dumps(_jsonable(value), sort_keys=True)}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_fmt(v) for v in row])
    (out_dir / f"{name}.csv").write_text(buf.getvalue())
    mirror = {"meta": _jsonable(meta), "columns": columns,
              "rows": [[_jsonable(v) for v in row] for row in rows]}
    (out_dir / f"{name}.json").write_text(json.dumps(mirror, sort_keys=True, indent=1) + "\n")


def write_report(out_dir: Path, name: str, report: dict, timestamp: str):
    body = dict(_jsonable(report), generated=timestamp)
    (out_dir / f"{name}_report.json").write_text(json.dumps(body, sort_keys=True, indent=2) + "\n")


def _base_meta(cfg: RunConfig, command: str) -> dict:
    return {"command": command, "shape": cfg.shape.to_json(), "a_m": cfg.a_m,
            "backend": core.BACKEND, "config": cfg.to_json()}


# -- subcommands -------------------------------------------------------------------------

def _calibrated(cfg: RunConfig):
    return [calibrated_test_function(spec, calibration_grid=CubeGrid(cfg.calibration_points),
                                     sup_grid=CubeGrid(cfg.sup_points), calibrate=calibrate)
            for spec, calibrate in cfg.specs()]


def _invariance(cal, cfg: RunConfig) -> float:
    rng = np.random.default_rng(cfg.seeds[0])
    worst = 0.0
    for i in range(3):
        x = rng.uniform(0.2, 1.0, cfg.m)
        z = np.concatenate([[1.0], x * np.exp(1j * rng.uniform(0, 2 * np.pi, cfg.m))])
        p = ProjectivePoint(z, cfg.shape)
        worst = max(worst, check_invariance(cal.field, p, cfg.invariance_samples,
                                            cfg.seeds[0] + i))
    return worst


def cmd_envelope_verify(cfg: RunConfig, out_dir: Path, timestamp: str) -> int:
    summary_rows, gap_rows, reports = [], [], []
    passed = True
    for idx, cal in enumerate(_calibrated(cfg)):
        rep = verify_envelope(cal.field, cfg.shape, cfg.a_m, cfg.grid, tol=cfg.monotone_tol,
                              keep_gaps=True)
        center = verify_center_bound(cal.field, cfg.shape, cfg.a_m)
        inv = _invariance(cal, cfg)
        ok = (rep.min_gap >= -cfg.tol and rep.monotone_violations == 0
              and center >= -cfg.tol and inv < cfg.invariance_tol)
        passed &= ok
        name = cal.field.name
        summary_rows.append([idx, name, cal.spec.epsilon, cal.field.meta["sup_estimate"],
                             rep.min_gap, rep.monotone_violations, rep.max_increase, center,
                             inv, ok])
        pts = cfg.grid.points(cfg.m)
        for x, g in zip(pts, rep.gaps):
            gap_rows.append([idx, *x.tolist(), float(g)])
        reports.append({"function": name, "calibration": cal.to_json(),
                        "envelope": rep.to_json(), "center_gap": center,
                        "invariance_deviation": inv, "passed": ok})
    meta = _base_meta(cfg, "envelope-verify")
    write_table(out_dir, "envelope_summary",
                ["function_index", "function", "epsilon", "sup_estimate", "min_gap",
                 "monotone_violations", "max_increase", "center_gap",
                 "invariance_deviation", "passed"], summary_rows, meta, timestamp)
    write_table(out_dir, "envelope_gaps",
                ["function_index"] + [f"x{i + 1}" for i in range(cfg.m)] + ["gap"],
                gap_rows, meta, timestamp)
    write_report(out_dir, "envelope_verify",
                 {"command": "envelope-verify", "passed": passed, "functions": reports,
                  "config": cfg.to_json()}, timestamp)
    return EXIT_OK if passed else EXIT_FAIL


def _psi_integral(alpha: float, cfg: RunConfig) -> IntegralEstimate:
    if cfg.m <= MAX_QUAD_DIM:
        return tian_psi_integral(alpha, cfg.m)
    return tian_psi_mc(alpha, cfg.m, cfg.mc_samples, cfg.seeds[0])


def cmd_tian(cfg: RunConfig, out_dir: Path, timestamp: str, divergence: bool = False) -> int:
    m = cfg.m
    rows = []
    passed = True
    calibrated = _calibrated(cfg)
    for alpha in cfg.alpha_list:
        quad = _psi_integral(alpha, cfg)
        oracle = dirichlet_oracle(alpha, m)
        ratio = quad.value / oracle
        ratio_ok = abs(ratio - 1) < cfg.ratio_tol
        passed &= ratio_ok
        for seed in cfg.seeds:
            mc = tian_psi_mc(alpha, m, cfg.mc_samples, seed)
            rows.append([alpha, m, "psi", seed, quad.value, quad.stderr, oracle, ratio,
                         mc.value, mc.stderr, ratio_ok])
            for cal in calibrated:
                est = tian_mc_integral(cal.field, alpha, m, cfg.mc_samples, seed)
                dominated = est.value <= quad.value + 3 * est.stderr
                passed &= dominated
                rows.append([alpha, m, cal.field.name, seed, quad.value, quad.stderr, oracle,
                             ratio, est.value, est.stderr, dominated])
    meta = _base_meta(cfg, "tian")
    write_table(out_dir, "tian",
                ["alpha", "m", "function", "seed", "quad", "quad_error", "oracle", "ratio",
                 "mc_value", "mc_stderr", "passed"], rows, meta, timestamp)
    report = {"command": "tian", "passed": passed, "rows": len(rows), "config": cfg.to_json()}
    if divergence:
        div = cfg.divergence
        sweep = divergence_sweep(float(div["alpha"]), int(div["m"]), div["cutoffs"])
        inc = sweep_increments(sweep)
        cut = [r for r, _ in sweep]
        floors = np.log(np.array(cut[1:]) / np.array(cut[:-1]))
        ratios = inc[1:] / inc[:-1] if inc.size > 1 else np.array([])
        grows = bool(np.all(inc > 0) and np.all(inc >= floors)
                     and np.all(ratios >= float(div["min_increment_ratio"])))
        passed &= grows
        div_rows = [[float(div["alpha"]), int(div["m"]), r, v, float(inc[i - 1]) if i else ""]
                    for i, (r, v) in enumerate(sweep)]
        write_table(out_dir, "divergence", ["alpha", "m", "cutoff", "partial_integral",
                                            "increment"], div_rows, meta, timestamp)
        report.update(divergence={"increments": inc.tolist(), "log_floor": floors.tolist(),
                                  "increment_ratios": ratios.tolist(), "grows": grows})
        report["passed"] = passed
    write_report(out_dir, "tian", report, timestamp)
    return EXIT_OK if passed else EXIT_FAIL


def _gm_points(cfg: RunConfig) -> list[ChartPoint]:
    pts = random_chart_points(cfg.shape, int(cfg.gm["points"]), cfg.seeds[0])
    for raw in cfg.gm.get("extra_points", []):
        w = np.array([complex(*c) if isinstance(c, list) else complex(c) for c in raw])
        if w.size != cfg.m:
            raise ConfigError(f"gm.extra_points entries need {cfg.m} coordinates")
        pts.append(ChartPoint(0, w, cfg.shape))
    return pts


def cmd_gm_check(cfg: RunConfig, out_dir: Path, timestamp: str) -> int:
    pts = _gm_points(cfg)
    neg_psi_M = -psi_M_field(cfg.shape)
    rows = []
    skipped = 0
    det_errs, hess_errs = [], []
    for i, p in enumerate(pts):
        try:
            formula = gM_det_formula(p)
            metric = gM_metric(p)
        except ZeroTuple:
            skipped += 1
            rows.append([i, "", "", "", "", "skipped_zero_tuple"])
            continue
        numeric = metric.det()
        det_err = abs(numeric - formula) / abs(formula)
        try:
            hess_err = relative_deviation(complex_hessian(neg_psi_M, p), metric)
        except KahlerEnvError:
            hess_err = float("nan")
        det_errs.append(det_err)
        hess_errs.append(hess_err)
        rows.append([i, formula, numeric, det_err, hess_err, "ok"])
    max_det = max(det_errs, default=0.0)
    max_hess = max(hess_errs, default=0.0)
    passed = bool(det_errs) and max_det < float(cfg.gm["det_tol"]) \
        and bool(np.all(np.array(hess_errs) < float(cfg.gm["hessian_tol"])))
    meta = _base_meta(cfg, "gm-check")
    write_table(out_dir, "gm_check", ["point", "det_formula", "det_numeric", "det_rel_err",
                                      "hessian_rel_err", "status"], rows, meta, timestamp)
    write_report(out_dir, "gm_check",
                 {"command": "gm-check", "passed": passed, "points": len(pts),
                  "checked": len(det_errs), "skipped_zero_tuple": skipped,
                  "max_det_rel_err": max_det, "max_hessian_rel_err": max_hess,
                  "config": cfg.to_json()}, timestamp)
    return EXIT_OK if passed else EXIT_FAIL


# -- entry point --------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="kahlerenv", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name, helptext in [("envelope-verify", "check phi >= psi on calibrated test functions"),
                           ("tian", "integrals of exp(-alpha phi) against the Gamma oracle"),
                           ("gm-check", "closed-form det g^M against the numerical metric")]:
        p = sub.add_parser(name, help=helptext)
        p.add_argument("--config", required=True, help="JSON run configuration")
        p.add_argument("--out", required=True, help="output directory (created if missing)")
        if name == "tian":
            p.add_argument("--divergence", action="store_true",
                           help="also run the truncated-integral sweep at alpha >= 1")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        out_dir = Path(args.out)
        out_dir.mkdir(parents=True, exist_ok=True)
        timestamp = datetime.now(timezone.utc).isoformat(timespec="seconds")
        if args.command == "envelope-verify":
            code = cmd_envelope_verify(cfg, out_dir, timestamp)
        elif args.command == "tian":
            code = cmd_tian(cfg, out_dir, timestamp, divergence=args.divergence)
        else:
            code = cmd_gm_check(cfg, out_dir, timestamp)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"output error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    print(f"{args.command}: {'pass' if code == EXIT_OK else 'FAIL'} -> {out_dir}")
    return code


if __name__ == "__main__":
    sys.exit(main())

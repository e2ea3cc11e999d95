"""Batch front end: ``pcg-eur <command> --config run.json [--out DIR] [--seed N] [--quiet]``.

Exit status: 0 success, 2 configuration error, 3 scheme not mutually
unbiased, 4 numerical red flag (a valid scheme produced a sum below the
bound by more than the numerical floor, or a control check failed).
"""
from __future__ import annotations

import argparse
import hashlib
import json
import math
import os
import re
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from datetime import datetime, timezone
from math import gcd
from pathlib import Path

import numpy as np

from . import __version__
from .errors import PcgError, SchemeError
from .eur import (DEFAULT_ORDERS, DEFICIT_FLOOR, GaussianFamily, HermiteFamily, TwoModeState, eur_reports,
                  limit_study, measure_pair, minimize_entropy_sum, probe_deviations,
                  steering_witness, two_mode_squeezed)
from .eur.limit import hg_state
from .eur.steering import MAX_GRID, squeezed_half_width, squeezed_resolution
from .measurement import parse_order
from .phasespace import (Grid, bin_localized_state, covering_grid, gaussian, hermite_gauss, matched_grid,
                         random_superposition)
from .scheme import BinSpec, PcgScheme, check_mub, make_scheme, mask_value, reconstruct_mask
from .serialize import dumps, jsonable, table_csv

EXIT_OK, EXIT_CONFIG, EXIT_SCHEME, EXIT_RED_FLAG = 0, 2, 3, 4
COMMANDS = ("verify-eur", "check-mub", "scan-invalid", "minimize", "limit-study", "steering", "mask-demo")
PROBE_THRESHOLD = 0.05

KNOWN_KEYS = {
    "command", "seed", "output_dir",
    # scheme
    "d", "M", "theta", "theta_prime", "T_theta", "T_theta_prime", "offset_theta", "offset_theta_prime",
    # grid
    "N", "dq", "points_per_bin", "half_width",
    # states and orders
    "state_family", "n_states", "n_max", "modes", "center", "sigma", "momentum", "orders",
    # command specific
    "d_max", "dtheta", "family", "n_packets", "n_modes", "budget", "restarts",
    "alpha", "c", "ds", "state_mode", "squeezing", "product_cases", "bob_angles",
    "T", "k", "n_max_list", "samples",
}


class ConfigError(Exception):
    def __init__(self, message, reason="config-error"):
        super().__init__(message)
        self.reason = reason


@dataclass
class RunResult:
    reports: list
    aux: dict = field(default_factory=dict)
    status: int = EXIT_OK
    summary: str = ""
    reason: str = None


_ANGLE = re.compile(r"^\s*(-?)\s*(\d*\.?\d*)\s*\*?\s*pi\s*(?:/\s*(\d+\.?\d*))?\s*$")


def parse_angle(value) -> float:
    """Angle in radians; strings like ``"pi/2"`` or ``"2*pi/3"`` are accepted."""
    if isinstance(value, str):
        m = _ANGLE.match(value.lower())
        if not m:
            try:
                return float(value)
            except ValueError:
                raise ConfigError(f"cannot parse angle {value!r}")
        sign, num, den = m.groups()
        out = (float(num) if num else 1.0) * math.pi / (float(den) if den else 1.0)
        return -out if sign else out
    return float(value)


def _get(cfg, key, default=None, conv=float):
    if key not in cfg or cfg[key] is None:
        if default is ConfigError:
            raise ConfigError(f"missing required key {key!r}")
        return default
    try:
        return conv(cfg[key])
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad value for {key!r}: {cfg[key]!r} ({exc})")


def scheme_from_config(cfg) -> PcgScheme:
    d = _get(cfg, "d", ConfigError, int)
    theta = _get(cfg, "theta", 0.0, parse_angle)
    theta_prime = _get(cfg, "theta_prime", math.pi / 2, parse_angle)
    offsets = dict(offset_theta=_get(cfg, "offset_theta", 0.0), offset_theta_prime=_get(cfg, "offset_theta_prime", 0.0))
    if cfg.get("T_theta_prime") is not None:
        scheme = PcgScheme(theta, theta_prime,
                           BinSpec(_get(cfg, "T_theta", ConfigError), d, offsets["offset_theta"]),
                           BinSpec(_get(cfg, "T_theta_prime"), d, offsets["offset_theta_prime"]))
        return scheme.require_valid()
    M = _get(cfg, "M", 1, int)
    T = _get(cfg, "T_theta", None)
    if T is None:
        T = math.sqrt(2 * math.pi * d * abs(math.sin(theta - theta_prime)) / M)
    return make_scheme(d, theta, theta_prime, M, T, **offsets)


def grid_from_config(cfg, scheme) -> Grid:
    m = _get(cfg, "points_per_bin", 8, int)
    if m < 4:
        raise ConfigError("points_per_bin must be >= 4")
    if cfg.get("N") is not None:
        return Grid(_get(cfg, "N", conv=int), _get(cfg, "dq", ConfigError))
    if cfg.get("half_width") is not None:
        return covering_grid(scheme, _get(cfg, "half_width"), m)
    try:
        return matched_grid(scheme, m)
    except PcgError:
        return covering_grid(scheme, 12.0, m)


def orders_from_config(cfg):
    raw = cfg.get("orders")
    if raw is None:
        return list(DEFAULT_ORDERS)
    try:
        orders = [parse_order(v) for v in raw]
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad orders: {exc}")
    if any(not a >= 0.5 for a in orders):
        raise ConfigError("orders must lie in [1/2, inf]")
    return orders


def thread_count() -> int:
    try:
        return max(1, int(os.environ.get("PCG_EUR_THREADS", "1")))
    except ValueError:
        return 1


def run_cells(fn, items):
    """Map ``fn`` over ``items`` (possibly in threads); results keep input order."""
    items = list(items)
    n = min(thread_count(), len(items) or 1)
    if n == 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, items))


def _report_rows(reports):
    return [r.to_dict() for r in reports]


def cmd_verify_eur(cfg, seed) -> RunResult:
    scheme = scheme_from_config(cfg)
    grid = grid_from_config(cfg, scheme)
    orders = orders_from_config(cfg)
    family = cfg.get("state_family", "random")
    if family == "random":
        n_states, n_max = _get(cfg, "n_states", 100, int), _get(cfg, "n_max", 10, int)
        cells = [(f"random:n_max={n_max}:seed={seed + i}", seed + i,
                  lambda s=seed + i: random_superposition(n_max, s, grid, scheme.theta)) for i in range(n_states)]
    elif family == "hermite":
        cells = [(f"hermite:n={n}", None, lambda n=n: hermite_gauss(n, grid, scheme.theta))
                 for n in cfg.get("modes", [0])]
    elif family == "gaussian":
        c, sg, p = _get(cfg, "center", 0.0), _get(cfg, "sigma", 1 / math.sqrt(2)), _get(cfg, "momentum", 0.0)
        cells = [(f"gaussian:center={c:.12g}:sigma={sg:.12g}:momentum={p:.12g}", None,
                  lambda: gaussian(c, sg, p, grid, scheme.theta))]
    elif family == "bin-localized":
        cells = [(f"bin-localized:{direction}:k={k}", None,
                  lambda direction=direction, k=k: bin_localized_state(scheme, direction, k, grid))
                 for direction in ("theta", "theta_prime") for k in range(scheme.d)]
    else:
        raise ConfigError(f"unknown state_family {family!r}")

    def work(cell):
        sid, s, build = cell
        psi = build()
        p1, p2 = measure_pair(psi, scheme)
        return eur_reports(psi, scheme, orders, sid, s), (sid, p1, p2)

    out = run_cells(work, cells)
    reports = [r for reps, _ in out for r in reps]
    prob_rows = [{"state": sid, "direction": name, "k": k, "p": float(v)}
                 for _, (sid, p1, p2) in out for name, p in (("theta", p1), ("theta_prime", p2))
                 for k, v in enumerate(p)]
    worst = min(r.deficit for r in reports)
    flagged = [r for r in reports if r.red_flag]
    status = EXIT_RED_FLAG if flagged else EXIT_OK
    return RunResult(_report_rows(reports), {"probabilities.csv": table_csv(prob_rows)}, status,
                     f"{len(reports)} reports, minimum deficit {worst:.6g} nats, {len(flagged)} red flags",
                     "deficit-below-floor" if flagged else None)


def cmd_check_mub(cfg, seed) -> RunResult:
    d = _get(cfg, "d", ConfigError, int)
    theta = _get(cfg, "theta", 0.0, parse_angle)
    theta_prime = _get(cfg, "theta_prime", math.pi / 2, parse_angle)
    T1, T2 = _get(cfg, "T_theta", ConfigError), _get(cfg, "T_theta_prime", ConfigError)
    chk = check_mub(T1, T2, theta - theta_prime, d)
    row = {"d": d, "theta": theta, "theta_prime": theta_prime, "T_theta": T1, "T_theta_prime": T2,
           "valid": chk.valid, "M": chk.M, "reason": chk.reason or ""}
    status = EXIT_OK if chk.valid else EXIT_SCHEME
    return RunResult([row], {}, status, f"valid={chk.valid} M={chk.M:.12g} reason={chk.reason}", chk.reason)


def cmd_scan_invalid(cfg, seed) -> RunResult:
    d_max = _get(cfg, "d_max", 6, int)
    dtheta = _get(cfg, "dtheta", math.pi / 2, parse_angle)
    m = _get(cfg, "points_per_bin", 4, int)
    cells = [(d, M) for d in range(2, d_max + 1) for M in range(1, d + 1)]

    def work(cell):
        d, M = cell
        dev = probe_deviations(d, dtheta, M, m=m)
        return {"d": d, "M": M, "coprime": gcd(M, d) == 1, "deviation": float(dev.max()),
                "per_k": dev.tolist()}

    rows = run_cells(work, cells)
    bad = [r for r in rows if (r["coprime"] and r["deviation"] > DEFICIT_FLOOR)
           or (not r["coprime"] and r["deviation"] <= PROBE_THRESHOLD)]
    n_nc = sum(not r["coprime"] for r in rows)
    return RunResult(rows, {}, EXIT_RED_FLAG if bad else EXIT_OK,
                     f"{len(rows)} (d, M) pairs, {n_nc} non-coprime, {len(bad)} unexpected",
                     "probe-mismatch" if bad else None)


def cmd_minimize(cfg, seed) -> RunResult:
    scheme = scheme_from_config(cfg)
    grid = grid_from_config(cfg, scheme)
    orders = orders_from_config(cfg)
    name = cfg.get("family", "gaussian")
    if name == "gaussian":
        family = GaussianFamily(_get(cfg, "n_packets", 2, int))
    elif name == "hermite":
        family = HermiteFamily(_get(cfg, "n_modes", 10, int))
    else:
        raise ConfigError(f"unknown family {name!r}")
    budget, restarts = _get(cfg, "budget", 500, int), _get(cfg, "restarts", 8, int)
    if budget < 100:
        raise ConfigError("budget must be >= 100")

    def work(alpha):
        res = minimize_entropy_sum(scheme, alpha, family, budget, restarts, seed, grid)
        return {"scheme": scheme.label, "family": name, "alpha": res.alpha, "beta": res.beta,
                "best_sum": res.best_sum, "bound": res.bound, "deficit": res.deficit,
                "red_flag": res.red_flag, "evaluations": res.evaluations, "seed": seed,
                "best_params": res.best_params.tolist()}

    rows = run_cells(work, orders)
    flagged = [r for r in rows if r["red_flag"]]
    return RunResult(rows, {}, EXIT_RED_FLAG if flagged else EXIT_OK,
                     f"{len(rows)} searches, minimum deficit {min(r['deficit'] for r in rows):.6g}",
                     "deficit-below-floor" if flagged else None)


def cmd_limit_study(cfg, seed) -> RunResult:
    theta = _get(cfg, "theta", 0.0, parse_angle)
    theta_prime = _get(cfg, "theta_prime", math.pi / 2, parse_angle)
    if abs(math.sin(theta - theta_prime)) < 1e-12:
        raise SchemeError("degenerate-angle")
    alpha = _get(cfg, "alpha", 1.0, parse_order)
    ds = cfg.get("ds", [4, 16, 64, 256])
    records = limit_study(hg_state(_get(cfg, "state_mode", 0, int)), theta, theta_prime, alpha,
                          _get(cfg, "c", None), [int(d) for d in ds], _get(cfg, "points_per_bin", 8, int),
                          _get(cfg, "half_width", 10.0))
    rows = [r.to_dict() for r in records]
    bad = [r for r in records if r.rescaled_sum < r.bound - DEFICIT_FLOOR]
    return RunResult(rows, {"limit_table.csv": table_csv(rows)}, EXIT_RED_FLAG if bad else EXIT_OK,
                     "; ".join(f"d={r.d}: rescaled-bound={r.rescaled_sum - r.bound:.4g} gap={r.gap_theta:.4g}"
                               for r in records),
                     "deficit-below-floor" if bad else None)


def finest_matched_grid(scheme) -> Grid:
    """Finest matched grid that fits the two-mode size cap."""
    for m in range(32, 3, -1):
        try:
            grid = matched_grid(scheme, m)
        except PcgError:
            continue
        if grid.N <= MAX_GRID:
            return grid
    raise ConfigError("no matched grid fits the two-mode size cap; give N and dq explicitly")


def cmd_steering(cfg, seed) -> RunResult:
    scheme = scheme_from_config(cfg)
    bob = cfg.get("bob_angles")
    bob = None if bob is None else tuple(parse_angle(a) for a in bob)
    squeezing = [float(r) for r in cfg.get("squeezing", [0.0, 0.25, 0.5, 0.75, 1.0])]
    angles = (scheme.theta, scheme.theta_prime) + (bob or ())
    if cfg.get("N") is None and cfg.get("half_width") is None and any(abs(math.sin(2 * a)) > 1e-9 for a in angles):
        # rotations off the quarter turns are only unitary on a fine, wide grid
        width = max([10.0] + [squeezed_half_width(r) + 1 for r in squeezing])
        grid = covering_grid(scheme, width, max(16, _get(cfg, "points_per_bin", 16, int)))
    elif cfg.get("N") is None and cfg.get("points_per_bin") is None:
        grid = finest_matched_grid(scheme)
    else:
        grid = grid_from_config(cfg, scheme)
    rows, bad = [], 0
    for r in squeezing:
        w = steering_witness(two_mode_squeezed(r, grid), scheme, bob)
        rows.append({"kind": "two-mode-squeezed", "parameter": r, **w.to_dict(),
                     "cells_per_squeezed_sd": squeezed_resolution(r, grid)})
    n_max = _get(cfg, "n_max", 4, int)
    for i in range(_get(cfg, "product_cases", 0, int)):
        s = seed + i
        rng = np.random.default_rng(s)
        prod = TwoModeState.product(random_superposition(n_max, 2 * s, grid, scheme.theta),
                                    random_superposition(n_max, 2 * s + 1, grid, scheme.theta))
        w = steering_witness(prod, scheme, bob)
        rows.append({"kind": "product", "parameter": s, **w.to_dict()})
        members = [TwoModeState.product(random_superposition(n_max, 1000 * s + 2 * j, grid, scheme.theta),
                                        random_superposition(n_max, 1000 * s + 2 * j + 1, grid, scheme.theta))
                   for j in range(3)]
        weights = rng.dirichlet(np.ones(3))
        w = steering_witness(list(zip(weights, members)), scheme, bob)
        rows.append({"kind": "mixture", "parameter": s, **w.to_dict()})
    bad = [r for r in rows if r["kind"] != "two-mode-squeezed" and r["violated"]]
    return RunResult(rows, {}, EXIT_RED_FLAG if bad else EXIT_OK,
                     f"{len(rows)} witness evaluations, {sum(r['violated'] for r in rows)} violations",
                     "separable-state-violation" if bad else None)


def cmd_mask_demo(cfg, seed) -> RunResult:
    d = _get(cfg, "d", 2, int)
    spec = BinSpec(_get(cfg, "T", 2.0), d, _get(cfg, "offset_theta", 0.0))
    k = _get(cfg, "k", 0, int)
    spec.check_index(k)
    n_list = [int(n) for n in cfg.get("n_max_list", [10, 100, 1000])]
    n_samples = _get(cfg, "samples", 10_000, int)
    z = spec.offset + (np.arange(n_samples) + 0.5) * spec.T / n_samples
    exact = mask_value(z, spec, k)
    recon = {n: reconstruct_mask(spec, k, z, n) for n in n_list}
    rows = []
    for n in n_list:
        err = recon[n] - exact
        u = np.mod((z - spec.offset) / spec.s, 1.0)
        dist = np.minimum(u, 1 - u) * spec.s
        interior = dist > 10 * spec.T / max(n, 1)
        rows.append({"n_max": n, "l2_error": float(np.sqrt(np.mean(err ** 2) * spec.T)),
                     "max_interior_error": float(np.max(np.abs(err[interior]))) if interior.any() else float("nan")})
    samples = [{"z": float(zi), "mask": int(exact[i]), **{f"n{n}": float(recon[n][i]) for n in n_list}}
               for i, zi in enumerate(z)]
    return RunResult(rows, {"mask_samples.csv": table_csv(samples)}, EXIT_OK,
                     "; ".join(f"n_max={r['n_max']}: L2={r['l2_error']:.4g}" for r in rows))


HANDLERS = {
    "verify-eur": cmd_verify_eur,
    "check-mub": cmd_check_mub,
    "scan-invalid": cmd_scan_invalid,
    "minimize": cmd_minimize,
    "limit-study": cmd_limit_study,
    "steering": cmd_steering,
    "mask-demo": cmd_mask_demo,
}


def load_config(path) -> dict:
    try:
        cfg = json.loads(Path(path).read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}")
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}")
    if not isinstance(cfg, dict):
        raise ConfigError("config must be a JSON object")
    if cfg.get("tool") == "pcg-eur" and isinstance(cfg.get("config"), dict):
        cfg = cfg["config"]  # a manifest from an earlier run
    unknown = sorted(set(cfg) - KNOWN_KEYS)
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
    return cfg


def config_hash(cfg) -> str:
    return hashlib.sha256(json.dumps(jsonable(cfg), sort_keys=True).encode()).hexdigest()


def write_outputs(out: Path, command, cfg, seed, result: RunResult):
    out.mkdir(parents=True, exist_ok=True)
    files = {"reports.json": dumps(result.reports), "reports.csv": table_csv(result.reports)}
    files.update(result.aux)
    for name, text in files.items():
        (out / name).write_text(text)
    manifest = {
        "tool": "pcg-eur", "version": __version__, "command": command, "config": cfg,
        "config_sha256": config_hash(cfg), "seed": seed, "exit_status": result.status,
        "created": datetime.now(timezone.utc).isoformat(timespec="seconds"),
        "outputs": sorted(files), "threads": thread_count(),
    }
    (out / "manifest.json").write_text(dumps(manifest))


def _fail(status, reason, message):
    sys.stderr.write(json.dumps({"status": "error", "exit": status, "reason": reason, "message": message}) + "\n")
    return status


def run(command: str, cfg: dict, out=None, seed=None, quiet=False) -> int:
    """Execute one campaign and persist its artifacts; returns the exit status."""
    if command not in HANDLERS:
        return _fail(EXIT_CONFIG, "unknown-command", f"unknown command {command!r}")
    cfg = dict(cfg)
    if cfg.get("command") not in (None, command):
        return _fail(EXIT_CONFIG, "command-mismatch", f"config is for {cfg['command']!r}, not {command!r}")
    cfg["command"] = command
    try:
        seed = int(seed if seed is not None else cfg.get("seed", 0))
        if not 0 <= seed < 2 ** 64:
            raise ConfigError("seed must be an unsigned 64-bit integer")
        cfg["seed"] = seed
        out = Path(out or cfg.get("output_dir") or "pcg-eur-out")
        if out.exists() and not out.is_dir():
            raise ConfigError(f"output path {out} is not a directory")
        result = HANDLERS[command](cfg, seed)
    except ConfigError as exc:
        return _fail(EXIT_CONFIG, exc.reason, str(exc))
    except SchemeError as exc:
        return _fail(EXIT_SCHEME, exc.reason, str(exc))
    except PcgError as exc:
        return _fail(EXIT_CONFIG, type(exc).__name__, str(exc))
    try:
        write_outputs(out, command, cfg, seed, result)
    except OSError as exc:
        return _fail(EXIT_CONFIG, "output-not-writable", str(exc))
    if not quiet:
        print(f"{command}: {result.summary}")
        print(f"wrote {out}")
    if result.status != EXIT_OK:
        return _fail(result.status, result.reason or "failed", result.summary)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="pcg-eur", description=__doc__.splitlines()[0])
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--config", required=True, help="JSON run configuration (or a manifest.json to replay)")
    p.add_argument("--out", help="output directory (default: config output_dir or ./pcg-eur-out)")
    p.add_argument("--seed", type=int, help="override the config seed")
    p.add_argument("-q", "--quiet", action="store_true")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
    except ConfigError as exc:
        return _fail(EXIT_CONFIG, exc.reason, str(exc))
    return run(args.command, cfg, args.out, args.seed, args.quiet)


if __name__ == "__main__":
    sys.exit(main())

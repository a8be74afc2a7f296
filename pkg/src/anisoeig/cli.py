"""Command-line front end.

Every command reads one flat JSON config (``--config``); command-line flags
override the matching keys. CSV goes to stdout and, for commands that write
files, into ``--out``. Exit codes: 0 success, 1 validation failure, 2 I/O or
parse error, 3 solver non-convergence (files are still written).

Example config for ``solve``::

    {"p": [2, 2], "counts": [63, 63], "lower": [0, 0], "upper": [1, 1],
     "tol_residual": 1e-6, "restarts": 2, "rng_seed": 0}
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from dataclasses import dataclass, fields
from datetime import datetime, timezone
from pathlib import Path
from typing import Optional

import numpy as np
from threadpoolctl import threadpool_limits

from .eigensolver import SolveConfig, minimize_fractional, minimize_local, s_sweep
from .exponents import ExponentVector, FractionalVector, validate
from .grid import BoxDomain, FieldFormatError, GridFunction, build_grid, read_field, write_field
from .norms import (directional_norms, fractional_seminorm, fractional_terms, gradient_norm,
                    min_window, mixed_norm)
from .variations import (F_p, H_prime_apply, Hs_prime_apply, gateaux_check, pairing)

log = logging.getLogger("anisoeig")

EXIT_OK, EXIT_INVALID, EXIT_IO, EXIT_NOT_CONVERGED = 0, 1, 2, 3

SOLVE_KEYS = {f.name for f in fields(SolveConfig)}
KNOWN_KEYS = SOLVE_KEYS | {"p", "s", "s_list", "counts", "lower", "upper", "window",
                           "normalized", "k", "mode", "field", "samples", "n", "threads"}

HIGHER_EIGENVALUE_NOTE = (
    "only the first eigenvalue is computed. The k-th value is the min-max of the "
    "quotient over symmetric compact subsets of the unit sphere {||u||_p = 1} whose "
    "Krasnoselskii genus is at least k; that minimization over sets has no tractable "
    "discretization here.")

LIMIT_NOTE = ("lambda_local_limit minimizes sum_i (2/p_i)^(1/p_i) ||u_{x_i}||_{p_i} / ||u||_p, "
              "the s -> 1 limit of the (1-s)-normalized quotient")


class UsageError(Exception):
    """Bad config contents; maps to exit code 1."""


@dataclass
class RunConfig:
    """Merged JSON config and flag overrides for one command."""

    values: dict
    out: Optional[Path]
    threads: int
    timestamp: bool

    def get(self, key, default=None):
        return self.values.get(key, default)

    def require(self, key):
        if key not in self.values:
            raise UsageError(f"config key {key!r} is required for this command")
        return self.values[key]


# -------------------------------------------------------------- helpers

def _floats(x, name) -> tuple:
    try:
        arr = np.atleast_1d(np.asarray(x, dtype=float))
    except (TypeError, ValueError) as exc:
        raise UsageError(f"{name} must be a number or a list of numbers") from exc
    if arr.ndim != 1:
        raise UsageError(f"{name} must be a flat list")
    return tuple(float(v) for v in arr)


def _grid(cfg: RunConfig):
    counts = cfg.require("counts")
    counts = [counts] if isinstance(counts, int) else counts
    if not all(isinstance(k, int) and k >= 1 for k in counts):
        raise UsageError("counts must be positive integers")
    n = len(counts)
    lower = _floats(cfg.get("lower", [0.0] * n), "lower")
    upper = _floats(cfg.get("upper", [1.0] * n), "upper")
    if len(lower) != n or len(upper) != n:
        raise UsageError("lower, upper and counts must have equal length")
    try:
        return build_grid(BoxDomain(lower, upper), tuple(counts))
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def _exponents(cfg: RunConfig, n: int) -> ExponentVector:
    p = _floats(cfg.require("p"), "p")
    if len(p) == 1 and n > 1:
        p = p * n
    if len(p) != n:
        raise UsageError(f"p has {len(p)} entries but the grid has {n} axes")
    try:
        return ExponentVector(p)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def _orders(s, n: int) -> FractionalVector:
    s = _floats(s, "s")
    if len(s) == 1 and n > 1:
        s = s * n
    if len(s) != n:
        raise UsageError(f"s has {len(s)} entries but the grid has {n} axes")
    try:
        return FractionalVector(s)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def _solve_config(cfg: RunConfig) -> SolveConfig:
    kw = {k: cfg.values[k] for k in SOLVE_KEYS if k in cfg.values}
    kw["threads"] = cfg.threads
    try:
        return SolveConfig(**kw)
    except (TypeError, ValueError) as exc:
        raise UsageError(f"bad solver setting: {exc}") from exc


def _check_first_eigenvalue(cfg: RunConfig):
    k = cfg.get("k", 1)
    if k != 1:
        raise UsageError(f"k={k} requested: {HIGHER_EIGENVALUE_NOTE}")


def _warn_conditions(p, s, n, mode):
    # the embedding conditions matter for the continuum theory, not for the
    # finite-dimensional quotient, so a failure is reported but not fatal
    rep = validate(tuple(p), None if s is None else tuple(s), n)
    if not rep.required_ok(mode):
        checks = [("local_subcritical", rep.condicion1_ok)] if mode == "local" else [
            ("fractional_subcritical", rep.condicion2_ok),
            ("top_exponent_below_fractional_critical", rep.condicion3_ok)]
        failed = [name for name, ok in checks if not ok]
        log.warning("%s mode: condition(s) not satisfied: %s; solving the discrete problem anyway",
                    mode, ", ".join(failed))


def _csv(rows, header) -> str:
    return "\n".join([header] + rows) + "\n"


def _num(x) -> str:
    return format(float(x), ".16e")


class _Writer:
    def __init__(self, cfg: RunConfig):
        self.cfg = cfg
        stamp = datetime.now(timezone.utc).isoformat(timespec="seconds")
        self.stamp = f"# generated {stamp}\n" if cfg.timestamp else ""

    def emit(self, text: str, name: Optional[str] = None, comment: str = ""):
        body = self.stamp + (f"# {comment}\n" if comment else "") + text
        sys.stdout.write(body)
        sys.stdout.flush()
        if name is not None and self.cfg.out is not None:
            self.file(name, body)

    def file(self, name: str, text: str):
        path = self.cfg.out / name
        with open(path, "w", newline="\n") as fh:
            fh.write(text)

    def csv_file(self, name: str, text: str, comment: str = ""):
        self.file(name, self.stamp + (f"# {comment}\n" if comment else "") + text)


def _need_out(cfg: RunConfig) -> Path:
    out = cfg.out if cfg.out is not None else Path("anisoeig-out")
    out.mkdir(parents=True, exist_ok=True)
    cfg.out = out
    return out


# ------------------------------------------------------------- commands

def cmd_validate(cfg: RunConfig) -> int:
    p = _floats(cfg.require("p"), "p")
    s = cfg.get("s")
    s = None if s is None else _floats(s, "s")
    if s is not None and len(s) == 1 and len(p) > 1:
        s = s * len(p)
    counts = cfg.get("counts")
    n = int(cfg.get("n", len(counts) if isinstance(counts, list) else len(p)))
    mode = cfg.get("mode", "fractional" if s is not None else "local")
    if mode not in ("local", "fractional"):
        raise UsageError(f"mode must be 'local' or 'fractional', got {mode!r}")
    rep = validate(p, s, n)
    def row(name, ok, value=None):
        return f"{name},{str(ok).lower()}," + ("" if value is None else _num(value))

    rows = [row("ordered_range", rep.condicion_ok),
            row("local_subcritical", rep.condicion1_ok, rep.pstar),
            row("fractional_subcritical", rep.condicion2_ok, rep.pstar_s),
            row("top_exponent_below_fractional_critical", rep.condicion3_ok,
                p[-1] if rep.condicion2_ok else None)]
    _Writer(cfg).emit(_csv(rows, "condition,ok,value"), "validate.csv")
    return EXIT_OK if rep.required_ok(mode) else EXIT_INVALID


def cmd_norm(cfg: RunConfig) -> int:
    u = read_field(cfg.require("field"))
    n = u.grid.ndim
    p = _exponents(cfg, n)
    rows = [f"mixed_norm,,{_num(mixed_norm(u, p))}",
            f"gradient_norm,,{_num(gradient_norm(u, p))}"]
    rows += [f"directional_norm,{i},{_num(v)}" for i, v in enumerate(directional_norms(u, p))]
    if cfg.get("s") is not None:
        s = _orders(cfg.get("s"), n)
        try:
            terms = fractional_terms(u, s, p, cfg.get("window"), bool(cfg.get("normalized", True)))
        except ValueError as exc:
            raise UsageError(str(exc)) from exc
        for t in terms:
            rows += [f"fractional_inner,{t.axis},{_num(t.inner_sum)}",
                     f"fractional_band,{t.axis},{_num(t.inner_band_correction)}",
                     f"fractional_tail,{t.axis},{_num(t.tail_correction)}",
                     f"fractional_directional,{t.axis},{_num(t.seminorm)}"]
        rows.append(f"fractional_seminorm,,{_num(sum(t.seminorm for t in terms))}")
    _Writer(cfg).emit(_csv(rows, "quantity,axis,value"), "norm.csv")
    return EXIT_OK


def _finish_solve(cfg: RunConfig, rep, writer: _Writer) -> int:
    out = _need_out(cfg)
    write_field(rep.u, out / "eigenfunction.field")
    writer.csv_file("history.csv", rep.history_csv())
    line = f"lambda,{_num(rep.lambda_)},converged,{str(rep.converged).lower()}\n"
    writer.emit(line, "summary.csv", comment="lambda is the min-Q eigenvalue")
    return EXIT_OK if rep.converged else EXIT_NOT_CONVERGED


def cmd_solve(cfg: RunConfig) -> int:
    _check_first_eigenvalue(cfg)
    grid = _grid(cfg)
    p = _exponents(cfg, grid.ndim)
    scfg = _solve_config(cfg)
    _warn_conditions(p, None, grid.ndim, "local")
    rep = minimize_local(p, grid, scfg)
    return _finish_solve(cfg, rep, _Writer(cfg))


def cmd_solve_frac(cfg: RunConfig) -> int:
    _check_first_eigenvalue(cfg)
    grid = _grid(cfg)
    p = _exponents(cfg, grid.ndim)
    s = _orders(cfg.require("s"), grid.ndim)
    scfg = _solve_config(cfg)
    _warn_conditions(p, s, grid.ndim, "fractional")
    try:
        rep = minimize_fractional(s, p, grid, scfg, bool(cfg.get("normalized", True)),
                                  cfg.get("window"))
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    return _finish_solve(cfg, rep, _Writer(cfg))


def cmd_sweep_s(cfg: RunConfig) -> int:
    _check_first_eigenvalue(cfg)
    grid = _grid(cfg)
    p = _exponents(cfg, grid.ndim)
    s_list = cfg.require("s_list")
    if not isinstance(s_list, list) or not s_list:
        raise UsageError("s_list must be a non-empty list")
    s_list = [_orders(s, grid.ndim).s for s in s_list]
    if not cfg.get("normalized", True):
        raise UsageError("sweep-s compares against the s -> 1 limit and needs normalized=true")
    scfg = _solve_config(cfg)
    try:
        table = s_sweep(p, grid, s_list, scfg, cfg.get("window"))
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    _need_out(cfg)
    _Writer(cfg).emit(table.csv(), "sweep.csv", comment=LIMIT_NOTE)
    return EXIT_OK if all(r.converged for r in table.rows) else EXIT_NOT_CONVERGED


# ------------------------------------------------------- invariant suite

def _random_instance(rng: np.random.Generator):
    n = int(rng.integers(1, 4))
    counts = tuple(int(k) for k in rng.integers(3, {1: 24, 2: 10, 3: 6}[n], size=n))
    upper = tuple(float(x) for x in rng.uniform(0.5, 2.0, size=n))
    grid = build_grid(BoxDomain((0.0,) * n, upper), counts)
    p = tuple(np.sort(rng.uniform(1.2, 4.0, size=n)))
    s = tuple(rng.uniform(0.2, 0.9, size=n))
    u = GridFunction(grid, rng.standard_normal(grid.shape))
    v = GridFunction(grid, rng.standard_normal(grid.shape))
    return grid, p, s, u, v


def _rel(a, b) -> float:
    return abs(a - b) / max(abs(a), abs(b), np.finfo(float).tiny)


def run_invariants(seed: int = 0, samples: int = 20) -> list:
    """Evaluate the invariant suite on seeded random instances.

    Returns ``(name, max_error, tolerance)`` triples; an invariant passes when
    ``max_error <= tolerance``. The ``duality`` row checks ``||F_p(u)||_p' = 1``:
    ``F_p`` is 0-homogeneous, so it matches ``||u||_p`` exactly on the unit sphere.
    """
    rng = np.random.default_rng(seed)
    errs = {k: 0.0 for k in ("duality", "euler_I", "euler_H", "euler_Hs", "gateaux_I",
                             "gateaux_H", "gateaux_Hs", "monotonicity", "boundedness",
                             "window_invariance", "homogeneity")}
    for _ in range(samples):
        grid, p, s, u, v = _random_instance(rng)
        p_conj = tuple(q / (q - 1.0) for q in p)
        f = F_p(u, p)
        i_u = mixed_norm(u, p)
        errs["duality"] = max(errs["duality"], abs(mixed_norm(f, p_conj) - 1.0))
        errs["euler_I"] = max(errs["euler_I"], _rel(pairing(f, u), i_u))
        errs["euler_H"] = max(errs["euler_H"], _rel(H_prime_apply(u, u, p), gradient_norm(u, p)))
        hs = fractional_seminorm(u, s, p)
        errs["euler_Hs"] = max(errs["euler_Hs"], _rel(Hs_prime_apply(u, u, s, p), hs))
        for name, fn in (("gateaux_I", "I"), ("gateaux_H", "H"), ("gateaux_Hs", "Hs")):
            rep = gateaux_check(fn, u, v, p, s if fn == "Hs" else None)
            errs[name] = max(errs[name], rep.min_relative_error)
        mono = H_prime_apply(u, u - v, p) - H_prime_apply(v, u - v, p)
        errs["monotonicity"] = max(errs["monotonicity"], -mono)
        errs["boundedness"] = max(errs["boundedness"],
                                  abs(H_prime_apply(u, v, p)) - gradient_norm(v, p))
        doubled = [2 * min_window(grid, i) for i in range(grid.ndim)]
        h2 = fractional_seminorm(u, s, p, doubled)
        errs["window_invariance"] = max(errs["window_invariance"], _rel(h2, hs))
        t = float(rng.uniform(0.1, 10.0)) * (-1.0) ** int(rng.integers(2))
        errs["homogeneity"] = max(errs["homogeneity"],
                                  _rel(gradient_norm(u * t, p), abs(t) * gradient_norm(u, p)))
    tol = {"duality": 1e-10, "euler_I": 1e-10, "euler_H": 1e-10, "euler_Hs": 1e-10,
           "gateaux_I": 1e-5, "gateaux_H": 1e-5, "gateaux_Hs": 1e-4, "monotonicity": 1e-12,
           "boundedness": 1e-10, "window_invariance": 1e-10, "homogeneity": 1e-12}
    return [(k, max(errs[k], 0.0) if k in ("monotonicity", "boundedness") else errs[k], tol[k])
            for k in errs]


def cmd_check(cfg: RunConfig) -> int:
    samples = int(cfg.get("samples", 20))
    if samples < 1:
        raise UsageError("samples must be at least 1")
    results = run_invariants(int(cfg.get("rng_seed", 0)), samples)
    rows = [f"{name},{_num(err)},{str(err <= tol).lower()}" for name, err, tol in results]
    _Writer(cfg).emit(_csv(rows, "invariant,max_error,pass"), "check.csv")
    return EXIT_OK if all(err <= tol for _, err, tol in results) else EXIT_INVALID


COMMANDS = {"validate": cmd_validate, "norm": cmd_norm, "solve": cmd_solve,
            "solve-frac": cmd_solve_frac, "sweep-s": cmd_sweep_s, "check": cmd_check}


# ----------------------------------------------------------------- main

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="anisoeig", description=__doc__.split("\n\n")[0])
    ap.add_argument("command", choices=sorted(COMMANDS))
    ap.add_argument("--config", type=Path, help="JSON config file (flat keys)")
    ap.add_argument("--out", type=Path, help="output directory")
    ap.add_argument("--threads", type=int, default=None,
                    help="worker threads for solver restarts (default: all cores)")
    ap.add_argument("--seed", type=int, default=None, help="overrides rng_seed")
    ap.add_argument("--no-timestamp", action="store_true",
                    help="omit the '# generated ...' header line")
    ap.add_argument("--field", type=Path, help="field file for 'norm' (overrides config)")
    ap.add_argument("-v", "--verbose", action="store_true")
    return ap


def _load(args) -> RunConfig:
    values = {}
    if args.config is not None:
        values = json.loads(args.config.read_text())
        if not isinstance(values, dict):
            raise json.JSONDecodeError("config must be a JSON object", "", 0)
    unknown = set(values) - KNOWN_KEYS
    if unknown:
        raise UsageError(f"unknown config keys: {', '.join(sorted(unknown))}")
    if args.seed is not None:
        values["rng_seed"] = args.seed
    if args.field is not None:
        values["field"] = str(args.field)
    threads = args.threads or values.pop("threads", None) or os.cpu_count() or 1
    values.pop("threads", None)
    if threads < 1:
        raise UsageError("--threads must be at least 1")
    return RunConfig(values, args.out, int(threads), not args.no_timestamp)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s")
    try:
        cfg = _load(args)
        # BLAS stays single-threaded so results do not depend on --threads
        with threadpool_limits(limits=1):
            return COMMANDS[args.command](cfg)
    except (json.JSONDecodeError, FieldFormatError) as exc:
        print(f"anisoeig: parse error: {exc}", file=sys.stderr)
        return EXIT_IO
    except OSError as exc:
        print(f"anisoeig: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except UsageError as exc:
        print(f"anisoeig: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())

"""Command line interface.

Subcommands::

    hyperdelta invariants --curve c.json [--quad-tol 1e-3] [--theta-tol 1e-14]
                          [--seed N] [--checks all|fast] [--output report.json]
    hyperdelta periods    --curve c.json
    hyperdelta theta-eval (--curve c.json | --tau tau.json) --z Z [--char 11;01]
    hyperdelta sigma-poly --genus g
    hyperdelta check {thomae,disc,main,second,green-sym,g2-remark} --curve c.json

Exit status is 0 when every selected residual passes, 1 when one fails and 2
on usage or input errors.  Log lines go to stderr as ``key=value`` pairs.

Environment overrides: ``HYPERDELTA_CACHE_DIR`` (period cache location) and
``HYPERDELTA_PRECISION`` (default working precision in bits).
"""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import os
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional, Sequence

import numpy as np

from . import __version__
from .curve import CurveError, CurveSpec, load_curve
from .invariants import InvariantError, InvariantReport, compute_invariants
from .periods import PeriodData, PeriodError, period_matrix
from .quadrature import QuadConfig, QuadratureError
from .symfunc import SymfuncError, sigma_tables
from .theta import (
    ThetaChar,
    ThetaConfig,
    ThetaError,
    disc_identity_residual,
    riemann_characteristic,
    theta,
    thomae_residual,
)

log = logging.getLogger("hyperdelta")

CACHE_VERSION = f"periods-{__version__}-1"
CHECKS = ("thomae", "disc", "main", "second", "green-sym", "g2-remark")
CHECK_SECTIONS = {"main": ["theorems"], "second": ["theorems"], "g2-remark": ["theorems"],
                  "green-sym": ["S", "green"]}
CHECK_RESIDUALS = {
    "thomae": ("thomae",),
    "disc": ("disc",),
    "main": ("thm_main", "leading_A_order"),
    "second": ("thm_second",),
    "green-sym": ("green_symmetry", "green_normalization", "S_Q_spread"),
    "g2-remark": ("g2_remark",),
}


class UsageError(Exception):
    pass


class _KeyValueFormatter(logging.Formatter):
    def format(self, record: logging.LogRecord) -> str:
        return f"level={record.levelname.lower()} {record.getMessage()}"


def _setup_logging(verbose: bool) -> None:
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(_KeyValueFormatter())
    log.handlers[:] = [handler]
    log.setLevel(logging.INFO if verbose else logging.WARNING)
    log.propagate = False


# Configuration -------------------------------------------------------------------


@dataclass(frozen=True)
class RunConfig:
    command: str
    curve: Optional[Path] = None
    theta_tol: float = 1e-14
    quad_tol: float = 1e-3
    quad_method: str = "adaptive"
    precision_bits: int = 128
    seed: int = 0
    cache_dir: Optional[Path] = None
    checks: str = "all"
    check: Optional[str] = None
    output: Optional[Path] = None

    def __post_init__(self):
        if not self.theta_tol > 0 or not self.quad_tol > 0:
            raise UsageError("tolerances must be positive")
        if self.precision_bits < 53:
            raise UsageError("precision must be at least 53 bits")

    @property
    def theta_cfg(self) -> ThetaConfig:
        return ThetaConfig(tol=self.theta_tol, precision_bits=self.precision_bits)

    @property
    def quad_cfg(self) -> QuadConfig:
        return QuadConfig(method=self.quad_method, tol=self.quad_tol, seed=self.seed)


def _default_precision() -> int:
    raw = os.environ.get("HYPERDELTA_PRECISION")
    if raw is None:
        return 128
    try:
        return int(raw)
    except ValueError as exc:
        raise UsageError(f"HYPERDELTA_PRECISION must be an integer, got {raw!r}") from exc


def _default_cache() -> Optional[Path]:
    raw = os.environ.get("HYPERDELTA_CACHE_DIR")
    return Path(raw) if raw else None


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="hyperdelta", description=__doc__.split("\n")[0])
    p.add_argument("--verbose", "-v", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, curve_required=True):
        sp.add_argument("--curve", type=Path, required=curve_required, help="curve JSON file")
        sp.add_argument("--theta-tol", type=float, default=1e-14)
        sp.add_argument("--precision", type=int, default=None, help="working precision in bits")
        sp.add_argument("--cache-dir", type=Path, default=None)
        sp.add_argument("--output", type=Path, default=None, help="write JSON here instead of stdout")

    sp = sub.add_parser("invariants", help="compute all invariants and residuals")
    common(sp)
    sp.add_argument("--quad-tol", type=float, default=1e-3)
    sp.add_argument("--quad-method", choices=("adaptive", "montecarlo"), default="adaptive")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--checks", choices=("all", "fast"), default="all")

    sp = sub.add_parser("periods", help="period matrix and diagnostics")
    common(sp)

    sp = sub.add_parser("theta-eval", help="evaluate a theta function")
    common(sp, curve_required=False)
    sp.add_argument("--tau", type=Path, default=None, help="JSON file with tau as [re, im] pairs")
    sp.add_argument("--z", required=True, help="JSON list of [re, im] pairs (or list of such lists)")
    sp.add_argument("--char", default=None, help="characteristic like '11;01' (default: zero, "
                    "or the Riemann characteristic with --curve)")

    sp = sub.add_parser("sigma-poly", help="exact leading sigma polynomial tables")
    sp.add_argument("--genus", type=int, required=True)
    sp.add_argument("--output", type=Path, default=None)

    sp = sub.add_parser("check", help="run one residual check")
    sp.add_argument("check", choices=CHECKS)
    common(sp)
    sp.add_argument("--quad-tol", type=float, default=1e-3)
    sp.add_argument("--quad-method", choices=("adaptive", "montecarlo"), default="adaptive")
    sp.add_argument("--seed", type=int, default=0)
    return p


def config_from_args(ns: argparse.Namespace) -> RunConfig:
    prec = ns.precision if getattr(ns, "precision", None) is not None else _default_precision()
    return RunConfig(
        command=ns.command,
        curve=getattr(ns, "curve", None),
        theta_tol=getattr(ns, "theta_tol", 1e-14),
        quad_tol=getattr(ns, "quad_tol", 1e-3),
        quad_method=getattr(ns, "quad_method", "adaptive"),
        precision_bits=prec,
        seed=getattr(ns, "seed", 0),
        cache_dir=getattr(ns, "cache_dir", None) or _default_cache(),
        checks=getattr(ns, "checks", "all"),
        check=getattr(ns, "check", None),
        output=getattr(ns, "output", None),
    )


# Period cache -------------------------------------------------------------------


def cache_key(curve: CurveSpec, rtol: float = 1e-12, quad: Optional[QuadConfig] = None) -> str:
    """Content hash of the curve, ordering, quadrature settings and code version."""
    qc = None if quad is None else {"method": quad.method, "tol": quad.tol, "budget": quad.budget}
    payload = json.dumps({"curve": curve.to_json(), "rtol": rtol, "quad": qc,
                          "version": CACHE_VERSION}, sort_keys=True)
    return hashlib.sha256(payload.encode()).hexdigest()


def cached_periods(curve: CurveSpec, cache_dir: Optional[Path], rtol: float = 1e-12,
                   quad: Optional[QuadConfig] = None) -> PeriodData:
    """Period data from ``cache_dir`` if present and valid, computed otherwise."""
    if cache_dir is None:
        return period_matrix(curve, rtol=rtol)
    path = Path(cache_dir) / f"{cache_key(curve, rtol, quad)}.json"
    if path.exists():
        try:
            data = json.loads(path.read_text())
            if data.get("version") != CACHE_VERSION:
                raise ValueError("stale version")
            per = PeriodData.from_json(curve, data["periods"])
            if per.tau.shape != (curve.genus, curve.genus) or not np.all(np.isfinite(per.tau)):
                raise ValueError("malformed period matrix")
            log.info(f"event=cache_hit key={path.stem}")
            return per
        except (ValueError, KeyError, TypeError, IndexError) as exc:
            log.warning(f"event=cache_corrupt key={path.stem} reason={str(exc)!r} action=recompute")
    per = period_matrix(curve, rtol=rtol)
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_suffix(".tmp")
    tmp.write_text(json.dumps({"version": CACHE_VERSION, "periods": per.to_json()}, sort_keys=True))
    tmp.replace(path)
    log.info(f"event=cache_store key={path.stem}")
    return per


# Commands --------------------------------------------------------------------------


def _cjson(v) -> list:
    return [float(np.real(v)), float(np.imag(v))]


def _parse_complex_list(text: str) -> np.ndarray:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise UsageError(f"cannot parse --z: {exc}") from exc

    def conv(v):
        if isinstance(v, (int, float)):
            return complex(v)
        if isinstance(v, list) and len(v) == 2 and all(isinstance(c, (int, float)) for c in v):
            return complex(v[0], v[1])
        raise UsageError(f"expected a number or [re, im] pair, got {v!r}")

    if data and isinstance(data[0], list) and data[0] and isinstance(data[0][0], list):
        return np.array([[conv(v) for v in row] for row in data])
    return np.array([[conv(v) for v in data]])


def _load_tau(path: Path) -> np.ndarray:
    data = json.loads(Path(path).read_text())
    if isinstance(data, dict):
        data = data["tau"]
    return np.array([[complex(v[0], v[1]) for v in row] for row in data])


def cmd_periods(cfg: RunConfig) -> dict:
    curve = load_curve(cfg.curve)
    per = cached_periods(curve, cfg.cache_dir)
    out = {"curve": curve.to_json(), "periods": per.to_json(),
           "tau_imag_min_eigenvalue": float(np.min(np.linalg.eigvalsh(per.Y))),
           "passed": per.symmetry_error < 1e-8}
    return out


def cmd_theta_eval(cfg: RunConfig, ns: argparse.Namespace) -> dict:
    if (cfg.curve is None) == (ns.tau is None):
        raise UsageError("give exactly one of --curve and --tau")
    inputs = {}
    if cfg.curve is not None:
        curve = load_curve(cfg.curve)
        per = cached_periods(curve, cfg.cache_dir)
        tau = per.tau
        char = ThetaChar.parse(ns.char) if ns.char else riemann_characteristic(per)
        inputs["curve"] = curve.to_json()
    else:
        tau = _load_tau(ns.tau)
        g = tau.shape[0]
        char = ThetaChar.parse(ns.char) if ns.char else ThetaChar.zero(g)
    z = _parse_complex_list(ns.z)
    if z.shape[1] != tau.shape[0]:
        raise UsageError(f"z has {z.shape[1]} entries, tau is {tau.shape[0]}x{tau.shape[0]}")
    vals = theta(z, tau, char, cfg.theta_cfg)
    inputs.update({"tau": [[_cjson(v) for v in row] for row in tau], "char": str(char),
                   "z": [[_cjson(v) for v in row] for row in z], "theta_tol": cfg.theta_tol})
    return {"inputs": inputs, "values": [_cjson(v) for v in np.atleast_1d(vals)], "passed": True}


def cmd_sigma(ns: argparse.Namespace) -> dict:
    if ns.genus < 1:
        raise UsageError("genus must be positive")
    out = sigma_tables(ns.genus)
    out["passed"] = True
    return out


def _report(cfg: RunConfig, sections: Optional[Sequence[str]] = None) -> InvariantReport:
    curve = load_curve(cfg.curve)
    per = cached_periods(curve, cfg.cache_dir, quad=cfg.quad_cfg)
    return compute_invariants(curve, cfg.theta_cfg, cfg.quad_cfg, seed=cfg.seed,
                              checks=cfg.checks, periods=per, sections=sections,
                              log=lambda msg: log.info(msg))


def cmd_invariants(cfg: RunConfig) -> dict:
    return _report(cfg).to_json()


def cmd_check(cfg: RunConfig) -> dict:
    name = cfg.check
    if name in ("thomae", "disc"):
        curve = load_curve(cfg.curve)
        per = cached_periods(curve, cfg.cache_dir)
        fn = thomae_residual if name == "thomae" else disc_identity_residual
        val = fn(per, cfg.theta_cfg)
        tol = 1e-6
        res = [{"name": name, "value": val, "tolerance": tol, "passed": val <= tol}]
        return {"check": name, "curve": curve.to_json(), "theta_tol": cfg.theta_tol,
                "residuals": res, "passed": res[0]["passed"]}
    if name == "g2-remark":
        curve = load_curve(cfg.curve)
        if curve.genus != 2:
            raise UsageError("g2-remark needs a genus 2 curve")
    rep = _report(cfg, sections=CHECK_SECTIONS[name])
    keep = [r.to_json() for r in rep.residuals
            if any(r.name == k or r.name.startswith(k + "[") for k in CHECK_RESIDUALS[name])]
    return {"check": name, "curve": rep.curve, "config": rep.config, "residuals": keep,
            "passed": all(r["passed"] for r in keep)}


def _emit(payload: dict, output: Optional[Path]) -> None:
    text = json.dumps(payload, sort_keys=True, indent=2, allow_nan=True) + "\n"
    if output is None:
        sys.stdout.write(text)
    else:
        Path(output).write_text(text)


def run(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code else 0
    _setup_logging(ns.verbose)
    stage = "config"
    try:
        cfg = config_from_args(ns)
        stage = ns.command
        log.info(f"event=start command={ns.command} version={__version__}")
        if ns.command == "periods":
            payload = cmd_periods(cfg)
        elif ns.command == "theta-eval":
            payload = cmd_theta_eval(cfg, ns)
        elif ns.command == "sigma-poly":
            payload = cmd_sigma(ns)
        elif ns.command == "invariants":
            payload = cmd_invariants(cfg)
        else:
            payload = cmd_check(cfg)
    except (UsageError, CurveError, SymfuncError, OSError, json.JSONDecodeError) as exc:
        log.error(f"event=input_error stage={stage} error={str(exc)!r}")
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (PeriodError, ThetaError, QuadratureError, InvariantError) as exc:
        log.error(f"event=module_error stage={stage} type={type(exc).__name__} error={str(exc)!r}")
        print(f"error in {stage}: {exc}", file=sys.stderr)
        return 1
    _emit(payload, cfg.output)
    passed = bool(payload.get("passed", True))
    if not passed:
        failed = [r["name"] for r in payload.get("residuals", []) if not r["passed"]]
        log.warning(f"event=residual_failure failed={','.join(failed)}")
    log.info(f"event=done passed={passed}")
    return 0 if passed else 1


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()

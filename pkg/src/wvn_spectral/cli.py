"""Command-line front end.

    wvn-spectral --command scan --c 0 --omega pi/4 --lambda-min -1.9 --lambda-max 1.9 --points 39
    wvn-spectral --command pseudogap --c 1 --omega pi/4 --out fit.json --format json
    wvn-spectral --config run.json

Every option may also come from a JSON config file (``--config``); flags
given on the command line override it.  Grid commands write the columns
``lambda, phi, rho_prime, error_estimate, flags``; the others write
``quantity, value`` rows.
"""

from __future__ import annotations

import argparse
import ast
import csv
import io
import json
import math
import operator
import sys
from dataclasses import dataclass, field, fields

import numpy as np
from scipy.special import gamma

from .core import PotentialParams
from .errors import ConvergenceError, DomainError, ParameterError
from .linalg2 import right_singular_vectors2
from .model import ModelParams, product_phi0, product_phi_pm, rank_one_defect
from .sequences import SequenceFamily
from .spectral import (
    FAILURE_FLAGS,
    classify_critical_point,
    critical_points,
    default_eps_grid,
    density_scan,
    gev_exponent_fit,
    pseudogap_fit,
)

COMMANDS = ("scan", "pseudogap", "gev", "model", "classify")
FORMATS = ("csv", "json")
GRID_COLUMNS = ("lambda", "phi", "rho_prime", "error_estimate", "flags")


class ConfigError(ValueError):
    pass


# -- angles such as "pi/4" -------------------------------------------------

_OPS = {
    ast.Add: operator.add, ast.Sub: operator.sub, ast.Mult: operator.mul,
    ast.Div: operator.truediv, ast.Pow: operator.pow, ast.USub: operator.neg,
    ast.UAdd: operator.pos,
}


def parse_number(text) -> float:
    """Float from a literal or a small arithmetic expression in ``pi``."""
    if isinstance(text, (int, float)):
        return float(text)

    def ev(node):
        if isinstance(node, ast.Expression):
            return ev(node.body)
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
            return float(node.value)
        if isinstance(node, ast.Name) and node.id == "pi":
            return math.pi
        if isinstance(node, ast.BinOp) and type(node.op) in _OPS:
            return _OPS[type(node.op)](ev(node.left), ev(node.right))
        if isinstance(node, ast.UnaryOp) and type(node.op) in _OPS:
            return _OPS[type(node.op)](ev(node.operand))
        raise ConfigError(f"cannot parse number {text!r}")

    try:
        return ev(ast.parse(str(text).strip(), mode="eval"))
    except (SyntaxError, ZeroDivisionError) as exc:
        raise ConfigError(f"cannot parse number {text!r}") from exc


# -- config ----------------------------------------------------------------

@dataclass(frozen=True)
class RunConfig:
    potential: PotentialParams
    command: str = "scan"
    lambda_min: float = -1.9
    lambda_max: float = 1.9
    points: int = 39
    N: int | None = None
    tol: float = 1e-3
    eps_grid: tuple[float, ...] | None = None
    out: str | None = None
    format: str = "csv"
    workers: int = 1
    beta: float | None = None
    remainder: SequenceFamily = field(default_factory=SequenceFamily.zero)

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise ConfigError(f"command must be one of {COMMANDS}, got {self.command!r}")
        if self.format not in FORMATS:
            raise ConfigError(f"format must be one of {FORMATS}, got {self.format!r}")
        if not -2.0 < self.lambda_min < self.lambda_max < 2.0:
            raise ConfigError("grid bounds must satisfy -2 < lambda_min < lambda_max < 2")
        if self.points < 2:
            raise ConfigError("points must be at least 2")
        if not self.tol > 0:
            raise ConfigError("tol must be positive")
        if self.N is not None and self.N < 16:
            raise ConfigError("N must be at least 16")
        if self.eps_grid is not None:
            g = tuple(float(e) for e in self.eps_grid)
            if not g or any(e <= 0 for e in g):
                raise ConfigError("eps grid must be a non-empty list of positive numbers")
            object.__setattr__(self, "eps_grid", g)
        if self.workers < 1:
            raise ConfigError("workers must be at least 1")

    def to_dict(self) -> dict:
        d = {f.name: getattr(self, f.name) for f in fields(self)}
        d["potential"] = self.potential.to_dict()
        d["remainder"] = self.remainder.spec()
        d["eps_grid"] = list(self.eps_grid) if self.eps_grid is not None else None
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "RunConfig":
        d = dict(d)
        unknown = set(d) - {f.name for f in fields(cls)}
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        if "potential" not in d:
            raise ConfigError("config needs a 'potential' entry")
        pot = dict(d["potential"])
        for k in ("c", "omega", "delta"):
            if k in pot:
                pot[k] = parse_number(pot[k])
        d["potential"] = PotentialParams.from_dict(pot)
        if "remainder" in d:
            d["remainder"] = SequenceFamily.from_dict(d["remainder"])
        if d.get("eps_grid") is not None:
            d["eps_grid"] = tuple(d["eps_grid"])
        return cls(**d)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "RunConfig":
        return cls.from_dict(json.loads(text))


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="wvn-spectral",
        description="Spectral density and pseudogap exponents for Jacobi matrices "
                    "with a Wigner-von Neumann diagonal c sin(2 omega n + delta)/n + q_n.",
    )
    # every default is None so that config-file values survive unless overridden
    ap.add_argument("--config", help="JSON config file (flags override its entries)")
    ap.add_argument("--command", choices=COMMANDS)
    ap.add_argument("--c", help="amplitude c")
    ap.add_argument("--omega", help="frequency omega, e.g. 0.785 or pi/4")
    ap.add_argument("--delta", help="phase delta")
    ap.add_argument("--q", help="summable tail: zero, geometric:R[:S], power:P[:S], list:V1,V2,...")
    ap.add_argument("--lambda-min", dest="lambda_min", type=float)
    ap.add_argument("--lambda-max", dest="lambda_max", type=float)
    ap.add_argument("--points", type=int)
    ap.add_argument("--N", dest="N", type=int, help="run length override")
    ap.add_argument("--tol", type=float)
    ap.add_argument("--eps-grid", dest="eps_grid",
                    help="comma-separated eps values (default 0.2*2^-k, k=0..7)")
    ap.add_argument("--beta", type=float, help="model command: beta (default from c, omega)")
    ap.add_argument("--remainder", help="model command: remainder profile, same syntax as --q")
    ap.add_argument("--workers", type=int)
    ap.add_argument("--out", help="output file (default stdout)")
    ap.add_argument("--format", choices=FORMATS)
    return ap


def config_from_args(argv=None) -> RunConfig:
    args = build_parser().parse_args(argv)
    base: dict = {}
    if args.config:
        with open(args.config, encoding="utf-8") as fh:
            base = RunConfig.from_json(fh.read()).to_dict()
    pot = dict(base.get("potential", {"c": 0.0, "omega": math.pi / 4, "delta": 0.0, "q": "zero"}))
    for k in ("c", "omega", "delta"):
        v = getattr(args, k)
        if v is not None:
            pot[k] = parse_number(v)
    if args.q is not None:
        pot["q"] = args.q
    base["potential"] = pot
    for k in ("command", "lambda_min", "lambda_max", "points", "N", "tol", "beta",
              "workers", "out", "format"):
        v = getattr(args, k)
        if v is not None:
            base[k] = v
    if args.eps_grid is not None:
        base["eps_grid"] = [parse_number(x) for x in args.eps_grid.split(",") if x.strip()]
    if args.remainder is not None:
        base["remainder"] = args.remainder
    try:
        return RunConfig.from_dict(base)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


# -- formatting ------------------------------------------------------------

def fmt(x) -> str:
    """12 significant digits; ``nan`` and ``inf`` spelled out."""
    if isinstance(x, str):
        return x
    if isinstance(x, (bool, np.bool_)):
        return str(bool(x)).lower()
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return f"{x:.12g}"


def _clean(obj):
    """JSON-safe copy with floats rounded to 12 significant digits."""
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return float(f"{x:.12g}") if math.isfinite(x) else fmt(x)
    return obj


def render(result: dict, format: str) -> str:
    if format == "json":
        return json.dumps(_clean(result), indent=2, sort_keys=True) + "\n"
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    if "rows" in result:
        w.writerow(GRID_COLUMNS)
        for r in result["rows"]:
            w.writerow([fmt(r[c]) for c in GRID_COLUMNS])
    else:
        w.writerow(("quantity", "value"))
        for k, v in _flatten(result):
            w.writerow((k, fmt(v)))
    return buf.getvalue()


def _flatten(d, prefix=""):
    for k, v in d.items():
        key = f"{prefix}{k}"
        if isinstance(v, dict):
            yield from _flatten(v, key + ".")
        elif isinstance(v, (list, tuple)):
            for i, x in enumerate(v):
                if isinstance(x, dict):
                    yield from _flatten(x, f"{key}.{i}.")
                else:
                    yield f"{key}.{i}", x
        else:
            yield key, v


# -- pipelines -------------------------------------------------------------

def _row(lam, phi, rho, err, flags):
    return {"lambda": lam, "phi": phi, "rho_prime": rho, "error_estimate": err, "flags": flags}


def run_scan(cfg: RunConfig) -> tuple[dict, list[str]]:
    if not cfg.potential.is_free:
        cfg.potential.require_resonance()
    scan = density_scan(cfg.potential, cfg.lambda_min, cfg.lambda_max, cfg.points,
                        N=cfg.N, tol=cfg.tol, workers=cfg.workers)
    rows = [_row(g.lam, g.phi, g.rho_prime, g.error_estimate, g.flags) for g in scan.grid]
    summary = [f"scan: {len(rows)} points, {scan.n_flagged} flagged"]
    return {"potential": cfg.potential.to_dict(), "rows": rows}, summary


def run_pseudogap(cfg: RunConfig) -> tuple[dict, list[str]]:
    p = cfg.potential
    p.require_resonance()
    eps = np.asarray(cfg.eps_grid) if cfg.eps_grid is not None else default_eps_grid()
    rows, fits, summary = [], [], []
    for cp in critical_points(p):
        cls = classify_critical_point(p, cp)
        if cls.kind != "regular":
            summary.append(f"nu = {cp.nu:.6f}: {cls.kind}, no power law fitted")
            fits.append({"nu": cp.nu, "critical": cp.side, "classification": cls.kind})
            continue
        for side in ("left", "right"):
            f = pseudogap_fit(p, cp, side, eps, tol=cfg.tol, check_regular=False,
                              workers=cfg.workers)
            for e, lam, rho, err in f.samples:
                rows.append(_row(lam, math.acos(0.5 * lam), rho, err, f"{cp.side}:{side}"))
            fits.append({
                "nu": cp.nu, "critical": cp.side, "side": side,
                "predicted_exponent": cp.predicted_exponent, "fitted_exponent": f.exponent,
                "log_prefactor": f.log_prefactor, "residual_rms": f.residual_rms,
                "points_used": f.points_used,
                "excluded": [{"eps": e, "reason": why} for e, why in f.excluded],
            })
            summary.append(
                f"nu = {cp.nu:+.6f} ({side}): predicted {cp.predicted_exponent:.5f}, "
                f"fitted {f.exponent:.5f} ({100 * (f.exponent / cp.predicted_exponent - 1):+.1f}%)"
            )
    rows.sort(key=lambda r: r["lambda"])
    return {"potential": p.to_dict(), "fits": fits, "rows": rows}, summary


def run_gev(cfg: RunConfig) -> tuple[dict, list[str]]:
    p = cfg.potential
    p.require_resonance()
    N = cfg.N or 10**6
    out, summary = [], []
    for cp in critical_points(p):
        g = gev_exponent_fit(p, cp, N)
        out.append({
            "nu": cp.nu, "critical": cp.side, "predicted": cp.predicted_gev_exponent,
            "exponent_plus": g.exponent_plus, "exponent_minus": g.exponent_minus,
            "residual": max(g.residual_plus, g.residual_minus), "correlation": g.correlation,
            "warnings": list(g.warnings),
        })
        summary.append(
            f"nu = {cp.nu:+.6f}: predicted +-{cp.predicted_gev_exponent:.5f}, fitted "
            f"{g.exponent_plus:+.5f} / {g.exponent_minus:+.5f}, correlation {g.correlation:.4f}"
        )
    return {"potential": p.to_dict(), "N": N, "critical_points": out}, summary


def run_classify(cfg: RunConfig) -> tuple[dict, list[str]]:
    p = cfg.potential
    p.require_resonance()
    N = cfg.N or 10**5
    out, summary = [], []
    for cp in critical_points(p):
        c = classify_critical_point(p, cp, N)
        out.append({"nu": cp.nu, "critical": cp.side, "kind": c.kind,
                    "scaled_limit": c.scaled_limit, "borderline": c.borderline})
        summary.append(f"nu = {cp.nu:+.6f}: {c.kind} (scaled limit {c.scaled_limit:.3g})")
    return {"potential": p.to_dict(), "N": N, "critical_points": out}, summary


def run_model(cfg: RunConfig) -> tuple[dict, list[str]]:
    beta = cfg.beta
    if beta is None:
        cfg.potential.require_resonance()
        beta = cfg.potential.beta
    g = np.array([[0.3, 0.1j], [-0.2, 0.4]]) if not cfg.remainder.is_zero else np.zeros((2, 2))
    m = ModelParams(beta, 0.0, cfg.remainder, g)
    N = cfg.N or 10**5
    phi0 = product_phi0(m, N)
    _, k = right_singular_vectors2(phi0.matrix)
    eps = np.asarray(cfg.eps_grid) if cfg.eps_grid is not None else default_eps_grid()
    res = {"beta": beta, "N": N, "remainder": cfg.remainder.spec(),
           "phi0_rank_one_defect": rank_one_defect(phi0.matrix),
           "phi0_convergence": phi0.convergence_estimate}
    if cfg.remainder.is_zero:
        res["phi0_11_minus_gamma_oracle"] = abs(phi0.matrix[0, 0] - 1.0 / gamma(1.0 + beta))
    summary = [f"model beta = {beta:.5f}: rank-one defect of Phi_0 {res['phi0_rank_one_defect']:.3g}"]
    for side in ("plus", "minus"):
        pm = product_phi_pm(m, side, eps)
        s1 = float(np.linalg.svd(pm.matrix, compute_uv=False)[0])
        rel = float(np.linalg.norm(pm.matrix @ k)) / s1
        res[f"phi_{side}_kernel_residual"] = rel
        res[f"phi_{side}_warnings"] = list(pm.warnings)
        summary.append(f"Phi_{side} on ker Phi_0: relative {rel:.3g}")
    return res, summary


PIPELINES = {
    "scan": run_scan,
    "pseudogap": run_pseudogap,
    "gev": run_gev,
    "classify": run_classify,
    "model": run_model,
}


def run(cfg: RunConfig, stdout=None, stderr=None) -> int:
    """Execute ``cfg``; returns the process exit status."""
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    try:
        result, summary = PIPELINES[cfg.command](cfg)
    except (ParameterError, DomainError, ConfigError) as exc:
        print(f"error: {exc}", file=stderr)
        return 2
    except ConvergenceError as exc:
        print(f"error: {exc}", file=stderr)
        return 1
    text = render(result, cfg.format)
    if cfg.out:
        with open(cfg.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        stdout.write(text)
    for line in summary:
        print(line, file=stderr)
    flagged = sum(1 for r in result.get("rows", ()) if r["flags"] in FAILURE_FLAGS)
    if flagged:
        print(f"warning: {flagged} grid point(s) flagged", file=stderr)
    return 0


def main(argv=None) -> int:
    try:
        cfg = config_from_args(argv)
    except (ConfigError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())

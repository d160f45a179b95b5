"""Batch front door: ``wavelab <experiment> --config <path> [--out <dir>]``.

Configuration files are flat ``key = value`` lines with ``#`` comments.
Every experiment writes CSV tables (17 significant digits, fixed headers)
and a ``summary.json``; failures write ``error.json`` and exit nonzero.
"""
from __future__ import annotations

import argparse
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable

import numpy as np

from . import kdv1d, kernels, kp2d, reconstruct2d
from .models import FluidModel, K_KINDS, ModelError, make_polynomial_model
from .spectral import Field2D, GridSpec2D, ifft2_real, read_field, write_field

EXPERIMENTS = ("ek1d-solve", "ek1d-ladder", "ek1d-gamma0", "kp-ground-state", "kp-scale-check",
               "kernels-norms", "kernels-lizorkin", "kernels-invert", "ek2d-reconstruct")

DEFAULT_LADDERS = {
    "ek1d-ladder": (0.4, 0.2, 0.1, 0.05),
    "ek1d-gamma0": (0.4, 0.2, 0.1, 0.05),
    "kernels-norms": (0.4, 0.2, 0.1, 0.05),
    "kernels-lizorkin": (0.4, 0.2, 0.1),
    "ek2d-reconstruct": (0.2, 0.1, 0.05),
}


class ConfigError(ValueError):
    def __init__(self, errors: list[str]):
        super().__init__("; ".join(errors))
        self.errors = errors


# value parsers: each returns the typed value or raises ValueError

def _float(text: str) -> float:
    v = float(text)
    if not math.isfinite(v):
        raise ValueError("must be finite")
    return v


def _int(text: str) -> int:
    return int(text, 10)


def _float_list(text: str) -> tuple[float, ...]:
    parts = [p.strip() for p in text.split(",") if p.strip()]
    if not parts:
        raise ValueError("expected a comma-separated list")
    return tuple(_float(p) for p in parts)


def _choice(options):
    def parse(text):
        if text not in options:
            raise ValueError(f"expected one of {', '.join(options)}")
        return text
    return parse


def _positive(v):
    return None if v > 0 else "must be positive"


def _eps_range(v):
    return None if 0 < v < 1 else "must lie in (0, 1)"


def _ladder(v):
    return None if all(0 < e < 1 for e in v) else "every entry must lie in (0, 1)"


def _pow2(v):
    return None if v >= 64 and v & (v - 1) == 0 else "must be a power of two >= 64"


def _sign(v):
    return None if v in (1, -1) else "must be +1 or -1"


def _sigmas(v):
    return None if all(s > 0 for s in v) else "every sigma must be positive"


def _s_values(v):
    return None if all(0 <= s < 1 for s in v) else "every s must lie in [0, 1)"


def _nonneg_list(v):
    return None if all(e >= 0 for e in v) else "every entry must be >= 0"


def _nonneg(v):
    return None if v >= 0 else "must be >= 0"


# key -> (parser, default, check)
SCHEMA: dict[str, tuple[Callable, Any, Callable | None]] = {
    "experiment": (_choice(EXPERIMENTS), None, None),
    "model.a3": (_float, 0.0, None),
    "model.a4": (_float, 0.0, None),
    "model.k_kind": (_choice(K_KINDS), "constant", None),
    "model.k0": (_float, 1.0, _positive),
    "eps": (_float, 0.1, _eps_range),
    "eps_ladder": (_float_list, None, _ladder),
    "k_max": (_int, 2, lambda v: None if 0 <= v <= 4 else "must lie in 0..4"),
    "sign": (_int, 1, _sign),
    "tail_tol": (_float, kdv1d.DEFAULT_TAIL_TOL, _positive),
    "step_tol": (_float, kdv1d.DEFAULT_STEP_TOL, _positive),
    "dy": (_float, kdv1d.DEFAULT_DY, _positive),
    "x_max": (_float, None, _positive),
    "grid.L1": (_float, 64.0, _positive),
    "grid.L2": (_float, 64.0, _positive),
    "grid.N1": (_int, 512, _pow2),
    "grid.N2": (_int, 512, _pow2),
    "tol": (_float, kp2d.DEFAULT_TOL, _positive),
    "max_iter": (_int, kp2d.DEFAULT_MAX_ITER, _positive),
    "stab_exponent": (_float, kp2d.DEFAULT_STAB_EXPONENT, _positive),
    "sigma": (_float_list, (0.5, 2.0), _sigmas),
    "s_values": (_float_list, (0.0, 0.25), _s_values),
    "invert_eps": (_float_list, (0.0, 0.3), _nonneg_list),
    "seed": (_int, 0, _nonneg),
    "noise_samples": (_int, 4, _positive),
    "field": (str, None, None),
    "out": (str, "out", None),
}


@dataclass
class ExperimentConfig:
    experiment: str | None
    values: dict = field(default_factory=dict)

    def __getitem__(self, key):
        return self.values[key]

    @property
    def model(self) -> FluidModel:
        v = self.values
        return make_polynomial_model(v["model.a3"], v["model.a4"], v["model.k_kind"], v["model.k0"])

    @property
    def eps_ladder(self) -> tuple[float, ...]:
        ladder = self.values["eps_ladder"]
        if ladder is None:
            ladder = DEFAULT_LADDERS.get(self.experiment, (0.4, 0.2, 0.1, 0.05))
        return tuple(sorted(ladder, reverse=True))

    @property
    def grid(self) -> GridSpec2D:
        v = self.values
        return GridSpec2D(v["grid.L1"], v["grid.L2"], v["grid.N1"], v["grid.N2"])


def parse_config(text: str) -> ExperimentConfig:
    """Parse and validate a flat config; raises ``ConfigError`` listing every problem."""
    errors: list[str] = []
    values = {k: spec[1] for k, spec in SCHEMA.items()}
    seen: dict[str, int] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            errors.append(f"line {lineno}: expected 'key = value', got {raw.strip()!r}")
            continue
        key, val = (p.strip() for p in line.split("=", 1))
        if key not in SCHEMA:
            errors.append(f"line {lineno}: unknown key {key!r}")
            continue
        if key in seen:
            errors.append(f"line {lineno}: duplicate key {key!r} (first set on line {seen[key]})")
            continue
        seen[key] = lineno
        parser, _, check = SCHEMA[key]
        try:
            parsed = parser(val)
        except ValueError as exc:
            errors.append(f"line {lineno}: {key}: cannot parse {val!r} ({exc})")
            continue
        problem = check(parsed) if check else None
        if problem:
            errors.append(f"line {lineno}: {key} = {val}: {problem}")
            continue
        values[key] = parsed
    if not errors:
        try:
            make_polynomial_model(values["model.a3"], values["model.a4"], values["model.k_kind"],
                                  values["model.k0"])
        except ModelError as exc:
            errors.append(f"model: {exc}")
    if errors:
        raise ConfigError(errors)
    return ExperimentConfig(experiment=values["experiment"], values=values)


# output helpers

def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return "%.17g" % float(v)


def write_csv(path: Path, header: list[str], rows) -> Path:
    lines = [",".join(header)]
    lines += [",".join(_fmt(v) for v in row) for row in rows]
    path.write_text("\n".join(lines) + "\n")
    return path


def write_json(path: Path, data: dict) -> Path:
    def clean(v):
        if isinstance(v, dict):
            return {str(k): clean(x) for k, x in v.items()}
        if isinstance(v, (list, tuple)):
            return [clean(x) for x in v]
        if isinstance(v, (np.floating, float)):
            return float(v)
        if isinstance(v, (np.integer,)):
            return int(v)
        if isinstance(v, np.bool_):
            return bool(v)
        return v
    path.write_text(json.dumps(clean(data), indent=2, sort_keys=True) + "\n")
    return path


def worker_count() -> int:
    raw = os.environ.get("WAVELAB_THREADS")
    try:
        return max(1, int(raw)) if raw else (os.cpu_count() or 1)
    except ValueError:
        return os.cpu_count() or 1


def _map(fn, items):
    """Ordered parallel map; result order never depends on scheduling."""
    items = list(items)
    n = min(worker_count(), len(items)) or 1
    if n == 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, items))


# experiments

def _profile_opts(cfg):
    v = cfg.values
    return {"tail_tol": v["tail_tol"], "step_tol": v["step_tol"], "dy": v["dy"], "x_max": v["x_max"]}


def run_ek1d_solve(cfg, out: Path) -> dict:
    model = cfg.model
    params = kdv1d.WaveParams1D(cfg["eps"])
    prof = kdv1d.integrate_profile(model, params, sign=cfg["sign"] if model.is_degenerate else None,
                                   **_profile_opts(cfg))
    write_csv(out / "profile.csv", ["x", "rho", "rho_prime", "u"],
              zip(prof.x, prof.rho, prof.rho_prime, prof.u))
    rho, rp = kdv1d.phase_portrait(prof)
    write_csv(out / "phase.csv", ["rho", "rho_prime"], zip(rho, rp))
    resc = kdv1d.rescale_to_r(prof)
    summary = {"eps": params.eps, "c": params.c, "rho_m": prof.rho_m, "r0": float(resc.r[0]),
               "x_end": prof.x_end, "max_conservation_defect": prof.info["max_conservation_defect"],
               "samples": int(prof.x.size)}
    write_json(out / "summary.json", summary)
    return summary


def _ladder_rows(report):
    rows = []
    for row in report.rows:
        rows.append((row.eps, row.k, row.sup_error, report.monotone[row.k]))
    return rows


def _run_ladder(cfg, sign):
    model = cfg.model
    ladder = cfg.eps_ladder
    opts = _profile_opts(cfg)
    # one rung per task, then reassemble in ladder order
    parts = _map(lambda e: kdv1d.convergence_report(model, [e], cfg["k_max"], sign=sign, **opts), ladder)
    rows = [r for p in parts for r in p.rows]
    monotone = {k: kdv1d.strictly_decreasing([r.sup_error for r in rows if r.k == k])
                for k in range(cfg["k_max"] + 1)}
    r0 = {e: p.r0[e] for e, p in zip(ladder, parts)}
    return kdv1d.ConvergenceReport(kind=parts[0].kind, rows=rows, monotone=monotone, r0=r0)


def run_ek1d_ladder(cfg, out: Path) -> dict:
    if cfg.model.is_degenerate:
        raise ModelError("ek1d-ladder needs Gamma != 0; use ek1d-gamma0")
    rep = _run_ladder(cfg, 1)
    write_csv(out / "ladder.csv", ["eps", "k", "sup_error", "monotone_flag"], _ladder_rows(rep))
    summary = {"kind": rep.kind, "r0": {repr(e): v for e, v in rep.r0.items()},
               "monotone": {str(k): v for k, v in rep.monotone.items()}}
    write_json(out / "summary.json", summary)
    return summary


def run_ek1d_gamma0(cfg, out: Path) -> dict:
    summary = {}
    for sign, tag in ((1, "plus"), (-1, "minus")):
        rep = _run_ladder(cfg, sign)
        write_csv(out / f"ladder_{tag}.csv", ["eps", "k", "sup_error", "monotone_flag"], _ladder_rows(rep))
        summary[tag] = {"kind": rep.kind, "r0": {repr(e): v for e, v in rep.r0.items()},
                        "monotone": {str(k): v for k, v in rep.monotone.items()}}
    write_json(out / "summary.json", summary)
    return summary


def _ground_state(cfg) -> kp2d.GroundState2D:
    if cfg["field"]:
        return kp2d.make_state(read_field(cfg["field"]))
    return kp2d.petviashvili_solve(cfg.grid, tol=cfg["tol"], max_iter=cfg["max_iter"],
                                   stab_exponent=cfg["stab_exponent"])


def run_kp_ground_state(cfg, out: Path) -> dict:
    state = _ground_state(cfg)
    write_field(out / "omega.f64", state.omega)
    summary = state.summary()
    write_json(out / "summary.json", summary)
    write_csv(out / "history.csv", ["iter", "residual"], enumerate(state.history))
    return summary


def run_kp_scale_check(cfg, out: Path) -> dict:
    state = _ground_state(cfg)
    rows = []
    for sigma in cfg["sigma"]:
        rep = kp2d.rescale_sigma(state.omega, sigma)
        exact = kp2d.rescale_sigma_exact(state.omega, sigma)
        ratio = rep.field.l2_norm() ** 2 / state.mu
        rows.append((sigma, ratio, math.sqrt(sigma), abs(ratio / math.sqrt(sigma) - 1.0),
                     rep.tail_fraction, kp2d.sw_residual(rep.field, sigma),
                     kp2d.sw_residual(exact, sigma)))
    header = ["sigma", "mass_ratio", "sqrt_sigma", "rel_error", "tail_fraction",
              "residual_same_grid", "residual_rescaled_grid"]
    write_csv(out / "scale.csv", header, rows)
    summary = {"mu": state.mu, "residual": state.residual,
               "rows": [dict(zip(header, r)) for r in rows]}
    write_json(out / "summary.json", summary)
    return summary


def run_kernels_norms(cfg, out: Path) -> dict:
    ladder = cfg.eps_ladder
    jobs = [(e, ij, s) for ij in kernels.CONVOLUTION_PAIRS for s in cfg["s_values"] for e in ladder]
    vals = _map(lambda job: kernels.kernel_sobolev_norm(kernels.KernelSpec(*job[1], job[0]), job[2]), jobs)
    norm = {job: v for job, v in zip(jobs, vals)}
    write_csv(out / "norms.csv", ["eps", "i", "j", "s", "norm"],
              [(e, ij[0], ij[1], s, v) for (e, ij, s), v in norm.items()])
    slopes, combos = {}, {}
    for ij in kernels.CONVOLUTION_PAIRS:
        for s in cfg["s_values"]:
            slopes[f"{ij[0]}{ij[1]}_s{s!r}"] = kernels.fit_loglog_slope(
                ladder, [norm[(e, ij, s)] for e in ladder])
    for s in cfg["s_values"]:
        combos[repr(s)] = [norm[(e, (2, 0), s)] + e * norm[(e, (1, 1), s)] + e**2 * norm[(e, (0, 2), s)]
                           for e in ladder]
    write_csv(out / "combination.csv", ["eps", "s", "combination"],
              [(e, s, combos[repr(s)][n]) for s in cfg["s_values"] for n, e in enumerate(ladder)])
    probe = kernels.operator_norm_probe(kernels.CONVOLUTION_PAIRS, ladder, cfg.grid, cfg["seed"],
                                        cfg["noise_samples"])
    write_csv(out / "noise_probe.csv", ["eps", "i", "j", "ratio"],
              [(e, ij[0], ij[1], probe[ij][n]) for ij in probe for n, e in enumerate(ladder)])
    summary = {"slopes": slopes, "combination": combos,
               "noise_slopes": {f"{i}{j}": kernels.fit_loglog_slope(ladder, v) for (i, j), v in probe.items()}}
    write_json(out / "summary.json", summary)
    return summary


def run_kernels_lizorkin(cfg, out: Path) -> dict:
    jobs = [(e, ij) for ij in kernels.CONVOLUTION_PAIRS for e in cfg.eps_ladder]
    vals = _map(lambda job: kernels.lizorkin_constant(kernels.KernelSpec(*job[1], job[0]))[0], jobs)
    write_csv(out / "lizorkin.csv", ["eps", "i", "j", "M"],
              [(e, ij[0], ij[1], m) for (e, ij), m in zip(jobs, vals)])
    summary = {f"{ij[0]}{ij[1]}_eps{e!r}": m for (e, ij), m in zip(jobs, vals)}
    write_json(out / "summary.json", summary)
    return summary


def inversion_test_fields(grid: GridSpec2D, seed: int) -> dict:
    """Gaussian bump and a random band-limited field for the inversion check."""
    X1, X2 = grid.mesh()
    gauss = np.exp(-(X1**2 / (0.02 * grid.L1**2) + X2**2 / (0.04 * grid.L2**2)))
    rng = np.random.default_rng(seed)
    xi1, xi2 = grid.wavenumbers()
    band = (np.abs(xi1) <= 0.25 * np.max(xi1)) & (np.abs(xi2) <= 0.25 * np.max(xi2))
    coef = (rng.standard_normal(grid.shape) + 1j * rng.standard_normal(grid.shape)) * band
    return {"gaussian": Field2D(gauss, grid), "bandlimited": Field2D(ifft2_real(coef), grid)}


def run_kernels_invert(cfg, out: Path) -> dict:
    rows = []
    worst = 0.0
    for name, fld in inversion_test_fields(cfg.grid, cfg["seed"]).items():
        for eps in cfg["invert_eps"]:
            m, errs = kernels.inversion_identity_check(fld, eps)
            worst = max(worst, m)
            rows += [(eps, name, i, j, errs[(i, j)]) for (i, j) in kernels.CONVOLUTION_PAIRS]
    lines = ["eps,field,i,j,rel_error"] + [f"{_fmt(e)},{n},{i},{j},{_fmt(v)}" for e, n, i, j, v in rows]
    (out / "invert.csv").write_text("\n".join(lines) + "\n")
    summary = {"max_rel_error": worst}
    write_json(out / "summary.json", summary)
    return summary


def run_ek2d_reconstruct(cfg, out: Path) -> dict:
    model = cfg.model
    model.gamma  # fail before the (expensive) ground state on the Gamma = 0 branch
    state = _ground_state(cfg)

    def rung(eps):
        wave = reconstruct2d.build_wave_from_lump(state, eps, model)
        d = reconstruct2d.pohozaev_residuals(wave)
        gap = reconstruct2d.energy_gap_ratio(wave)
        conv = reconstruct2d.convolution_identity_residual(wave)
        return (eps, d.E, d.P, gap, state.e_kp, d.D1, d.D2, d.D3, conv)

    rows = _map(rung, cfg.eps_ladder)
    header = ["eps", "E", "P", "gap_over_eps3", "E_KP", "D1", "D2", "D3", "conv_residual"]
    write_csv(out / "ladder.csv", header, rows)
    summary = {"mu": state.mu, "e_kp": state.e_kp, "residual": state.residual,
               "rows": [dict(zip(header, r)) for r in rows]}
    write_json(out / "summary.json", summary)
    return summary


RUNNERS = {
    "ek1d-solve": run_ek1d_solve,
    "ek1d-ladder": run_ek1d_ladder,
    "ek1d-gamma0": run_ek1d_gamma0,
    "kp-ground-state": run_kp_ground_state,
    "kp-scale-check": run_kp_scale_check,
    "kernels-norms": run_kernels_norms,
    "kernels-lizorkin": run_kernels_lizorkin,
    "kernels-invert": run_kernels_invert,
    "ek2d-reconstruct": run_ek2d_reconstruct,
}


def run(cfg: ExperimentConfig, out: str | Path | None = None) -> int:
    """Run one experiment; returns the process exit status."""
    out = Path(out if out is not None else cfg["out"])
    out.mkdir(parents=True, exist_ok=True)
    err_path = out / "error.json"
    if err_path.exists():
        err_path.unlink()
    try:
        RUNNERS[cfg.experiment](cfg, out)
    except Exception as exc:  # surfaced as a machine-readable record
        write_json(err_path, {"experiment": cfg.experiment, "error": type(exc).__name__,
                              "message": str(exc)})
        return 1
    return 0


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(prog="wavelab", description=__doc__.splitlines()[0])
    ap.add_argument("experiment", choices=EXPERIMENTS)
    ap.add_argument("--config", required=True, help="flat key = value file")
    ap.add_argument("--out", default=None, help="output directory (overrides 'out' in the config)")
    args = ap.parse_args(argv)

    out = Path(args.out) if args.out else None
    try:
        text = Path(args.config).read_text(encoding="utf-8")
        cfg = parse_config(text)
        if cfg.experiment is not None and cfg.experiment != args.experiment:
            raise ConfigError([f"config names experiment {cfg.experiment!r}, "
                               f"command line asks for {args.experiment!r}"])
    except (OSError, ConfigError) as exc:
        errors = exc.errors if isinstance(exc, ConfigError) else [str(exc)]
        target = out or Path("out")
        target.mkdir(parents=True, exist_ok=True)
        write_json(target / "error.json", {"experiment": args.experiment, "error": "ConfigError",
                                           "errors": errors})
        for e in errors:
            print(f"wavelab: {e}", file=sys.stderr)
        return 2
    cfg.experiment = args.experiment
    status = run(cfg, out)
    if status:
        print(f"wavelab: {args.experiment} failed, see {(out or Path(cfg['out'])) / 'error.json'}",
              file=sys.stderr)
    return status


if __name__ == "__main__":
    sys.exit(main())

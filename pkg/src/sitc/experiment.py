"""Synthetic experiment harness: configure regimes, run the full pipeline
over (n, seed) grids, and emit metrics tables and a plot.

Regimes:
  orthogonal_bounded_means  orthogonal CP, factor means bounded away from
                            zero, uniform weights; the setting the method's
                            guarantees are stated for.
  orthogonal_zero_means     orthogonal CP with zero-mean factors; uniform
                            weights would lose the signal, so weighted
                            averages built from random factor combinations
                            are used instead.
  general_tucker            core tensor not superdiagonal.
  xor_hardness              planted +/-1 parity instance with flip noise;
                            bias 0 is the hard symmetric case, positive bias
                            restores usable side information.
"""

from __future__ import annotations

import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .collapse import collapse, empirical_density
from .distance import choose_depth, distance_matrix
from .estimator import EstimatorConfig, error_metrics, estimate
from .model import (
    build_general_tucker_model,
    build_orthogonal_cp_model,
    make_weight_vectors,
    make_xor_hard_instance,
    sample_observations,
    split_samples,
)
from .oracle import exact_expected_collapse, exact_hat_lambda, usvt_baseline

__all__ = [
    "REGIMES",
    "METRIC_COLUMNS",
    "ExperimentConfig",
    "default_acceptance_config",
    "run_single",
    "run_experiment",
    "emit_report",
]

REGIMES = (
    "orthogonal_bounded_means",
    "orthogonal_zero_means",
    "general_tucker",
    "xor_hardness",
)

METRIC_COLUMNS = ("regime", "n", "seed", "kappa", "max_err", "mse",
                  "fallback_frac", "ptilde", "cond", "usvt_err", "wall_ms")


@dataclass(frozen=True)
class ExperimentConfig:
    regime: str = "orthogonal_bounded_means"
    t: int = 3
    n_list: tuple[int, ...] = (40, 80, 160)
    r: int = 1
    kappa: float = 0.6
    noise_amplitude: float = 0.1
    weight_kind: str = "uniform"
    eta_rule: str = "paper_sweep"          # paper_sweep | paper | gap | manual
    eta_sweep: tuple[float, ...] = (0.5, 1.0, 2.0, 4.0)
    eta_c: float = 1.0
    eta_value: float | None = None
    seeds: tuple[int, ...] = (0, 1, 2, 3, 4)
    bias: float = 0.15
    mean_level: float | None = None
    usvt: bool = False
    output_dir: str = "out"
    timing: str = "real"                   # real | zero (zero for byte-stable tables)

    def validate(self) -> list[str]:
        """Every violated field, not just the first."""
        problems = []
        if self.regime not in REGIMES:
            problems.append(f"regime must be one of {REGIMES}, got {self.regime!r}")
        if self.t < 3:
            problems.append(f"t must be >= 3, got {self.t}")
        if not self.n_list or list(self.n_list) != sorted(set(self.n_list)):
            problems.append(f"n_list must be nonempty strictly ascending, got {self.n_list}")
        if self.n_list and min(self.n_list) < 4:
            problems.append("n values must be >= 4")
        if self.r < 1:
            problems.append(f"r must be >= 1, got {self.r}")
        if not 0.0 < self.kappa:
            problems.append(f"kappa must be positive, got {self.kappa}")
        if not 0.0 <= self.noise_amplitude < 1.0:
            problems.append(f"noise_amplitude must lie in [0, 1), got {self.noise_amplitude}")
        if self.weight_kind not in ("uniform", "latent_combination"):
            problems.append(f"weight_kind must be uniform or latent_combination, got {self.weight_kind!r}")
        if self.eta_rule not in ("paper_sweep", "paper", "gap", "manual"):
            problems.append(f"unknown eta_rule {self.eta_rule!r}")
        if self.eta_rule == "manual" and (self.eta_value is None or self.eta_value <= 0):
            problems.append("manual eta_rule needs a positive eta_value")
        if self.eta_rule == "paper_sweep" and not self.eta_sweep:
            problems.append("paper_sweep needs a nonempty eta_sweep")
        if not self.seeds:
            problems.append("seeds must be nonempty")
        if not 0.0 <= self.bias <= 0.5:
            problems.append(f"bias must lie in [0, 0.5], got {self.bias}")
        if self.timing not in ("real", "zero"):
            problems.append(f"timing must be real or zero, got {self.timing!r}")
        return problems


def default_acceptance_config(output_dir: str = "out") -> ExperimentConfig:
    """The configuration the acceptance suite pins: t=3, r=1, cosine factors,
    kappa=0.6, uniform weights, n in (40, 80, 160), five seeds, bandwidth
    sweep over c in (0.5, 1, 2, 4)."""
    return ExperimentConfig(output_dir=output_dir)


def _build_instance(cfg: ExperimentConfig, n: int, seed: int):
    shape = (n,) * cfg.t
    if cfg.regime == "orthogonal_bounded_means":
        model = build_orthogonal_cp_model(
            shape, cfg.r, [1.0] * cfg.r, "cosine", seed=seed,
            noise_headroom=cfg.noise_amplitude, mean_level=cfg.mean_level)
        weights = make_weight_vectors(model, cfg.weight_kind, seed=seed)
        obs = sample_observations(model, _density(cfg, n), cfg.noise_amplitude, seed=seed)
    elif cfg.regime == "orthogonal_zero_means":
        model = build_orthogonal_cp_model(
            shape, cfg.r, [1.0] * cfg.r, "cosine_zero_mean", seed=seed,
            noise_headroom=cfg.noise_amplitude)
        weights = make_weight_vectors(model, "latent_combination", seed=seed)
        obs = sample_observations(model, _density(cfg, n), cfg.noise_amplitude, seed=seed)
    elif cfg.regime == "general_tucker":
        model = build_general_tucker_model(
            shape, cfg.r, seed=seed, noise_headroom=cfg.noise_amplitude,
            mean_level=cfg.mean_level)
        weights = make_weight_vectors(model, cfg.weight_kind, seed=seed)
        obs = sample_observations(model, _density(cfg, n), cfg.noise_amplitude, seed=seed)
    else:  # xor_hardness
        if cfg.t != 3:
            raise ValueError("the parity instance is 3-order only")
        model, factory = make_xor_hard_instance(n, cfg.bias, seed=seed)
        weights = make_weight_vectors(model, "uniform")
        obs = factory(_density(cfg, n), seed)
    return model, weights, obs


def _density(cfg: ExperimentConfig, n: int) -> float:
    return min(1.0, float(n) ** (cfg.kappa - (cfg.t - 1)))


def _estimator_configs(cfg: ExperimentConfig):
    if cfg.eta_rule == "paper_sweep":
        return [EstimatorConfig(eta_rule="paper", c=c) for c in cfg.eta_sweep]
    if cfg.eta_rule == "paper":
        return [EstimatorConfig(eta_rule="paper", c=cfg.eta_c)]
    if cfg.eta_rule == "gap":
        return [EstimatorConfig(eta_rule="gap")]
    return [EstimatorConfig(eta_rule="manual", eta=cfg.eta_value)]


def run_single(cfg: ExperimentConfig, n: int, seed: int) -> dict:
    """One (n, seed) cell: generate, split, collapse per mode, estimate
    distances, reconstruct, measure."""
    t0 = time.perf_counter()
    t = cfg.t
    p = _density(cfg, n)
    model, weights, obs = _build_instance(cfg, n, seed)
    o1, o2, o3 = split_samples(obs, seed)
    s = choose_depth(n, p, t)

    distances = []
    conds = []
    ptilde_emp = float("nan")
    first_cm = None
    for y in range(t):
        z = (y + 1) % t
        cm = collapse(o1, y, z, weights)
        if y == 0:
            ptilde_emp = empirical_density(cm)
            first_cm = cm
        distances.append(distance_matrix(cm, o2, weights, s))
        conds.append(exact_hat_lambda(model, weights, y, z).condition_number)

    best = None
    for econf in _estimator_configs(cfg):
        est = estimate(o3, distances, econf, kappa=cfg.kappa)
        max_err, mse = error_metrics(est, model)
        frac = float(est.fallback_mask.mean())
        if best is None or max_err < best[0]:
            best = (max_err, mse, frac)
    max_err, mse, fallback_frac = best

    usvt_err = None
    if cfg.usvt and first_cm is not None and max(first_cm.values.shape) <= 500:
        target = exact_expected_collapse(model, weights, 0, 1)
        recon = usvt_baseline(first_cm)
        denom = float(np.linalg.norm(target))
        usvt_err = float(np.linalg.norm(recon - target)) / denom if denom > 0 else float("nan")

    wall_ms = 0 if cfg.timing == "zero" else int(round((time.perf_counter() - t0) * 1000))
    return {
        "regime": cfg.regime, "n": n, "seed": seed, "kappa": cfg.kappa,
        "max_err": max_err, "mse": mse, "fallback_frac": fallback_frac,
        "ptilde": ptilde_emp, "cond": max(conds), "usvt_err": usvt_err,
        "wall_ms": wall_ms,
    }


def _task(args):
    cfg, n, seed = args
    return run_single(cfg, n, seed)


def run_experiment(cfg: ExperimentConfig, jobs: int = 1) -> list[dict]:
    """All (n, seed) cells, in deterministic order regardless of ``jobs``."""
    problems = cfg.validate()
    if problems:
        raise ValueError("invalid experiment config:\n  " + "\n  ".join(problems))
    tasks = [(cfg, n, seed) for n in cfg.n_list for seed in cfg.seeds]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(_task, tasks))
    else:
        rows = [_task(task) for task in tasks]
    return rows


def _cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def emit_report(rows: list[dict], out_dir) -> dict:
    """Write metrics.csv, aggregate.csv and error_vs_n.svg; returns paths."""
    if not rows:
        raise ValueError("no records to report")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)

    metrics_path = out / "metrics.csv"
    lines = [",".join(METRIC_COLUMNS)]
    for row in rows:
        lines.append(",".join(_cell(row[c]) for c in METRIC_COLUMNS))
    metrics_path.write_text("\n".join(lines) + "\n")

    ns = sorted({row["n"] for row in rows})
    agg_lines = ["regime,n,runs,med_max_err,iqr_max_err,med_mse,iqr_mse,med_fallback_frac"]
    med_errs = []
    for n in ns:
        sub = [row for row in rows if row["n"] == n]
        errs = np.array([row["max_err"] for row in sub])
        mses = np.array([row["mse"] for row in sub])
        fracs = np.array([row["fallback_frac"] for row in sub])
        med = float(np.median(errs))
        med_errs.append(med)
        agg_lines.append(",".join([
            sub[0]["regime"], str(n), str(len(sub)),
            repr(med),
            repr(float(np.percentile(errs, 75) - np.percentile(errs, 25))),
            repr(float(np.median(mses))),
            repr(float(np.percentile(mses, 75) - np.percentile(mses, 25))),
            repr(float(np.median(fracs))),
        ]))
    agg_path = out / "aggregate.csv"
    agg_path.write_text("\n".join(agg_lines) + "\n")

    svg_path = out / "error_vs_n.svg"
    svg_path.write_text(_svg_line_plot(ns, med_errs, "n", "median max error"))
    return {"metrics": metrics_path, "aggregate": agg_path, "plot": svg_path}


def _svg_line_plot(xs, ys, xlabel: str, ylabel: str,
                   width: int = 640, height: int = 440) -> str:
    """Minimal self-contained SVG line plot (one series, labeled points)."""
    ml, mr, mt, mb = 70, 20, 20, 50
    pw, ph = width - ml - mr, height - mt - mb
    x_lo, x_hi = min(xs), max(xs)
    y_hi = max(ys) if max(ys) > 0 else 1.0
    span = (x_hi - x_lo) or 1

    def px(x):
        return ml + pw * (x - x_lo) / span

    def py(y):
        return mt + ph * (1.0 - y / y_hi)

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<line x1="{ml}" y1="{mt + ph}" x2="{ml + pw}" y2="{mt + ph}" stroke="black"/>',
        f'<line x1="{ml}" y1="{mt}" x2="{ml}" y2="{mt + ph}" stroke="black"/>',
        f'<text x="{ml + pw / 2:.1f}" y="{height - 12}" text-anchor="middle" font-size="14">{xlabel}</text>',
        f'<text x="16" y="{mt + ph / 2:.1f}" text-anchor="middle" font-size="14" '
        f'transform="rotate(-90 16 {mt + ph / 2:.1f})">{ylabel}</text>',
    ]
    pts = " ".join(f"{px(x):.2f},{py(y):.2f}" for x, y in zip(xs, ys))
    parts.append(f'<polyline points="{pts}" fill="none" stroke="#1f6fb2" stroke-width="2"/>')
    for x, y in zip(xs, ys):
        parts.append(f'<circle cx="{px(x):.2f}" cy="{py(y):.2f}" r="4" fill="#1f6fb2"/>')
        parts.append(f'<text x="{px(x):.2f}" y="{mt + ph + 18}" text-anchor="middle" '
                     f'font-size="12">{x}</text>')
        parts.append(f'<text x="{px(x) + 6:.2f}" y="{py(y) - 8:.2f}" font-size="11">{y:.3g}</text>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"

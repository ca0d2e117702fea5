"""Command-line interface.

Subcommands:
  run           run an experiment described by a key=value config file
  oracle-check  cross-check the pipeline against the exact oracles
  hardness      planted-parity demonstration (inner products, collapse norms)

Exit codes: 0 success, 1 config error, 2 runtime failure.
"""

from __future__ import annotations

import argparse
import sys
import traceback

import numpy as np

from .collapse import collapse
from .distance import choose_depth, distance_matrix
from .estimator import EstimatorConfig, estimate
from .experiment import ExperimentConfig, emit_report, run_experiment
from .model import (
    build_orthogonal_cp_model,
    make_weight_vectors,
    make_xor_hard_instance,
    sample_observations,
    split_samples,
)
from .oracle import brute_force_nn, exact_expected_collapse, exact_hat_lambda

_LIST_KEYS = {"n_list": int, "seeds": int, "eta_sweep": float}
_SCALAR_KEYS = {
    "regime": str, "t": int, "r": int, "kappa": float,
    "noise_amplitude": float, "weight_kind": str, "eta_rule": str,
    "eta_c": float, "eta_value": float, "bias": float, "mean_level": float,
    "usvt": lambda s: s.strip().lower() in ("1", "true", "yes"),
    "output_dir": str, "timing": str,
}


class ConfigError(ValueError):
    pass


def parse_config(text: str) -> ExperimentConfig:
    """key=value lines; lists are comma separated; # starts a comment."""
    fields = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key=value, got {raw!r}")
        key, val = (part.strip() for part in line.split("=", 1))
        if key in _LIST_KEYS:
            conv = _LIST_KEYS[key]
            try:
                fields[key] = tuple(conv(x.strip()) for x in val.split(",") if x.strip())
            except ValueError as exc:
                raise ConfigError(f"line {lineno}: bad list for {key}: {exc}") from exc
        elif key in _SCALAR_KEYS:
            try:
                fields[key] = _SCALAR_KEYS[key](val)
            except ValueError as exc:
                raise ConfigError(f"line {lineno}: bad value for {key}: {exc}") from exc
        else:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
    try:
        return ExperimentConfig(**fields)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc


def _cmd_run(args) -> int:
    try:
        with open(args.config) as fh:
            cfg = parse_config(fh.read())
    except OSError as exc:
        print(f"cannot read config: {exc}", file=sys.stderr)
        return 1
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    overrides = {}
    if args.out is not None:
        overrides["output_dir"] = args.out
    if args.usvt:
        overrides["usvt"] = True
    if args.no_timing:
        overrides["timing"] = "zero"
    if overrides:
        cfg = ExperimentConfig(**{**cfg.__dict__, **overrides})
    problems = cfg.validate()
    if problems:
        for msg in problems:
            print(f"config error: {msg}", file=sys.stderr)
        return 1
    rows = run_experiment(cfg, jobs=args.jobs)
    paths = emit_report(rows, cfg.output_dir)
    for name, path in paths.items():
        print(f"{name}: {path}")
    return 0


def _cmd_oracle_check(args) -> int:
    """End-to-end agreement checks at desk scale; prints one line each."""
    n, seed = args.n, args.seed
    ok = True

    model = build_orthogonal_cp_model((n, n, n), 1, [1.0], "cosine", seed=seed)
    weights = make_weight_vectors(model, "uniform")
    obs = sample_observations(model, 1.0, 0.0, seed=seed)
    cm = collapse(obs, 0, 1, weights)
    expected = exact_expected_collapse(model, weights, 0, 1)
    dev = float(np.abs(cm.values - expected).max())
    good = dev <= 1e-10
    ok &= good
    print(f"collapse-vs-expected   max dev {dev:.3e}  {'PASS' if good else 'FAIL'}")

    lam = exact_hat_lambda(model, weights, 0, 1)
    recon = lam.U @ np.diag(lam.sigma) @ lam.V.T
    dev = float(np.abs(recon - lam.matrix).max())
    good = dev <= 1e-10
    ok &= good
    print(f"hat-lambda-svd         max dev {dev:.3e}  {'PASS' if good else 'FAIL'}")

    p = 0.7
    obs = sample_observations(model, p, 0.0, seed=seed)
    o1, o2, o3 = split_samples(obs, seed)
    s = choose_depth(n, p, 3)
    dms = []
    for y in range(3):
        z = (y + 1) % 3
        dms.append(distance_matrix(collapse(o1, y, z, weights), o2, weights, s))
    econf = EstimatorConfig(eta_rule="manual", eta=1e9)
    fast = estimate(o3, dms, econf)
    slow = brute_force_nn(o3, dms, econf)
    same = (np.array_equal(fast.values, slow.values, equal_nan=True)
            and np.array_equal(fast.support_counts, slow.support_counts)
            and np.array_equal(fast.fallback_mask, slow.fallback_mask))
    ok &= same
    print(f"estimate-vs-brute      bitwise {'PASS' if same else 'FAIL'}")
    return 0 if ok else 2


def _cmd_hardness(args) -> int:
    """Inner-product decay of the planted-parity instance."""
    n, bias = args.n, args.bias
    means = []
    fro = []
    sig = []
    for seed in range(args.seeds):
        model, _ = make_xor_hard_instance(n, bias, seed=seed)
        theta = model.factor_matrices[0][:, 0]
        means.append(abs(float(theta.mean())))
        weights = make_weight_vectors(model, "uniform")
        lam = exact_hat_lambda(model, weights, 0, 1)
        sig.append(float(lam.sigma[-1]))
        expected = exact_expected_collapse(model, weights, 0, 1)
        fro.append(float(np.linalg.norm(expected)) / n)
    med = float(np.median(means))
    print(f"n={n} bias={bias} seeds={args.seeds}")
    print(f"median |<theta, 1/n 1>|      {med:.5f}   (n^-1/2 = {n ** -0.5:.5f})")
    print(f"median sigma_min(hatLambda)  {float(np.median(sig)):.5f}")
    print(f"median ||E collapse||_F / n  {float(np.median(fro)):.5f}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sitc",
                                     description="side-information tensor completion experiments")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run an experiment from a config file")
    p_run.add_argument("--config", required=True)
    p_run.add_argument("--out", default=None, help="output directory (overrides config)")
    p_run.add_argument("--jobs", type=int, default=1)
    p_run.add_argument("--usvt", action="store_true", help="add the USVT comparison column")
    p_run.add_argument("--no-timing", action="store_true",
                       help="write wall_ms as 0 for byte-stable tables")
    p_run.set_defaults(func=_cmd_run)

    p_orc = sub.add_parser("oracle-check", help="cross-check pipeline vs oracles")
    p_orc.add_argument("--n", type=int, default=8)
    p_orc.add_argument("--seed", type=int, default=0)
    p_orc.set_defaults(func=_cmd_oracle_check)

    p_hard = sub.add_parser("hardness", help="planted parity demonstration")
    p_hard.add_argument("--n", type=int, default=400)
    p_hard.add_argument("--bias", type=float, default=0.0)
    p_hard.add_argument("--seeds", type=int, default=50)
    p_hard.set_defaults(func=_cmd_hardness)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ValueError as exc:
        # config-shaped failures (validation raised deeper down)
        if "config" in str(exc):
            print(str(exc), file=sys.stderr)
            return 1
        traceback.print_exc()
        return 2
    except Exception:
        traceback.print_exc()
        return 2


if __name__ == "__main__":
    sys.exit(main())

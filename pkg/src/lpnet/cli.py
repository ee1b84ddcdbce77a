"""Batch command-line entry point: dataset generation, training, evaluation,
standalone transforms, and the numerical oracle checks.

Exit codes: 0 success, 2 usage error, 3 data error, 4 numeric failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .laplace import IltConfig, dlt, fflt, ilt_fourier, ilt_fourier_prescaled, prescale
from .model import analytic_second_order_forecast
from .systems import DATASETS, build_dataset, save_dataset
from .training import (
    config_from_json,
    evaluate,
    load_arrays,
    multi_seed_summary,
    stack_split,
    train_run,
)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_DATA = 3
EXIT_NUMERIC = 4


def _fmt(value: float) -> str:
    return f"{value:.17g}"


def _write_csv(path, header: str, columns) -> None:
    rows = [header]
    for tup in zip(*columns):
        rows.append(",".join(_fmt(v) for v in tup))
    Path(path).write_text("\n".join(rows) + "\n")


def _read_signal_csv(path, want_x: bool = True):
    """Parse a `t,x` (or bare `t`) CSV; malformed rows report their line number."""
    lines = Path(path).read_text().strip().splitlines()
    if not lines:
        raise ValueError(f"{path}: empty file")
    header = [c.strip().lower() for c in lines[0].split(",")]
    if header[0] != "t" or (want_x and (len(header) < 2 or header[1] != "x")):
        raise ValueError(f"{path}: line 1: expected header 't,x', got {lines[0]!r}")
    t, x = [], []
    for i, line in enumerate(lines[1:], start=2):
        parts = line.split(",")
        if len(parts) < len(header):
            raise ValueError(f"{path}: line {i}: expected {len(header)} columns")
        try:
            t.append(float(parts[0]))
            if want_x:
                x.append(float(parts[1]))
        except ValueError:
            raise ValueError(f"{path}: line {i}: non-numeric value") from None
    return np.array(t), (np.array(x) if want_x else None)


def _load_params_arg(raw: str) -> dict:
    """`--params` accepts inline JSON or a path to a JSON file."""
    text = raw.strip()
    if not text.startswith("{"):
        text = Path(raw).read_text()
    params = json.loads(text)
    if not isinstance(params, dict):
        raise ValueError("--params must decode to a JSON object")
    return params


def cmd_generate(args) -> int:
    splits = build_dataset(args.dataset, seed=args.seed)
    base = save_dataset(args.out, args.dataset, splits, seed=args.seed)
    count = sum(len(v) for v in splits.values())
    print(f"wrote {count} samples to {base}")
    return EXIT_OK


def cmd_train(args) -> int:
    cfg = config_from_json(args.config)
    if args.seeds is not None:
        cfg.seeds = tuple(int(s) for s in args.seeds.split(","))
    if args.out is not None:
        cfg.output_dir = args.out
    if args.data is not None:
        cfg.data_dir = args.data
    data = load_arrays(cfg)
    results = []
    for seed in cfg.seeds:
        metrics = train_run(cfg, seed, data)
        results.append(metrics)
        print(f"seed {seed}: test MSE {_fmt(metrics.test_mse)} "
              f"(best val {_fmt(metrics.best_val_mse)} at epoch {metrics.best_epoch}, "
              f"{metrics.wall_clock_s:.1f}s)")
    summary = multi_seed_summary(results)
    if cfg.output_dir is not None:
        out = Path(cfg.output_dir)
        out.mkdir(parents=True, exist_ok=True)
        (out / "summary.json").write_text(json.dumps(summary, indent=1, sort_keys=True) + "\n")
    print(f"test MSE over {len(results)} seeds: "
          f"{summary['mean_test_mse']:.6e} +- {summary['std_test_mse']:.6e} "
          f"(median {summary['median_test_mse']:.6e})")
    return EXIT_OK


def cmd_evaluate(args) -> int:
    from .systems import load_dataset

    raw = load_dataset(args.data, args.dataset)
    if args.split not in raw:
        raise ValueError(f"unknown split {args.split!r}")
    arrays = stack_split(raw[args.split])
    value = evaluate(Path(args.checkpoint), arrays)
    print(f"{args.split} MSE {_fmt(value)}")
    return EXIT_OK


def _queries_from_params(params: dict) -> np.ndarray:
    s = params.get("s")
    if s is None:
        raise ValueError("--params must contain 's': a list of [re, im] query points")
    arr = np.asarray(s, dtype=float)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise ValueError("'s' must be a list of [re, im] pairs")
    return arr[:, 0] + 1j * arr[:, 1]


def _ilt_config_from_params(params: dict) -> IltConfig:
    keys = ("alpha", "zeta", "epsilon", "n_ilt", "c_shift", "taper")
    return IltConfig(**{k: params[k] for k in keys if k in params})


def cmd_transform(args) -> int:
    params = _load_params_arg(args.params)
    if args.mode in ("dlt", "fflt"):
        if args.infile is None:
            raise ValueError("--in is required for forward transforms")
        t, x = _read_signal_csv(args.infile)
        s = _queries_from_params(params)
        if args.mode == "dlt":
            vals = dlt(t, x, s)
        else:
            vals = fflt(t, x).evaluate(s)[:, 0]
        _write_csv(args.out, "re,im", (vals.real, vals.imag))
    else:
        if args.infile is not None:
            times, _ = _read_signal_csv(args.infile, want_x=False)
        elif "times" in params:
            times = np.asarray(params["times"], dtype=float)
        else:
            raise ValueError("ilt mode needs --in or a 'times' list in --params")
        cfg = _ilt_config_from_params(params)
        rational = params.get("rational")
        if rational is not None:
            num = np.asarray(rational["num"], dtype=float)
            den = np.asarray(rational["den"], dtype=float)

            def y_of_s(s):
                from numpy.polynomial import polynomial as npoly

                return (npoly.polyval(s, num) / npoly.polyval(s, den))[..., None]

        elif "values_re" in params:
            stored = np.asarray(params["values_re"], dtype=float) + 1j * np.asarray(
                params.get("values_im", np.zeros_like(params["values_re"])), dtype=float
            )
            expect = (cfg.n_ilt + 1, times.size)
            if stored.shape != expect:
                raise ValueError(f"sampled values must have shape {expect}, got {stored.shape}")

            def y_of_s(s):
                return stored[..., None]

        else:
            raise ValueError("ilt mode needs 'rational' {num, den} or sampled 'values_re'/'values_im'")
        y = ilt_fourier(y_of_s, times, cfg)[:, 0]
        if not np.isfinite(y).all():
            raise RuntimeError("inverse transform produced non-finite values")
        _write_csv(args.out, "t,y", (times, y))
    print(f"wrote {args.out}")
    return EXIT_OK


def _corpus(tau=0.3, a=1.0, omega=2.0):
    return [
        ("step 1/s", lambda s: 1.0 / s, lambda t: np.ones_like(t), None),
        ("ramp 1/s^2", lambda s: 1.0 / s**2, lambda t: t, None),
        ("decay 1/(s+1)", lambda s: 1.0 / (s + a), lambda t: np.exp(-a * t), None),
        ("sine w/(s^2+w^2)", lambda s: omega / (s * s + omega**2), lambda t: np.sin(omega * t), None),
        (
            "delayed step e^{-0.3s}/s",
            lambda s: np.exp(-tau * s) / s,
            lambda t: (t >= tau).astype(float),
            lambda t: np.abs(t - tau) > 0.1,
        ),
    ]


def oracle_report() -> list[tuple[str, bool, str]]:
    """All oracle cases as (name, passed, detail) records."""
    cases: list[tuple[str, bool, str]] = []
    cfg = IltConfig()
    times = np.linspace(0.1, 10.0, 991)

    for name, Y, y_true, mask_fn in _corpus():
        got = ilt_fourier(Y, times, cfg)[:, 0]
        want = y_true(times)
        mask = mask_fn(times) if mask_fn else np.ones_like(times, dtype=bool)
        err = float(np.max(np.abs(got - want)[mask]))
        cases.append((f"inverse of {name}", err < 1e-3, f"max abs err {err:.2e} (bar 1e-3)"))

    for name, Y, _, _ in _corpus():
        plain = ilt_fourier(Y, times, cfg)[:, 0]
        scaled = ilt_fourier_prescaled(prescale(Y, cfg), times, cfg)[:, 0]
        rel = float(np.max(np.abs(plain - scaled)) / np.max(np.abs(plain)))
        cases.append((f"prescaled path for {name}", rel < 1e-10, f"rel diff {rel:.2e} (bar 1e-10)"))

    data = build_dataset(1, seed=11)
    m, c, k = (DATASETS[1]["params"][key] for key in ("m", "c", "k"))
    for split, samples in data.items():
        t = samples[0].t
        n = samples[0].n_history
        x = np.stack([s.x[:, 0] for s in samples])
        y = np.stack([s.y[:, 0] for s in samples])
        pred = analytic_second_order_forecast(
            t[:n], x[:, :n], y[:, :n], t[n:], x[:, n:], m, c, k, IltConfig(), "dlt"
        )
        worst = float(np.sqrt(np.mean((pred - y[:, n:]) ** 2, axis=1)).max())
        cases.append(
            (f"analytic transfer function vs integrator (oscillator {split} split)",
             worst < 1e-2, f"worst RMSE {worst:.2e} (bar 1e-2)")
        )

    try:
        IltConfig(zeta=0.5)
        cases.append(("contour contract (zeta <= 1 rejected)", False, "zeta=0.5 was accepted"))
    except ValueError as exc:
        cases.append(("contour contract (zeta <= 1 rejected)", True, f"contract violation reported: {exc}"))
    return cases


def cmd_oracle_check(_args) -> int:
    cases = oracle_report()
    failed = 0
    for name, ok, detail in cases:
        print(f"{'PASS' if ok else 'FAIL'} {name}: {detail}")
        failed += 0 if ok else 1
    print(f"{len(cases) - failed}/{len(cases)} oracle cases passed")
    return EXIT_OK if failed == 0 else EXIT_NUMERIC


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lpnet", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="generate a benchmark dataset")
    p.add_argument("--dataset", type=int, required=True, choices=sorted(DATASETS))
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("train", help="train one config over seeds")
    p.add_argument("--config", required=True)
    p.add_argument("--seeds", help="comma-separated list overriding the config")
    p.add_argument("--out", help="output directory overriding the config")
    p.add_argument("--data", help="dataset directory overriding the config")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("evaluate", help="forward-only MSE of a checkpoint")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--dataset", type=int, required=True, choices=sorted(DATASETS))
    p.add_argument("--split", default="test", choices=("train", "val", "test"))
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("transform", help="standalone Laplace transforms")
    p.add_argument("--in", dest="infile")
    p.add_argument("--mode", required=True, choices=("dlt", "fflt", "ilt"))
    p.add_argument("--params", required=True, help="inline JSON or a JSON file path")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_transform)

    p = sub.add_parser("oracle-check", help="run the numerical oracle suite")
    p.set_defaults(func=cmd_oracle_check)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (FileNotFoundError, OSError, ValueError, KeyError, json.JSONDecodeError) as exc:
        print(f"error [{args.command}]: {exc}", file=sys.stderr)
        return EXIT_DATA
    except RuntimeError as exc:
        print(f"numeric failure [{args.command}]: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())

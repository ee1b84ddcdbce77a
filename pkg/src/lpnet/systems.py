"""Ground-truth trajectory generation for the benchmark systems.

Five dynamical systems (spring-mass-damper, Duffing, Lorenz, driven
pendulum, Mackey-Glass) are integrated with classical RK4 under
synthesized forcing signals; the delayed system interpolates its own
stored trajectory for the lagged state.  Datasets are serialized as one
CSV per sample plus a JSON manifest per split.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

N_HISTORY = 50
N_FORECAST = 500
SUBSTEPS = 10  # internal RK4 substeps per sample interval

FORCING_KINDS = ("sigmoid", "decaying_sine", "triangular", "decaying_sinusoid")
SYSTEM_NAMES = ("smd", "duffing", "lorenz", "pendulum", "mackey_glass")


@dataclass(frozen=True)
class ForcingSignal:
    """A named closed-form input signal, evaluable at any t >= 0."""

    kind: str
    params: dict

    def __post_init__(self):
        if self.kind not in FORCING_KINDS:
            raise ValueError(f"unknown forcing kind {self.kind!r}")

    def __call__(self, t):
        return eval_forcing(self, t)


def eval_forcing(sig: ForcingSignal, t):
    """Evaluate a forcing signal; `t` may be a scalar or an array."""
    p = sig.params
    if sig.kind == "sigmoid":
        # periodic sigmoid: mid-rise value is amplitude/2
        return p["amplitude"] / (
            1.0 + np.exp(-p["sharpness"] * np.sin(2.0 * np.pi * t / p["period"]))
        )
    if sig.kind == "decaying_sine":
        return p["amplitude"] * np.exp(-p["decay"] * t) * np.sin(p["frequency"] * t)
    if sig.kind == "triangular":
        # peaks at period/4; closed form via arcsin keeps it exact at the vertices
        return (
            2.0 * p["amplitude"] / np.pi * np.arcsin(np.sin(2.0 * np.pi * t / p["period"]))
        )
    if sig.kind == "decaying_sinusoid":
        return (
            p["amplitude"]
            * np.exp(-p["decay"] * t)
            * np.sin(p["frequency"] * t + p["phase"])
        )
    raise ValueError(f"unknown forcing kind {sig.kind!r}")


_REQUIRED_POSITIVE = {
    "smd": ("m", "k"),
    "duffing": ("m", "k1", "k3"),
    "lorenz": ("sigma", "rho", "beta"),
    "pendulum": ("g_over_l",),
    "mackey_glass": ("beta", "gamma", "tau", "n"),
}

_STATE_DIM = {"smd": 2, "duffing": 2, "lorenz": 3, "pendulum": 2, "mackey_glass": 1}


@dataclass(frozen=True)
class SystemSpec:
    """One benchmark system: physical constants, initial state, output column."""

    system: str
    params: dict
    initial_state: tuple
    output_index: int = 0

    def __post_init__(self):
        if self.system not in SYSTEM_NAMES:
            raise ValueError(f"unknown system {self.system!r}")
        for name in _REQUIRED_POSITIVE[self.system]:
            if self.params.get(name, 0.0) <= 0.0:
                raise ValueError(f"{self.system} requires {name} > 0")
        if len(self.initial_state) != _STATE_DIM[self.system]:
            raise ValueError(
                f"{self.system} needs a state of dimension {_STATE_DIM[self.system]}"
            )
        if not 0 <= self.output_index < _STATE_DIM[self.system]:
            raise ValueError("output_index out of range")


@dataclass
class TimeSeriesSample:
    """(t, x, y) triples with the first n_history indices forming the context."""

    t: np.ndarray
    x: np.ndarray
    y: np.ndarray
    n_history: int
    n_forecast: int

    def __post_init__(self):
        self.t = np.asarray(self.t, dtype=float)
        self.x = np.asarray(self.x, dtype=float).reshape(self.t.size, -1)
        self.y = np.asarray(self.y, dtype=float).reshape(self.t.size, -1)
        if self.t.size != self.n_history + self.n_forecast:
            raise ValueError("length of t must equal n_history + n_forecast")
        if np.any(np.diff(self.t) <= 0.0):
            raise ValueError("t must be strictly increasing")


def _rhs(spec: SystemSpec):
    """Plain-float right-hand side f(u, state) with the forcing value u."""
    p = spec.params
    if spec.system == "smd":
        m, c, k = p["m"], p.get("c", 0.0), p["k"]

        def f(u, s):
            y, v = s
            return (v, (u - c * v - k * y) / m)

        return f
    if spec.system == "duffing":
        m, c, k1, k3 = p["m"], p.get("c", 0.0), p["k1"], p["k3"]

        def f(u, s):
            y, v = s
            return (v, (u - c * v - k1 * y - k3 * y**3) / m)

        return f
    if spec.system == "lorenz":
        sig, rho, beta = p["sigma"], p["rho"], p["beta"]

        def f(u, s):
            sx, y, sz = s
            return (sig * (y - sx), sx * (rho - sz) - y, sx * y - beta * sz - u)

        return f
    if spec.system == "pendulum":
        c, gl = p.get("c", 0.0), p["g_over_l"]

        def f(u, s):
            th, w = s
            return (w, u - c * w - gl * math.sin(th))

        return f
    raise ValueError(f"{spec.system} is not an ODE system")


def _forcing_values(forcing, times: np.ndarray) -> np.ndarray:
    if isinstance(forcing, ForcingSignal):
        return np.asarray(eval_forcing(forcing, times), dtype=float)
    return np.asarray([forcing(t) for t in times], dtype=float)


def integrate_rk4(
    spec: SystemSpec, forcing, t_grid: np.ndarray, substeps: int = SUBSTEPS
) -> TimeSeriesSample:
    """Classical RK4 trajectory on a uniform grid.

    The forcing is treated as continuous: it is sampled at every internal
    stage (half-substep resolution).  Output column is `spec.output_index`.
    """
    t_grid = np.asarray(t_grid, dtype=float)
    dt = np.diff(t_grid)
    if not np.allclose(dt, dt[0], rtol=1e-9, atol=1e-12):
        raise ValueError("integrate_rk4 requires a uniform grid")
    f = _rhs(spec)
    state = tuple(float(v) for v in spec.initial_state)
    states = [state]
    h = float(dt[0]) / substeps
    total = (t_grid.size - 1) * substeps
    stage_t = t_grid[0] + np.arange(2 * total + 1) * (h / 2.0)
    u = _forcing_values(forcing, stage_t).tolist()
    h2, h6 = 0.5 * h, h / 6.0
    for i in range(t_grid.size - 1):
        for j in range(substeps):
            m2 = 2 * (i * substeps + j)
            u0, um, u1 = u[m2], u[m2 + 1], u[m2 + 2]
            k1 = f(u0, state)
            k2 = f(um, tuple(s + h2 * k for s, k in zip(state, k1)))
            k3 = f(um, tuple(s + h2 * k for s, k in zip(state, k2)))
            k4 = f(u1, tuple(s + h * k for s, k in zip(state, k3)))
            state = tuple(
                s + h6 * (a + 2.0 * (b + c) + d)
                for s, a, b, c, d in zip(state, k1, k2, k3, k4)
            )
        if not all(math.isfinite(s) for s in state):
            raise RuntimeError(f"state became non-finite at step {i} (t={t_grid[i]:.6g})")
        states.append(state)
    y = np.array([s[spec.output_index] for s in states])
    x = np.asarray(u[:: 2 * substeps], dtype=float)
    n = t_grid.size
    return TimeSeriesSample(t=t_grid, x=x, y=y, n_history=min(N_HISTORY, n), n_forecast=n - min(N_HISTORY, n))


def integrate_dde(
    spec: SystemSpec, forcing, t_grid: np.ndarray, substeps: int = SUBSTEPS
) -> TimeSeriesSample:
    """Delay-system RK4 with the lagged state interpolated from the past.

    History is y = 0 on [-tau, 0].  Each stage evaluates y(t - tau) by
    linear interpolation of the fine-grid trajectory integrated so far.
    """
    if spec.system != "mackey_glass":
        raise ValueError("integrate_dde supports the delayed system only")
    p = spec.params
    beta, gamma, tau, n_exp = p["beta"], p["gamma"], p["tau"], p["n"]
    if tau <= 0.0:
        raise ValueError("delay tau must be positive")
    t_grid = np.asarray(t_grid, dtype=float)
    dt = np.diff(t_grid)
    if not np.allclose(dt, dt[0], rtol=1e-9, atol=1e-12):
        raise ValueError("integrate_dde requires a uniform grid")
    h = float(dt[0]) / substeps
    if tau < h:
        raise ValueError(f"delay tau={tau} is below the integration substep {h:.3g}")
    total = (t_grid.size - 1) * substeps
    fine = [0.0] * (total + 1)
    fine[0] = float(spec.initial_state[0])
    stage_t = t_grid[0] + np.arange(2 * total + 1) * (h / 2.0)
    u = _forcing_values(forcing, stage_t).tolist()
    lag = tau / h  # delay in fine-step units

    def delayed(fine_idx: float) -> float:
        v = fine_idx - lag
        if v < 0.0:
            return 0.0  # zero history on [-tau, 0)
        lo = int(v)
        if lo >= total:
            return fine[total]
        frac = v - lo
        return fine[lo] * (1.0 - frac) + fine[lo + 1] * frac

    def feedback(fine_idx: float) -> float:
        yd = delayed(fine_idx)
        return beta * yd / (1.0 + yd**n_exp)

    y = fine[0]
    h2, h6 = 0.5 * h, h / 6.0
    for i in range(total):
        k1 = feedback(i) - gamma * y + u[2 * i]
        k2 = feedback(i + 0.5) - gamma * (y + h2 * k1) + u[2 * i + 1]
        k3 = feedback(i + 0.5) - gamma * (y + h2 * k2) + u[2 * i + 1]
        k4 = feedback(i + 1.0) - gamma * (y + h * k3) + u[2 * i + 2]
        y = y + h6 * (k1 + 2.0 * (k2 + k3) + k4)
        if not math.isfinite(y):
            raise RuntimeError(f"state became non-finite at step {i // substeps}")
        fine[i + 1] = y
    out = np.asarray(fine[::substeps])
    x = np.asarray(u[:: 2 * substeps], dtype=float)
    n = t_grid.size
    return TimeSeriesSample(t=t_grid, x=x, y=out, n_history=min(N_HISTORY, n), n_forecast=n - min(N_HISTORY, n))


# Table of benchmark datasets: system constants, sample counts, horizon.
DATASETS = {
    1: dict(system="smd", params=dict(m=1.0, c=0.5, k=5.0), counts=(10, 5, 15), T=20.0),
    2: dict(system="duffing", params=dict(m=1.0, c=0.0, k1=1.0, k3=1.0), counts=(200, 50, 130), T=20.47),
    3: dict(system="duffing", params=dict(m=1.0, c=0.5, k1=1.0, k3=1.0), counts=(200, 50, 130), T=20.47),
    4: dict(system="lorenz", params=dict(sigma=10.0, rho=5.0, beta=8.0 / 3.0), counts=(200, 50, 130), T=20.47),
    5: dict(system="lorenz", params=dict(sigma=10.0, rho=10.0, beta=8.0 / 3.0), counts=(200, 50, 130), T=20.47),
    6: dict(system="pendulum", params=dict(c=0.0, g_over_l=1.0), counts=(200, 50, 130), T=20.47),
    7: dict(system="pendulum", params=dict(c=0.5, g_over_l=1.0), counts=(200, 50, 130), T=20.47),
    # the delayed feedback linearizes to DC gain 1/(gamma - beta) = 10, so the
    # positive-mean sigmoid train family is drawn smaller here: global draws
    # overshoot the mean-zero val/test response scale ~2x (and destabilize
    # training), while smaller draws leave the model extrapolating beyond
    # every response it has seen; U(0.2, 0.8) matches train RMS to test
    8: dict(system="mackey_glass", params=dict(beta=0.1, gamma=0.2, tau=7.0, n=2.0), counts=(10, 5, 5), T=20.0,
            sigmoid_amplitude=(0.2, 0.8)),
}

SPLITS = ("train", "val", "test")


def system_spec(ds_id: int) -> SystemSpec:
    entry = DATASETS[ds_id]
    dim = _STATE_DIM[entry["system"]]
    init = [0.0] * dim
    out = 0
    if entry["system"] == "lorenz":
        init[0] = 1.0  # all else starts from rest
        out = 1
    return SystemSpec(
        system=entry["system"], params=entry["params"], initial_state=tuple(init), output_index=out
    )


def _draw_forcing(
    kind: str, rng: np.random.Generator, amplitude: tuple[float, float] | None = None
) -> ForcingSignal:
    """Randomized per-sample forcing parameters; all draws are logged in manifests."""
    if kind == "sigmoid":
        # the sigmoid family is strictly positive with mean ~A/2, so systems
        # with a large DC gain need a smaller draw to keep the train split's
        # response scale in line with the mean-zero val/test families
        lo, hi = amplitude if amplitude is not None else (0.5, 2.0)
        params = dict(
            amplitude=rng.uniform(lo, hi),
            sharpness=rng.uniform(2.0, 6.0),
            period=rng.uniform(5.0, 15.0),
        )
    elif kind == "decaying_sine":
        params = dict(
            amplitude=rng.uniform(0.5, 2.0),
            decay=rng.uniform(0.05, 0.3),
            frequency=rng.uniform(0.5, 2.0),
        )
    elif kind == "triangular":
        params = dict(amplitude=rng.uniform(0.5, 2.0), period=rng.uniform(5.0, 15.0))
    elif kind == "decaying_sinusoid":
        params = dict(
            amplitude=rng.uniform(0.5, 2.0),
            decay=rng.uniform(0.05, 0.5),
            frequency=rng.uniform(0.5, 2.0),
            phase=rng.uniform(0.0, 2.0 * np.pi),
        )
    else:
        raise ValueError(f"unknown forcing kind {kind!r}")
    return ForcingSignal(kind=kind, params=params)


def _split_forcing_kind(ds_id: int, split: str) -> str:
    if ds_id in (1, 8):
        return {"train": "sigmoid", "val": "decaying_sine", "test": "triangular"}[split]
    return "decaying_sinusoid"


def build_dataset(ds_id: int, seed: int, splits=SPLITS) -> dict:
    """Generate {train, val, test} sample lists for one benchmark dataset.

    Per-sample seeds derive from (seed, ds_id, split index, sample index),
    so any subset of splits reproduces the same trajectories.
    """
    if ds_id not in DATASETS:
        raise ValueError(f"dataset id must be 1..8, got {ds_id}")
    entry = DATASETS[ds_id]
    spec = system_spec(ds_id)
    n_total = N_HISTORY + N_FORECAST
    dt = entry["T"] / n_total
    t_grid = np.arange(n_total) * dt
    integrate = integrate_dde if spec.system == "mackey_glass" else integrate_rk4
    out: dict = {}
    for split_idx, split in enumerate(SPLITS):
        if split not in splits:
            continue
        kind = _split_forcing_kind(ds_id, split)
        samples = []
        for i in range(entry["counts"][split_idx]):
            rng = np.random.default_rng((seed, ds_id, split_idx, i))
            forcing = _draw_forcing(kind, rng, entry.get("sigmoid_amplitude"))
            sample = integrate(spec, forcing, t_grid)
            sample.forcing = forcing  # carried for the manifest
            samples.append(sample)
        out[split] = samples
    return out


def save_dataset(root, ds_id: int, splits: dict, seed: int) -> Path:
    """Write one CSV per sample plus a JSON manifest per split."""
    entry = DATASETS[ds_id]
    base = Path(root) / f"ds{ds_id}"
    dt = entry["T"] / (N_HISTORY + N_FORECAST)
    for split, samples in splits.items():
        d = base / split
        d.mkdir(parents=True, exist_ok=True)
        manifest = {
            "dataset": ds_id,
            "system": entry["system"],
            "system_params": entry["params"],
            "seed": seed,
            "n_history": N_HISTORY,
            "n_forecast": N_FORECAST,
            "dt": dt,
            "samples": [],
        }
        for i, sample in enumerate(samples):
            name = f"sample_{i:03d}.csv"
            lines = ["t,x,y\n"]
            for t, x, y in zip(sample.t, sample.x[:, 0], sample.y[:, 0]):
                lines.append(f"{t:.17g},{x:.17g},{y:.17g}\n")
            (d / name).write_text("".join(lines))
            forcing = getattr(sample, "forcing", None)
            manifest["samples"].append(
                {
                    "file": name,
                    "forcing": None
                    if forcing is None
                    else {"kind": forcing.kind, "params": forcing.params},
                }
            )
        (d / "manifest.json").write_text(json.dumps(manifest, sort_keys=True, indent=1))
    return base


def load_dataset(root, ds_id: int) -> dict:
    """Read back the CSV/manifest layout written by save_dataset."""
    base = Path(root) / f"ds{ds_id}"
    if not base.is_dir():
        raise FileNotFoundError(f"no dataset directory at {base}")
    out: dict = {}
    for split in SPLITS:
        d = base / split
        manifest = json.loads((d / "manifest.json").read_text())
        samples = []
        for rec in manifest["samples"]:
            data = np.loadtxt(d / rec["file"], delimiter=",", skiprows=1)
            samples.append(
                TimeSeriesSample(
                    t=data[:, 0],
                    x=data[:, 1],
                    y=data[:, 2],
                    n_history=manifest["n_history"],
                    n_forecast=manifest["n_forecast"],
                )
            )
        out[split] = samples
    return out

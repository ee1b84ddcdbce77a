"""Laplace-domain forecaster: Y(s) = H(s) (B X(s) + P(s)) with learned pieces.

A history encoder maps the observed window to polynomial coefficients P
(initial-state term) and a latent vector z.  A second network evaluates the
transfer function H(s) on the query grid, conditioned on z.  The forcing
enters through a numerical Laplace transform of the forecast-window input,
and the product is inverted by the tapered Fourier series from
:mod:`lpnet.laplace`, entirely through autodiff primitives so the whole
pipeline is trainable.

Batching convention: time grids (`t_hist`, forecast times) are shared across
the batch and passed as 1-D arrays; signal values (`x`, `y`) carry a leading
sample axis (S, T).  1-D signal inputs are promoted to a single-sample batch
and every forward returns an (S, T) node.

The local clock of each forecast window is anchored at the last history
sample: reconstruction times are u = c_shift + (t - t_last_hist).  The
forcing fed to the transform is the window forcing prefixed with the last
observed history value at u = c_shift, so the transform covers the full
forcing support [t_last_hist, t_window_end] on the same clock and the
forced response stays aligned with the reconstruction times.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from . import autodiff as ad
from .autodiff import ComplexPair, MlpSpec, Node, Parameter, Tape
from .laplace import IltConfig, QuerySet, build_queries, dlt, fflt, ilt_fourier, scale_factor, taper_weights

LP_TYPES = ("dlt", "fflt")


@dataclass(frozen=True)
class Grid:
    """Normalized evaluation grid for the transfer-function network.

    `values[m, n]` is the normalized time of reconstruction point n,
    replicated across the series axis m; `ilt_axis` spans [-1, 1] over the
    series orders.  `times` keeps the raw (positive) window-local times for
    the scaling factor.
    """

    ilt_axis: np.ndarray
    time_axis: np.ndarray
    values: np.ndarray
    times: np.ndarray


@dataclass(frozen=True)
class EncoderOutput:
    """History summary: polynomial coefficients (S, P) and latent state (S, D_z)."""

    p_coeffs: Node
    z: Node


@dataclass
class LpNetParams:
    """All weights and structural settings of one forecaster."""

    n_history: int
    p_degree: int
    d_z: int
    kappa_h: float
    window_count: int
    lp_type: str
    ilt: IltConfig
    encoder_spec: MlpSpec
    head_p_spec: MlpSpec
    head_z_spec: MlpSpec
    hs_spec: MlpSpec
    encoder: list[Parameter]
    head_p: list[Parameter]
    head_z: list[Parameter]
    hs_net: list[Parameter]
    b_input: float = 1.0
    use_scaling: bool = True

    def __post_init__(self):
        if self.n_history < 2:
            raise ValueError("n_history must be >= 2")
        if self.p_degree < 1:
            raise ValueError("p_degree must be >= 1")
        if self.d_z < 1:
            raise ValueError("d_z must be >= 1")
        if self.kappa_h <= 0.0:
            raise ValueError("kappa_h must be positive")
        if self.window_count < 1:
            raise ValueError("window_count must be >= 1")
        if self.lp_type not in LP_TYPES:
            raise ValueError(f"lp_type must be one of {LP_TYPES}")
        if self.encoder_spec.input_dim != 3 * self.n_history:
            raise ValueError("encoder input must be 3 * n_history wide")
        if self.hs_spec.input_dim != 2 + self.d_z:
            raise ValueError("transfer net input must be 2 + d_z wide")
        if self.hs_spec.output_dim != 2:
            raise ValueError("transfer net emits one complex value as two reals")
        if self.head_p_spec.output_dim != self.p_degree or self.head_z_spec.output_dim != self.d_z:
            raise ValueError("head widths do not match p_degree / d_z")

    @property
    def parameters(self) -> list[Parameter]:
        return [*self.encoder, *self.head_p, *self.head_z, *self.hs_net]

    def structure(self) -> dict:
        """JSON-serializable description sufficient to rebuild the shapes."""
        return {
            "n_history": self.n_history,
            "p_degree": self.p_degree,
            "d_z": self.d_z,
            "kappa_h": self.kappa_h,
            "window_count": self.window_count,
            "lp_type": self.lp_type,
            "b_input": self.b_input,
            "use_scaling": self.use_scaling,
            "ilt": asdict(self.ilt),
            "encoder_spec": asdict(self.encoder_spec),
            "head_p_spec": asdict(self.head_p_spec),
            "head_z_spec": asdict(self.head_z_spec),
            "hs_spec": asdict(self.hs_spec),
        }


def _zero_mlp(spec: MlpSpec, prefix: str) -> list[Parameter]:
    params = []
    for i, (fan_in, fan_out) in enumerate(spec.layer_dims()):
        params.append(Parameter.of(np.zeros((fan_in, fan_out)), f"{prefix}.w{i}"))
        params.append(Parameter.of(np.zeros(fan_out), f"{prefix}.b{i}"))
    return params


def init_lpnet(
    n_history: int,
    *,
    enc_width: int,
    enc_layers: int,
    p_degree: int,
    h_width: int,
    h_layers: int,
    kappa_h: float,
    activation: str = "tanh",
    d_z: int | None = None,
    window_count: int = 1,
    lp_type: str = "dlt",
    ilt: IltConfig | None = None,
    b_input: float = 1.0,
    use_scaling: bool = True,
    rng: np.random.Generator | None = None,
) -> LpNetParams:
    """Build a forecaster with freshly initialized weights.

    `d_z` defaults to the encoder width.  All four sub-networks are drawn
    in a fixed order from `rng`, so a seeded generator gives bit-identical
    initializations.
    """
    if d_z is None:
        d_z = enc_width
    if ilt is None:
        ilt = IltConfig()
    if rng is None:
        rng = np.random.default_rng()
    encoder_spec = MlpSpec(3 * n_history, enc_width, enc_width, enc_layers, activation)
    head_p_spec = MlpSpec(enc_width, p_degree, enc_width, 1, activation)
    head_z_spec = MlpSpec(enc_width, d_z, enc_width, 1, activation)
    hs_spec = MlpSpec(2 + d_z, 2, h_width, h_layers, activation)
    return LpNetParams(
        n_history=n_history,
        p_degree=p_degree,
        d_z=d_z,
        kappa_h=kappa_h,
        window_count=window_count,
        lp_type=lp_type,
        ilt=ilt,
        encoder_spec=encoder_spec,
        head_p_spec=head_p_spec,
        head_z_spec=head_z_spec,
        hs_spec=hs_spec,
        encoder=ad.init_mlp(encoder_spec, rng, "encoder"),
        head_p=ad.init_mlp(head_p_spec, rng, "head_p"),
        head_z=ad.init_mlp(head_z_spec, rng, "head_z"),
        hs_net=ad.init_mlp(hs_spec, rng, "hs_net"),
        b_input=b_input,
        use_scaling=use_scaling,
    )


def _as_batch(a, width: int, name: str) -> np.ndarray:
    """Promote a 1-D signal to a single-sample batch and check its length."""
    arr = np.asarray(a, dtype=float)
    if arr.ndim == 1:
        arr = arr[None, :]
    if arr.ndim != 2 or arr.shape[1] != width:
        raise ValueError(f"{name} must have {width} columns, got shape {arr.shape}")
    return arr


def encode_history(t_hist, x_hist, y_hist, params: LpNetParams, tape: Tape) -> EncoderOutput:
    """Summarize the observed window into (P, z).

    Input layout: the history times are normalized to [-1, 1] per batch and
    concatenated with the raw forcing and output rows, giving a 3N vector per
    sample.  `y_hist` may be a node so predictions can be fed back
    differentiably during windowed forecasting.
    """
    n = params.n_history
    t = np.asarray(t_hist, dtype=float)
    if t.ndim != 1 or t.size != n:
        raise ValueError(f"t_hist must be a shared 1-D grid of length {n}")
    span = t[-1] - t[0]
    if span <= 0.0:
        raise ValueError("history times must be increasing")
    t_norm = 2.0 * (t - t[0]) / span - 1.0

    x = _as_batch(x_hist, n, "x_hist")
    s = x.shape[0]
    head = np.concatenate([np.broadcast_to(t_norm, (s, n)), x], axis=1)
    if isinstance(y_hist, Node):
        if y_hist.shape != (s, n):
            raise ValueError(f"y_hist node must have shape {(s, n)}")
        features = ad.concat([tape.leaf(head), y_hist], axis=1)
    else:
        y = _as_batch(y_hist, n, "y_hist")
        if y.shape[0] != s:
            raise ValueError("x_hist and y_hist batch sizes differ")
        features = tape.leaf(np.concatenate([head, y], axis=1))

    trunk = ad.mlp_forward(params.encoder_spec, params.encoder, features, tape)
    p_coeffs = ad.mlp_forward(params.head_p_spec, params.head_p, trunk, tape)
    z = ad.mlp_forward(params.head_z_spec, params.head_z, trunk, tape)
    return EncoderOutput(p_coeffs=p_coeffs, z=z)


def _power_stack(points: np.ndarray, degree: int) -> np.ndarray:
    return np.stack([points**i for i in range(degree)])


def _eval_p_powers(s_powers: np.ndarray, p_coeffs: Node) -> ComplexPair:
    s_count, degree = p_coeffs.shape
    tape = p_coeffs.tape
    re = im = None
    for i in range(degree):
        pi = ad.reshape(ad.take(p_coeffs, (slice(None), i)), (s_count, 1, 1))
        term_re = ad.mul(pi, tape.leaf(s_powers[i].real))
        term_im = ad.mul(pi, tape.leaf(s_powers[i].imag))
        re = term_re if re is None else ad.add(re, term_re)
        im = term_im if im is None else ad.add(im, term_im)
    return ComplexPair(re, im)


def eval_P(points: np.ndarray, p_coeffs) -> ComplexPair | np.ndarray:
    """Evaluate P(s) = sum_i p_i s^i at complex query points.

    Coefficient index runs over ascending powers 0..P-1.  A node input
    (S, P) yields a differentiable ComplexPair (S, K, T); a plain array
    yields a complex ndarray, used by the analytic pipeline.
    """
    points = np.asarray(points, dtype=complex)
    if isinstance(p_coeffs, Node):
        return _eval_p_powers(_power_stack(points, p_coeffs.shape[1]), p_coeffs)
    p = np.asarray(p_coeffs, dtype=float)
    single = p.ndim == 1
    p = np.atleast_2d(p)
    out = np.zeros((p.shape[0],) + points.shape, dtype=complex)
    for i in range(p.shape[1]):
        out += p[:, i].reshape(-1, *([1] * points.ndim)) * points**i
    return out[0] if single else out


def build_grid(times_local: np.ndarray, n_ilt: int) -> Grid:
    """Normalize window times to [-1, 1] and pair them with the series axis."""
    t = np.asarray(times_local, dtype=float)
    if t.ndim != 1 or t.size < 2:
        raise ValueError("a window needs at least two time points")
    span = t.max() - t.min()
    if span <= 0.0:
        raise ValueError("degenerate window: times span zero width")
    time_axis = 2.0 * (t - t.min()) / span - 1.0
    ilt_axis = np.linspace(-1.0, 1.0, n_ilt + 1)
    values = np.broadcast_to(time_axis, (n_ilt + 1, t.size)).copy()
    return Grid(ilt_axis=ilt_axis, time_axis=time_axis, values=values, times=t.copy())


def eval_H(grid: Grid, z: Node, params: LpNetParams) -> ComplexPair:
    """Evaluate the transfer function on the grid, conditioned on z.

    Each grid point becomes one network input (series coordinate, normalized
    time, z); the two outputs are the real and imaginary parts.  With scaling
    enabled the raw output is divided by f_scale(t) * kappa_h, so the network
    models the time-independent scaled surface.
    """
    tape = z.tape
    s_count, d_z = z.shape
    k_count, t_count = grid.values.shape
    feats = np.stack([np.broadcast_to(grid.ilt_axis[:, None], grid.values.shape), grid.values], axis=-1)
    feats = feats.reshape(1, k_count * t_count, 2)

    z3 = ad.reshape(z, (s_count, 1, d_z))
    z_b = ad.mul(z3, tape.leaf(np.ones((1, k_count * t_count, 1))))
    feats_b = tape.leaf(np.broadcast_to(feats, (s_count, k_count * t_count, 2)))
    flat = ad.reshape(ad.concat([feats_b, z_b], axis=2), (s_count * k_count * t_count, 2 + d_z))

    out = ad.mlp_forward(params.hs_spec, params.hs_net, flat, tape)
    out = ad.reshape(out, (s_count, k_count * t_count, 2))
    re = ad.reshape(ad.take(out, (slice(None), slice(None), 0)), (s_count, k_count, t_count))
    im = ad.reshape(ad.take(out, (slice(None), slice(None), 1)), (s_count, k_count, t_count))
    if params.use_scaling:
        gain = 1.0 / (scale_factor(grid.times, params.ilt) * params.kappa_h)
        gain_leaf = tape.leaf(gain[None, None, :])
        re = ad.mul(re, gain_leaf)
        im = ad.mul(im, gain_leaf)
    return ComplexPair(re, im)


def assemble_Y(h: ComplexPair, x_laplace: np.ndarray, p: ComplexPair, b_input: float, tape: Tape) -> ComplexPair:
    """Y(s) = H(s) (B X(s) + P(s)) with X a constant transform of the forcing."""
    x_laplace = np.asarray(x_laplace, dtype=complex)
    forced = ComplexPair(
        ad.add(tape.leaf(b_input * x_laplace.real), p.re),
        ad.add(tape.leaf(b_input * x_laplace.imag), p.im),
    )
    return ad.complex_mul(h, forced)


@dataclass(frozen=True)
class WindowPlan:
    """Constant tensors for one forecast window, reusable across steps.

    Everything here depends only on the window's time grid and the ILT
    configuration, so training loops build each plan once.
    """

    times_local: np.ndarray
    times_x: np.ndarray
    queries: QuerySet
    s_powers: np.ndarray
    grid: Grid
    series_real: np.ndarray
    series_imag: np.ndarray
    prefactor: np.ndarray


def plan_window(t_window: np.ndarray, t_last_hist: float, params: LpNetParams) -> WindowPlan:
    """Precompute queries, grid, and series weights for one forecast window."""
    cfg = params.ilt
    t_window = np.asarray(t_window, dtype=float)
    if t_window.ndim != 1 or t_window.size < 2:
        raise ValueError("a forecast window needs at least two points")
    if t_window[0] <= t_last_hist:
        raise ValueError("forecast window must start after the last history time")
    times_local = cfg.c_shift + (t_window - t_last_hist)
    # Transform sample times: last history instant first, then the window.
    times_x = cfg.c_shift + np.concatenate([[0.0], t_window - t_last_hist])
    queries = build_queries(times_local, cfg)
    s_powers = _power_stack(queries.points, params.p_degree)
    grid = build_grid(times_local, cfg.n_ilt)
    k = np.arange(cfg.n_ilt + 1)
    w = taper_weights(cfg.n_ilt, cfg.taper_terms) * np.exp(1j * k * np.pi / cfg.zeta)
    w[0] *= 0.5
    prefactor = np.exp(queries.sigma * times_local) / (cfg.zeta * times_local)
    return WindowPlan(
        times_local=times_local,
        times_x=times_x,
        queries=queries,
        s_powers=s_powers,
        grid=grid,
        series_real=w.real,
        series_imag=w.imag,
        prefactor=prefactor,
    )


def transform_forcing(plan: WindowPlan, x_last, x_window, lp_type: str) -> np.ndarray:
    """Laplace transform of the window forcing at the plan's query points.

    `x_last` is the forcing at the last history sample, placed at the head
    of the local clock.  The DLT places samples directly on the shifted
    clock; the FFLT is computed relative to the first sample and delayed by
    e^{-c_shift s} so both carriers agree.  Returns complex (S, K, T).
    """
    if lp_type not in LP_TYPES:
        raise ValueError(f"lp_type must be one of {LP_TYPES}")
    x = _as_batch(x_window, plan.times_x.size - 1, "x_window")
    x_last = np.broadcast_to(np.asarray(x_last, dtype=float).reshape(-1, 1), (x.shape[0], 1))
    x = np.concatenate([x_last, x], axis=1)
    if lp_type == "dlt":
        vals = dlt(plan.times_x, x.T, plan.queries.points)
    else:
        vals = fflt(plan.times_x, x.T).evaluate(plan.queries.points)
        if plan.times_x[0] > 0.0:
            vals = vals * np.exp(-plan.times_x[0] * plan.queries.points)[..., None]
    return np.moveaxis(vals, -1, 0)


def ilt_series(y: ComplexPair, plan: WindowPlan, tape: Tape) -> Node:
    """Tapered Fourier-series inversion of Y evaluated on the plan's queries."""
    weighted = ad.sub(
        ad.mul(y.re, tape.leaf(plan.series_real[None, :, None])),
        ad.mul(y.im, tape.leaf(plan.series_imag[None, :, None])),
    )
    bracket = ad.tensor_sum(weighted, axis=1)
    return ad.mul(bracket, tape.leaf(plan.prefactor[None, :]))


def forecast_window(
    t_hist,
    x_hist,
    y_hist,
    t_window,
    x_window,
    params: LpNetParams,
    tape: Tape,
    plan: WindowPlan | None = None,
    x_laplace: np.ndarray | None = None,
) -> Node:
    """Forecast one window: encode, assemble Y(s) on the queries, invert.

    `plan` and `x_laplace` may be precomputed (they are constants of the
    window) to avoid rebuilding them every training step.
    """
    t_hist = np.asarray(t_hist, dtype=float)
    x_hist = _as_batch(x_hist, params.n_history, "x_hist")
    if plan is None:
        plan = plan_window(t_window, float(t_hist[-1]), params)
    if x_laplace is None:
        x_laplace = transform_forcing(plan, x_hist[:, -1], x_window, params.lp_type)
    enc = encode_history(t_hist, x_hist, y_hist, params, tape)
    p = _eval_p_powers(plan.s_powers, enc.p_coeffs)
    h = eval_H(plan.grid, enc.z, params)
    y = assemble_Y(h, x_laplace, p, params.b_input, tape)
    return ilt_series(y, plan, tape)


def window_bounds(m: int, window_count: int) -> list[tuple[int, int]]:
    """Split m forecast points into `window_count` contiguous ceiling-sized windows."""
    if window_count > m:
        raise ValueError("cannot split into more windows than forecast points")
    delta = math.ceil(m / window_count)
    if delta < 2 or m - delta * ((m - 1) // delta) < 2:
        raise ValueError("split leaves a window of a single point")
    return [(lo, min(m, lo + delta)) for lo in range(0, m, delta)]


def forecast(
    t_hist,
    x_hist,
    y_hist,
    t_fore,
    x_fore,
    params: LpNetParams,
    tape: Tape,
    plans: list[WindowPlan] | None = None,
    x_laplace: list[np.ndarray] | None = None,
) -> Node:
    """Recurrent multi-window forecast over the full horizon.

    The horizon is split into `params.window_count` ceiling-sized windows.
    After each window the history slides forward, feeding the *predicted*
    outputs back into the encoder, so gradients flow through the recurrence.
    """
    t_hist = np.asarray(t_hist, dtype=float)
    t_fore = np.asarray(t_fore, dtype=float)
    n = params.n_history
    bounds = window_bounds(t_fore.size, params.window_count)
    x_fore = _as_batch(x_fore, t_fore.size, "x_fore")
    x_cur = _as_batch(x_hist, n, "x_hist")
    t_cur = t_hist
    y_cur = y_hist

    parts = []
    for q, (lo, hi) in enumerate(bounds):
        t_w = t_fore[lo:hi]
        plan = plans[q] if plans is not None else None
        x_lp = x_laplace[q] if x_laplace is not None else None
        y_w = forecast_window(t_cur, x_cur, y_cur, t_w, x_fore[:, lo:hi], params, tape, plan, x_lp)
        parts.append(y_w)
        if hi < t_fore.size:
            t_cur = np.concatenate([t_cur, t_w])[-n:]
            x_cur = np.concatenate([x_cur, x_fore[:, lo:hi]], axis=1)[:, -n:]
            y_node = y_cur if isinstance(y_cur, Node) else tape.leaf(_as_batch(y_cur, n, "y_hist"))
            y_cur = ad.take(ad.concat([y_node, y_w], axis=1), (slice(None), slice(-n, None)))
    return parts[0] if len(parts) == 1 else ad.concat(parts, axis=1)


def forecast_plans(t_hist_last: float, t_fore, params: LpNetParams) -> list[WindowPlan]:
    """Plans for every window of a horizon, matching `forecast`'s splitting."""
    t_fore = np.asarray(t_fore, dtype=float)
    plans = []
    for lo, hi in window_bounds(t_fore.size, params.window_count):
        last = t_hist_last if lo == 0 else float(t_fore[lo - 1])
        plans.append(plan_window(t_fore[lo:hi], last, params))
    return plans


def _expm_2x2(m: np.ndarray) -> np.ndarray:
    """Matrix exponential of a real 2x2 matrix, closed form."""
    mu = 0.5 * (m[0, 0] + m[1, 1])
    det = m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0]
    q = np.sqrt(complex(mu * mu - det))
    if abs(q) < 1e-12:
        ch, sh = 1.0, 1.0
    else:
        ch, sh = np.cosh(q), np.sinh(q) / q
    return (np.exp(mu) * (ch * np.eye(2) + sh * (m - mu * np.eye(2)))).real


def analytic_second_order_forecast(
    t_hist,
    x_hist,
    y_hist,
    t_fore,
    x_fore,
    mass: float,
    damping: float,
    stiffness: float,
    cfg: IltConfig | None = None,
    lp_type: str = "dlt",
) -> np.ndarray:
    """Forecast m y'' + c y' + k y = x through the Laplace pipeline with the
    closed-form transfer function H(s) = 1 / (m s^2 + c s + k).

    The initial-state polynomial P(s) = m (v0 + s y0) + c y0 uses the last
    history value and a second-order backward-difference velocity estimate.
    On the shifted local clock the forecast reads times >= c_shift, so the
    matching free response is the tail of a trajectory started c_shift
    earlier; the initial state is flowed backward through the homogeneous
    dynamics before forming P, which keeps the construction exact for any
    shift.  No trained parameters are involved; this is the numerical gate
    for the assembly and inversion machinery.

    Accepts 1-D signals or (S, T) batches sharing the time grids; returns
    the forecast with matching leading shape.
    """
    if cfg is None:
        cfg = IltConfig()
    t_hist = np.asarray(t_hist, dtype=float)
    t_fore = np.asarray(t_fore, dtype=float)
    single = np.asarray(y_hist).ndim == 1
    x_hist = _as_batch(x_hist, t_hist.size, "x_hist")
    y_hist = _as_batch(y_hist, t_hist.size, "y_hist")
    x_fore = _as_batch(x_fore, t_fore.size, "x_fore")
    dt = t_hist[-1] - t_hist[-2]
    y0 = y_hist[:, -1]
    v0 = (3.0 * y_hist[:, -1] - 4.0 * y_hist[:, -2] + y_hist[:, -3]) / (2.0 * dt)
    if cfg.c_shift > 0.0:
        flow = np.array([[0.0, 1.0], [-stiffness / mass, -damping / mass]])
        y0, v0 = _expm_2x2(-cfg.c_shift * flow) @ np.stack([y0, v0])
    p_coeffs = np.stack([mass * v0 + damping * y0, mass * y0], axis=1)

    times_local = cfg.c_shift + (t_fore - t_hist[-1])
    times_x = cfg.c_shift + np.concatenate([[0.0], t_fore - t_hist[-1]])
    x_aug = np.concatenate([x_hist[:, -1:], x_fore], axis=1)
    if lp_type == "dlt":
        def x_of_s(s):
            return dlt(times_x, x_aug.T, s)
    else:
        carrier = fflt(times_x, x_aug.T)

        def x_of_s(s):
            vals = carrier.evaluate(s)
            return vals * np.exp(-times_x[0] * s)[..., None] if times_x[0] > 0.0 else vals

    def y_of_s(s):
        h = 1.0 / (mass * s**2 + damping * s + stiffness)
        p = np.moveaxis(eval_P(s, p_coeffs), 0, -1)
        return h[..., None] * (x_of_s(s) + p)

    out = ilt_fourier(y_of_s, times_local, cfg).T
    return out[0] if single else out


def save_model(path, params: LpNetParams) -> None:
    """Write weights (npz) plus a JSON sidecar describing the structure."""
    path = Path(path)
    ad.save_params(path, params.parameters)
    sidecar = path.with_suffix(".json")
    sidecar.write_text(json.dumps(params.structure(), indent=1, sort_keys=True) + "\n")


def load_model(path) -> LpNetParams:
    """Rebuild a forecaster from `save_model` output."""
    path = Path(path)
    meta = json.loads(path.with_suffix(".json").read_text())
    specs = {key: MlpSpec(**meta[key]) for key in ("encoder_spec", "head_p_spec", "head_z_spec", "hs_spec")}
    ilt_meta = dict(meta["ilt"])
    params = LpNetParams(
        n_history=meta["n_history"],
        p_degree=meta["p_degree"],
        d_z=meta["d_z"],
        kappa_h=meta["kappa_h"],
        window_count=meta["window_count"],
        lp_type=meta["lp_type"],
        ilt=IltConfig(**ilt_meta),
        encoder_spec=specs["encoder_spec"],
        head_p_spec=specs["head_p_spec"],
        head_z_spec=specs["head_z_spec"],
        hs_spec=specs["hs_spec"],
        encoder=_zero_mlp(specs["encoder_spec"], "encoder"),
        head_p=_zero_mlp(specs["head_p_spec"], "head_p"),
        head_z=_zero_mlp(specs["head_z_spec"], "head_z"),
        hs_net=_zero_mlp(specs["hs_spec"], "hs_net"),
        b_input=meta["b_input"],
        use_scaling=meta["use_scaling"],
    )
    ad.load_params(path, params.parameters)
    return params

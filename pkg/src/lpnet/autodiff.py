"""Reverse-mode automatic differentiation over numpy tensors.

A Tape records primitive operations in construction order; backward
replays them in strict reverse, accumulating vector-Jacobian products
additively into zero-initialized gradient slots.  Complex quantities are
carried as (re, im) pairs of real nodes, so the whole pipeline stays on
a real-valued substrate.  Includes MLP layers, an Adam optimizer, and a
finite-difference gradient checker.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np


class Node:
    """A value on the tape.  Supports arithmetic sugar for the primitives."""

    __slots__ = ("value", "tape", "index")

    def __init__(self, value: np.ndarray, tape: "Tape", index: int):
        self.value = value
        self.tape = tape
        self.index = index

    @property
    def shape(self):
        return self.value.shape

    def __add__(self, other):
        return add(self, other)

    __radd__ = __add__

    def __sub__(self, other):
        return sub(self, other)

    def __rsub__(self, other):
        return sub(other, self)

    def __mul__(self, other):
        return mul(self, other)

    __rmul__ = __mul__

    def __truediv__(self, other):
        return div(self, other)

    def __rtruediv__(self, other):
        return div(other, self)

    def __neg__(self):
        return neg(self)


@dataclass
class Parameter:
    """A named trainable tensor with a same-shaped gradient slot."""

    value: np.ndarray
    gradient: np.ndarray
    identifier: str

    def __post_init__(self):
        self.value = np.asarray(self.value, dtype=float)
        self.gradient = np.asarray(self.gradient, dtype=float)
        if self.gradient.shape != self.value.shape:
            raise ValueError(
                f"gradient shape {self.gradient.shape} != value shape "
                f"{self.value.shape} for {self.identifier!r}"
            )

    @classmethod
    def of(cls, value: np.ndarray, identifier: str) -> "Parameter":
        value = np.asarray(value, dtype=float)
        return cls(value=value, gradient=np.zeros_like(value), identifier=identifier)


class Tape:
    """Append-only record of primitive operations; one backward pass each."""

    def __init__(self):
        self._edges: list = []  # per node: tuple of (parent_index, vjp) pairs
        self._params: list = []  # per node: Parameter for param leaves, else None
        self._used = False

    def _record(self, value: np.ndarray, edges, param: Parameter | None = None) -> Node:
        idx = len(self._edges)
        self._edges.append(edges)
        self._params.append(param)
        return Node(np.asarray(value, dtype=float), self, idx)

    def leaf(self, value) -> Node:
        return self._record(value, ())

    def param(self, p: Parameter) -> Node:
        return self._record(p.value, (), param=p)

    def backward(self, node: Node, wrt: Sequence[Node] = ()) -> list[np.ndarray]:
        """Reverse sweep from `node`.

        Adds into Parameter.gradient for every param leaf (accumulation
        across tapes is what micro-batching relies on; call
        zero_gradients between optimizer steps) and returns gradients
        for the `wrt` nodes.
        """
        if self._used:
            raise RuntimeError("tape already consumed by a backward pass")
        self._used = True
        if node.tape is not self:
            raise ValueError("node does not belong to this tape")
        grads: list = [None] * len(self._edges)
        grads[node.index] = np.ones_like(node.value)
        keep = {n.index for n in wrt}
        for i in range(node.index, -1, -1):
            g = grads[i]
            if g is None:
                continue
            for parent, vjp in self._edges[i]:
                contrib = vjp(g)
                if grads[parent] is None:
                    grads[parent] = contrib
                else:
                    grads[parent] = grads[parent] + contrib
            p = self._params[i]
            if p is not None:
                p.gradient = p.gradient + g
            if i not in keep:
                grads[i] = None  # free as we go; big tapes would OOM otherwise
                self._edges[i] = ()
        return [grads[n.index] for n in wrt]


def _unbroadcast(g: np.ndarray, shape: tuple) -> np.ndarray:
    """Sum a gradient down to the shape the operand had before broadcasting."""
    if g.shape == shape:
        return g
    extra = g.ndim - len(shape)
    if extra > 0:
        g = g.sum(axis=tuple(range(extra)))
    axes = tuple(i for i, n in enumerate(shape) if n == 1 and g.shape[i] != 1)
    if axes:
        g = g.sum(axis=axes, keepdims=True)
    return g.reshape(shape)


def _lift(x):
    """(value, node-or-None) for mixed Node/array operands."""
    if isinstance(x, Node):
        return x.value, x
    return np.asarray(x, dtype=float), None


def _binary(a, b, value, vjp_a, vjp_b) -> Node:
    va, na = _lift(a)
    vb, nb = _lift(b)
    tape = (na or nb).tape
    edges = []
    if na is not None:
        edges.append((na.index, lambda g: _unbroadcast(vjp_a(g), va.shape)))
    if nb is not None:
        edges.append((nb.index, lambda g: _unbroadcast(vjp_b(g), vb.shape)))
    return tape._record(value, tuple(edges))


def add(a, b) -> Node:
    va, _ = _lift(a)
    vb, _ = _lift(b)
    return _binary(a, b, va + vb, lambda g: g, lambda g: g)


def sub(a, b) -> Node:
    va, _ = _lift(a)
    vb, _ = _lift(b)
    return _binary(a, b, va - vb, lambda g: g, lambda g: -g)


def mul(a, b) -> Node:
    va, _ = _lift(a)
    vb, _ = _lift(b)
    return _binary(a, b, va * vb, lambda g: g * vb, lambda g: g * va)


def div(a, b) -> Node:
    va, _ = _lift(a)
    vb, _ = _lift(b)
    out = va / vb
    return _binary(a, b, out, lambda g: g / vb, lambda g: -g * out / vb)


def _unary(a: Node, value, vjp) -> Node:
    return a.tape._record(value, ((a.index, vjp),))


def neg(a: Node) -> Node:
    return _unary(a, -a.value, lambda g: -g)


def exp(a: Node) -> Node:
    out = np.exp(a.value)
    return _unary(a, out, lambda g: g * out)


def log(a: Node) -> Node:
    return _unary(a, np.log(a.value), lambda g: g / a.value)


def sin(a: Node) -> Node:
    return _unary(a, np.sin(a.value), lambda g: g * np.cos(a.value))


def cos(a: Node) -> Node:
    return _unary(a, np.cos(a.value), lambda g: -g * np.sin(a.value))


def tanh(a: Node) -> Node:
    out = np.tanh(a.value)
    return _unary(a, out, lambda g: g * (1.0 - out * out))


def softsign(a: Node) -> Node:
    denom = 1.0 + np.abs(a.value)
    return _unary(a, a.value / denom, lambda g: g / (denom * denom))


def silu(a: Node) -> Node:
    sig = 1.0 / (1.0 + np.exp(-a.value))
    out = a.value * sig
    return _unary(a, out, lambda g: g * sig * (1.0 + a.value * (1.0 - sig)))


def square(a: Node) -> Node:
    return _unary(a, a.value * a.value, lambda g: g * (2.0 * a.value))


def matmul(a, w) -> Node:
    """a @ w with a of shape (..., n) and w strictly 2-D (n, m)."""
    va, na = _lift(a)
    vw, nw = _lift(w)
    out = va @ vw
    tape = (na or nw).tape
    edges = []
    if na is not None:
        edges.append((na.index, lambda g: g @ vw.T))
    if nw is not None:
        edges.append(
            (nw.index, lambda g: va.reshape(-1, vw.shape[0]).T @ g.reshape(-1, vw.shape[1]))
        )
    return tape._record(out, tuple(edges))


def linear(x, w, b) -> Node:
    """Fused affine map x @ w + b; one tape record instead of two."""
    vx, nx = _lift(x)
    vw, nw = _lift(w)
    vb, nb = _lift(b)
    out = vx @ vw + vb
    tape = (nx or nw or nb).tape
    edges = []
    if nx is not None:
        edges.append((nx.index, lambda g: g @ vw.T))
    if nw is not None:
        edges.append(
            (nw.index, lambda g: vx.reshape(-1, vw.shape[0]).T @ g.reshape(-1, vw.shape[1]))
        )
    if nb is not None:
        edges.append((nb.index, lambda g: _unbroadcast(g, vb.shape)))
    return tape._record(out, tuple(edges))


def tensor_sum(a: Node, axis=None, keepdims: bool = False) -> Node:
    out = a.value.sum(axis=axis, keepdims=keepdims)

    def vjp(g):
        if axis is not None and not keepdims:
            g = np.expand_dims(g, axis)
        return np.broadcast_to(g, a.value.shape)

    return _unary(a, out, vjp)


def mean(a: Node, axis=None, keepdims: bool = False) -> Node:
    count = a.value.size if axis is None else a.value.shape[axis]
    out = a.value.mean(axis=axis, keepdims=keepdims)

    def vjp(g):
        if axis is not None and not keepdims:
            g = np.expand_dims(g, axis)
        return np.broadcast_to(g, a.value.shape) / count

    return _unary(a, out, vjp)


def reshape(a: Node, shape) -> Node:
    return _unary(a, a.value.reshape(shape), lambda g: g.reshape(a.value.shape))


def take(a: Node, index) -> Node:
    """Basic or integer-array indexing along the first axes."""

    def vjp(g):
        out = np.zeros_like(a.value)
        np.add.at(out, index, g)
        return out

    return _unary(a, a.value[index], vjp)


def concat(nodes: Sequence[Node], axis: int = 0) -> Node:
    values = [n.value for n in nodes]
    out = np.concatenate(values, axis=axis)
    tape = nodes[0].tape
    sizes = [v.shape[axis] for v in values]
    offsets = np.cumsum([0] + sizes)
    edges = []
    for n, lo, hi in zip(nodes, offsets[:-1], offsets[1:]):
        sl = [slice(None)] * out.ndim
        sl[axis] = slice(lo, hi)
        edges.append((n.index, lambda g, sl=tuple(sl): g[sl]))
    return tape._record(out, tuple(edges))


@dataclass(frozen=True)
class ComplexPair:
    """A complex tensor as two real tensors (nodes or arrays)."""

    re: object
    im: object


def complex_mul(a: ComplexPair, b: ComplexPair) -> ComplexPair:
    return ComplexPair(
        re=sub(mul(a.re, b.re), mul(a.im, b.im)),
        im=add(mul(a.re, b.im), mul(a.im, b.re)),
    )


def complex_div(a: ComplexPair, b: ComplexPair) -> ComplexPair:
    denom = add(mul(b.re, b.re), mul(b.im, b.im))
    return ComplexPair(
        re=div(add(mul(a.re, b.re), mul(a.im, b.im)), denom),
        im=div(sub(mul(a.im, b.re), mul(a.re, b.im)), denom),
    )


ACTIVATIONS: dict[str, Callable[[Node], Node]] = {
    "tanh": tanh,
    "softsign": softsign,
    "silu": silu,
    "sin": sin,
}


@dataclass(frozen=True)
class MlpSpec:
    """Shape of a multilayer perceptron: affine layers with a fixed activation."""

    input_dim: int
    output_dim: int
    hidden_dim: int
    layer_count: int
    activation: str = "tanh"

    def __post_init__(self):
        for name in ("input_dim", "output_dim", "hidden_dim"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")
        if self.layer_count < 1:
            raise ValueError("layer_count must be >= 1")
        if self.activation not in ACTIVATIONS:
            raise ValueError(f"unknown activation {self.activation!r}")

    def layer_dims(self) -> list[tuple[int, int]]:
        if self.layer_count == 1:
            return [(self.input_dim, self.output_dim)]
        dims = [(self.input_dim, self.hidden_dim)]
        dims += [(self.hidden_dim, self.hidden_dim)] * (self.layer_count - 2)
        dims.append((self.hidden_dim, self.output_dim))
        return dims


def init_mlp(spec: MlpSpec, rng: np.random.Generator, prefix: str) -> list[Parameter]:
    """Uniform +-sqrt(1/fan_in) initialization for weights and biases."""
    params = []
    for i, (fan_in, fan_out) in enumerate(spec.layer_dims()):
        bound = np.sqrt(1.0 / fan_in)
        params.append(Parameter.of(rng.uniform(-bound, bound, (fan_in, fan_out)), f"{prefix}.w{i}"))
        params.append(Parameter.of(rng.uniform(-bound, bound, fan_out), f"{prefix}.b{i}"))
    return params


def mlp_forward(spec: MlpSpec, params: Sequence[Parameter | Node], x, tape: Tape | None = None):
    """Run the MLP; activation between affine layers, linear output head."""
    if tape is None:
        if isinstance(x, Node):
            tape = x.tape
        else:
            raise ValueError("pass a tape when the input is a plain array")
    nodes = [p if isinstance(p, Node) else tape.param(p) for p in params]
    act = ACTIVATIONS[spec.activation]
    n_layers = len(nodes) // 2
    out = x
    for i in range(n_layers):
        out = linear(out, nodes[2 * i], nodes[2 * i + 1])
        if i < n_layers - 1:
            out = act(out)
    return out


@dataclass
class AdamState:
    """First/second moment buffers plus the shared step counter."""

    m: dict = field(default_factory=dict)
    v: dict = field(default_factory=dict)
    step: int = 0

    @classmethod
    def for_params(cls, params: Sequence[Parameter]) -> "AdamState":
        state = cls()
        for p in params:
            state.m[p.identifier] = np.zeros_like(p.value)
            state.v[p.identifier] = np.zeros_like(p.value)
        return state


def adam_step(
    params: Sequence[Parameter],
    state: AdamState,
    lr: float,
    beta1: float = 0.9,
    beta2: float = 0.999,
    eps: float = 1e-8,
) -> None:
    """One Adam update from the gradients stored on the parameters."""
    state.step += 1
    t = state.step
    for p in params:
        g = p.gradient
        m = state.m[p.identifier] = beta1 * state.m[p.identifier] + (1 - beta1) * g
        v = state.v[p.identifier] = beta2 * state.v[p.identifier] + (1 - beta2) * g * g
        mhat = m / (1 - beta1**t)
        vhat = v / (1 - beta2**t)
        p.value = p.value - lr * mhat / (np.sqrt(vhat) + eps)


def zero_gradients(params: Sequence[Parameter]) -> None:
    for p in params:
        p.gradient = np.zeros_like(p.value)


def clip_gradients(params: Sequence[Parameter], max_norm: float = 10.0) -> float:
    """Scale all gradients down if their global L2 norm exceeds max_norm."""
    total = 0.0
    for p in params:
        total += float(np.sum(p.gradient * p.gradient))
    norm = np.sqrt(total)
    if norm > max_norm:
        scale = max_norm / norm
        for p in params:
            p.gradient = p.gradient * scale
    return norm


def grad_check(f: Callable[[Node], Node], point: np.ndarray, h: float = 1e-5) -> float:
    """Max elementwise relative error of reverse-mode vs central differences.

    `f` maps a leaf node to a scalar node and is re-traced on a fresh
    tape per evaluation.
    """
    point = np.asarray(point, dtype=float)
    tape = Tape()
    x = tape.leaf(point)
    loss = f(x)
    if loss.value.size != 1:
        raise ValueError("grad_check needs a scalar-valued function")
    (g,) = tape.backward(loss, wrt=[x])

    def value_at(p: np.ndarray) -> float:
        t2 = Tape()
        return float(f(t2.leaf(p)).value)

    fd = np.zeros_like(point)
    flat = fd.reshape(-1)
    for i in range(point.size):
        step = np.zeros_like(point).reshape(-1)
        step[i] = h
        step = step.reshape(point.shape)
        flat[i] = (value_at(point + step) - value_at(point - step)) / (2.0 * h)
    scale = max(1.0, float(np.max(np.abs(g))), float(np.max(np.abs(fd))))
    rel = np.abs(g - fd) / (np.abs(g) + np.abs(fd) + 1e-8 * scale)
    return float(np.max(rel))


def save_params(path, params: Sequence[Parameter]) -> None:
    """Checkpoint as a flat name -> array map; bit-exact round trip."""
    np.savez(path, **{p.identifier: p.value for p in params})


def load_params(path, params: Sequence[Parameter]) -> None:
    """Restore values in place; every parameter must be present."""
    with np.load(path) as data:
        for p in params:
            if p.identifier not in data:
                raise KeyError(f"checkpoint missing parameter {p.identifier!r}")
            loaded = data[p.identifier]
            if loaded.shape != p.value.shape:
                raise ValueError(
                    f"checkpoint shape {loaded.shape} != {p.value.shape} "
                    f"for {p.identifier!r}"
                )
            p.value = loaded.astype(float)

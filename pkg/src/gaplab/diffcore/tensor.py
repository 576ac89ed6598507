"""Minimal reverse-mode autodiff over a fixed primitive set.

Everything is float64. Graphs are built by the op functions below; each op
returns a Tensor whose `_backward` closure scatters the incoming gradient to
its parents. `Tensor.backward()` runs a topological sweep from a scalar loss.

The primitive set is deliberately small: linear maps, embedding lookups, a
whole-sequence LSTM with a hand-derived backward, softmax, floored log, and
elementwise/reduction glue. Policy and loss code composes these; nothing else
differentiates.
"""

from __future__ import annotations

import numpy as np

PROB_FLOOR = 1e-8


class DiffcoreError(Exception):
    pass


class ShapeMismatch(DiffcoreError):
    pass


class NonFiniteLoss(DiffcoreError):
    pass


def _f64(x) -> np.ndarray:
    return np.asarray(x, dtype=np.float64)


class Tensor:
    """Node in the computation graph.

    data : float64 ndarray (scalars are shape-() arrays)
    grad : accumulated gradient, allocated lazily during backward
    """

    __slots__ = ("data", "grad", "requires_grad", "_parents", "_backward")

    def __init__(self, data, requires_grad: bool = False, _parents=()):
        self.data = _f64(data)
        self.grad = None
        self.requires_grad = requires_grad or any(p.requires_grad for p in _parents)
        self._parents = _parents
        self._backward = None

    @property
    def shape(self):
        return self.data.shape

    def item(self) -> float:
        return float(self.data)

    def _accum(self, g: np.ndarray) -> None:
        if self.grad is None:
            self.grad = np.array(g, dtype=np.float64, copy=True)
        else:
            self.grad += g

    def backward(self) -> None:
        if self.data.shape != ():
            raise ShapeMismatch("backward() starts from a scalar loss")
        topo: list[Tensor] = []
        visited = set()
        stack: list[tuple[Tensor, bool]] = [(self, False)]
        while stack:
            node, processed = stack.pop()
            if processed:
                topo.append(node)
                continue
            if id(node) in visited or not node.requires_grad:
                continue
            visited.add(id(node))
            stack.append((node, True))
            for p in node._parents:
                if p.requires_grad and id(p) not in visited:
                    stack.append((p, False))
        self.grad = np.array(1.0)
        for node in reversed(topo):
            if node._backward is not None and node.grad is not None:
                node._backward(node.grad)

    def __repr__(self):
        return f"Tensor(shape={self.data.shape}, requires_grad={self.requires_grad})"


def as_tensor(x) -> Tensor:
    return x if isinstance(x, Tensor) else Tensor(x)


def _unbroadcast(g: np.ndarray, shape: tuple) -> np.ndarray:
    """Reduce a broadcast gradient back to `shape`."""
    if g.shape == shape:
        return g
    extra = g.ndim - len(shape)
    if extra:
        g = g.sum(axis=tuple(range(extra)))
    axes = tuple(i for i, n in enumerate(shape) if n == 1 and g.shape[i] != 1)
    if axes:
        g = g.sum(axis=axes, keepdims=True)
    return g


# ---------------------------------------------------------------- elementwise

def add(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    out = Tensor(a.data + b.data, _parents=(a, b))

    def bwd(g):
        if a.requires_grad:
            a._accum(_unbroadcast(g, a.data.shape))
        if b.requires_grad:
            b._accum(_unbroadcast(g, b.data.shape))

    out._backward = bwd
    return out


def sub(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    out = Tensor(a.data - b.data, _parents=(a, b))

    def bwd(g):
        if a.requires_grad:
            a._accum(_unbroadcast(g, a.data.shape))
        if b.requires_grad:
            b._accum(_unbroadcast(-g, b.data.shape))

    out._backward = bwd
    return out


def mul(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    out = Tensor(a.data * b.data, _parents=(a, b))

    def bwd(g):
        if a.requires_grad:
            a._accum(_unbroadcast(g * b.data, a.data.shape))
        if b.requires_grad:
            b._accum(_unbroadcast(g * a.data, b.data.shape))

    out._backward = bwd
    return out


def neg(a) -> Tensor:
    a = as_tensor(a)
    out = Tensor(-a.data, _parents=(a,))
    out._backward = lambda g: a._accum(-g) if a.requires_grad else None
    return out


def scale(a, s: float) -> Tensor:
    a = as_tensor(a)
    s = float(s)
    out = Tensor(a.data * s, _parents=(a,))
    out._backward = lambda g: a._accum(g * s) if a.requires_grad else None
    return out


def square(a) -> Tensor:
    a = as_tensor(a)
    out = Tensor(a.data * a.data, _parents=(a,))
    out._backward = lambda g: a._accum(2.0 * a.data * g) if a.requires_grad else None
    return out


def minimum(a, b) -> Tensor:
    """Elementwise min; on ties the gradient goes to `a`."""
    a, b = as_tensor(a), as_tensor(b)
    take_a = a.data <= b.data
    out = Tensor(np.where(take_a, a.data, b.data), _parents=(a, b))

    def bwd(g):
        if a.requires_grad:
            a._accum(_unbroadcast(np.where(take_a, g, 0.0), a.data.shape))
        if b.requires_grad:
            b._accum(_unbroadcast(np.where(take_a, 0.0, g), b.data.shape))

    out._backward = bwd
    return out


def clip_const(a, lo: float, hi: float) -> Tensor:
    """Clip to constants; gradient passes only through the interior."""
    a = as_tensor(a)
    inside = (a.data > lo) & (a.data < hi)
    out = Tensor(np.clip(a.data, lo, hi), _parents=(a,))
    out._backward = lambda g: a._accum(np.where(inside, g, 0.0)) if a.requires_grad else None
    return out


def log_floor(a, floor: float = PROB_FLOOR) -> Tensor:
    """log(max(a, floor)); gradient is 1/a above the floor, 0 below."""
    a = as_tensor(a)
    clamped = np.maximum(a.data, floor)
    above = a.data > floor
    out = Tensor(np.log(clamped), _parents=(a,))
    safe = np.where(above, a.data, 1.0)
    out._backward = lambda g: a._accum(np.where(above, g, 0.0) / safe) if a.requires_grad else None
    return out


# ---------------------------------------------------------------- reductions

def sum_(a, axis=None) -> Tensor:
    a = as_tensor(a)
    out = Tensor(a.data.sum(axis=axis), _parents=(a,))

    def bwd(g):
        if not a.requires_grad:
            return
        if axis is None:
            a._accum(np.broadcast_to(g, a.data.shape))
        else:
            a._accum(np.broadcast_to(np.expand_dims(g, axis), a.data.shape))

    out._backward = bwd
    return out


def mean_(a, axis=None) -> Tensor:
    a = as_tensor(a)
    n = a.data.size if axis is None else a.data.shape[axis]
    out = Tensor(a.data.mean(axis=axis), _parents=(a,))

    def bwd(g):
        if not a.requires_grad:
            return
        if axis is None:
            a._accum(np.broadcast_to(g / n, a.data.shape))
        else:
            a._accum(np.broadcast_to(np.expand_dims(g / n, axis), a.data.shape))

    out._backward = bwd
    return out


def dot(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    if a.data.ndim != 1 or b.data.ndim != 1:
        raise ShapeMismatch("dot expects 1-D vectors")
    out = Tensor(a.data @ b.data, _parents=(a, b))

    def bwd(g):
        if a.requires_grad:
            a._accum(g * b.data)
        if b.requires_grad:
            b._accum(g * a.data)

    out._backward = bwd
    return out


def reshape(a, shape) -> Tensor:
    a = as_tensor(a)
    out = Tensor(a.data.reshape(shape), _parents=(a,))
    out._backward = lambda g: a._accum(g.reshape(a.data.shape)) if a.requires_grad else None
    return out


# ------------------------------------------------------------------- linear

def linear(x, w, b=None) -> Tensor:
    """x @ w (+ b). x: (n, d), w: (d, m), b: (m,)."""
    x, w = as_tensor(x), as_tensor(w)
    if x.data.ndim != 2 or w.data.ndim != 2:
        raise ShapeMismatch("linear expects x (n,d) and w (d,m)")
    if x.data.shape[1] != w.data.shape[0]:
        raise ShapeMismatch(f"linear: x {x.data.shape} incompatible with w {w.data.shape}")
    y = x.data @ w.data
    parents = (x, w)
    if b is not None:
        b = as_tensor(b)
        y = y + b.data
        parents = (x, w, b)
    out = Tensor(y, _parents=parents)

    def bwd(g):
        if x.requires_grad:
            x._accum(g @ w.data.T)
        if w.requires_grad:
            w._accum(x.data.T @ g)
        if b is not None and b.requires_grad:
            b._accum(g.sum(axis=0))

    out._backward = bwd
    return out


def embedding(table, idx) -> Tensor:
    """Row lookup. table: (V, e), idx: int array of any shape -> idx.shape + (e,)."""
    table = as_tensor(table)
    idx = np.asarray(idx)
    if not np.issubdtype(idx.dtype, np.integer):
        raise ShapeMismatch("embedding indices must be integers")
    out = Tensor(table.data[idx], _parents=(table,))

    def bwd(g):
        if table.requires_grad:
            if table.grad is None:
                table.grad = np.zeros_like(table.data)
            np.add.at(table.grad, idx.reshape(-1), g.reshape(-1, table.data.shape[1]))

    out._backward = bwd
    return out


def grid_embed(t_type, t_color, t_state, idx) -> Tensor:
    """Embed a grid of (type, color, state) ids and flatten.

    idx: (n, k, 3) ints; each table (V, e). Output (n, k*3*e) with the three
    channel embeddings concatenated per cell.
    """
    tables = (as_tensor(t_type), as_tensor(t_color), as_tensor(t_state))
    idx = np.asarray(idx)
    if idx.ndim != 3 or idx.shape[2] != 3:
        raise ShapeMismatch("grid_embed expects idx of shape (n, k, 3)")
    n, k, _ = idx.shape
    e = tables[0].data.shape[1]
    parts = np.empty((n, k, 3 * e), dtype=np.float64)
    for c, tab in enumerate(tables):
        parts[:, :, c * e:(c + 1) * e] = tab.data[idx[:, :, c]]
    out = Tensor(parts.reshape(n, k * 3 * e), _parents=tables)

    def bwd(g):
        g3 = g.reshape(n, k, 3 * e)
        for c, tab in enumerate(tables):
            if tab.requires_grad:
                if tab.grad is None:
                    tab.grad = np.zeros_like(tab.data)
                np.add.at(tab.grad, idx[:, :, c].reshape(-1),
                          g3[:, :, c * e:(c + 1) * e].reshape(-1, e))

    out._backward = bwd
    return out


# ------------------------------------------------------------------ softmax

def softmax(x) -> Tensor:
    """Row-wise softmax over the last axis."""
    x = as_tensor(x)
    z = x.data - x.data.max(axis=-1, keepdims=True)
    e = np.exp(z)
    s = e / e.sum(axis=-1, keepdims=True)
    out = Tensor(s, _parents=(x,))

    def bwd(g):
        if x.requires_grad:
            inner = (g * s).sum(axis=-1, keepdims=True)
            x._accum(s * (g - inner))

    out._backward = bwd
    return out


def gather_rows(x, idx) -> Tensor:
    """x: (n, m), idx: (n,) ints -> (n,) picking x[i, idx[i]]."""
    x = as_tensor(x)
    idx = np.asarray(idx)
    if x.data.ndim != 2 or idx.shape != (x.data.shape[0],):
        raise ShapeMismatch("gather_rows expects x (n,m) and idx (n,)")
    rows = np.arange(x.data.shape[0])
    out = Tensor(x.data[rows, idx], _parents=(x,))

    def bwd(g):
        if x.requires_grad:
            if x.grad is None:
                x.grad = np.zeros_like(x.data)
            np.add.at(x.grad, (rows, idx), g)

    out._backward = bwd
    return out


# --------------------------------------------------------------------- LSTM

def _sigmoid(z: np.ndarray) -> np.ndarray:
    # clip keeps exp in range; saturated gates have ~0 gradient anyway
    return 1.0 / (1.0 + np.exp(-np.clip(z, -60.0, 60.0)))


def lstm_sequence(x, h0, c0, wx, wh, b, begin=None) -> Tensor:
    """Single-layer LSTM over a full (T, B, d) sequence; returns hidden states (T, B, H).

    Gate order in the weight matrices is (input, forget, cell, output); no
    peepholes. `begin` is an optional (T, B) float mask, 1.0 where the lane's
    episode starts at step t: the carried (h, c) are zeroed before that step,
    and gradients do not flow across the reset.

    The whole-sequence formulation exists so the input projection and the
    weight gradients run as a handful of large matmuls instead of per-step
    small ones.
    """
    x, h0, c0, wx, wh, b = map(as_tensor, (x, h0, c0, wx, wh, b))
    t_len, n_b, d = x.data.shape
    hdim = wh.data.shape[0]
    if wx.data.shape != (d, 4 * hdim) or wh.data.shape != (hdim, 4 * hdim) or b.data.shape != (4 * hdim,):
        raise ShapeMismatch("lstm_sequence weight shapes inconsistent")
    if h0.data.shape != (n_b, hdim) or c0.data.shape != (n_b, hdim):
        raise ShapeMismatch("lstm_sequence state shapes inconsistent")
    keep = None
    if begin is not None:
        keep = 1.0 - np.asarray(begin, dtype=np.float64)[:, :, None]  # (T, B, 1)

    xp = (x.data.reshape(t_len * n_b, d) @ wx.data).reshape(t_len, n_b, 4 * hdim) + b.data

    hs = np.empty((t_len, n_b, hdim))
    # per-step saves for backward
    sv_i = np.empty((t_len, n_b, hdim))
    sv_f = np.empty((t_len, n_b, hdim))
    sv_g = np.empty((t_len, n_b, hdim))
    sv_o = np.empty((t_len, n_b, hdim))
    sv_tc = np.empty((t_len, n_b, hdim))
    sv_hprev = np.empty((t_len, n_b, hdim))
    sv_cprev = np.empty((t_len, n_b, hdim))

    h = h0.data
    c = c0.data
    for t in range(t_len):
        if keep is not None:
            h = h * keep[t]
            c = c * keep[t]
        sv_hprev[t] = h
        sv_cprev[t] = c
        z = xp[t] + h @ wh.data
        i = _sigmoid(z[:, :hdim])
        f = _sigmoid(z[:, hdim:2 * hdim])
        g_ = np.tanh(z[:, 2 * hdim:3 * hdim])
        o = _sigmoid(z[:, 3 * hdim:])
        c = f * c + i * g_
        tc = np.tanh(c)
        h = o * tc
        sv_i[t], sv_f[t], sv_g[t], sv_o[t], sv_tc[t] = i, f, g_, o, tc
        hs[t] = h

    out = Tensor(hs, _parents=(x, h0, c0, wx, wh, b))

    def bwd(grad_hs):
        dz_all = np.empty((t_len, n_b, 4 * hdim))
        dh_next = np.zeros((n_b, hdim))
        dc_next = np.zeros((n_b, hdim))
        wh_t = wh.data.T
        for t in range(t_len - 1, -1, -1):
            i, f, g_, o, tc = sv_i[t], sv_f[t], sv_g[t], sv_o[t], sv_tc[t]
            dh = grad_hs[t] + dh_next
            do = dh * tc
            dc = dc_next + dh * o * (1.0 - tc * tc)
            di = dc * g_
            df = dc * sv_cprev[t]
            dg = dc * i
            dz = dz_all[t]
            dz[:, :hdim] = di * i * (1.0 - i)
            dz[:, hdim:2 * hdim] = df * f * (1.0 - f)
            dz[:, 2 * hdim:3 * hdim] = dg * (1.0 - g_ * g_)
            dz[:, 3 * hdim:] = do * o * (1.0 - o)
            dh_next = dz @ wh_t
            dc_next = dc * f
            if keep is not None:
                dh_next = dh_next * keep[t]
                dc_next = dc_next * keep[t]
        dz_flat = dz_all.reshape(t_len * n_b, 4 * hdim)
        if wx.requires_grad:
            wx._accum(x.data.reshape(t_len * n_b, d).T @ dz_flat)
        if wh.requires_grad:
            wh._accum(sv_hprev.reshape(t_len * n_b, hdim).T @ dz_flat)
        if b.requires_grad:
            b._accum(dz_flat.sum(axis=0))
        if x.requires_grad:
            x._accum((dz_flat @ wx.data.T).reshape(t_len, n_b, d))
        if h0.requires_grad:
            h0._accum(dh_next)
        if c0.requires_grad:
            c0._accum(dc_next)

    out._backward = bwd
    return out


def lstm_step_np(x, h, c, wx, wh, b):
    """No-graph single LSTM step on raw arrays; used on the rollout hot path."""
    z = x @ wx + h @ wh + b
    hdim = h.shape[1]
    i = _sigmoid(z[:, :hdim])
    f = _sigmoid(z[:, hdim:2 * hdim])
    g = np.tanh(z[:, 2 * hdim:3 * hdim])
    o = _sigmoid(z[:, 3 * hdim:])
    c_new = f * c + i * g
    h_new = o * np.tanh(c_new)
    return h_new, c_new


# ------------------------------------------------------- scalar divergences

def cross_entropy(p, q, floor: float = PROB_FLOOR) -> float:
    """-sum(p * log(max(q, floor))) for 1-D probability vectors."""
    p = _f64(p)
    q = _f64(q)
    return float(-(p * np.log(np.maximum(q, floor))).sum())


def kl_divergence(p, q, floor: float = PROB_FLOOR) -> float:
    """sum(p * (log p - log q)) with both logs floored; 0*log0 := 0."""
    p = _f64(p)
    q = _f64(q)
    lp = np.log(np.maximum(p, floor))
    lq = np.log(np.maximum(q, floor))
    return float(np.where(p > 0.0, p * (lp - lq), 0.0).sum())


def softmax_np(logits: np.ndarray) -> np.ndarray:
    """Plain numpy row softmax (shared by graph-free paths)."""
    z = logits - logits.max(axis=-1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)


# -------------------------------------------------------------- param store

class ParamStore(dict):
    """Ordered name -> Tensor(requires_grad=True) mapping."""

    def add(self, name: str, data: np.ndarray) -> Tensor:
        if name in self:
            raise KeyError(f"duplicate parameter {name!r}")
        t = Tensor(data, requires_grad=True)
        self[name] = t
        return t

    def zero_grads(self) -> None:
        for t in self.values():
            t.grad = None

    def flatten_grads(self) -> np.ndarray:
        return np.concatenate([
            (t.grad if t.grad is not None else np.zeros_like(t.data)).reshape(-1)
            for t in self.values()
        ])

    def copy_data(self) -> dict:
        return {k: t.data.copy() for k, t in self.items()}

    def load_data(self, arrays: dict) -> None:
        for k, t in self.items():
            if k not in arrays:
                raise KeyError(f"missing parameter {k!r}")
            if arrays[k].shape != t.data.shape:
                raise ShapeMismatch(f"parameter {k!r}: {arrays[k].shape} != {t.data.shape}")
            t.data = np.asarray(arrays[k], dtype=np.float64).copy()


def forward_backward(program, params: ParamStore, inputs: dict, loss_selector=None):
    """Run `program(params, **inputs)`, backprop from the selected scalar.

    Returns the loss value; gradients land in `params[...].grad`. The program
    may return a Tensor or a dict of named Tensors (then `loss_selector` picks
    the loss by name or callable).
    """
    out = program(params, **inputs)
    if isinstance(out, Tensor):
        node = out
    elif callable(loss_selector):
        node = loss_selector(out)
    else:
        node = out[loss_selector]
    val = float(node.data)
    if not np.isfinite(val):
        raise NonFiniteLoss(f"loss is {val}")
    params.zero_grads()
    node.backward()
    return val

"""Stacked LSTM with an affine per-timestep head, exact forward and BPTT.

Gate layout inside the fused [4H] dimension is (input, forget, cell, output).
Initial hidden/cell states are zero for every window; windows overlap, so
carrying state across them would double-count timesteps.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .numerics import sigmoid

HEAD_ACTIVATIONS = ("tanh", "sigmoid", "none")


@dataclass
class LstmStackParams:
    """All weights of a stacked LSTM plus the output projection.

    Per layer l: W[l] is [4H, D_l] on the layer input, U[l] is [4H, H] on the
    recurrent state, b[l] is [4H]. The head maps the top layer's hidden state
    at every timestep through V [out_dim, H] and bias c.
    """

    input_dim: int
    hidden_dim: int
    depth: int
    output_dim: int
    W: list[np.ndarray] = field(default_factory=list)
    U: list[np.ndarray] = field(default_factory=list)
    b: list[np.ndarray] = field(default_factory=list)
    V: np.ndarray | None = None
    c: np.ndarray | None = None

    def tensors(self) -> list[np.ndarray]:
        """Flat parameter list in a fixed order (W, U, b per layer, then V, c)."""
        out: list[np.ndarray] = []
        for l in range(self.depth):
            out.extend((self.W[l], self.U[l], self.b[l]))
        out.extend((self.V, self.c))
        return out

    def replace_tensors(self, tensors: list[np.ndarray]) -> "LstmStackParams":
        """New params object from a flat list in tensors() order."""
        if len(tensors) != 3 * self.depth + 2:
            raise ValueError("wrong tensor count for this stack")
        p = LstmStackParams(self.input_dim, self.hidden_dim, self.depth, self.output_dim)
        for l in range(self.depth):
            p.W.append(tensors[3 * l])
            p.U.append(tensors[3 * l + 1])
            p.b.append(tensors[3 * l + 2])
        p.V = tensors[-2]
        p.c = tensors[-1]
        return p

    def zeros_like(self) -> "LstmStackParams":
        return self.replace_tensors([np.zeros_like(t) for t in self.tensors()])

    def copy(self) -> "LstmStackParams":
        return self.replace_tensors([t.copy() for t in self.tensors()])


def init_params(rng: np.random.Generator, input_dim: int, hidden_dim: int, depth: int,
                output_dim: int) -> LstmStackParams:
    """Uniform(-r, r) weights with r = 1/sqrt(H); forget-gate biases start at 1."""
    H = hidden_dim
    r = 1.0 / np.sqrt(H)
    p = LstmStackParams(input_dim, H, depth, output_dim)
    for l in range(depth):
        d_in = input_dim if l == 0 else H
        p.W.append(rng.uniform(-r, r, size=(4 * H, d_in)))
        p.U.append(rng.uniform(-r, r, size=(4 * H, H)))
        bias = np.zeros(4 * H)
        bias[H:2 * H] = 1.0
        p.b.append(bias)
    p.V = rng.uniform(-r, r, size=(output_dim, H))
    p.c = np.zeros(output_dim)
    return p


def lstm_forward(params: LstmStackParams, inputs: np.ndarray, head_activation: str = "none"):
    """Run the stack over a batch of sequences.

    inputs: [batch, s_w, input_dim]. Returns (outputs [batch, s_w, out_dim],
    cache); the cache holds every gate/state the backward pass needs.
    """
    if head_activation not in HEAD_ACTIVATIONS:
        raise ValueError(f"unknown head activation {head_activation!r}")
    x = np.asarray(inputs, dtype=np.float64)
    if x.ndim != 3 or x.shape[2] != params.input_dim:
        raise ValueError(f"expected inputs [batch, s_w, {params.input_dim}], got {x.shape}")
    B, T, _ = x.shape
    H = params.hidden_dim
    layers = []
    layer_in = x
    for l in range(params.depth):
        W, U, b = params.W[l], params.U[l], params.b[l]
        i_g = np.empty((B, T, H))
        f_g = np.empty((B, T, H))
        g_g = np.empty((B, T, H))
        o_g = np.empty((B, T, H))
        c_s = np.empty((B, T, H))
        ct_s = np.empty((B, T, H))
        h_s = np.empty((B, T, H))
        h_prev = np.zeros((B, H))
        c_prev = np.zeros((B, H))
        # precompute the input contribution for all timesteps at once
        pre_in = layer_in @ W.T + b
        for t in range(T):
            pre = pre_in[:, t] + h_prev @ U.T
            i_g[:, t] = sigmoid(pre[:, :H])
            f_g[:, t] = sigmoid(pre[:, H:2 * H])
            g_g[:, t] = np.tanh(pre[:, 2 * H:3 * H])
            o_g[:, t] = sigmoid(pre[:, 3 * H:])
            c_prev = f_g[:, t] * c_prev + i_g[:, t] * g_g[:, t]
            c_s[:, t] = c_prev
            ct_s[:, t] = np.tanh(c_prev)
            h_prev = o_g[:, t] * ct_s[:, t]
            h_s[:, t] = h_prev
        layers.append({"x": layer_in, "i": i_g, "f": f_g, "g": g_g, "o": o_g,
                       "c": c_s, "ct": ct_s, "h": h_s})
        layer_in = h_s
    z = layer_in @ params.V.T + params.c
    if head_activation == "tanh":
        y = np.tanh(z)
    elif head_activation == "sigmoid":
        y = sigmoid(z)
    else:
        y = z
    cache = {"layers": layers, "y": y, "head_activation": head_activation,
             "shape": (B, T, params.input_dim)}
    return y, cache


def lstm_backward(params: LstmStackParams, cache: dict, output_gradients: np.ndarray):
    """BPTT given dLoss/dOutputs (post-activation). Returns (grads, input grads).

    grads is an LstmStackParams holding dLoss/dParam for every tensor.
    """
    y = cache["y"]
    dy = np.asarray(output_gradients, dtype=np.float64)
    if dy.shape != y.shape:
        raise ValueError(f"output gradient shape {dy.shape} != output shape {y.shape}")
    act = cache["head_activation"]
    if act == "tanh":
        dz = dy * (1.0 - y * y)
    elif act == "sigmoid":
        dz = dy * y * (1.0 - y)
    else:
        dz = dy
    grads = params.zeros_like()
    H = params.hidden_dim
    layers = cache["layers"]
    top = layers[-1]["h"]
    B, T, _ = top.shape
    grads.V[:] = np.einsum("bto,bth->oh", dz, top)
    grads.c[:] = dz.sum(axis=(0, 1))
    dh_seq = dz @ params.V

    for l in range(params.depth - 1, -1, -1):
        cl = layers[l]
        W, U = params.W[l], params.U[l]
        x_l = cl["x"]
        dW = grads.W[l]
        dU = grads.U[l]
        db = grads.b[l]
        dx_seq = np.zeros_like(x_l)
        dh_next = np.zeros((B, H))
        dc_next = np.zeros((B, H))
        for t in range(T - 1, -1, -1):
            dh = dh_seq[:, t] + dh_next
            i_g, f_g, g_g, o_g = cl["i"][:, t], cl["f"][:, t], cl["g"][:, t], cl["o"][:, t]
            ct = cl["ct"][:, t]
            c_prev = cl["c"][:, t - 1] if t > 0 else np.zeros((B, H))
            do = dh * ct
            dc = dh * o_g * (1.0 - ct * ct) + dc_next
            df = dc * c_prev
            di = dc * g_g
            dg = dc * i_g
            dc_next = dc * f_g
            dpre = np.concatenate([
                di * i_g * (1.0 - i_g),
                df * f_g * (1.0 - f_g),
                dg * (1.0 - g_g * g_g),
                do * o_g * (1.0 - o_g),
            ], axis=1)
            dW += dpre.T @ x_l[:, t]
            h_prev = cl["h"][:, t - 1] if t > 0 else np.zeros((B, H))
            dU += dpre.T @ h_prev
            db += dpre.sum(axis=0)
            dx_seq[:, t] = dpre @ W
            dh_next = dpre @ U
        dh_seq = dx_seq
    return grads, dh_seq

#!/usr/bin/env python3
"""Reference forward pass for MLP weight files, used to freeze test values.

Usage:
    mlp_forward.py write-data <dir>   # regenerate tests/data/mlp_*.json
    mlp_forward.py eval <weights.json> # print phi and grad_x at the probe points

The encoding mirrors the weight-file contract: per coordinate c, the values
c, sin(2^k pi c), cos(2^k pi c) for k = 0..L-1, coordinates in x, y, z order,
latent code appended. Hidden layers use ReLU, the output is |y|, optionally
clamped at d_max.
"""

import json
import sys

import numpy as np

PROBES = np.array(
    [
        [0.0, 0.0, 0.0],
        [0.1, -0.2, 0.3],
        [-0.45, 0.25, 0.05],
        [0.7, 0.6, -0.5],
        [-0.33, -0.81, 0.12],
    ]
)


def encode(x, order):
    out = []
    for c in x:
        out.append(c)
        for k in range(order):
            out.append(np.sin(2.0**k * np.pi * c))
            out.append(np.cos(2.0**k * np.pi * c))
    return np.array(out)


def forward(net, x, latent=None):
    z = np.array(net.get("latent", [0.0] * net["latent_dim"]) if latent is None else latent, dtype=float)
    a = np.concatenate([encode(x, net["encoding_order"]), z])
    n_layers = len(net["weights"])
    for i, (w, b) in enumerate(zip(net["weights"], net["biases"])):
        a = np.array(w, dtype=float) @ a + np.array(b, dtype=float)
        if i + 1 < n_layers:
            a = np.maximum(a, 0.0)
    y = abs(a[0])
    if net.get("d_max") is not None:
        y = min(y, net["d_max"])
    return y


def grad_x(net, x, h=1e-6):
    g = np.zeros(3)
    for k in range(3):
        e = np.zeros(3)
        e[k] = h
        g[k] = (forward(net, x + e) - forward(net, x - e)) / (2 * h)
    return g


def random_net(seed):
    rng = np.random.default_rng(seed)
    order, latent_dim = 2, 3
    sizes = [3 * (1 + 2 * order) + latent_dim, 16, 16, 1]
    weights, biases = [], []
    for i in range(len(sizes) - 1):
        scale = 1.0 / np.sqrt(sizes[i])
        weights.append((rng.standard_normal((sizes[i + 1], sizes[i])) * scale).tolist())
        biases.append((rng.standard_normal(sizes[i + 1]) * 0.1).tolist())
    return {
        "encoding_order": order,
        "encoding_basis": "raw+sincos_pow2_pi_per_coord",
        "layer_sizes": sizes,
        "weights": weights,
        "biases": biases,
        "latent_dim": latent_dim,
        "latent": rng.standard_normal(latent_dim).round(6).tolist(),
        "d_max": None,
    }


def plane_net():
    """|n.x - (z0 + 0.5 z1)| written as relu(s) + relu(-s), a true distance field."""
    order, latent_dim = 1, 2
    n = np.array([0.2, -0.3, 0.9])
    n = n / np.linalg.norm(n)
    in_dim = 3 * (1 + 2 * order) + latent_dim
    row = np.zeros(in_dim)
    for axis in range(3):
        row[axis * (1 + 2 * order)] = n[axis]
    row[-2], row[-1] = -1.0, -0.5
    return {
        "encoding_order": order,
        "encoding_basis": "raw+sincos_pow2_pi_per_coord",
        "layer_sizes": [in_dim, 2, 1],
        "weights": [[row.tolist(), (-row).tolist()], [[1.0, 1.0]]],
        "biases": [[0.0, 0.0], [0.0]],
        "latent_dim": latent_dim,
        "latent": [0.0123, 0.02],
        "d_max": None,
    }


def main():
    if len(sys.argv) == 3 and sys.argv[1] == "write-data":
        for name, net in (("mlp_random.json", random_net(20240611)), ("mlp_plane.json", plane_net())):
            with open(f"{sys.argv[2]}/{name}", "w") as f:
                json.dump(net, f, indent=1)
                f.write("\n")
        return
    if len(sys.argv) == 3 and sys.argv[1] == "eval":
        with open(sys.argv[2]) as f:
            net = json.load(f)
        for p in PROBES:
            g = grad_x(net, p)
            print(f"{{{{{p[0]:g}, {p[1]:g}, {p[2]:g}}}, {float(forward(net, p))!r}, {{{g[0]:.12g}, {g[1]:.12g}, {g[2]:.12g}}}}},")
        return
    print(__doc__)
    sys.exit(2)


if __name__ == "__main__":
    main()

"""Feed-forward DAG networks with piecewise-polynomial activations.

An architecture is a directed acyclic graph whose in-degree-0 nodes are the
inputs and whose unique out-degree-0 node is the output.  Layers are
recomputed from the edge list: a node sits one layer above its highest
predecessor.  Hidden nodes apply the activation to their affine
pre-activation; the output node is affine only.

Weights live in one flat vector with a canonical slot order: edges sorted by
``(to, from)``, then one bias per non-input node sorted by node id.
"""

from __future__ import annotations

import json
from bisect import bisect_right
from functools import cached_property

import numpy as np
from scipy import sparse

from .errors import InputShapeError, InvalidNumericError, ParseError, ValidationError

# rows of the node-value buffer times batch size kept per evaluation chunk
_EVAL_BUFFER = 1 << 22


class Activation:
    """Piecewise-polynomial activation on ``K = len(breakpoints) + 1`` pieces.

    ``pieces[k]`` holds ascending polynomial coefficients for the interval
    ``[breakpoints[k-1], breakpoints[k])``; each breakpoint belongs to the
    piece on its right, so the Heaviside activation gives ``sigma(0) = 1``.
    """

    def __init__(self, breakpoints, pieces):
        bps = [float(t) for t in breakpoints]
        polys = [tuple(float(c) for c in piece) for piece in pieces]
        if len(polys) < 2:
            raise ValidationError("activation pieces", "need K >= 2 pieces")
        if len(polys) != len(bps) + 1:
            raise ValidationError(
                "activation pieces", "expected len(breakpoints) + 1 coefficient lists"
            )
        if any(not np.isfinite(t) for t in bps) or any(
            not np.isfinite(c) for p in polys for c in p
        ):
            raise ValidationError("activation finiteness")
        if any(b <= a for a, b in zip(bps, bps[1:])):
            raise ValidationError("activation breakpoints", "must be strictly increasing")
        if any(len(p) == 0 for p in polys):
            raise ValidationError("activation pieces", "empty coefficient list")
        self.breakpoints = tuple(bps)
        self.pieces = tuple(polys)

    @classmethod
    def heaviside(cls):
        return cls([0.0], [[0.0], [1.0]])

    @classmethod
    def relu(cls):
        return cls([0.0], [[0.0], [0.0, 1.0]])

    @property
    def n_pieces(self):
        return len(self.pieces)

    @cached_property
    def degree(self):
        """Maximal polynomial degree nu over all pieces."""
        deg = 0
        for p in self.pieces:
            nz = [k for k, c in enumerate(p) if c != 0.0]
            if nz:
                deg = max(deg, nz[-1])
        return deg

    def scalar(self, z):
        coeffs = self.pieces[bisect_right(self.breakpoints, z)]
        acc = 0.0
        for c in reversed(coeffs):
            acc = acc * z + c
        return acc

    def __call__(self, z):
        z = np.asarray(z, dtype=float)
        if self.degree == 0:
            consts = np.array([p[0] for p in self.pieces])
            if len(self.breakpoints) == 1:
                return np.where(z >= self.breakpoints[0], consts[1], consts[0])
            return consts[np.searchsorted(self.breakpoints, z, side="right")]
        idx = np.searchsorted(self.breakpoints, z, side="right")
        out = np.empty_like(z)
        for k, coeffs in enumerate(self.pieces):
            mask = idx == k
            if not mask.any():
                continue
            zk = z[mask]
            acc = np.full_like(zk, coeffs[-1])
            for c in reversed(coeffs[:-1]):
                acc = acc * zk + c
            out[mask] = acc
        return out

    def __eq__(self, other):
        return (
            isinstance(other, Activation)
            and self.breakpoints == other.breakpoints
            and self.pieces == other.pieces
        )

    def __repr__(self):
        return f"Activation(breakpoints={list(self.breakpoints)}, pieces={[list(p) for p in self.pieces]})"


def _layer_assignment(n_nodes, src, dst):
    """Longest-path layer of every node; raises on cycles."""
    layer = np.zeros(n_nodes, dtype=np.int64)
    if len(src) == 0:
        return layer
    for _ in range(n_nodes + 1):
        new = layer.copy()
        np.maximum.at(new, dst, layer[src] + 1)
        if np.array_equal(new, layer):
            return layer
        layer = new
    raise ValidationError("acyclicity", "edge list contains a directed cycle")


class Architecture:
    """DAG architecture with ``d`` inputs, node ids ``0..n-1``.

    ``output_bias=False`` drops the output node's bias slot; networks built by
    the cube compiler use this form because their output is a pure weighted
    sum of indicator neurons.
    """

    def __init__(self, d, edges, n_nodes=None, layers=None, output_bias=True):
        self.d = int(d)
        if self.d < 1:
            raise ValidationError("input count", "d must be a positive integer")
        e = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
        if layers is not None:
            flat = np.array(sorted(int(v) for layer in layers for v in layer), dtype=np.int64)
            if len(flat) == 0 or not np.array_equal(flat, np.arange(len(flat))):
                raise ValidationError("node ids", "layers must list each id 0..n-1 exactly once")
            if n_nodes is not None and n_nodes != len(flat):
                raise ValidationError("node ids", "n_nodes disagrees with layers")
            n_nodes = len(flat)
        elif n_nodes is None:
            n_nodes = int(e.max()) + 1 if len(e) else self.d
        self.n_nodes = int(n_nodes)
        if len(e) and (e.min() < 0 or e.max() >= self.n_nodes):
            raise ValidationError("node ids", "edge endpoint outside 0..n-1")
        if len(e) and np.any(e[:, 0] == e[:, 1]):
            raise ValidationError("acyclicity", "self loop")
        order = np.lexsort((e[:, 0], e[:, 1]))
        e = e[order]
        if len(e) > 1 and np.any(np.all(e[1:] == e[:-1], axis=1)):
            raise ValidationError("unique edges", "duplicate edge")
        self.edges = e
        self.edges.setflags(write=False)
        src, dst = e[:, 0], e[:, 1]

        layer = _layer_assignment(self.n_nodes, src, dst)
        indeg = np.bincount(dst, minlength=self.n_nodes)
        outdeg = np.bincount(src, minlength=self.n_nodes)
        inputs = np.flatnonzero(indeg == 0)
        if len(inputs) != self.d:
            raise ValidationError(
                "input count", f"{len(inputs)} nodes have in-degree 0, expected d={self.d}"
            )
        sinks = np.flatnonzero(outdeg == 0)
        if len(sinks) != 1:
            raise ValidationError("single output", f"{len(sinks)} nodes have out-degree 0")
        self.output = int(sinks[0])
        self.depth = int(layer.max())
        if self.depth < 1:
            raise ValidationError("depth", "architecture must have depth L >= 1")
        if layer[self.output] != self.depth or np.count_nonzero(layer == self.depth) != 1:
            raise ValidationError("single output", "output must be the sole top-layer node")
        self.node_layer = layer
        self.node_layer.setflags(write=False)
        recomputed = [np.flatnonzero(layer == l) for l in range(self.depth + 1)]
        if layers is not None:
            stored = [sorted(int(v) for v in lay) for lay in layers]
            if stored != [r.tolist() for r in recomputed]:
                raise ValidationError("layer recursion", "stored layers differ from recomputed ones")
        self.layers = recomputed
        self.inputs = inputs
        self.output_bias = bool(output_bias)
        bias_nodes = np.flatnonzero(layer > 0)
        if not self.output_bias:
            bias_nodes = bias_nodes[bias_nodes != self.output]
        self.bias_nodes = bias_nodes

    @property
    def layer_sizes(self):
        return [len(l) for l in self.layers]

    @property
    def weight_count(self):
        return len(self.edges) + len(self.bias_nodes)

    def __eq__(self, other):
        return (
            isinstance(other, Architecture)
            and self.d == other.d
            and self.n_nodes == other.n_nodes
            and self.output_bias == other.output_bias
            and np.array_equal(self.edges, other.edges)
        )


def weight_count(arch):
    """Number of weight slots: one per edge plus one bias per biased node."""
    return arch.weight_count


class Network:
    """Immutable (architecture, weights, activation) triple."""

    def __init__(self, architecture, weights, activation):
        w = np.array(weights, dtype=float).ravel()
        if len(w) != architecture.weight_count:
            raise ValidationError(
                "weight count",
                f"got {len(w)} weights, architecture has {architecture.weight_count} slots",
            )
        if np.isnan(w).any():
            raise InvalidNumericError("NaN in weights", index=int(np.flatnonzero(np.isnan(w))[0]))
        w.setflags(write=False)
        self.architecture = architecture
        self.weights = w
        self.activation = activation

    @property
    def d(self):
        return self.architecture.d

    @property
    def edge_weights(self):
        return self.weights[: len(self.architecture.edges)]

    @property
    def biases(self):
        """Bias of every node (zero for inputs and for a bias-free output)."""
        arch = self.architecture
        b = np.zeros(arch.n_nodes)
        b[arch.bias_nodes] = self.weights[len(arch.edges):]
        return b

    @cached_property
    def _layer_ops(self):
        """Per-layer sparse operators on a buffer whose rows are ordered by layer."""
        arch = self.architecture
        src, dst = arch.edges[:, 0], arch.edges[:, 1]
        ew = self.edge_weights
        bias = self.biases
        order = np.concatenate(arch.layers)
        pos = np.empty(arch.n_nodes, dtype=np.int64)
        pos[order] = np.arange(arch.n_nodes)
        offsets = np.cumsum([0] + arch.layer_sizes)
        ops = []
        for l in range(1, arch.depth + 1):
            lo, hi = offsets[l], offsets[l + 1]
            mask = arch.node_layer[dst] == l
            mat = sparse.csr_matrix(
                (ew[mask], (pos[dst[mask]] - lo, pos[src[mask]])), shape=(hi - lo, lo)
            )
            mat.sort_indices()
            ops.append((lo, hi, mat, bias[order[lo:hi]]))
        return ops

    def evaluate_batch(self, X):
        """Evaluate the network at every row of ``X`` (shape ``(n, d)``)."""
        X = np.asarray(X, dtype=float)
        if X.ndim != 2 or X.shape[1] != self.d:
            raise InputShapeError(f"expected input of shape (n, {self.d}), got {X.shape}")
        bad = np.isnan(X).any(axis=1)
        if bad.any():
            raise InvalidNumericError("NaN in input", index=int(np.flatnonzero(bad)[0]))
        arch = self.architecture
        out = np.empty(len(X))
        chunk = max(1, _EVAL_BUFFER // arch.n_nodes)
        ops = self._layer_ops
        d = arch.d
        for start in range(0, len(X), chunk):
            xb = X[start:start + chunk]
            Y = np.empty((arch.n_nodes, len(xb)))
            Y[:d] = xb.T
            for k, (lo, hi, mat, b) in enumerate(ops):
                pre = mat @ Y[:lo]
                pre += b[:, None]
                Y[lo:hi] = pre if k == len(ops) - 1 else self.activation(pre)
            out[start:start + chunk] = Y[-1]
        return out

    def __call__(self, X):
        return self.evaluate_batch(X)

    def __eq__(self, other):
        return (
            isinstance(other, Network)
            and self.architecture == other.architecture
            and np.array_equal(self.weights, other.weights)
            and self.activation == other.activation
        )


def evaluate(net, x):
    """Value ``g_w(x)`` of ``net`` at a single point ``x`` of length ``d``."""
    x = np.asarray(x, dtype=float)
    if x.shape != (net.d,):
        raise InputShapeError(f"expected a vector of length {net.d}, got shape {x.shape}")
    return float(net.evaluate_batch(x[None, :])[0])


# --- JSON format -----------------------------------------------------------

def _fmt(x):
    return format(float(x), ".17g")


def _fmt_list(xs):
    return "[" + ",".join(_fmt(x) for x in xs) + "]"


def to_json(net):
    arch = net.architecture
    parts = [
        f'"d":{arch.d}',
        '"layers":' + json.dumps([l.tolist() for l in arch.layers], separators=(",", ":")),
        '"edges":' + json.dumps(arch.edges.tolist(), separators=(",", ":")),
        '"weights":' + _fmt_list(net.weights),
        '"activation":{"breakpoints":' + _fmt_list(net.activation.breakpoints)
        + ',"pieces":[' + ",".join(_fmt_list(p) for p in net.activation.pieces) + "]}",
    ]
    if not arch.output_bias:
        parts.append('"output_bias":false')
    return "{" + ",".join(parts) + "}"


def serialize(net):
    """Canonical UTF-8 JSON bytes; floats carry 17 significant digits."""
    return to_json(net).encode("utf-8")


def _require(doc, key, kind):
    if key not in doc:
        raise ParseError(f"missing field {key!r}")
    if not isinstance(doc[key], kind):
        raise ParseError(f"field {key!r} has the wrong type")
    return doc[key]


def from_dict(doc):
    if not isinstance(doc, dict):
        raise ParseError("top-level JSON value must be an object", position=0)
    d = _require(doc, "d", int)
    layers = _require(doc, "layers", list)
    edges = _require(doc, "edges", list)
    weights = _require(doc, "weights", list)
    act = _require(doc, "activation", dict)
    if any(not isinstance(e, list) or len(e) != 2 for e in edges):
        raise ParseError("each edge must be a [from, to] pair")
    arch = Architecture(
        d, edges, layers=layers, output_bias=bool(doc.get("output_bias", True))
    )
    activation = Activation(_require(act, "breakpoints", list), _require(act, "pieces", list))
    # canonical slot order is defined on sorted edges; remap if given unsorted
    e = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
    w = np.asarray(weights, dtype=float)
    n_e = len(e)
    if len(w) == arch.weight_count and n_e:
        perm = np.lexsort((e[:, 0], e[:, 1]))
        w = np.concatenate([w[:n_e][perm], w[n_e:]])
    return Network(arch, w, activation)


def deserialize(data):
    if isinstance(data, (bytes, bytearray)):
        data = data.decode("utf-8")
    try:
        doc = json.loads(data)
    except json.JSONDecodeError as exc:
        raise ParseError(f"malformed JSON: {exc.msg}", position=exc.pos) from exc
    return from_dict(doc)

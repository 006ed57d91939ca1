"""Exact Heaviside networks for piecewise-constant functions on boxes.

A box carries ``2d`` face-membership flags ordered as the ``d`` lower faces
followed by the ``d`` upper faces.  A point ``x`` lies in the box when every
coordinate satisfies ``a_j <= x_j`` (or ``<`` if the lower face does not
belong) and ``x_j <= b_j`` (or ``<``).

Each face becomes one first-layer perceptron.  A belonging face uses the
perceptron that fires when its condition holds and enters the indicator with
edge sign +1; a non-belonging face uses the perceptron that fires when the
condition is violated and enters with sign -1.  The indicator neuron then
computes ``sigma(sum - J)`` with ``J`` the number of belonging faces.
"""

from __future__ import annotations

import itertools
import json

import numpy as np

from .errors import DisjointnessError, EmptyInputError, ParseError, ValidationError
from .network import Activation, Architecture, Network


class DyadicCube:
    """Axis-aligned box ``[lo, hi]`` with per-face membership flags."""

    def __init__(self, lo, hi, faces_belong=None):
        self.lo = np.array(lo, dtype=float).ravel()
        self.hi = np.array(hi, dtype=float).ravel()
        d = len(self.lo)
        if d < 1 or len(self.hi) != d:
            raise ValidationError("cube shape", "lo and hi must have the same positive length")
        if not (np.all(np.isfinite(self.lo)) and np.all(np.isfinite(self.hi))):
            raise ValidationError("cube finiteness")
        if np.any(self.lo >= self.hi):
            raise ValidationError("cube extent", "need lo_j < hi_j on every axis")
        if faces_belong is None:
            faces_belong = [True] * d + [False] * d
        fb = np.array(faces_belong, dtype=bool).ravel()
        if len(fb) != 2 * d:
            raise ValidationError("cube faces", f"need {2 * d} membership flags")
        self.faces_belong = fb
        for arr in (self.lo, self.hi, self.faces_belong):
            arr.setflags(write=False)

    @classmethod
    def half_open(cls, lo, hi):
        """The cube ``[lo, hi)``: lower faces belong, upper faces do not."""
        return cls(lo, hi)

    @property
    def d(self):
        return len(self.lo)

    @property
    def n_belonging(self):
        return int(self.faces_belong.sum())

    def contains(self, X):
        X = np.atleast_2d(np.asarray(X, dtype=float))
        return _member(X, self.lo[None], self.hi[None], self.faces_belong[None])[:, 0]

    def face_conditions(self, X):
        """Boolean ``(n, 2d)`` array: is each face's inequality satisfied."""
        X = np.atleast_2d(np.asarray(X, dtype=float))
        d = self.d
        lo_in, up_in = self.faces_belong[:d], self.faces_belong[d:]
        low = np.where(lo_in, X >= self.lo, X > self.lo)
        up = np.where(up_in, X <= self.hi, X < self.hi)
        return np.hstack([low, up])

    def to_dict(self):
        return {
            "lo": self.lo.tolist(),
            "hi": self.hi.tolist(),
            "faces_belong": self.faces_belong.tolist(),
        }

    def __repr__(self):
        return f"DyadicCube(lo={self.lo.tolist()}, hi={self.hi.tolist()}, faces_belong={self.faces_belong.tolist()})"


def _member(X, lo, hi, fb):
    """Membership matrix ``(n, M)`` of points ``X`` in boxes ``(lo, hi, fb)``."""
    d = X.shape[1]
    x = X[:, None, :]
    low = np.where(fb[None, :, :d], x >= lo[None], x > lo[None])
    up = np.where(fb[None, :, d:], x <= hi[None], x < hi[None])
    return np.all(low & up, axis=2)


def _boxes_intersect(lo1, hi1, fb1, lo2, hi2, fb2):
    """Vectorized exact test of whether pairs of boxes share a point."""
    d = lo1.shape[-1]
    L = np.maximum(lo1, lo2)
    U = np.minimum(hi1, hi2)
    l_closed = np.where(lo1 == L, fb1[..., :d], True) & np.where(lo2 == L, fb2[..., :d], True)
    u_closed = np.where(hi1 == U, fb1[..., d:], True) & np.where(hi2 == U, fb2[..., d:], True)
    ok = (L < U) | ((L == U) & l_closed & u_closed)
    return np.all(ok, axis=-1)


def _dyadic_level(h):
    """Return k with ``h == 2**-k`` exactly, else None."""
    m, e = np.frexp(h)
    if m != 0.5 or e > 1:
        return None
    return int(1 - e)


class PiecewiseConstantFn:
    """``sum_i values[i] * 1_{C_i}(x)`` on pairwise disjoint boxes, 0 elsewhere.

    Boxes are stored as arrays ``lo``, ``hi`` of shape ``(M, d)`` and
    ``faces_belong`` of shape ``(M, 2d)``.
    """

    def __init__(self, d, lo, hi, faces_belong, values, check=True):
        self.d = int(d)
        self.lo = np.asarray(lo, dtype=float).reshape(-1, self.d)
        self.hi = np.asarray(hi, dtype=float).reshape(-1, self.d)
        self.faces_belong = np.asarray(faces_belong, dtype=bool).reshape(-1, 2 * self.d)
        self.values = np.asarray(values, dtype=float).ravel()
        M = len(self.values)
        if not (len(self.lo) == len(self.hi) == len(self.faces_belong) == M):
            raise ValidationError("cube count", "lo, hi, faces_belong and values disagree in length")
        if M and np.any(self.lo >= self.hi):
            raise ValidationError("cube extent", "need lo_j < hi_j on every axis")
        if not (np.all(np.isfinite(self.lo)) and np.all(np.isfinite(self.hi))):
            raise ValidationError("cube finiteness")
        if check and M > 1:
            self.check_disjoint()
        self._groups = None

    @classmethod
    def from_cubes(cls, cubes, values, check=True):
        cubes = list(cubes)
        if not cubes:
            return cls(1, np.zeros((0, 1)), np.zeros((0, 1)), np.zeros((0, 2), bool), [], check)
        d = cubes[0].d
        if any(c.d != d for c in cubes):
            raise ValidationError("cube shape", "all cubes must share the dimension d")
        return cls(
            d,
            np.array([c.lo for c in cubes]),
            np.array([c.hi for c in cubes]),
            np.array([c.faces_belong for c in cubes]),
            values,
            check,
        )

    @property
    def M(self):
        return len(self.values)

    def __len__(self):
        return self.M

    def cube(self, i):
        return DyadicCube(self.lo[i], self.hi[i], self.faces_belong[i])

    @property
    def cubes(self):
        return [self.cube(i) for i in range(self.M)]

    # --- disjointness --------------------------------------------------

    def _grid_levels(self):
        """Per-cube dyadic level if the grid fast path applies, else None.

        The fast path needs cubes inside ``[0,1]^d`` with side ``2^-k``,
        lower corners on the ``2^-k`` grid, all lower faces belonging, and
        upper faces belonging only on the boundary ``x_j = 1``.  Two such
        cubes overlap exactly when one is a dyadic ancestor of the other.
        """
        if self.M == 0:
            return None
        side = self.hi - self.lo
        if np.any(side != side[:, :1]) or np.any(self.lo < 0) or np.any(self.hi > 1):
            return None
        m, e = np.frexp(side[:, 0])
        if np.any(m != 0.5):
            return None
        levels = (1 - e).astype(np.int64)
        if levels.max() * self.d > 62:
            return None
        scaled = self.lo * np.exp2(levels)[:, None]
        if np.any(scaled != np.floor(scaled)):
            return None
        d = self.d
        if not np.all(self.faces_belong[:, :d]):
            return None
        if np.any(self.faces_belong[:, d:] & (self.hi != 1.0)):
            return None
        return levels, scaled.astype(np.int64)

    def check_disjoint(self):
        grid = self._grid_levels()
        if grid is not None:
            self._check_disjoint_grid(*grid)
        else:
            self._check_disjoint_pairwise()

    def _check_disjoint_grid(self, levels, ints):
        d = self.d
        codes = {}
        for k in np.unique(levels):
            idx = np.flatnonzero(levels == k)
            code = _encode(ints[idx], int(k), d)
            order = np.argsort(code, kind="stable")
            sc = code[order]
            dup = np.flatnonzero(sc[1:] == sc[:-1])
            if len(dup):
                raise DisjointnessError(int(idx[order[dup[0]]]), int(idx[order[dup[0] + 1]]))
            codes[int(k)] = (sc, idx[order])
        ks = sorted(codes)
        for a, k in enumerate(ks):
            idx = np.flatnonzero(levels == k)
            for kc in ks[:a]:
                parent = _encode(ints[idx] >> (k - kc), kc, d)
                sc, owner = codes[kc]
                pos = np.clip(np.searchsorted(sc, parent), 0, len(sc) - 1)
                hit = np.flatnonzero(sc[pos] == parent)
                if len(hit):
                    i, j = int(owner[pos[hit[0]]]), int(idx[hit[0]])
                    raise DisjointnessError(min(i, j), max(i, j))

    def _check_disjoint_pairwise(self, block=512):
        lo, hi, fb = self.lo, self.hi, self.faces_belong
        M = self.M
        for s in range(0, M, block):
            e = min(M, s + block)
            hit = _boxes_intersect(
                lo[s:e, None], hi[s:e, None], fb[s:e, None], lo[None], hi[None], fb[None]
            )
            rows = np.arange(s, e)[:, None]
            hit &= np.arange(M)[None, :] > rows
            if hit.any():
                r, c = np.argwhere(hit)[0]
                raise DisjointnessError(int(s + r), int(c))

    # --- evaluation ----------------------------------------------------

    def _build_groups(self):
        """Group cubes by side vector when their corners sit on that grid."""
        groups, rest = [], []
        if self.M == 0:
            return groups, np.zeros(0, dtype=np.int64)
        side = self.hi - self.lo
        keys, inverse = np.unique(side, axis=0, return_inverse=True)
        inverse = inverse.ravel()
        for g, h in enumerate(keys):
            idx = np.flatnonzero(inverse == g)
            cells = self.lo[idx] / h
            if np.any(cells != np.floor(cells)) or np.any(np.abs(cells) > 2**40):
                rest.append(idx)
                continue
            cells = cells.astype(np.int64)
            kmin = cells.min(axis=0)
            span = cells.max(axis=0) - kmin + 1
            if np.prod(span.astype(float)) > 2**62:
                rest.append(idx)
                continue
            code = np.ravel_multi_index(tuple((cells - kmin).T), tuple(span))
            order = np.argsort(code)
            groups.append((h, kmin, span, code[order], idx[order]))
        rest = np.concatenate(rest) if rest else np.zeros(0, dtype=np.int64)
        return groups, rest

    def locate(self, X):
        """Index of the cube containing each row of ``X``, or -1."""
        X = np.asarray(X, dtype=float)
        if X.ndim != 2 or X.shape[1] != self.d:
            raise ValidationError("input shape", f"expected shape (n, {self.d})")
        if self._groups is None:
            self._groups = self._build_groups()
        groups, rest = self._groups
        n, d = X.shape
        where = np.full(n, -1, dtype=np.int64)
        finite = np.all(np.isfinite(X), axis=1)
        for h, kmin, span, codes, owner in groups:
            q = X / h
            k = np.floor(np.where(np.isfinite(q), q, 0.0)).astype(np.int64) - kmin
            on_grid = q == k + kmin
            edge_rows = np.flatnonzero(on_grid.any(axis=1) & finite)
            for shift in itertools.product((0, 1), repeat=d):
                s = np.array(shift, dtype=np.int64)
                if s.any():
                    rows = edge_rows[np.all(on_grid[edge_rows] | (s == 0), axis=1)]
                else:
                    rows = np.flatnonzero(finite)
                rows = rows[where[rows] < 0]
                kk = k[rows] - s
                rows = rows[np.all((kk >= 0) & (kk < span), axis=1)]
                if not len(rows):
                    continue
                code = np.ravel_multi_index(tuple((k[rows] - s).T), tuple(span))
                pos = np.clip(np.searchsorted(codes, code), 0, len(codes) - 1)
                match = codes[pos] == code
                rows, cubes = rows[match], owner[pos[match]]
                ok = _member_pairs(X[rows], self.lo[cubes], self.hi[cubes], self.faces_belong[cubes])
                where[rows[ok]] = cubes[ok]
        if len(rest):
            todo = np.flatnonzero(where < 0)
            step = max(1, (1 << 22) // max(1, len(rest) * d))
            for s in range(0, len(todo), step):
                rows = todo[s:s + step]
                mem = _member(X[rows], self.lo[rest], self.hi[rest], self.faces_belong[rest])
                has = mem.any(axis=1)
                where[rows[has]] = rest[np.argmax(mem[has], axis=1)]
        return where

    def __call__(self, X):
        X = np.asarray(X, dtype=float)
        single = X.ndim == 1
        X = np.atleast_2d(X)
        where = self.locate(X)
        out = np.where(where >= 0, self.values[np.maximum(where, 0)] if self.M else 0.0, 0.0)
        return float(out[0]) if single else out

    # --- JSON ----------------------------------------------------------

    def to_dict(self):
        return {
            "d": self.d,
            "cubes": [self.cube(i).to_dict() for i in range(self.M)],
            "values": self.values.tolist(),
        }

    def to_json(self):
        return json.dumps(self.to_dict(), separators=(",", ":"))

    @classmethod
    def from_dict(cls, doc):
        try:
            d = int(doc["d"])
            cubes = [DyadicCube(c["lo"], c["hi"], c.get("faces_belong")) for c in doc["cubes"]]
            values = doc["values"]
        except (KeyError, TypeError) as exc:
            raise ParseError(f"piecewise-constant JSON is missing field {exc}") from exc
        if len(cubes) != len(values):
            raise ValidationError("cube count", "cubes and values differ in length")
        if any(c.d != d for c in cubes):
            raise ValidationError("cube shape", "cube dimension differs from d")
        if not cubes:
            return cls(d, np.zeros((0, d)), np.zeros((0, d)), np.zeros((0, 2 * d), bool), [])
        return cls.from_cubes(cubes, values)

    @classmethod
    def from_json(cls, text):
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ParseError(f"malformed JSON: {exc.msg}", position=exc.pos) from exc
        return cls.from_dict(doc)


def _encode(ints, k, d):
    code = np.zeros(len(ints), dtype=np.int64)
    for j in range(d):
        code = (code << k) | ints[:, j]
    return code


def _member_pairs(X, lo, hi, fb):
    d = X.shape[1]
    low = np.where(fb[:, :d], X >= lo, X > lo)
    up = np.where(fb[:, d:], X <= hi, X < hi)
    return np.all(low & up, axis=1)


def _face_rows(lo, hi, fb):
    """Weights on the own coordinate and biases of the 2d face perceptrons.

    Returns arrays of shape ``(M, 2d)``.  Belonging lower face: sigma(x-a);
    non-belonging lower face: sigma(a-x); belonging upper face: sigma(b-x);
    non-belonging upper face: sigma(x-b).
    """
    d = lo.shape[1]
    lo_in, up_in = fb[:, :d], fb[:, d:]
    w = np.hstack([np.where(lo_in, 1.0, -1.0), np.where(up_in, -1.0, 1.0)])
    b = np.hstack([np.where(lo_in, -lo, lo), np.where(up_in, hi, -hi)])
    return w, b


def compile_cubes(fn):
    """Heaviside network with layer sizes ``[d, 2dM, M, 1]`` equal to ``fn``.

    The network has ``2(d+1)^2 M`` weights: the first hidden layer is fully
    connected to the inputs (zero weight off the face's own axis) and the
    output carries no bias.
    """
    M, d = fn.M, fn.d
    if M == 0:
        raise EmptyInputError()
    F = 2 * d
    n1 = F * M
    first = d + np.arange(n1)                     # node of perceptron (i, j) is d + i*2d + j
    second = d + n1 + np.arange(M)
    out = d + n1 + M

    w_face, b_face = _face_rows(fn.lo, fn.hi, fn.faces_belong)
    axis = np.tile(np.arange(F) % d, M)

    # edges sorted by (to, from) with their weights
    e1_to = np.repeat(first, d)
    e1_from = np.tile(np.arange(d), n1)
    e1_w = np.where(e1_from == np.repeat(axis, d), np.repeat(w_face.ravel(), d), 0.0)
    e2_to = np.repeat(second, F)
    e2_from = first
    e2_w = np.where(fn.faces_belong.ravel(), 1.0, -1.0)
    e3_to = np.full(M, out)
    e3_from = second
    e3_w = fn.values.astype(float)

    edges = np.column_stack([
        np.concatenate([e1_from, e2_from, e3_from]),
        np.concatenate([e1_to, e2_to, e3_to]),
    ])
    biases = np.concatenate([b_face.ravel(), -fn.faces_belong.sum(axis=1).astype(float)])
    weights = np.concatenate([e1_w, e2_w, e3_w, biases])
    arch = Architecture(d, edges, n_nodes=out + 1, output_bias=False)
    return Network(arch, weights, Activation.heaviside())


def indicator_network(cube):
    """Heaviside network computing ``1_C`` for a single box."""
    return compile_cubes(PiecewiseConstantFn.from_cubes([cube], [1.0]))


def perceptron_sum(cube, X):
    """Number of satisfied face conditions, i.e. the sum of the 2d perceptrons.

    Equals ``2d`` exactly on the cube and is at most ``2d - 1`` elsewhere.
    """
    return cube.face_conditions(X).sum(axis=1)

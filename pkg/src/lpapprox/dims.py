"""Brute-force combinatorial dimensions and packing numbers of finite classes.

A finite class is a value matrix ``values[f, x]``.  Shattering searches use
bitmasks over functions: for a candidate witness at a point, the functions
labelled "in" and "out" are two masks, and a subset of points is shattered
when refining the class by all its witnesses leaves every one of the
``2^|S|`` cells non-empty.

Witness enumeration is complete.  For pseudo-shattering (``f >= r`` in,
``f < r`` out) only the set ``{f : f(x) >= r}`` matters, and it is attained
with ``r`` equal to one of the distinct values at ``x``.  For
``gamma``-shattering, moving ``r - gamma`` up to the largest value not above
it keeps the "out" set and can only enlarge the "in" set, so it suffices to
try ``r = v + gamma`` for each distinct value ``v``.  In-set membership is
tested as ``f(x) - v >= 2 gamma``.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field

import numpy as np

from .errors import CapacityError, DomainError, ParseError, ValidationError

SUBSET_CAP = 6
POINT_CAP = 12
FUNCTION_CAP = 64
EXACT_PACKING_CAP = 25
VC_POINT_CAP = 20


class DimResult(int):
    """Integer result carrying an ``exact`` flag and an optional witness."""

    def __new__(cls, value, exact=True, witness=None):
        obj = super().__new__(cls, value)
        obj.exact = exact
        obj.witness = witness
        return obj


@dataclass
class FiniteFunctionClass:
    """Values of finitely many functions on finitely many points.

    Duplicate rows are dropped on construction; ``n_duplicates`` records how
    many were removed.
    """

    values: np.ndarray
    points: list | None = None
    range: tuple | None = None
    n_duplicates: int = field(default=0, init=False)

    def __post_init__(self):
        V = np.atleast_2d(np.asarray(self.values, dtype=float))
        if V.size and np.isnan(V).any():
            raise ValidationError("finite values", "NaN in class values")
        if V.shape[0]:
            _, first = np.unique(V, axis=0, return_index=True)
            keep = np.sort(first)
            self.n_duplicates = V.shape[0] - len(keep)
            V = V[keep]
        self.values = V
        if self.points is None:
            self.points = list(range(V.shape[1]))
        if len(self.points) != V.shape[1]:
            raise ValidationError("point count", "points and value columns differ")
        if self.range is not None:
            a, b = self.range
            if not a < b:
                raise ValidationError("range", "need a < b")

    @property
    def n_functions(self):
        return self.values.shape[0]

    @property
    def n_points(self):
        return self.values.shape[1]

    def rescaled(self, a, b):
        """The class ``(g - a) / (b - a)``."""
        if not a < b:
            raise DomainError("need a < b")
        return FiniteFunctionClass((self.values - a) / (b - a), list(self.points))

    def clipped(self, a, b):
        if not a < b:
            raise DomainError("need a < b")
        return FiniteFunctionClass(np.clip(self.values, a, b), list(self.points), (a, b))

    def to_dict(self):
        doc = {"points": list(self.points), "values": self.values.tolist()}
        if self.range is not None:
            doc["range"] = list(self.range)
        return doc

    @classmethod
    def from_dict(cls, doc):
        try:
            vals = doc["values"]
        except (KeyError, TypeError) as exc:
            raise ParseError("class JSON needs a 'values' field") from exc
        rng = doc.get("range")
        return cls(np.asarray(vals, dtype=float), doc.get("points"), tuple(rng) if rng else None)

    @classmethod
    def from_json(cls, text):
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ParseError(f"malformed JSON: {exc.msg}", position=exc.pos) from exc
        return cls.from_dict(doc)


def _mask(bools):
    m = 0
    for i in np.flatnonzero(bools):
        m |= 1 << int(i)
    return m


def _witness_options(col, gamma):
    """Distinct (in-mask, out-mask) pairs available at one point."""
    opts = []
    seen = set()
    for v in np.unique(col):
        if gamma is None:
            pair = (_mask(col >= v), _mask(col < v))
        else:
            pair = (_mask(col - v >= 2 * gamma), _mask(col <= v))
        if pair[0] and pair[1] and pair not in seen:
            seen.add(pair)
            opts.append(pair)
    return opts


def _shatters(options, subset, full):
    """DFS over witness choices; returns the chosen option indices or None.

    Options at a point are sorted by increasing witness, so the in-masks
    shrink and the out-masks grow along the list: once some cell loses all
    its "in" functions every later option fails too.
    """

    def rec(j, cells, chosen):
        if j == len(subset):
            return list(chosen)
        # each new cell must still split over the remaining points
        need = 1 << (len(subset) - j - 1)
        for k, (up, down) in enumerate(options[subset[j]]):
            if any((c & up).bit_count() < need for c in cells):
                break
            if any((c & down).bit_count() < need for c in cells):
                continue
            new = [x for c in cells for x in (c & up, c & down)]
            res = rec(j + 1, new, chosen + [k])
            if res is not None:
                return res
        return None

    return rec(0, [full], [])


def _shatter_search(cls, gamma, size_cap):
    V = cls.values
    n_f, n_p = V.shape
    if n_f == 0:
        return DimResult(0)
    full = (1 << n_f) - 1
    options = [_witness_options(V[:, j], gamma) for j in range(n_p)]
    useful = [j for j in range(n_p) if options[j]]
    best, witness = 0, None
    max_k = min(size_cap, len(useful), int(np.floor(np.log2(n_f))) if n_f > 1 else 0)
    failed = set()
    for k in range(1, max_k + 1):
        found = None
        for subset in itertools.combinations(useful, k):
            # shattering is hereditary, so supersets of failures fail
            if k > 1 and any(sub in failed for sub in itertools.combinations(subset, k - 1)):
                failed.add(subset)
                continue
            if _shatters(options, subset, full) is not None:
                found = subset
                break
            failed.add(subset)
        if found is None:
            return DimResult(best, exact=True, witness=witness)
        best, witness = k, found
    exact = not (best == size_cap and len(useful) > size_cap and 2 ** (size_cap + 1) <= n_f)
    return DimResult(best, exact=exact, witness=witness)


def _check_caps(cls):
    if cls.n_points > POINT_CAP:
        raise CapacityError(f"{cls.n_points} points exceed the cap {POINT_CAP}")
    if cls.n_functions > FUNCTION_CAP:
        raise CapacityError(f"{cls.n_functions} functions exceed the cap {FUNCTION_CAP}")


def vc_dim(cls, size_cap=VC_POINT_CAP):
    """VC dimension of a ``{-1, 1}``-valued class."""
    V = cls.values
    if V.size and not np.all((V == -1) | (V == 1)):
        raise DomainError("vc_dim needs values in {-1, 1}")
    if cls.n_points > VC_POINT_CAP:
        raise CapacityError(f"{cls.n_points} points exceed the cap {VC_POINT_CAP}")
    n_f = cls.n_functions
    if n_f < 2:
        return DimResult(0)
    bits = (V > 0).astype(np.int64)
    best, witness = 0, None
    for k in range(1, min(size_cap, cls.n_points) + 1):
        if (1 << k) > n_f:
            break
        found = None
        weights = 1 << np.arange(k, dtype=np.int64)
        for subset in itertools.combinations(range(cls.n_points), k):
            codes = bits[:, subset] @ weights
            if len(np.unique(codes)) == (1 << k):
                found = subset
                break
        if found is None:
            break
        best, witness = k, found
    return DimResult(best, witness=witness)


def pseudo_dim(cls, size_cap=SUBSET_CAP):
    """Pseudo-dimension: ``f(x) >= r(x)`` versus ``f(x) < r(x)`` patterns."""
    _check_caps(cls)
    return _shatter_search(cls, None, size_cap)


def fat_dim(cls, gamma, size_cap=SUBSET_CAP):
    """Fat-shattering dimension at margin ``gamma > 0``."""
    if not gamma > 0:
        raise DomainError("gamma must be positive")
    _check_caps(cls)
    return _shatter_search(cls, float(gamma), size_cap)


# --- packing numbers -------------------------------------------------------------

def _conflicts(cls, eps, p, weights):
    V = cls.values
    n = V.shape[1]
    w = np.full(n, 1.0 / n) if weights is None else np.asarray(weights, dtype=float)
    if len(w) != n:
        raise ValidationError("weights", "one weight per point is required")
    if np.any(w < 0) or abs(w.sum() - 1) > 1e-9:
        raise ValidationError("weights", "weights must be a probability vector")
    P = np.abs(V[:, None, :] - V[None, :, :]) ** p @ w
    # a pair may share a packing only when its distance exceeds eps
    C = P <= eps ** p
    np.fill_diagonal(C, False)
    return C


def _max_independent_set(adj):
    n = len(adj)
    best = [0, 0]

    def popcount(x):
        return bin(x).count("1")

    def rec(P, size, chosen):
        if size + popcount(P) <= best[0]:
            return
        if not P:
            best[0], best[1] = size, chosen
            return
        v = (P & -P).bit_length() - 1
        nb = adj[v] & P
        rec(P & ~nb & ~(1 << v), size + 1, chosen | (1 << v))
        if nb:
            rec(P & ~(1 << v), size, chosen)

    rec((1 << n) - 1, 0, 0)
    return best[0], [i for i in range(n) if best[1] >> i & 1]


def packing_number(cls, eps, p=1.0, weights=None, exact_cap=EXACT_PACKING_CAP):
    """Largest subset of the class pairwise more than ``eps`` apart in ``L^p(mu_n)``.

    Exact branch-and-bound up to ``exact_cap`` functions; above that a
    deterministic min-degree greedy gives a lower bound (``exact=False``).
    """
    if not eps > 0:
        raise DomainError("eps must be positive")
    if not p >= 1:
        raise DomainError("p must be >= 1")
    n = cls.n_functions
    if n == 0:
        return DimResult(0)
    C = _conflicts(cls, eps, p, weights)
    if n <= exact_cap:
        adj = [_mask(C[i]) for i in range(n)]
        size, members = _max_independent_set(adj)
        return DimResult(size, exact=True, witness=members)
    return greedy_packing(cls, eps, p, weights, C)


def greedy_packing(cls, eps, p=1.0, weights=None, conflicts=None):
    C = _conflicts(cls, eps, p, weights) if conflicts is None else conflicts
    alive = np.ones(len(C), dtype=bool)
    chosen = []
    while alive.any():
        deg = np.where(alive, (C & alive[None, :]).sum(axis=1), np.iinfo(np.int64).max)
        v = int(np.argmin(deg))
        chosen.append(v)
        alive &= ~C[v]
        alive[v] = False
    return DimResult(len(chosen), exact=False, witness=chosen)


def packing_scale_identity_check(cls, u, a, b, p=1.0, weights=None):
    """``M(u/(b-a), rescaled class) == M(u, class)``."""
    lhs = packing_number(cls.rescaled(a, b), u / (b - a), p, weights)
    rhs = packing_number(cls, u, p, weights)
    return int(lhs) == int(rhs)


def fat_scale_identity_check(cls, u, a, b):
    """``fat_{u/(b-a)}(rescaled class) == fat_u(class)``."""
    return int(fat_dim(cls.rescaled(a, b), u / (b - a))) == int(fat_dim(cls, u))

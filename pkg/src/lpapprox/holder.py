"""Packings of the unit Hölder ball built from scaled bump functions.

The bump is ``phi(x) = exp(-|x|^2 / (1 - |x|^2))`` with ``|x|`` the sup norm,
so ``phi(2N(x - x_m))`` is supported inside the grid cell of side ``1/N``
centred at ``x_m``.  A sign tensor ``sigma`` in ``{-1,1}^{N^d}`` gives

    f_sigma(x) = c_s * sum_m sigma_m * phi(2N(x - x_m)),
    c_s = (2N)^{-s} / (2 * ||phi||_{C^{0,s}}),

and a greedy Varshamov-Gilbert code selects sign tensors that differ on at
least a quarter of the cells.  Only ``0 < s <= 1`` is supported.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from itertools import combinations

import numpy as np

from .errors import CapacityError, DomainError, UnsupportedSmoothnessError, ValidationError

EXHAUSTIVE_CAP = 24
SAFETY_FACTOR = 1.1


def bump_radial(t):
    """``psi(t) = exp(-t^2 / (1 - t^2))`` for ``|t| < 1``, else 0."""
    t = np.abs(np.asarray(t, dtype=float))
    out = np.zeros_like(t)
    inside = t < 1
    ti = t[inside]
    out[inside] = np.exp(-ti * ti / (1 - ti * ti))
    return out


def holder_seminorm_1d(g, s, lo=0.0, hi=1.0, n=4001):
    """Largest ``|g(a) - g(b)| / |a - b|^s`` over pairs of an ``n``-point grid."""
    t = np.linspace(lo, hi, n)
    v = g(t)
    if s == 1:
        return float(np.max(np.abs(np.diff(v)) / np.diff(t)))
    best = 0.0
    for k in range(1, n):
        num = np.abs(v[k:] - v[:-k])
        best = max(best, float(num.max()) / (t[k] - t[0]) ** s)
    return best


class BumpProfile:
    """The bump ``phi`` on ``R^d`` with cached numeric norms."""

    def __init__(self, d, s=1.0, safety=SAFETY_FACTOR, quad_points=1 << 10,
                 mc_samples=1_000_000, seed=0):
        if d < 1:
            raise ValidationError("dimension", "d must be positive")
        self.d = int(d)
        self.s = float(s)
        self.safety = float(safety)
        self.quad_points = int(quad_points)
        self.mc_samples = int(mc_samples)
        self.seed = seed
        self._lp = {}

    def __call__(self, X):
        X = np.asarray(X, dtype=float)
        r = np.max(np.abs(X), axis=-1) if X.ndim > 1 else np.abs(X)
        return bump_radial(r)

    @property
    def sup_norm(self):
        return 1.0

    @cached_property
    def seminorm(self):
        """Hölder-``s`` seminorm w.r.t. the Euclidean norm.

        ``phi`` is a function of ``|x|_inf``, which is 1-Lipschitz from the
        Euclidean norm, and the bound is attained along a coordinate axis, so
        the seminorm equals that of the radial profile on ``[0, 1]``.
        """
        return holder_seminorm_1d(bump_radial, self.s, 0.0, 1.0, 20001 if self.s == 1 else 3001)

    @cached_property
    def holder_norm(self):
        """Conservative estimate ``safety * max(sup, seminorm)`` of ``||phi||_{C^{0,s}}``."""
        return self.safety * max(self.sup_norm, self.seminorm)

    def lp_norm(self, p):
        """``(int_{[-1,1]^d} phi^p)^{1/p}``: midpoint rule for d <= 2, Monte Carlo above."""
        if p in self._lp:
            return self._lp[p]
        d = self.d
        if d <= 2:
            n = self.quad_points
            h = 2.0 / n
            axis = -1 + (np.arange(n) + 0.5) * h
            if d == 1:
                val = float(np.sum(bump_radial(axis) ** p)) * h
            else:
                r = np.maximum(np.abs(axis)[:, None], np.abs(axis)[None, :])
                val = float(np.sum(bump_radial(r) ** p)) * h * h
        else:
            rng = np.random.default_rng(self.seed)
            acc, n_done = 0.0, 0
            while n_done < self.mc_samples:
                m = min(1 << 18, self.mc_samples - n_done)
                X = rng.uniform(-1, 1, size=(m, d))
                acc += float(np.sum(self(X) ** p))
                n_done += m
            val = acc / self.mc_samples * 2.0 ** d
        self._lp[p] = val ** (1.0 / p)
        return self._lp[p]


# --- Varshamov-Gilbert -------------------------------------------------------

def hamming_ball_volume(m, r):
    return sum(math.comb(m, k) for k in range(0, max(r, -1) + 1))


def _masks_up_to(m, r):
    masks = [0]
    for k in range(1, r + 1):
        for bits in combinations(range(m), k):
            v = 0
            for b in bits:
                v |= 1 << b
            masks.append(v)
    return np.array(masks, dtype=np.int64)


def _int_to_signs(words, m):
    bits = (words[:, None] >> np.arange(m - 1, -1, -1)[None, :]) & 1
    return np.where(bits == 1, 1, -1).astype(np.int8)


@dataclass
class Code:
    words: np.ndarray          # (size, m) entries in {-1, 1}
    m: int
    t: int
    exhaustive: bool
    guarantee: float           # 2^m / V(m, t-1) when exhaustive

    @property
    def size(self):
        return len(self.words)

    def hamming_matrix(self):
        W = self.words.astype(np.int16)
        return ((self.m - W @ W.T) // 2).astype(np.int64)


def gilbert_varshamov_code(m, t, sampled=False, n_candidates=20000, seed=0):
    """Greedy code in ``{-1,1}^m`` with pairwise Hamming distance ``>= t``.

    Exhaustive mode scans ``{-1,1}^m`` in lexicographic order (-1 before +1,
    first coordinate most significant) and keeps each vector at distance
    ``>= t`` from all kept ones; the result is maximal, hence has at least
    ``2^m / V(m, t-1)`` elements.  Sampled mode tries ``n_candidates`` seeded
    random vectors instead and carries no size guarantee.
    """
    if not (1 <= t <= m):
        raise DomainError("need 1 <= t <= m")
    if not sampled:
        if m > EXHAUSTIVE_CAP:
            raise CapacityError(
                f"m={m} exceeds the exhaustive cap {EXHAUSTIVE_CAP}; use sampled=True"
            )
        total = 1 << m
        blocked = np.zeros(total, dtype=bool)
        masks = _masks_up_to(m, t - 1)
        kept = []
        pos, step = 0, 1 << 12
        while pos < total:
            window = blocked[pos:pos + step]
            free = np.flatnonzero(~window)
            if not len(free):
                pos += len(window)
                continue
            w = pos + int(free[0])
            kept.append(w)
            blocked[w ^ masks] = True
            pos = w + 1
        words = _int_to_signs(np.array(kept, dtype=np.int64), m)
        return Code(words, m, t, True, total / hamming_ball_volume(m, t - 1))
    rng = np.random.default_rng(seed)
    kept = np.zeros((0, m), dtype=np.int8)
    for _ in range(n_candidates):
        v = rng.choice(np.array([-1, 1], dtype=np.int8), size=m)
        if len(kept) == 0 or np.min(np.sum(kept != v, axis=1)) >= t:
            kept = np.vstack([kept, v])
    return Code(kept, m, t, False, float("nan"))


# --- packing family ----------------------------------------------------------

@dataclass
class PackingFamily:
    s: float
    d: int
    p: float
    N: int
    bump: BumpProfile
    code: Code
    certificate: dict = field(default_factory=dict)

    @property
    def n_cells(self):
        return self.N ** self.d

    @property
    def c_s(self):
        return 0.5 * (2 * self.N) ** (-self.s) / self.bump.holder_norm

    @property
    def separation_constant(self):
        """``c = 2^{-s-(d+2)/p} ||phi||_p / ||phi||_{C^{0,s}}``."""
        b = self.bump
        return 2.0 ** (-self.s - (self.d + 2) / self.p) * b.lp_norm(self.p) / b.holder_norm

    @property
    def threshold(self):
        return self.separation_constant * self.N ** (-self.s)

    @property
    def c0(self):
        c = self.separation_constant
        return 2.0 ** (-self.d) * c ** (self.d / self.s) / 8

    @property
    def eps0(self):
        return self.separation_constant

    @property
    def signs(self):
        return self.code.words

    def cell_centers(self):
        idx = np.indices((self.N,) * self.d).reshape(self.d, -1).T
        return (idx + 0.5) / self.N

    def evaluate(self, sigma, X):
        """``f_sigma`` at rows of ``X``; ``sigma`` is a sign vector or an ``(k, N^d)`` stack."""
        X = np.atleast_2d(np.asarray(X, dtype=float))
        sig = np.asarray(sigma, dtype=float)
        N, d = self.N, self.d
        cell = np.clip(np.floor(X * N).astype(np.int64), 0, N - 1)
        flat = np.ravel_multi_index(tuple(cell.T), (N,) * d)
        center = (cell + 0.5) / N
        phi = self.bump(2 * N * (X - center))
        if sig.ndim == 1:
            return self.c_s * sig[flat] * phi
        return self.c_s * sig[:, flat] * phi[None, :]

    def function(self, k):
        sigma = self.code.words[k]
        return lambda X: self.evaluate(sigma, X)

    def cell_integral(self):
        """``int_{C_m} |f_1 - f_2|^p`` on a cell where the signs differ."""
        return 2.0 ** self.p * self.c_s ** self.p * (2 * self.N) ** (-self.d) * self.bump.lp_norm(self.p) ** self.p

    def distance_from_hamming(self, hamming):
        return (np.asarray(hamming, dtype=float) * self.cell_integral()) ** (1.0 / self.p)

    def pairwise_distances(self):
        """Exact pairwise ``L^p(lambda)`` distances from Hamming distances."""
        return self.distance_from_hamming(self.code.hamming_matrix())

    def quadrature_distance(self, i, j, per_cell=256):
        """Tensor midpoint quadrature of ``||f_i - f_j||_{L^p}``."""
        from .measures import lp_norm_grid

        diff = self.code.words[i].astype(float) - self.code.words[j].astype(float)
        return lp_norm_grid(lambda X: self.evaluate(diff, X), self.p, self.d, per_cell * self.N)

    def to_dict(self):
        return {
            "s": self.s, "d": self.d, "p": self.p, "N": self.N,
            "c_s": self.c_s,
            "phi_lp_norm": self.bump.lp_norm(self.p),
            "phi_holder_norm": self.bump.holder_norm,
            "separation_constant": self.separation_constant,
            "threshold": self.threshold,
            "code_size": self.code.size,
            "code": self.code.words.tolist(),
            "certificate": self.certificate,
        }


def build_packing(s, d, p, N, sampled=False, seed=0, **bump_kw):
    """Build the family ``{f_sigma : sigma in Gamma}`` and certify its separation."""
    if not s > 0:
        raise DomainError("smoothness s must be positive")
    if s > 1:
        raise UnsupportedSmoothnessError("only 0 < s <= 1 is supported")
    if not p >= 1:
        raise DomainError("p must be >= 1")
    if N < 1 or d < 1:
        raise DomainError("need N >= 1 and d >= 1")
    m = N ** d
    t = math.ceil(m / 4)
    code = gilbert_varshamov_code(m, t, sampled=sampled, seed=seed)
    fam = PackingFamily(float(s), int(d), float(p), int(N), BumpProfile(d, s, seed=seed, **bump_kw), code)
    H = code.hamming_matrix()
    iu = np.triu_indices(code.size, 1)
    min_h = int(H[iu].min()) if code.size > 1 else m
    min_dist = float(fam.distance_from_hamming(min_h))
    fam.certificate = {
        "size": code.size,
        "size_bound": math.exp(m / 8),
        "size_ok": code.size >= math.exp(m / 8),
        "min_hamming": min_h,
        "hamming_ok": min_h >= m / 4,
        "min_distance": min_dist,
        "threshold": fam.threshold,
        # equality holds algebraically when min_hamming == m/4; allow rounding
        "distance_ok": min_dist >= fam.threshold * (1 - 1e-12),
        "exhaustive": code.exhaustive,
    }
    return fam


@dataclass
class HolderReport:
    sup_estimate: float
    seminorm_estimate: float
    tolerance: float
    ok: bool
    violations: list = field(default_factory=list)


def holder_membership_check(f, s, d, grid_density=256, tolerance=0.02, n_random=20000, seed=0):
    """Estimate ``sup |f|`` and the Hölder-``s`` seminorm of ``f`` on ``[0,1]^d``.

    Pairs are grid neighbours along each axis plus random pairs at several
    scales.  Both estimates are lower bounds of the true quantities.
    """
    if not (0 < s <= 1):
        raise UnsupportedSmoothnessError("membership check supports 0 < s <= 1")
    rng = np.random.default_rng(seed)
    axis = np.linspace(0.0, 1.0, grid_density)
    G = np.stack(np.meshgrid(*([axis] * d), indexing="ij"), axis=-1).reshape(-1, d)
    vals = np.asarray(f(G), dtype=float)
    sup = float(np.max(np.abs(vals))) if len(vals) else 0.0
    semi = 0.0
    grid = vals.reshape((grid_density,) * d)
    h = axis[1] - axis[0]
    for j in range(d):
        for k in (1, 2, 4, 8, 16):
            if k >= grid_density:
                break
            a = np.take(grid, np.arange(k, grid_density), axis=j)
            b = np.take(grid, np.arange(grid_density - k), axis=j)
            semi = max(semi, float(np.max(np.abs(a - b))) / (k * h) ** s)
    X = rng.random((n_random, d))
    for scale in (1e-1, 1e-2, 1e-3, 1e-4):
        Y = np.clip(X + scale * rng.standard_normal((n_random, d)), 0, 1)
        dist = np.linalg.norm(X - Y, axis=1)
        ok = dist > 0
        num = np.abs(np.asarray(f(X)) - np.asarray(f(Y)))
        if ok.any():
            semi = max(semi, float(np.max(num[ok] / dist[ok] ** s)))
    viol = []
    if sup > 1 + tolerance:
        viol.append(f"sup estimate {sup:.4g} exceeds 1")
    if semi > 1 + tolerance:
        viol.append(f"seminorm estimate {semi:.4g} exceeds 1")
    return HolderReport(sup, semi, tolerance, not viol, viol)


def holder_packing_lower_bound(eps, s, d, c0=1.0, eps0=None):
    """``c0 * eps^{-d/s}``, the packing-entropy lower bound on ``(0, eps0]``."""
    if not eps > 0:
        raise DomainError("eps must be positive")
    if eps0 is not None and eps > eps0:
        raise DomainError(f"eps={eps} exceeds eps0={eps0}")
    if not s > 0:
        raise DomainError("s must be positive")
    return c0 * eps ** (-d / s)


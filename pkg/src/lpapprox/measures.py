"""L^p distances, grid sup norms and the packing-transfer check.

Three estimators of ``||f - g||_{L^p(mu)}``:

* ``lp_distance_exact`` for piecewise-constant functions on dyadic cubes,
  summing volume times ``|delta|^p`` over the common refinement;
* ``lp_error_cubewise`` tensor midpoint quadrature inside each cube of a
  piecewise-constant approximant (for comparing it with a general ``f``);
* ``lp_distance_mc`` Monte Carlo with a counter-based generator, so the
  sample with index ``i`` never depends on how the work is chunked.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .compiler import PiecewiseConstantFn
from .errors import DomainError, InvalidNumericError, UnsupportedExactnessError, ValidationError
from .monotone import MonotoneOracle, disk_function

MC_CHUNK = 1 << 16


@dataclass
class LpEstimate:
    value: float
    method: str
    n_samples: int = 0
    stderr: float = 0.0
    stderr_power: float = 0.0
    seed: int | None = None

    def __float__(self):
        return float(self.value)


def _check_p(p):
    if not (p >= 1 and math.isfinite(p)):
        raise DomainError("p must be a finite real >= 1")


# --- exact dyadic overlay ---------------------------------------------------

def _dyadic_index(fn):
    """Levels and integer corners of every cube, or raise if not dyadic."""
    if fn.M == 0:
        return np.zeros(0, np.int64), np.zeros((0, fn.d), np.int64)
    side = fn.hi - fn.lo
    if np.any(side != side[:, :1]):
        raise UnsupportedExactnessError("cubes must have equal sides on every axis")
    if np.any(fn.lo < 0) or np.any(fn.hi > 1):
        raise UnsupportedExactnessError("cubes must lie in [0, 1]^d")
    m, e = np.frexp(side[:, 0])
    if np.any(m != 0.5):
        raise UnsupportedExactnessError("cube sides must be powers of two")
    levels = (1 - e).astype(np.int64)
    if levels.max() * fn.d > 62:
        raise UnsupportedExactnessError("cubes are too fine for 64-bit codes")
    scaled = fn.lo * np.exp2(levels)[:, None]
    if np.any(scaled != np.floor(scaled)):
        raise UnsupportedExactnessError("lower corners must lie on the dyadic grid")
    return levels, scaled.astype(np.int64)


def _encode(ints, k, d):
    code = np.zeros(len(ints), dtype=np.int64)
    for j in range(d):
        code = (code << k) | ints[:, j]
    return code


class _DyadicTable:
    """Sorted codes per level for ancestor lookups."""

    def __init__(self, levels, ints, d):
        self.d = d
        self.by_level = {}
        for k in np.unique(levels):
            idx = np.flatnonzero(levels == k)
            code = _encode(ints[idx], int(k), d)
            order = np.argsort(code)
            self.by_level[int(k)] = (code[order], idx[order])

    def find_ancestor(self, levels, ints, strict):
        """Index in this table of an ancestor (or equal cube) of each query, else -1."""
        out = np.full(len(levels), -1, dtype=np.int64)
        for k, (codes, owner) in self.by_level.items():
            q = np.flatnonzero((levels > k) if strict else (levels >= k))
            if not len(q):
                continue
            shift = levels[q] - k
            code = _encode(ints[q] >> shift[:, None], k, self.d)
            pos = np.clip(np.searchsorted(codes, code), 0, len(codes) - 1)
            hit = codes[pos] == code
            out[q[hit]] = owner[pos[hit]]
        return out


def lp_distance_exact(f, g, p):
    """Exact ``||f - g||_{L^p(lambda)}`` for piecewise-constant f, g on dyadic cubes.

    Raises :class:`UnsupportedExactnessError` when a cube is not dyadic.
    """
    _check_p(p)
    if f.d != g.d:
        raise ValidationError("dimension", "f and g have different d")
    d = f.d
    lf, zf = _dyadic_index(f)
    lg, zg = _dyadic_index(g)
    tf, tg = _DyadicTable(lf, zf, d), _DyadicTable(lg, zg, d)
    vf, vg = f.values, g.values
    volf, volg = 2.0 ** (-d * lf.astype(float)), 2.0 ** (-d * lg.astype(float))

    terms = []
    # f cubes inside (or equal to) a g cube
    anc_g = tg.find_ancestor(lf, zf, strict=False)
    has = anc_g >= 0
    terms.append(volf[has] * np.abs(vf[has] - vg[anc_g[has]]) ** p)
    # g cubes strictly inside an f cube
    anc_f = tf.find_ancestor(lg, zg, strict=True)
    inside = anc_f >= 0
    terms.append(volg[inside] * np.abs(vf[anc_f[inside]] - vg[inside]) ** p)
    # parts of f cubes covered by no g cube
    covered = np.zeros(f.M)
    np.add.at(covered, anc_f[inside], volg[inside])
    free = ~has
    terms.append((volf[free] - covered[free]) * np.abs(vf[free]) ** p)
    # parts of g cubes covered by no f cube
    anc_f_eq = tf.find_ancestor(lg, zg, strict=False)
    free_g = anc_f_eq < 0
    anc_g_strict = tg.find_ancestor(lf, zf, strict=True)
    covered_g = np.zeros(g.M)
    sel = anc_g_strict >= 0
    np.add.at(covered_g, anc_g_strict[sel], volf[sel])
    terms.append((volg[free_g] - covered_g[free_g]) * np.abs(vg[free_g]) ** p)

    total = math.fsum(np.concatenate(terms).tolist())
    return max(total, 0.0) ** (1.0 / p)


# --- quadrature ---------------------------------------------------------------

def lp_error_cubewise(f, approx, p, q=4, chunk=1 << 20):
    """``||f - approx||_{L^p(lambda)}`` by a ``q^d`` midpoint rule in every cube.

    ``approx`` is a :class:`PiecewiseConstantFn` whose cubes tile the domain;
    the value on each cube is taken from ``approx.values`` directly.
    """
    _check_p(p)
    d = approx.d
    offs = (np.indices((q,) * d).reshape(d, -1).T + 0.5) / q
    side = approx.hi - approx.lo
    vol = np.prod(side, axis=1)
    total = []
    per = max(1, chunk // len(offs))
    for s in range(0, approx.M, per):
        lo, sd = approx.lo[s:s + per], side[s:s + per]
        X = (lo[:, None, :] + offs[None] * sd[:, None, :]).reshape(-1, d)
        fx = np.asarray(f(X), dtype=float).reshape(len(lo), len(offs))
        diff = np.abs(fx - approx.values[s:s + per, None]) ** p
        total.append(diff.mean(axis=1) * vol[s:s + per])
    val = math.fsum(np.concatenate(total).tolist()) if total else 0.0
    return LpEstimate(val ** (1.0 / p), "quadrature", n_samples=approx.M * len(offs))


def lp_norm_grid(f, p, d, n_per_axis=1024, lo=0.0, hi=1.0, chunk=1 << 20):
    """Tensor midpoint rule for ``(int_{[lo,hi]^d} |f|^p)^{1/p}``."""
    _check_p(p)
    h = (hi - lo) / n_per_axis
    axis = lo + (np.arange(n_per_axis) + 0.5) * h
    acc = []
    total = n_per_axis ** d
    for s in range(0, total, chunk):
        idx = np.arange(s, min(total, s + chunk))
        X = np.stack([axis[c] for c in np.unravel_index(idx, (n_per_axis,) * d)], axis=1)
        acc.append(float(np.sum(np.abs(f(X)) ** p)))
    return (math.fsum(acc) * h ** d) ** (1.0 / p)


# --- Monte Carlo -------------------------------------------------------------

def _generator(seed, chunk_index):
    return np.random.Generator(np.random.Philox(key=seed, counter=[0, 0, 0, chunk_index]))


def uniform_sampler(d):
    def sample(rng, n):
        return rng.random((n, d))

    return sample


def sample_points(n, d, seed, sampler=None, start=0):
    """Samples ``start .. start+n-1`` of the stream keyed by ``seed``."""
    sampler = sampler or uniform_sampler(d)
    out = []
    first, last = start // MC_CHUNK, (start + n - 1) // MC_CHUNK
    for c in range(first, last + 1):
        block = sampler(_generator(seed, c), MC_CHUNK)
        a = max(start, c * MC_CHUNK) - c * MC_CHUNK
        b = min(start + n, (c + 1) * MC_CHUNK) - c * MC_CHUNK
        out.append(block[a:b])
    return np.vstack(out) if out else np.zeros((0, d))


def _lp_power_samples(f, g, p, X, offset):
    diff = np.asarray(f(X), dtype=float) - np.asarray(g(X), dtype=float)
    bad = np.isnan(diff)
    if bad.any():
        i = int(np.flatnonzero(bad)[0])
        raise InvalidNumericError(f"integrand is NaN at sample {offset + i}", index=offset + i)
    return np.abs(diff) ** p


def lp_distance_mc(f, g, p, d, n_samples=100_000, seed=0, sampler=None):
    """Monte Carlo estimate of ``||f - g||_{L^p(mu)}``.

    ``mu`` is uniform on ``[0,1]^d`` unless ``sampler(rng, n)`` is given.
    ``stderr_power`` is the CLT error of the mean of ``|f-g|^p``; ``stderr``
    propagates it to the p-th root by the delta method.
    """
    _check_p(p)
    if n_samples < 1:
        raise DomainError("n_samples must be >= 1")
    s1 = s2 = 0.0
    for c in range(0, (n_samples + MC_CHUNK - 1) // MC_CHUNK):
        start = c * MC_CHUNK
        n = min(MC_CHUNK, n_samples - start)
        X = sample_points(n, d, seed, sampler, start)
        v = _lp_power_samples(f, g, p, X, start)
        s1 += math.fsum(v.tolist())
        s2 += math.fsum((v * v).tolist())
    m = s1 / n_samples
    var = max(s2 / n_samples - m * m, 0.0) * n_samples / max(n_samples - 1, 1)
    se_pow = math.sqrt(var / n_samples)
    value = m ** (1.0 / p)
    se = se_pow / p * m ** (1.0 / p - 1) if m > 0 else 0.0
    return LpEstimate(value, "monte-carlo", n_samples, se, se_pow, seed)


# --- sup norm on grids ---------------------------------------------------------

@dataclass
class Surface:
    """Discontinuity locus: ``points(n)`` returns ``n`` points and unit normals."""

    points: callable
    name: str = "surface"


def quarter_circle_surface():
    """Boundary of the disk centred at ``(1,1)`` inside the unit square."""

    def points(n):
        t = np.pi + 0.5 * np.pi * (np.arange(n) + 0.5) / n
        normal = np.column_stack([np.cos(t), np.sin(t)])
        return 1.0 + normal, normal

    return Surface(points, "quarter circle")


def _grid_max(f, g, axes, d, chunk=1 << 20):
    shape = tuple(len(a) for a in axes)
    total = int(np.prod(shape))
    best = 0.0
    for s in range(0, total, chunk):
        idx = np.arange(s, min(total, s + chunk))
        X = np.stack([axes[j][c] for j, c in enumerate(np.unravel_index(idx, shape))], axis=1)
        best = max(best, float(np.max(np.abs(f(X) - g(X)))))
    return best


def sup_grid(f, g, grid_per_axis, d, surfaces=(), n_probe=4096, gap=1e-6):
    """Lower estimate of ``sup |f - g|`` on ``[0,1]^d``.

    Evaluates the grid ``{j / (G-1)}^d`` and, for each declared surface, pairs
    of probes ``x +- gap * normal`` across it.  Grids are nested when
    ``G' - 1`` is a multiple of ``G - 1``, so the value cannot decrease along
    such a refinement.
    """
    if grid_per_axis < 2:
        raise DomainError("grid_per_axis must be >= 2")
    axis = np.linspace(0.0, 1.0, grid_per_axis)
    best = _grid_max(f, g, [axis] * d, d)
    for surf in surfaces:
        P, nrm = surf.points(n_probe)
        k = P.shape[1]
        for sign in (-1.0, 1.0):
            Q = np.clip(P + sign * gap * nrm, 0.0, 1.0)
            if k < d:
                Q = np.hstack([Q, np.full((len(Q), d - k), 0.5)])
            best = max(best, float(np.max(np.abs(f(Q) - g(Q)))))
    return best


# --- packing transfer -----------------------------------------------------

@dataclass
class TransferReport:
    holds: bool | None
    f_separated: bool
    approximations_close: bool
    min_f_distance: float
    max_approx_error: float
    min_g_distance: float
    failing_f_pair: tuple | None = None
    failing_index: int | None = None
    failing_g_pair: tuple | None = None
    notes: list = field(default_factory=list)

    def __bool__(self):
        return bool(self.holds)


def empirical_distance_matrix(values, p, weights=None):
    """Pairwise ``L^p(mu_n)`` distances between rows of ``values``."""
    V = np.asarray(values, dtype=float)
    w = np.full(V.shape[1], 1.0 / V.shape[1]) if weights is None else np.asarray(weights, float)
    D = np.abs(V[:, None, :] - V[None, :, :]) ** p @ w
    return D ** (1.0 / p)


def packing_transfer_check(F_pack, G_approx, eps, p, d, n_samples=20_000, seed=0, sampler=None):
    """Check that an eps-approximation of a 3eps-packing is an eps-packing.

    All norms are taken in the empirical measure of ``n_samples`` points drawn
    from ``mu``; the implication then holds exactly for that measure.  When a
    precondition fails the report has ``holds=None`` and names the culprit.
    """
    _check_p(p)
    if len(F_pack) != len(G_approx):
        raise ValidationError("pairing", "F_pack and G_approx must have equal length")
    X = sample_points(n_samples, d, seed, sampler)
    FV = np.array([np.asarray(fn(X), dtype=float) for fn in F_pack])
    GV = np.array([np.asarray(gn(X), dtype=float) for gn in G_approx])
    n = len(FV)
    iu = np.triu_indices(n, 1)
    DF = empirical_distance_matrix(FV, p)[iu] if n > 1 else np.zeros(0)
    DG = empirical_distance_matrix(GV, p)[iu] if n > 1 else np.zeros(0)
    err = (np.mean(np.abs(FV - GV) ** p, axis=1)) ** (1.0 / p)

    rep = TransferReport(
        holds=None,
        f_separated=bool(np.all(DF > 3 * eps)),
        approximations_close=bool(np.all(err < eps)),
        min_f_distance=float(DF.min()) if len(DF) else math.inf,
        max_approx_error=float(err.max()) if n else 0.0,
        min_g_distance=float(DG.min()) if len(DG) else math.inf,
    )
    if not rep.f_separated:
        k = int(np.argmin(DF))
        rep.failing_f_pair = (int(iu[0][k]), int(iu[1][k]))
        rep.notes.append("F_pack is not 3*eps-separated")
    if not rep.approximations_close:
        rep.failing_index = int(np.argmax(err))
        rep.notes.append("an approximation is not within eps")
    if rep.f_separated and rep.approximations_close:
        bad = np.flatnonzero(DG <= eps)
        rep.holds = not len(bad)
        if len(bad):
            rep.failing_g_pair = (int(iu[0][bad[0]]), int(iu[1][bad[0]]))
    return rep


# --- helpers ---------------------------------------------------------------

def disk_indicator(d):
    """Monotone oracle for ``1{(x_1-1)^2 + (x_2-1)^2 <= 1}`` on ``[0,1]^d``."""
    if d < 2:
        raise DomainError("the disk indicator needs d >= 2")
    return MonotoneOracle(disk_function, d, "disk")


def clip(g, a, b):
    """``x -> min(max(g(x), a), b)``."""
    if not a < b:
        raise DomainError("need a < b")

    def clipped(X):
        return np.clip(g(X), a, b)

    return clipped


def impossibility_demo(Ns=(2, 3, 4, 5, 6), p=1, grid=512, d=2, q=4, n_net_checks=20_000, seed=0):
    """Sup and L^p errors of the compiled monotone approximant of the disk indicator.

    Returns one dict per N.  The grid sup error is computed on the
    piecewise-constant approximant, which equals the compiled network
    everywhere; ``net_mismatch`` records the largest difference between the
    two on all arc probes plus ``n_net_checks`` grid points (expected 0).
    """
    from .compiler import compile_cubes
    from .monotone import DecompositionParams, build_approximant, decompose

    f = disk_indicator(d)
    surf = quarter_circle_surface()
    rng = np.random.default_rng(seed)
    rows = []
    for N in Ns:
        params = DecompositionParams(N, p, d)
        dec = decompose(f, params)
        approx = build_approximant(dec, f)
        net = compile_cubes(approx)
        P, nrm = surf.points(4096)
        probes = np.vstack([P - 1e-6 * nrm, P + 1e-6 * nrm])
        if d > 2:
            probes = np.hstack([probes, np.full((len(probes), d - 2), 0.5)])
        probes = np.clip(probes, 0.0, 1.0)
        idx = rng.integers(0, grid, size=(n_net_checks, d))
        check = np.vstack([probes, idx / (grid - 1)])
        mismatch = float(np.max(np.abs(net(check) - approx(check))))
        rows.append({
            "N": N,
            "W": net.architecture.weight_count,
            "cubes": approx.M,
            "sup_error": sup_grid(f, approx, grid, d, [surf]),
            "lp_error": lp_error_cubewise(f, approx, p, q=q).value,
            "certified_lp_error": dec.certified_error(),
            "net_mismatch": mismatch,
        })
    return rows

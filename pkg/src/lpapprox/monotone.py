"""Adaptive dyadic cube decomposition for monotone functions on ``[0,1]^d``.

Level 0 cuts ``[0,1)^d`` into ``2^{Nd}`` cubes of side ``2^-N``.  At level
``i < l`` a cube ``C`` is accepted into ``S_i`` when its oscillation
``f(upper corner) - f(lower corner)`` is at most ``K^{i+1} 2^-N``; the others
(``R_i``) are split into ``2^d`` children for the next level.  Level ``l``
accepts every remaining child.  The approximant takes the value of ``f`` at
the lower corner of each cube, so it never exceeds ``f``.

Cubes are stored as integer corner coordinates at scale ``2^-(N+i)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import mpmath
import numpy as np

from .compiler import PiecewiseConstantFn
from .errors import (
    CapacityError,
    DomainError,
    InvalidNumericError,
    OracleContractError,
    ValidationError,
)

DEFAULT_CUBE_CAP = 1 << 22


class MonotoneOracle:
    """Vectorized oracle for a coordinate-wise non-decreasing ``f: [0,1]^d -> [0,1]``.

    ``func`` maps an ``(n, d)`` array to ``n`` values.  On construction the
    oracle spot-checks monotonicity on ``n_checks`` random comparable pairs
    and raises :class:`OracleContractError` on a violation.
    """

    def __init__(self, func, d, name=None, n_checks=256, seed=0):
        self.func = func
        self.d = int(d)
        if self.d < 1:
            raise ValidationError("dimension", "d must be positive")
        self.name = name or getattr(func, "__name__", "f")
        if n_checks:
            self.spot_check(n_checks, seed)

    def __call__(self, X):
        X = np.asarray(X, dtype=float)
        single = X.ndim == 1
        X = np.atleast_2d(X)
        if X.shape[1] != self.d:
            raise ValidationError("input shape", f"expected points of dimension {self.d}")
        y = np.asarray(self.func(X), dtype=float).reshape(len(X))
        bad = np.isnan(y)
        if bad.any():
            raise InvalidNumericError("oracle returned NaN", index=int(np.flatnonzero(bad)[0]))
        if np.any((y < 0) | (y > 1)):
            raise OracleContractError("values must lie in [0, 1]")
        return float(y[0]) if single else y

    def spot_check(self, n_checks=256, seed=0):
        rng = np.random.default_rng(seed)
        X = rng.random((n_checks, self.d))
        Y = X + rng.random((n_checks, self.d)) * (1 - X)
        # also probe pairs that differ along a single axis
        axis = rng.integers(0, self.d, n_checks)
        Z = X.copy()
        Z[np.arange(n_checks), axis] = Y[np.arange(n_checks), axis]
        lo = np.vstack([X, X, np.zeros((1, self.d))])
        hi = np.vstack([Y, Z, np.ones((1, self.d))])
        fl, fh = self(lo), self(hi)
        bad = np.flatnonzero(fl > fh)
        if len(bad):
            k = bad[0]
            raise OracleContractError(
                f"f({lo[k].tolist()}) = {fl[k]} exceeds f({hi[k].tolist()}) = {fh[k]}"
            )


@dataclass(frozen=True)
class DecompositionParams:
    """Resolution ``N``, exponent ``p`` and dimension ``d`` with derived K, beta, l."""

    N: int
    p: float
    d: int

    def __post_init__(self):
        if int(self.N) != self.N or self.N < 1:
            raise ValidationError("resolution", "N must be a positive integer")
        if int(self.d) != self.d or self.d < 1:
            raise ValidationError("dimension", "d must be a positive integer")
        if not (self.p >= 1 and math.isfinite(self.p)):
            raise DomainError("p must be a finite real >= 1")
        K, l = self.K, self.l
        if not K > 1:
            raise ValidationError("K > 1")
        # K^-l <= 2^-N < K^{-l+1}, up to the slack used in the ceiling
        lhs = -l * math.log(K)
        mid = -self.N * math.log(2)
        if not (lhs <= mid + 1e-9 and mid < (1 - l) * math.log(K)):
            raise ValidationError("level count", "l does not bracket 2^-N")

    @property
    def beta(self):
        if self.p == 1:
            return None
        return 0.5 * (self.d - 1 + 1.0 / (self.p - 1))

    @property
    def K(self):
        if self.p == 1:
            return float(2 ** self.d)
        return 2.0 ** self.beta

    @property
    def l(self):
        return max(1, math.ceil(self.N * math.log(2) / math.log(self.K) - 1e-12))

    @property
    def regime(self):
        """Sign of ``p(d-1) - d``: 'below', 'critical' or 'above'."""
        t = self.p * (self.d - 1)
        if t < self.d:
            return "below"
        if t > self.d:
            return "above"
        return "critical"

    def threshold(self, i):
        """Oscillation tolerance ``K^{i+1} 2^-N`` at level ``i``."""
        return self.K ** (i + 1) * 2.0 ** (-self.N)


@dataclass
class CubeDecomposition:
    """Trace of the decomposition.

    ``levels[i]`` is an ``(|S_i|, d)`` integer array of lower corners at scale
    ``2^-(N+i)``; ``lower_values[i]`` and ``oscillation[i]`` hold ``f`` at the
    lower corner and ``f(upper) - f(lower)`` for the same cubes.
    ``remaining[i] = |R_i|`` for ``i < l``.
    """

    params: DecompositionParams
    levels: list
    lower_values: list
    oscillation: list
    remaining: list
    oracle_calls: int = 0
    oracle_name: str = ""
    meta: dict = field(default_factory=dict)

    @property
    def counts(self):
        return [len(c) for c in self.levels]

    @property
    def total_cubes(self):
        return sum(self.counts)

    @property
    def compiled_weight_count(self):
        d = self.params.d
        return 2 * (d + 1) ** 2 * self.total_cubes

    def side(self, i):
        return 2.0 ** (-(self.params.N + i))

    def certified_error(self):
        """Rigorous upper bound on ``||f - f~||_{L^p}``.

        On each cube ``0 <= f - f~ <= f(upper) - f(lower)`` by monotonicity.
        """
        p, d = self.params.p, self.params.d
        total = math.fsum(
            float(np.sum(osc ** p)) * self.side(i) ** d for i, osc in enumerate(self.oscillation)
        )
        return total ** (1.0 / p)

    def cube_counts_ok(self):
        return all(c <= cube_count_bound(self.params, i) for i, c in enumerate(self.counts))

    def to_dict(self):
        pr = self.params
        return {
            "params": {"N": pr.N, "p": pr.p, "d": pr.d, "K": pr.K, "beta": pr.beta, "l": pr.l},
            "counts": self.counts,
            "remaining": list(self.remaining),
            "levels": [lv.tolist() for lv in self.levels],
        }


def cube_count_bound(params, i):
    """Cube-count bound ``d K^-i 2^{i(d-1)+Nd+1}`` for level ``i``."""
    d, N = params.d, params.N
    return d * params.K ** (-i) * 2.0 ** (i * (d - 1) + N * d + 1)


def _corner_values(f, ints, scale):
    """``f`` at integer corners ``ints * 2^-scale``, deduplicated."""
    uniq, inv = np.unique(ints, axis=0, return_inverse=True)
    vals = f(uniq * 2.0 ** (-scale))
    return vals[inv.ravel()], len(uniq)


def decompose(f, params, cube_cap=DEFAULT_CUBE_CAP):
    """Run the adaptive decomposition of ``[0,1)^d`` for the oracle ``f``."""
    d, N, l = params.d, params.N, params.l
    if getattr(f, "d", d) != d:
        raise OracleContractError(f"oracle dimension {f.d} differs from d={d}")
    n0 = 2 ** (N * d)
    if n0 > cube_cap:
        raise CapacityError(f"level 0 needs {n0} cubes, cap is {cube_cap}")
    grid = np.indices((2 ** N,) * d).reshape(d, -1).T.astype(np.int64)
    offsets = np.indices((2,) * d).reshape(d, -1).T.astype(np.int64)

    levels, lows, oscs, remaining = [], [], [], []
    calls = 0
    current = grid
    for i in range(l + 1):
        scale = N + i
        lo_val, n_lo = _corner_values(f, current, scale)
        if i < l:
            hi_val, n_hi = _corner_values(f, current + 1, scale)
            calls += n_lo + n_hi
            osc = hi_val - lo_val
            if np.any(osc < 0):
                k = int(np.flatnonzero(osc < 0)[0])
                raise OracleContractError(f"f decreases across cube {current[k].tolist()} at level {i}")
            accept = osc <= params.threshold(i)
        else:
            hi_val, n_hi = _corner_values(f, current + 1, scale)
            calls += n_lo + n_hi
            osc = hi_val - lo_val
            accept = np.ones(len(current), dtype=bool)
        levels.append(current[accept])
        lows.append(lo_val[accept])
        oscs.append(osc[accept])
        if i < l:
            rest = current[~accept]
            remaining.append(len(rest))
            n_next = len(rest) * 2 ** d
            if n_next > cube_cap:
                raise CapacityError(f"level {i + 1} needs {n_next} cubes, cap is {cube_cap}")
            current = (2 * rest[:, None, :] + offsets[None]).reshape(-1, d)
    return CubeDecomposition(
        params, levels, lows, oscs, remaining, calls, getattr(f, "name", "")
    )


def build_approximant(dec, f=None):
    """Piecewise-constant ``f~ = f(lower corner)`` on the cubes of ``dec``.

    If ``f`` is given, its lower-corner values are recomputed and compared
    with the stored ones; a mismatch raises :class:`OracleContractError`.
    """
    d = dec.params.d
    lo, hi, vals = [], [], []
    for i, ints in enumerate(dec.levels):
        h = dec.side(i)
        lo.append(ints * h)
        hi.append((ints + 1) * h)
        vals.append(dec.lower_values[i])
    lo, hi, vals = np.vstack(lo), np.vstack(hi), np.concatenate(vals)
    if f is not None:
        if getattr(f, "d", d) != d:
            raise OracleContractError("oracle dimension differs from the decomposition")
        if not np.array_equal(f(lo), vals):
            raise OracleContractError("oracle values differ from the decomposition's")
    # the top boundary x_j = 1 joins the adjacent cubes so [0,1]^d is covered
    fb = np.hstack([np.ones_like(lo, dtype=bool), hi == 1.0])
    return PiecewiseConstantFn(d, lo, hi, fb, vals)


def decomposition_error_bound(params):
    """Return ``(regime, constant, bound)`` for ``||f - f~||_{L^p}``.

    below:    ``c1 2^-N``
    above:    ``c2 2^{-N(1 + 1/beta)/p}``
    critical: ``c3 N^{1/p} 2^-N``
    """
    K, d, p, N = params.K, params.d, params.p, params.N
    Kp = K ** p
    regime = params.regime
    if regime == "below":
        r = K ** (p - 1)
        c = (Kp + 2 * Kp * d * r / (2 - r) + 2 * d) ** (1 / p)
        return regime, c, c * 2.0 ** (-N)
    if regime == "above":
        c = (Kp + 2 * K ** (2 * p) * d / (K ** (p - 1) / 2 - 1) + 2 * d) ** (1 / p)
        return regime, c, c * 2.0 ** (-N * (1 + 1 / params.beta) / p)
    c = (Kp + 2 * Kp * d / (d - 1) + 2 * d) ** (1 / p)
    return regime, c, c * N ** (1 / p) * 2.0 ** (-N)


def predicted_weight_budget(params, max_bits=4096):
    """``W_N = 2^{Nd+2} d (d+1)^2 sum_{i<=l} (2^{d-1}/K)^i``, floored to an int."""
    d, N, l = params.d, params.N, params.l
    if N * d + 2 > max_bits:
        raise CapacityError(f"2^{N * d + 2} exceeds the {max_bits}-bit budget")
    with mpmath.workdps(max(50, N * d // 3 + 30)):
        if params.p == 1:
            K = mpmath.mpf(2) ** d
        else:
            K = mpmath.mpf(2) ** (mpmath.mpf(d - 1) / 2 + 1 / (2 * (mpmath.mpf(params.p) - 1)))
        q = mpmath.mpf(2) ** (d - 1) / K
        s = mpmath.fsum(q ** i for i in range(l + 1))
        w = mpmath.mpf(2) ** (N * d + 2) * d * (d + 1) ** 2 * s
        return int(mpmath.floor(w + mpmath.mpf(10) ** (-20)))


def upper_rate(W, d, p):
    """``W^{-1/max(d,(d-1)p)}``, or ``W^{-1/d} log W`` when ``p(d-1) = d``."""
    if d < 2:
        raise DomainError("the monotone upper rate requires d >= 2")
    if not p >= 1:
        raise DomainError("p must be >= 1")
    if W < 2:
        raise DomainError("W must be >= 2")
    if p * (d - 1) == d:
        return W ** (-1.0 / d) * math.log(W)
    return W ** (-1.0 / max(d, (d - 1) * p))


# --- test corpus -----------------------------------------------------------

def _mean(X):
    return X.mean(axis=1)


def _max(X):
    return X.max(axis=1)


def _min(X):
    return X.min(axis=1)


def _product(X):
    return np.prod(X, axis=1)


def _smoothstep(X):
    return np.prod(X * X * (3 - 2 * X), axis=1)


def disk_function(X):
    """Indicator of the closed unit disk centred at ``(1, 1)`` in the first two axes."""
    return (((X[:, 0] - 1) ** 2 + (X[:, 1] - 1) ** 2) <= 1).astype(float)


def orthant_mixture(d, n_terms=5, seed=0):
    """Seeded nonnegative mixture of upper-orthant indicators ``1{x >= t}``."""
    rng = np.random.default_rng(seed)
    t = rng.random((n_terms, d))
    w = rng.random(n_terms)
    w /= w.sum()

    def mixture(X):
        hit = np.all(X[:, None, :] >= t[None], axis=2)
        return np.clip(hit.astype(float) @ w, 0.0, 1.0)

    mixture.thresholds, mixture.weights = t, w
    return mixture


def corpus(d, seed=0):
    """Named monotone oracles used by tests and experiments."""
    out = {
        "mean": MonotoneOracle(_mean, d, "mean"),
        "max": MonotoneOracle(_max, d, "max"),
        "min": MonotoneOracle(_min, d, "min"),
        "product": MonotoneOracle(_product, d, "product"),
        "smoothstep": MonotoneOracle(_smoothstep, d, "smoothstep"),
        "orthant_mixture": MonotoneOracle(orthant_mixture(d, seed=seed), d, "orthant_mixture"),
    }
    if d >= 2:
        out["disk"] = MonotoneOracle(disk_function, d, "disk")
    return out

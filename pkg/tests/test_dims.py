import itertools
import json

import numpy as np
import pytest

from lpapprox.dims import (FiniteFunctionClass, fat_dim, fat_scale_identity_check, greedy_packing,
                           packing_number, packing_scale_identity_check, pseudo_dim, vc_dim)
from lpapprox.errors import CapacityError, DomainError, ParseError, ValidationError


def naive_dim(V, gamma=None):
    """Largest shattered subset by enumerating subsets, witnesses and sign patterns."""
    n_f, n_p = V.shape
    best = 0
    for k in range(1, n_p + 1):
        hit = False
        for S in itertools.combinations(range(n_p), k):
            cands = []
            for j in S:
                vals = np.unique(V[:, j])
                if gamma is None:
                    cands.append(list(vals))
                else:
                    mids = (vals[:-1] + vals[1:]) / 2
                    cands.append(sorted(set(vals + gamma) | set(vals - gamma) | set(mids)))
            for r in itertools.product(*cands):
                r = np.array(r)
                sub = V[:, S]
                if gamma is None:
                    up, down = sub >= r, sub < r
                else:
                    up, down = sub >= r + gamma - 1e-12, sub <= r - gamma + 1e-12
                pats = set()
                for i in range(n_f):
                    if np.all(up[i] | down[i]):
                        pats.add(tuple(up[i]))
                if len(pats) == 2 ** k:
                    hit = True
                    break
            if hit:
                break
        if not hit:
            return best
        best = k
    return best


def naive_packing(V, eps, p=1.0):
    n = len(V)
    D = (np.abs(V[:, None, :] - V[None, :, :]) ** p).mean(axis=2) ** (1 / p)
    for size in range(n, 0, -1):
        for S in itertools.combinations(range(n), size):
            if all(D[i, j] > eps for i, j in itertools.combinations(S, 2)):
                return size
    return 0


class TestVC:
    @pytest.mark.parametrize("k", [1, 2, 3, 4])
    def test_full_pattern_class(self, k):
        V = np.array(list(itertools.product([-1, 1], repeat=k)), dtype=float)
        r = vc_dim(FiniteFunctionClass(V))
        assert r == k and r.witness == tuple(range(k))

    def test_single_function(self):
        assert vc_dim(FiniteFunctionClass([[1, -1, 1]])) == 0

    def test_thresholds_on_line(self):
        V = np.array([[1 if x >= t else -1 for x in range(6)] for t in range(7)], dtype=float)
        assert vc_dim(FiniteFunctionClass(V)) == 1

    def test_non_binary(self):
        with pytest.raises(DomainError):
            vc_dim(FiniteFunctionClass([[0.5, 1.0], [1.0, -1.0]]))


class TestPseudoAndFat:
    @pytest.mark.parametrize("seed", range(6))
    def test_pseudo_matches_naive(self, seed):
        V = np.random.default_rng(seed).integers(0, 4, size=(12, 4)).astype(float)
        assert pseudo_dim(FiniteFunctionClass(V)) == naive_dim(FiniteFunctionClass(V).values)

    @pytest.mark.parametrize("seed,gamma", [(0, 0.5), (1, 0.25), (2, 1.0), (3, 0.75)])
    def test_fat_matches_naive(self, seed, gamma):
        V = np.random.default_rng(100 + seed).integers(0, 5, size=(14, 4)).astype(float)
        assert fat_dim(FiniteFunctionClass(V), gamma) == naive_dim(FiniteFunctionClass(V).values, gamma)

    def test_pseudo_at_least_vc(self):
        rng = np.random.default_rng(5)
        for _ in range(5):
            V = rng.choice([-1.0, 1.0], size=(10, 5))
            c = FiniteFunctionClass(V)
            assert pseudo_dim(c) >= vc_dim(c)

    def test_fat_non_increasing_in_gamma(self):
        V = np.random.default_rng(9).random((16, 5))
        c = FiniteFunctionClass(V)
        vals = [fat_dim(c, g) for g in (0.01, 0.05, 0.1, 0.2, 0.4)]
        assert all(b <= a for a, b in zip(vals, vals[1:]))
        assert vals[0] <= pseudo_dim(c)

    def test_constant_class(self):
        c = FiniteFunctionClass(np.full((5, 3), 0.7))
        assert c.n_functions == 1 and c.n_duplicates == 4
        assert pseudo_dim(c) == 0 and fat_dim(c, 0.1) == 0

    def test_gamma_positive(self):
        with pytest.raises(DomainError):
            fat_dim(FiniteFunctionClass([[0.0], [1.0]]), 0.0)

    def test_caps(self):
        with pytest.raises(CapacityError):
            pseudo_dim(FiniteFunctionClass(np.random.default_rng(0).random((4, 13))))
        with pytest.raises(CapacityError):
            fat_dim(FiniteFunctionClass(np.random.default_rng(0).random((65, 3))), 0.1)


class TestPacking:
    def test_large_eps(self):
        V = np.random.default_rng(1).random((8, 4))
        assert packing_number(FiniteFunctionClass(V), 2.0) == 1

    def test_small_eps(self):
        V = np.random.default_rng(1).random((8, 4))
        assert packing_number(FiniteFunctionClass(V), 1e-6) == 8

    @pytest.mark.parametrize("eps,p", [(0.2, 1.0), (0.3, 2.0), (0.25, 1.5)])
    def test_brute_force(self, eps, p):
        V = np.random.default_rng(4).random((12, 5))
        r = packing_number(FiniteFunctionClass(V), eps, p)
        assert r.exact and r == naive_packing(V, eps, p)

    def test_greedy_is_valid_lower_bound(self):
        V = np.random.default_rng(4).random((12, 5))
        c = FiniteFunctionClass(V)
        g = greedy_packing(c, 0.25)
        D = np.abs(V[:, None] - V[None]).mean(axis=2)
        assert all(D[i, j] > 0.25 for i, j in itertools.combinations(g.witness, 2))
        assert g <= packing_number(c, 0.25)

    def test_above_cap_falls_back(self):
        V = np.random.default_rng(2).random((30, 4))
        r = packing_number(FiniteFunctionClass(V), 0.2)
        assert not r.exact and r >= 1

    def test_bad_weights(self):
        with pytest.raises(ValidationError):
            packing_number(FiniteFunctionClass([[0.0, 1.0], [1.0, 0.0]]), 0.1, weights=[0.5, 0.6])


class TestIdentities:
    @pytest.mark.parametrize("seed", range(4))
    def test_scale_identities(self, seed):
        rng = np.random.default_rng(seed)
        V = rng.integers(-3, 4, size=(10, 4)).astype(float)
        c = FiniteFunctionClass(V)
        assert packing_scale_identity_check(c, 1.0, -4.0, 4.0)
        assert fat_scale_identity_check(c, 0.5, -4.0, 4.0)


class TestSerialization:
    def test_round_trip(self):
        c = FiniteFunctionClass([[0.0, 1.0], [1.0, 0.5]], range=(0.0, 1.0))
        back = FiniteFunctionClass.from_json(json.dumps(c.to_dict()))
        assert np.array_equal(back.values, c.values) and back.range == (0.0, 1.0)

    def test_malformed(self):
        with pytest.raises(ParseError):
            FiniteFunctionClass.from_json("[1, 2")
        with pytest.raises(ParseError):
            FiniteFunctionClass.from_json('{"points": []}')

import numpy as np
import pytest

from refcolor import propagation
from refcolor.hints import HintPoint, HintSet
from refcolor.propagation import SolverConfig, build_affinity, colorize, propagate


def hintset(entries, d=4):
    return HintSet(
        tuple(HintPoint(cx=cx, cy=cy, a=a, b=b, confidence=1.0, segment=0)
              for cx, cy, a, b in entries),
        cell_size=d,
    )


class TestBuildAffinity:
    def test_constant_uniform_weights(self):
        g = build_affinity(np.full((5, 5), 0.5))
        w = g.weights.toarray()
        # corner pixel: 3 neighbors, interior: 8
        assert np.allclose(w[0, [1, 5, 6]], 1 / 3)
        center = 2 * 5 + 2
        nbrs = [center - 6, center - 5, center - 4, center - 1,
                center + 1, center + 4, center + 5, center + 6]
        assert np.allclose(w[center, nbrs], 1 / 8)

    def test_rows_sum_to_one(self, rng):
        g = build_affinity(rng.random((12, 9)))
        sums = np.asarray(g.weights.sum(axis=1)).ravel()
        assert np.allclose(sums, 1.0, atol=1e-9)

    def test_step_edge_weights(self):
        img = np.zeros((5, 6))
        img[:, 3:] = 1.0
        g = build_affinity(img, sigma_floor=0.01)
        w = g.weights.toarray()
        r = 2 * 6 + 2  # pixel left of the step
        same_side = [r - 7, r - 6, r - 1, r + 5, r + 6]
        cross = [r - 5, r + 1, r + 7]
        # hand evaluation: sigma_r = local 3x3 std ~ 0.471 -> cross weight
        # exp(-1/(2*0.471^2)) ~ 0.105 of the same-side weight
        assert w[r, cross].max() < 0.15 * w[r, same_side].min()

    def test_degenerate_image(self):
        with pytest.raises(ValueError):
            build_affinity(np.zeros((1, 1)))

    def test_symmetric_adjacency(self, rng):
        g = build_affinity(rng.random((6, 6)))
        adj = (g.weights != 0).astype(int)
        assert (adj != adj.T).nnz == 0


class TestPropagate:
    def test_single_hint_constant_image(self):
        gray = np.full((16, 16), 0.5)
        res = propagate(gray, hintset([(2, 2, 10.0, -5.0)]))
        assert np.allclose(res.a, 10.0, atol=1e-4)
        assert np.allclose(res.b, -5.0, atol=1e-4)
        assert not res.no_hints

    def test_maximum_principle(self, rng):
        gray = rng.random((24, 24))
        hs = hintset([(2, 2, 0.0, 5.0), (22, 22, 20.0, -5.0)])
        res = propagate(gray, hs)
        assert res.a.min() >= -1e-9 and res.a.max() <= 20.0 + 1e-9
        assert res.b.min() >= -5.0 - 1e-9 and res.b.max() <= 5.0 + 1e-9

    def test_hard_constraints_exact(self, rng):
        gray = rng.random((16, 16))
        hs = hintset([(2, 2, 12.5, -7.25), (13, 13, -3.0, 8.0)], d=4)
        res = propagate(gray, hs)
        assert (res.a[0:4, 0:4] == 12.5).all()
        assert (res.b[0:4, 0:4] == -7.25).all()
        assert (res.a[12:16, 12:16] == -3.0).all()

    def test_empty_hints(self):
        res = propagate(np.full((8, 8), 0.5), HintSet((), cell_size=4))
        assert res.no_hints
        assert (res.a == 0).all() and (res.b == 0).all()

    def test_agrees_with_dense_direct_solve(self, rng):
        for trial in range(5):
            gray = rng.random((12, 14))
            hs = hintset([(1, 1, float(rng.uniform(-40, 40)), float(rng.uniform(-40, 40))),
                          (13, 11, float(rng.uniform(-40, 40)), float(rng.uniform(-40, 40)))],
                         d=3)
            res = propagate(gray, hs, SolverConfig(tol=1e-10))
            graph = build_affinity(gray, 0.01)
            w = graph.weights.toarray()
            _, _, fixed = propagation.hint_constraint_planes(hs, gray.shape)
            free = ~fixed.ravel()
            n_free = int(free.sum())
            a_mat = np.eye(n_free) - w[np.ix_(free, free)]
            for plane in (res.a, res.b):
                b_vec = w[np.ix_(free, ~free)] @ plane.ravel()[~free]
                direct = np.linalg.solve(a_mat, b_vec)
                assert np.abs(plane.ravel()[free] - direct).max() < 1e-5

    def test_sor_convergence_128(self, rng):
        gray = rng.random((128, 128))
        # hint density matching real pipeline runs: one hinted cell out of
        # every 2x2 block of d=16 cells
        entries = []
        for cy in range(0, 8, 2):
            for cx in range(0, 8, 2):
                entries.append((cx * 16 + 8, cy * 16 + 8,
                                float(rng.uniform(-30, 30)), float(rng.uniform(-30, 30))))
        hs = hintset(entries, d=16)
        res = propagate(gray, hs, SolverConfig(tol=1e-6, max_iter=10_000, omega=1.6))
        assert res.residual < 1e-6
        assert res.iterations < 10_000

    def test_solver_config_validation(self):
        with pytest.raises(ValueError):
            SolverConfig(omega=2.5)
        with pytest.raises(ValueError):
            SolverConfig(tol=0.0)


class TestColorize:
    def test_neutral(self):
        gray = np.full((8, 8), 0.5)
        rgb = colorize(gray, np.zeros((8, 8)), np.zeros((8, 8)))
        assert (np.abs(rgb[..., 0].astype(int) - rgb[..., 1].astype(int)) <= 1).all()
        assert (np.abs(rgb[..., 1].astype(int) - rgb[..., 2].astype(int)) <= 1).all()

    def test_round_trip(self, rng):
        from refcolor import color

        rgb = rng.integers(0, 256, (12, 12, 3), dtype=np.uint8)
        lab = color.rgb_to_lab(rgb)
        out = colorize(lab[..., 0] / 100.0, lab[..., 1], lab[..., 2])
        assert np.abs(out.astype(int) - rgb.astype(int)).max() <= 1

    def test_extreme_ab_clamps(self):
        gray = np.full((4, 4), 0.5)
        rgb = colorize(gray, np.full((4, 4), 127.0), np.full((4, 4), -128.0))
        assert rgb.dtype == np.uint8

    def test_dim_mismatch(self):
        with pytest.raises(ValueError):
            colorize(np.zeros((4, 4)), np.zeros((5, 4)), np.zeros((4, 4)))

"""Step rules, batch iterations, reduction identities, the run driver."""

import numpy as np
import pytest

from vqlab import (
    Chain,
    Codebook,
    ConstantGain,
    DatasetSource,
    DensitySource,
    FixedNeighbors,
    Grid,
    Probe,
    RunState,
    Schedule,
    SomToScl,
    batch_som_iteration,
    bvq_iteration,
    distortion,
    find_winner,
    get_density,
    kmeans_step,
    parse_algorithm,
    run,
    scl_step,
    som_step,
)
from vqlab.errors import ConfigError, DimensionMismatchError, EmptyDataError


def chain_state(values, n=None):
    values = np.asarray(values, dtype=float)
    return RunState(Codebook(values, Chain(n or len(values))))


class TestFindWinner:
    def test_nearest(self):
        cb = Codebook([0.2, 0.8], Chain(2))
        assert find_winner(cb, 0.3) == 0

    def test_tie_goes_to_lowest_index(self):
        cb = Codebook([0.25, 0.75], Chain(2))
        assert find_winner(cb, 0.5) == 0

    def test_euclidean_2d(self):
        cb = Codebook([[0.0, 0.0], [1.0, 1.0]], Chain(2))
        assert find_winner(cb, [0.9, 0.9]) == 1

    def test_dimension_mismatch(self):
        cb = Codebook([[0.0, 0.0], [1.0, 1.0]], Chain(2))
        with pytest.raises(DimensionMismatchError):
            find_winner(cb, [0.1, 0.2, 0.3])


class TestSclStep:
    def test_winner_moves_by_gain(self):
        state = chain_state([0.5])
        scl_step(state, 1.0, 0.1)
        assert state.codebook.vectors[0, 0] == pytest.approx(0.55)
        assert state.t == 1

    def test_zero_residual_fixed(self):
        state = chain_state([0.5])
        scl_step(state, 0.5, 0.3)
        assert state.codebook.vectors[0, 0] == 0.5

    def test_full_step_lands_on_datum(self):
        state = chain_state([0.5])
        scl_step(state, 1.0, 1.0)
        assert state.codebook.vectors[0, 0] == 1.0

    def test_only_winner_moves(self):
        state = chain_state([0.1, 0.5, 0.9])
        scl_step(state, 0.95, 0.1)
        np.testing.assert_array_equal(state.codebook.vectors[:2, 0], [0.1, 0.5])

    def test_gain_validated(self):
        state = chain_state([0.5])
        for bad in (0.0, -0.1, 1.5):
            with pytest.raises(ValueError):
                scl_step(state, 1.0, bad)

    def test_convex_combination(self):
        rng = np.random.default_rng(2)
        state = chain_state(np.sort(rng.random(8)))
        for _ in range(500):
            x = rng.random()
            eps = rng.uniform(0.01, 1.0)
            before = state.codebook.vectors[:, 0].copy()
            w = find_winner(state.codebook, x)
            scl_step(state, x, eps)
            after = state.codebook.vectors[:, 0]
            lo, hi = min(before[w], x), max(before[w], x)
            assert lo <= after[w] <= hi


class TestSomStep:
    def test_winner_and_neighbor_move(self):
        state = chain_state([0.1, 0.5, 0.9])
        som_step(state, 0.95, 0.1, 2)
        np.testing.assert_allclose(state.codebook.vectors[:, 0], [0.1, 0.545, 0.905])

    def test_full_step_all_neighbors_on_datum(self):
        state = chain_state([0.2, 0.5, 0.8])
        som_step(state, 0.55, 1.0, 2)
        np.testing.assert_array_equal(state.codebook.vectors[:, 0], [0.55, 0.55, 0.55])

    def test_nu_zero_identical_to_scl(self):
        rng = np.random.default_rng(0)
        for _ in range(1000):
            q = np.sort(rng.random(5))
            x = float(rng.random())
            eps = float(rng.uniform(0.01, 1.0))
            a = chain_state(q.copy())
            b = chain_state(q.copy())
            scl_step(a, x, eps)
            som_step(b, x, eps, 0)
            np.testing.assert_array_equal(a.codebook.vectors, b.codebook.vectors)

    def test_grid_som_moves_cross(self):
        vectors = np.zeros((9, 2))
        vectors[4] = [1.0, 1.0]
        state = RunState(Codebook(vectors, Grid(3, 3)))
        som_step(state, [1.0, 1.0], 0.5, 5)
        moved = {1, 3, 4, 5, 7}
        for unit in range(9):
            if unit in moved and unit != 4:
                np.testing.assert_array_equal(state.codebook.vectors[unit], [0.5, 0.5])
            elif unit != 4:
                np.testing.assert_array_equal(state.codebook.vectors[unit], [0.0, 0.0])


class TestKmeansStep:
    def test_first_win_plants_on_datum(self):
        state = chain_state([0.5])
        kmeans_step(state, 0.7)
        assert state.codebook.vectors[0, 0] == 0.7
        assert state.class_counts[0] == 1

    def test_second_win_averages(self):
        state = chain_state([0.5])
        kmeans_step(state, 0.5)
        kmeans_step(state, 1.0)
        assert state.codebook.vectors[0, 0] == 0.75
        assert state.class_counts[0] == 2

    def test_running_mean_identity(self):
        rng = np.random.default_rng(4)
        state = chain_state(np.sort(rng.random(6)))
        won: dict[int, list[float]] = {}
        for _ in range(2000):
            x = float(rng.random())
            w = find_winner(state.codebook, x)
            won.setdefault(w, []).append(x)
            kmeans_step(state, x)
        for unit, data in won.items():
            assert state.codebook.vectors[unit, 0] == pytest.approx(
                np.mean(data), abs=1e-10
            )

    def test_never_winning_unit_unchanged(self):
        state = chain_state([0.0, 100.0])
        for x in (0.1, 0.2, 0.05):
            kmeans_step(state, x)
        assert state.codebook.vectors[1, 0] == 100.0
        assert state.class_counts[1] == 0


class TestBvqIteration:
    def test_class_means(self):
        cb = Codebook([0.2, 0.8], Chain(2))
        bvq_iteration(cb, [0.0, 0.1, 0.9, 1.0])
        np.testing.assert_allclose(cb.vectors[:, 0], [0.05, 0.95])

    def test_fixed_point_unchanged(self):
        cb = Codebook([0.05, 0.95], Chain(2))
        bvq_iteration(cb, [0.0, 0.1, 0.9, 1.0])
        np.testing.assert_array_equal(cb.vectors[:, 0], [0.05, 0.95])

    def test_single_cluster_mean(self):
        cb = Codebook([0.5], Chain(1))
        bvq_iteration(cb, [0.0, 1.0])
        assert cb.vectors[0, 0] == 0.5

    def test_empty_class_keeps_quantizer(self):
        cb = Codebook([0.1, 50.0], Chain(2))
        bvq_iteration(cb, [0.0, 0.2])
        assert cb.vectors[1, 0] == 50.0

    def test_empty_data_rejected(self):
        cb = Codebook([0.5], Chain(1))
        with pytest.raises(EmptyDataError):
            bvq_iteration(cb, [])

    def test_distortion_never_increases(self):
        rng = np.random.default_rng(9)
        data = rng.random((400, 2))
        for _ in range(20):
            cb = Codebook(rng.random((5, 2)), Chain(5))
            before = distortion(data, cb)
            for _ in range(8):
                bvq_iteration(cb, data)
                after = distortion(data, cb)
                assert after <= before + 1e-12
                before = after


class TestBatchSomIteration:
    def test_union_of_all_three_classes(self):
        cb = Codebook([0.1, 0.5, 0.9], Chain(3))
        batch_som_iteration(cb, [0.0, 0.5, 1.0], 2)
        assert cb.vectors[1, 0] == pytest.approx(0.5)

    def test_nu_zero_identical_to_bvq(self):
        rng = np.random.default_rng(1)
        for _ in range(50):
            q = np.sort(rng.random(6))
            data = rng.random(40)
            a = Codebook(q.copy(), Chain(6))
            b = Codebook(q.copy(), Chain(6))
            bvq_iteration(a, data)
            batch_som_iteration(b, data, 0)
            np.testing.assert_array_equal(a.vectors, b.vectors)

    def test_empty_union_keeps_quantizer(self):
        cb = Codebook([0.0, 0.1, 60.0, 70.0, 80.0], Chain(5))
        batch_som_iteration(cb, [0.0, 0.05, 0.2], 2)
        assert cb.vectors[4, 0] == 80.0


class TestParseAlgorithm:
    def test_specs(self):
        assert parse_algorithm("scl").kind == "scl"
        assert parse_algorithm("som:4").nu == 4
        kscl = parse_algorithm("kscl:2:0.6")
        assert (kscl.nu, kscl.switch_fraction) == (2, 0.6)
        assert parse_algorithm("bvq").is_batch
        assert parse_algorithm("batch_som:2").is_batch
        assert parse_algorithm("kmeans").kind == "kmeans"
        dec = parse_algorithm("som_decreasing")
        assert dec.neighbor_plan().plan[0] == (0.25, 25)

    def test_custom_decreasing_plan(self):
        spec = parse_algorithm("som_decreasing:0.5:8,1.0:2")
        assert spec.neighbor_plan().plan == ((0.5, 8), (1.0, 2))

    def test_bad_specs(self):
        for text in ("som", "kscl:2", "lloyd", "scl:1", "som:x"):
            with pytest.raises(ConfigError):
                parse_algorithm(text)


def d2_probe(stride=1):
    return Probe("q0", lambda cb: float(cb.vectors[0, 0]), stride)


class TestRunDriver:
    def setup_method(self):
        self.density = get_density("linear2x")
        self.schedule = Schedule(ConstantGain(0.1), FixedNeighbors(0))

    def _codebook(self, n=8):
        levels = (np.arange(n) + 0.5) / n
        return Codebook(self.density.ppf(levels), Chain(n))

    def test_determinism_bit_identical(self):
        kwargs = dict(
            source=DensitySource(self.density),
            schedule=self.schedule,
            T=500,
            probes=[d2_probe(50)],
            seed=3,
        )
        first = run("som:2", self._codebook(), **kwargs)
        second = run("som:2", self._codebook(), **kwargs)
        assert first.to_csv_text() == second.to_csv_text()

    def test_kscl_zero_fraction_matches_plain_scl_values(self):
        a = run(
            "kscl:2:0",
            self._codebook(),
            DensitySource(self.density),
            self.schedule,
            300,
            [d2_probe(10)],
            seed=7,
        )
        b = run(
            "scl",
            self._codebook(),
            DensitySource(self.density),
            self.schedule,
            300,
            [d2_probe(10)],
            seed=7,
        )
        assert a.records == b.records

    def test_kscl_matches_manual_step_sequence(self):
        # the driver must agree with the public step functions exactly
        T, seed = 200, 11
        spec_run = run(
            "kscl:2:0.5",
            self._codebook(),
            DensitySource(self.density),
            self.schedule,
            T,
            [d2_probe(1)],
            seed=seed,
        )
        state = RunState(self._codebook())
        stream = self.density.sample(np.random.default_rng(seed), T)
        plan = SomToScl(2, 0.5)
        values = [float(state.codebook.vectors[0, 0])]
        for t in range(T):
            som_step(state, stream[t], 0.1, plan.at(t, T))
            values.append(float(state.codebook.vectors[0, 0]))
        _, run_values = spec_run.values("q0")
        np.testing.assert_array_equal(run_values, values)

    def test_stream_shared_across_algorithms(self):
        traces = [
            run(
                spec,
                self._codebook(),
                DensitySource(self.density),
                self.schedule,
                100,
                [d2_probe(100)],
                seed=5,
            )
            for spec in ("scl", "som:2", "som:4", "kmeans")
        ]
        digests = {t.metadata["stream_digest"] for t in traces}
        assert len(digests) == 1

    def test_probe_grid_includes_zero_and_final(self):
        trace = run(
            "scl",
            self._codebook(),
            DensitySource(self.density),
            self.schedule,
            7,
            [d2_probe(3)],
            seed=0,
        )
        iterations, _ = trace.values("q0")
        np.testing.assert_array_equal(iterations, [0, 3, 6, 7])

    def test_t_one(self):
        trace = run(
            "scl",
            self._codebook(),
            DensitySource(self.density),
            self.schedule,
            1,
            [d2_probe(1)],
            seed=0,
        )
        iterations, _ = trace.values("q0")
        np.testing.assert_array_equal(iterations, [0, 1])

    def test_batch_runs_on_dataset(self):
        rng = np.random.default_rng(8)
        data = rng.random((60, 1))
        cb = Codebook(np.sort(rng.random(4)), Chain(4))
        trace = run(
            "bvq",
            cb,
            DatasetSource(data),
            self.schedule,
            5,
            [Probe("distortion", lambda c: distortion(data, c), 1)],
            seed=0,
        )
        assert trace.metadata["iteration_unit"] == "passes"
        iterations, values = trace.values("distortion")
        assert list(iterations) == [0, 1, 2, 3, 4, 5]
        assert np.all(np.diff(values) <= 1e-12)

    def test_batch_on_density_rejected(self):
        with pytest.raises(ConfigError):
            run(
                "bvq",
                self._codebook(),
                DensitySource(self.density),
                self.schedule,
                3,
                [],
                seed=0,
            )

    def test_t_must_be_positive(self):
        with pytest.raises(ConfigError):
            run(
                "scl",
                self._codebook(),
                DensitySource(self.density),
                self.schedule,
                0,
                [],
                seed=0,
            )

    def test_dataset_stream_draws_rows(self):
        data = np.array([[1.0, 2.0], [3.0, 4.0], [5.0, 6.0]])
        stream = DatasetSource(data).draw_stream(np.random.default_rng(0), 50)
        assert stream.shape == (50, 2)
        for row in stream:
            assert any(np.array_equal(row, d) for d in data)


class TestOrderPreservation:
    @pytest.mark.parametrize("kind", ["linear2x", "exponential"])
    def test_scl_keeps_order_short(self, kind):
        # short version of the acceptance property (10^3 steps here)
        density = get_density(kind)
        rng = np.random.default_rng(13)
        n = 20
        state = chain_state(density.ppf((np.arange(n) + 0.5) / n))
        for _ in range(1000):
            x = float(density.sample(rng))
            eps = float(rng.uniform(0.01, 1.0))
            scl_step(state, x, eps)
            q = state.codebook.vectors[:, 0]
            assert np.all(np.diff(q) > 0)

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from graphquant.errors import ConfigError, DataError
from graphquant.graph import Graph, connected_components
from graphquant.shift import (generate_sbm, largest_remainder_counts, load_sample_sections,
                              sample_bfs, sample_pps, sample_rw, save_samples,
                              uniform_split, write_manifest, zipf_distribution)


class TestLargestRemainder:
    def test_paper_protocol_sizes(self):
        assert list(largest_remainder_counts(100, [0.05, 0.15, 0.80])) == [5, 15, 80]

    def test_small_n_rounding(self):
        assert list(largest_remainder_counts(10, [0.05, 0.15, 0.80])) == [1, 1, 8]

    def test_two_thirds(self):
        assert list(largest_remainder_counts(100, [2 / 3, 1 / 3])) == [67, 33]

    @settings(max_examples=80, deadline=None)
    @given(st.integers(0, 500),
           st.lists(st.floats(1e-3, 1.0), min_size=1, max_size=6))
    def test_totals_always_match(self, total, raw):
        shares = np.asarray(raw) / np.sum(raw)
        counts = largest_remainder_counts(total, shares)
        assert counts.sum() == total
        assert counts.min() >= 0


class TestUniformSplit:
    def test_sizes(self):
        g = Graph.from_edges(100, [])
        s = uniform_split(g, (0.05, 0.15, 0.80), seed=0)
        assert (len(s.classifier_train), len(s.quantifier_train), len(s.test)) == (5, 15, 80)

    def test_deterministic(self):
        g = Graph.from_edges(50, [])
        a = uniform_split(g, (0.05, 0.15, 0.80), seed=3)
        b = uniform_split(g, (0.05, 0.15, 0.80), seed=3)
        assert np.array_equal(a.classifier_train, b.classifier_train)
        assert np.array_equal(a.quantifier_train, b.quantifier_train)
        assert np.array_equal(a.test, b.test)

    def test_partition_is_disjoint_and_complete(self):
        g = Graph.from_edges(83, [])
        s = uniform_split(g, (0.2, 0.3, 0.5), seed=5)
        merged = np.concatenate([s.classifier_train, s.quantifier_train, s.test])
        assert len(merged) == 83
        assert len(np.unique(merged)) == 83

    def test_invalid_fractions(self):
        g = Graph.from_edges(10, [])
        with pytest.raises(ConfigError):
            uniform_split(g, (0.5, 0.5, 0.5), seed=0)


def labeled_pool(sizes, seed=0):
    labels = np.concatenate([np.full(s, i) for i, s in enumerate(sizes)])
    vertices = np.arange(len(labels))
    rng = np.random.default_rng(seed)
    perm = rng.permutation(len(labels))
    return vertices[perm], labels[perm]


class TestPps:
    def test_zipf_target(self):
        assert np.allclose(zipf_distribution(2, 1.0), [2 / 3, 1 / 3])

    def test_default_number_of_draws(self):
        v, y = labeled_pool([500, 500, 500, 500, 500, 500, 500])
        samples = sample_pps(v, y, num_classes=7, n=10, seed=1)
        assert len(samples) == 70

    def test_realized_counts_match_largest_remainder(self):
        v, y = labeled_pool([400, 400])
        samples = sample_pps(v, y, num_classes=2, num_dists=6, n=100, seed=2)
        for s in samples:
            counts = np.round(s.true_prev * 100).astype(int)
            assert sorted(counts) == [33, 67]
            assert not s.flagged

    def test_true_prev_is_realized_histogram(self):
        v, y = labeled_pool([50, 80, 30], seed=4)
        label_of = np.full(len(v), -1)
        label_of[v] = y
        for s in sample_pps(v, y, num_classes=3, num_dists=5, n=60, seed=3):
            hist = np.bincount(label_of[s.vertices], minlength=3) / len(s.vertices)
            assert np.array_equal(hist, s.true_prev)

    def test_shortfall_redistributes_and_fills(self):
        v, y = labeled_pool([5, 500], seed=5)
        samples = sample_pps(v, y, num_classes=2, num_dists=8, n=100, seed=6)
        for s in samples:
            assert len(s.vertices) == 100
            assert s.true_prev[0] <= 0.05 + 1e-12

    def test_exhausted_pool_flags_short_sample(self):
        v, y = labeled_pool([3, 4])
        (s,) = sample_pps(v, y, num_classes=2, num_dists=1, n=100, seed=7)
        assert len(s.vertices) == 7
        assert s.flagged

    def test_deterministic(self):
        v, y = labeled_pool([60, 60])
        a = sample_pps(v, y, num_classes=2, num_dists=4, n=30, seed=11)
        b = sample_pps(v, y, num_classes=2, num_dists=4, n=30, seed=11)
        for s1, s2 in zip(a, b):
            assert np.array_equal(s1.vertices, s2.vertices)

    def test_empty_pool_rejected(self):
        with pytest.raises(DataError):
            sample_pps([], [], num_classes=2, seed=0)


class TestBfs:
    def test_star_collects_center_then_random_leaves(self):
        # center (label 0) plus 101 leaves (label 1); the center is the only
        # label-0 vertex so it becomes the single label-0 start
        edges = [(0, i) for i in range(1, 102)]
        labels = [0] + [1] * 101
        g = Graph.from_edges(102, edges, labels=labels)
        pool = np.arange(102)
        samples = sample_bfs(g, pool, g.labels, seeds_per_label=1, n=100, seed=0)
        center_sample = [s for s in samples if s.start == 0][0]
        assert len(center_sample.vertices) == 100
        assert center_sample.vertices[0] == 0
        assert not center_sample.flagged

    def test_small_component_flags_short_sample(self):
        g = Graph.from_edges(40, [(i, i + 1) for i in range(39)],
                             labels=[1] * 20 + [0] * 20)
        samples = sample_bfs(g, np.arange(40), g.labels, seeds_per_label=1, n=100, seed=1)
        for s in samples:
            assert len(s.vertices) == 40
            assert s.flagged

    def test_sample_stays_in_component(self):
        g = generate_sbm([30, 30], 0.3, 0.0, seed=2)
        comp = connected_components(g)
        samples = sample_bfs(g, np.arange(60), g.labels, seeds_per_label=3, n=10, seed=3)
        for s in samples:
            assert len(set(comp[s.vertices])) == 1

    def test_label_absent_from_pool_warns_and_skips(self):
        g = Graph.from_edges(6, [(i, i + 1) for i in range(5)], labels=[0, 0, 0, 0, 0, 2])
        pool = np.arange(5)  # label 2 vertex excluded, label 1 nonexistent
        with pytest.warns(UserWarning, match="absent"):
            samples = sample_bfs(g, pool, g.labels[pool], seeds_per_label=1, n=3,
                                 seed=0, num_classes=3)
        assert {s.params["label"] for s in samples} == {0}

    def test_eighty_samples_for_eight_labels(self):
        v, y = labeled_pool([60] * 8, seed=6)
        g = Graph.from_edges(480, [(i, (i + 1) % 480) for i in range(480)], labels=None)
        samples = sample_bfs(g, v, y, seeds_per_label=10, n=20, seed=4, num_classes=8)
        assert len(samples) == 80

    def test_deterministic(self):
        g = generate_sbm([40, 40], 0.2, 0.05, seed=5)
        a = sample_bfs(g, np.arange(80), g.labels, seeds_per_label=2, n=30, seed=9)
        b = sample_bfs(g, np.arange(80), g.labels, seeds_per_label=2, n=30, seed=9)
        for s1, s2 in zip(a, b):
            assert np.array_equal(s1.vertices, s2.vertices)


class TestRw:
    def test_two_vertex_path_visits_both(self):
        g = Graph.from_edges(2, [(0, 1)], labels=[0, 1])
        samples = sample_rw(g, np.arange(2), g.labels, seeds_per_label=1, n=2,
                            walk_len=10, alpha=0.1, seed=0)
        for s in samples:
            assert sorted(s.vertices) == [0, 1]
            assert not s.flagged

    def test_full_teleport_never_leaves_start(self):
        g = Graph.from_edges(4, [(0, 1), (1, 2), (2, 3)], labels=[0, 1, 0, 1])
        samples = sample_rw(g, np.arange(4), g.labels, seeds_per_label=1, n=3,
                            walk_len=5, alpha=1.0, seed=1)
        for s in samples:
            assert list(s.vertices) == [s.start]
            assert s.flagged

    def test_isolated_start_flagged(self):
        g = Graph.from_edges(3, [(1, 2)], labels=[0, 1, 1])
        samples = sample_rw(g, np.arange(3), g.labels, seeds_per_label=1, n=5, seed=2)
        iso = [s for s in samples if s.start == 0][0]
        assert list(iso.vertices) == [0]
        assert iso.flagged

    def test_collects_distinct_pool_vertices(self):
        g = generate_sbm([50, 50], 0.3, 0.02, seed=3)
        pool = np.arange(0, 100, 2)
        samples = sample_rw(g, pool, g.labels[pool], seeds_per_label=2, n=15, seed=4)
        pool_set = set(pool.tolist())
        for s in samples:
            verts = s.vertices.tolist()
            assert len(set(verts)) == len(verts)
            assert set(verts) <= pool_set

    def test_deterministic(self):
        g = generate_sbm([40, 40], 0.2, 0.05, seed=6)
        a = sample_rw(g, np.arange(80), g.labels, seeds_per_label=2, n=20, seed=8)
        b = sample_rw(g, np.arange(80), g.labels, seeds_per_label=2, n=20, seed=8)
        for s1, s2 in zip(a, b):
            assert np.array_equal(s1.vertices, s2.vertices)


class TestSbm:
    def test_disjoint_triangles(self):
        g = generate_sbm([3, 3], 1.0, 0.0, seed=0)
        assert g.num_edges == 6
        assert list(connected_components(g)) == [0, 0, 0, 1, 1, 1]
        assert list(g.labels) == [0, 0, 0, 1, 1, 1]

    def test_empty_graph(self):
        g = generate_sbm([5, 5], 0.0, 0.0, seed=1)
        assert g.num_edges == 0

    def test_intra_block_density_concentrates(self):
        g = generate_sbm([200, 200], 0.05, 0.002, seed=2)
        within = 0
        for v in range(200):
            within += np.sum(g.neighbors(v) < 200)
        pairs = 200 * 199 / 2
        density = within / 2 / pairs
        sd = np.sqrt(0.05 * 0.95 / pairs)
        assert abs(density - 0.05) < 3 * sd

    def test_block_labels_override(self):
        g = generate_sbm([2, 2, 2], 0.0, 0.0, block_labels=[0, 1, 0], seed=3)
        assert list(g.labels) == [0, 0, 1, 1, 0, 0]

    def test_deterministic(self):
        a = generate_sbm([30, 30], 0.1, 0.01, seed=4)
        b = generate_sbm([30, 30], 0.1, 0.01, seed=4)
        assert np.array_equal(a.indices, b.indices)


class TestSerialization:
    def test_round_trip_sections(self, tmp_path):
        g = generate_sbm([30, 30], 0.2, 0.05, seed=7)
        samples = sample_rw(g, np.arange(60), g.labels, seeds_per_label=2, n=10, seed=5)
        path = tmp_path / "samples.txt"
        save_samples(samples, path)
        sections = load_sample_sections(path)
        assert len(sections) == len(samples)
        for (header, vertices), s in zip(sections, samples):
            assert header["sampler"] == s.sampler
            assert int(header["seed"]) == s.seed
            assert int(header["n"]) == len(s.vertices)
            assert np.array_equal(vertices, s.vertices)

    def test_byte_reproducible_under_seed(self, tmp_path):
        g = generate_sbm([40, 40], 0.15, 0.02, seed=8)
        blobs = []
        for run in range(2):
            samples = sample_pps(np.arange(80), g.labels, num_classes=2,
                                 num_dists=4, n=20, seed=13)
            path = tmp_path / f"s{run}.txt"
            save_samples(samples, path)
            blobs.append(path.read_bytes())
        assert blobs[0] == blobs[1]

    def test_manifest(self, tmp_path):
        g = generate_sbm([20, 20], 0.2, 0.05, seed=9)
        samples = sample_bfs(g, np.arange(40), g.labels, seeds_per_label=1, n=10, seed=6)
        save_samples(samples, tmp_path / "samples.txt")
        write_manifest(samples, tmp_path / "manifest.csv", tmp_path / "samples.txt")
        lines = (tmp_path / "manifest.csv").read_text().strip().splitlines()
        assert lines[0].startswith("section,sampler,seed,start,size,flagged")
        assert len(lines) == len(samples) + 1

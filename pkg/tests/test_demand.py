import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from chainsure.demand import (
    ExternalityGraph,
    Segment,
    brute_force_lcp,
    check_contraction,
    closed_form_demand,
    lcp_demand,
    spectral_radius,
    user_utility,
)
from chainsure.errors import ContractionViolation
from conftest import random_externality

SWAP = np.array([[0.0, 1.0], [1.0, 0.0]])


def random_prices(rng, n):
    # wide enough to produce opt-out, interior, and saturated users
    return rng.uniform(0.05, 2.2, n)


class TestExternalityGraph:
    def test_validation(self):
        with pytest.raises(ValueError):
            ExternalityGraph(np.array([[1.0, 0.0], [0.0, 0.0]]), 0.1)  # diagonal
        with pytest.raises(ValueError):
            ExternalityGraph(np.array([[0.0, -1.0], [0.0, 0.0]]), 0.1)  # negative
        with pytest.raises(ValueError):
            ExternalityGraph(np.zeros((2, 3)), 0.1)  # not square
        with pytest.raises(ValueError):
            ExternalityGraph(SWAP, -0.1)

    def test_weights_read_only(self):
        graph = ExternalityGraph(SWAP, 0.1)
        with pytest.raises(ValueError):
            graph.weights[0, 1] = 5.0

    def test_solve_round_trip(self):
        rng = np.random.default_rng(3)
        graph = random_externality(rng, 6)
        rhs = rng.normal(size=6)
        x = graph.solve(rhs)
        np.testing.assert_allclose(graph.system_matrix @ x, rhs, atol=1e-12)
        xt = graph.solve(rhs, transpose=True)
        np.testing.assert_allclose(graph.system_matrix.T @ xt, rhs, atol=1e-12)


class TestSpectralRadius:
    def test_swap_matrix(self):
        assert spectral_radius(SWAP) == pytest.approx(1.0, abs=1e-9)

    def test_zero_matrix(self):
        assert spectral_radius(np.zeros((4, 4))) == 0.0

    def test_against_dense_eigensolver(self):
        rng = np.random.default_rng(5)
        for n in (2, 3, 5, 10, 40):
            w = rng.uniform(0.0, 10.0, (n, n))
            np.fill_diagonal(w, 0.0)
            exact = float(np.max(np.abs(np.linalg.eigvals(w))))
            assert spectral_radius(w) == pytest.approx(exact, rel=1e-8)

    def test_bipartite_tie(self):
        # +/-rho eigenvalue pairs must not stall the iteration
        w = np.array([[0.0, 2.0, 0.0], [0.0, 0.0, 3.0], [1.5, 0.0, 0.0]])
        exact = float(np.max(np.abs(np.linalg.eigvals(w))))
        assert spectral_radius(w) == pytest.approx(exact, rel=1e-8)


class TestCheckContraction:
    def test_swap_examples(self):
        chk = check_contraction(ExternalityGraph(SWAP, 0.5))
        assert chk.holds and chk.alpha_rho == pytest.approx(0.5, abs=1e-9)
        chk = check_contraction(ExternalityGraph(SWAP, 1.2))
        assert not chk.holds and chk.alpha_rho == pytest.approx(1.2, abs=1e-9)

    def test_paper_scale_instance(self):
        rng = np.random.default_rng(0)
        w = rng.uniform(0.0, 10.0, (100, 100))
        np.fill_diagonal(w, 0.0)
        graph = ExternalityGraph(w, 7e-4)
        chk = check_contraction(graph)
        exact = 7e-4 * float(np.max(np.abs(np.linalg.eigvals(w))))
        assert chk.holds
        assert chk.alpha_rho == pytest.approx(exact, rel=1e-8)


class TestUserUtility:
    def test_no_externality(self):
        graph = ExternalityGraph(np.zeros((1, 1)), 0.0)
        assert user_utility(graph, 0, 0.5, 0.5, 1.0, np.array([0.0])) == pytest.approx(0.0)

    def test_threshold_gives_zero(self):
        graph = ExternalityGraph(SWAP, 0.1)
        x = np.array([0.4, 0.7])
        p = np.array([0.8, 0.9])
        prof_threshold = p[0] - 0.6 - 0.1 * (SWAP[0] @ x)
        assert user_utility(graph, 0, prof_threshold, 0.6, p[0], x) == pytest.approx(0.0, abs=1e-14)

    def test_hand_value(self):
        graph = ExternalityGraph(SWAP, 0.1)
        value = user_utility(graph, 0, 0.2, 0.5, 0.6, np.array([1.0, 1.0]))
        assert value == pytest.approx(0.2, abs=1e-14)

    def test_index_error(self):
        graph = ExternalityGraph(SWAP, 0.1)
        with pytest.raises(IndexError):
            user_utility(graph, 2, 0.2, 0.5, 0.6, np.array([1.0, 1.0]))


class TestClosedFormDemand:
    def test_decoupled(self):
        graph = ExternalityGraph(np.zeros((4, 4)), 0.0)
        prof = closed_form_demand(graph, 0.5, np.full(4, 0.9))
        np.testing.assert_allclose(prof.x, 0.6, atol=1e-14)
        assert np.all(prof.partition == Segment.INTERIOR)

    def test_two_user_hand_solve(self):
        graph = ExternalityGraph(SWAP, 0.1)
        prof = closed_form_demand(graph, 0.5, np.array([0.9, 0.9]))
        np.testing.assert_allclose(prof.x, 2.0 / 3.0, atol=1e-12)

    def test_reports_out_of_box(self):
        graph = ExternalityGraph(np.zeros((2, 2)), 0.0)
        prof = closed_form_demand(graph, 0.5, np.array([0.1, 2.5]))
        assert prof.out_of_box()
        assert prof.x[0] > 1.0 and prof.x[1] < 0.0

    def test_contraction_precondition(self):
        graph = ExternalityGraph(SWAP, 1.5)
        with pytest.raises(ContractionViolation):
            closed_form_demand(graph, 0.5, np.array([0.9, 0.9]))

    def test_matches_lcp_when_interior(self):
        rng = np.random.default_rng(17)
        for _ in range(20):
            n = int(rng.integers(2, 7))
            graph = random_externality(rng, n, target_alpha_rho=rng.uniform(0.0, 0.8))
            hbar = rng.uniform(0.5, 0.99)
            # prices keeping every user strictly interior at alpha = 0 already
            p = rng.uniform(hbar + 0.05, hbar + 0.95, n)
            closed = closed_form_demand(graph, hbar, p)
            if closed.out_of_box(1e-12):
                continue
            clamped = lcp_demand(graph, hbar, p)
            np.testing.assert_allclose(closed.x, clamped.x, atol=1e-10)
            assert np.all(clamped.partition == Segment.INTERIOR)

    def test_thresholds_consistent(self):
        rng = np.random.default_rng(23)
        graph = random_externality(rng, 5)
        hbar, p = 0.7, random_prices(rng, 5)
        prof = lcp_demand(graph, hbar, p)
        expected = p - hbar - graph.alpha * (graph.weights @ prof.x)
        np.testing.assert_allclose(prof.thresholds, expected, atol=1e-12)
        np.testing.assert_allclose(prof.x, 1.0 - np.clip(prof.thresholds, 0.0, 1.0), atol=1e-9)


class TestLcpDemand:
    def test_decoupled_opt_out(self):
        graph = ExternalityGraph(np.zeros((3, 3)), 0.0)
        prof = lcp_demand(graph, 0.5, np.full(3, 2.0))
        np.testing.assert_allclose(prof.x, 0.0, atol=1e-12)
        assert np.all(prof.partition == Segment.OPT_OUT)

    def test_decoupled_saturated(self):
        graph = ExternalityGraph(np.zeros((3, 3)), 0.0)
        prof = lcp_demand(graph, 0.5, np.full(3, 0.1))
        np.testing.assert_allclose(prof.x, 1.0, atol=1e-12)
        assert np.all(prof.partition == Segment.SATURATED)

    def test_fixed_point_property(self):
        rng = np.random.default_rng(31)
        for _ in range(25):
            n = int(rng.integers(1, 9))
            graph = random_externality(rng, n, target_alpha_rho=rng.uniform(0.0, 0.9))
            hbar = rng.uniform(0.5, 0.999)
            p = random_prices(rng, n)
            prof = lcp_demand(graph, hbar, p)
            image = np.clip(
                (1.0 + hbar) - p + graph.alpha * (graph.weights @ prof.x), 0.0, 1.0
            )
            assert float(np.max(np.abs(prof.x - image))) < 1e-9

    def test_monotone_in_externality_strength(self):
        rng = np.random.default_rng(37)
        for _ in range(10):
            n = int(rng.integers(2, 7))
            base = random_externality(rng, n, target_alpha_rho=0.85)
            hbar = rng.uniform(0.5, 0.99)
            p = random_prices(rng, n)
            previous = None
            for factor in (0.0, 0.25, 0.5, 0.75, 1.0):
                graph = ExternalityGraph(base.weights, base.alpha * factor)
                x = lcp_demand(graph, hbar, p).x
                if previous is not None:
                    assert np.all(x >= previous - 1e-9)
                previous = x


class TestBruteForce:
    def test_single_user_clamp(self):
        graph = ExternalityGraph(np.zeros((1, 1)), 0.0)
        for price, expected in [(0.2, 1.0), (0.9, 0.6), (2.0, 0.0)]:
            prof = brute_force_lcp(graph, 0.5, np.array([price]))
            assert prof.x[0] == pytest.approx(expected, abs=1e-12)

    def test_two_user_decoupled_product(self):
        graph = ExternalityGraph(np.zeros((2, 2)), 0.0)
        prof = brute_force_lcp(graph, 0.5, np.array([0.1, 2.0]))
        np.testing.assert_allclose(prof.x, [1.0, 0.0], atol=1e-12)
        assert prof.partition[0] == Segment.SATURATED
        assert prof.partition[1] == Segment.OPT_OUT

    def test_size_guard(self):
        graph = ExternalityGraph(np.zeros((13, 13)), 0.0)
        with pytest.raises(ValueError):
            brute_force_lcp(graph, 0.5, np.full(13, 0.5))

    @given(seed=st.integers(0, 10_000))
    @settings(max_examples=40, deadline=None)
    def test_unique_and_matches_gauss_seidel(self, seed):
        rng = np.random.default_rng(seed)
        n = int(rng.integers(1, 7))
        graph = random_externality(rng, n, target_alpha_rho=rng.uniform(0.0, 0.9))
        hbar = rng.uniform(0.5, 0.999)
        p = random_prices(rng, n)
        reference = brute_force_lcp(graph, hbar, p)  # raises if not unique
        solved = lcp_demand(graph, hbar, p)
        np.testing.assert_allclose(solved.x, reference.x, atol=1e-9)
        assert np.array_equal(solved.partition, reference.partition)

    def test_detects_nonunique(self):
        # alpha * rho >= 1 is rejected before enumeration even starts
        graph = ExternalityGraph(SWAP, 1.01)
        with pytest.raises(ContractionViolation):
            brute_force_lcp(graph, 0.5, np.array([0.9, 0.9]))

"""
循环集合、计数表、相容概率与抽样单元测试
"""

import itertools
import unittest
from collections import Counter
from fractions import Fraction

from scipy.stats import chisquare

from src.constants import INFINITY
from src.core.cyclecount import (
    CycleSet, brute_count, compatible_count, count_table, count_table_csv,
    cycle_type, egf_crosscheck, feasible_grid, iter_counts, iter_permutations,
    p_cycle, p_graph, parse_cycle_set, format_cycle_set, sample_permutation,
    stream_rng, _cumulative_weights,
)
from src.core.errors import BudgetExceededError, InfeasibleSizeError
from src.core.graphs import ColoredGraph, graph_from_shape, word_graph
from src.core.words import parse_word

ORACLE_SETS = [
    CycleSet.all(), CycleSet.finite([1]), CycleSet.finite([2]), CycleSet.finite([3]),
    CycleSet.finite([1, 2]), CycleSet.finite([1, 3]), CycleSet.finite([2, 4]),
    CycleSet.cofinite([1]), CycleSet.cofinite([1, 2]),
    CycleSet.multiples(2), CycleSet.multiples(3),
]


def brute_graph_probability(cycle_set: CycleSet, n: int, graph: ColoredGraph) -> Fraction:
    """σ(a) = b 对图的每条边 a → b 成立的比例"""
    perms = list(iter_permutations(cycle_set, n))
    hits = sum(1 for perm in perms if all(perm[a - 1] == b for a, b, _ in graph.edges))
    return Fraction(hits, len(perms))


class TestCycleSet(unittest.TestCase):
    """循环集合"""

    def test_membership_and_sup(self):
        self.assertTrue(CycleSet.all().contains(7))
        self.assertEqual(CycleSet.all().sup, INFINITY)
        self.assertEqual(CycleSet.finite([3, 1, 3]).values, (1, 3))
        self.assertEqual(CycleSet.finite([1, 3]).sup, 3)
        self.assertFalse(CycleSet.cofinite([1]).contains(1))
        self.assertTrue(CycleSet.multiples(3).contains(6))
        self.assertFalse(CycleSet.multiples(3).contains(4))
        self.assertFalse(CycleSet.all().contains(0))

    def test_cofinite_without_exclusions_is_all(self):
        self.assertEqual(CycleSet.cofinite([]), CycleSet.all())

    def test_gcd_and_flags(self):
        self.assertEqual(CycleSet.finite([2, 4]).gcd, 2)
        self.assertEqual(CycleSet.finite([2, 4]).sup, 4)
        self.assertFalse(CycleSet.finite([2, 4]).is_nonempty(3))
        self.assertEqual(CycleSet.multiples(3).sup, INFINITY)
        self.assertEqual(CycleSet.multiples(3).gcd, 3)
        self.assertEqual(CycleSet.cofinite([1]).gcd, 1)
        self.assertTrue(CycleSet.finite([4]).is_singleton_or_infinite)
        self.assertFalse(CycleSet.finite([1, 2]).is_singleton_or_infinite)
        self.assertTrue(CycleSet.cofinite([2]).is_complement_finite)

    def test_complement_sum(self):
        self.assertEqual(CycleSet.cofinite([1, 2]).complement_sum(), Fraction(3, 2))
        self.assertEqual(CycleSet.all().complement_sum(), 0)
        with self.assertRaises(ValueError):
            CycleSet.finite([1]).complement_sum()

    def test_is_nonempty(self):
        self.assertFalse(CycleSet.finite([2]).is_nonempty(5))
        self.assertTrue(CycleSet.finite([2]).is_nonempty(6))
        self.assertFalse(CycleSet.finite([3, 5]).is_nonempty(7))
        self.assertTrue(CycleSet.finite([3, 5]).is_nonempty(8))
        self.assertFalse(CycleSet.multiples(2).is_nonempty(3))
        self.assertTrue(CycleSet.cofinite([1]).is_nonempty(0))
        self.assertFalse(CycleSet.cofinite([1]).is_nonempty(1))

    def test_invalid(self):
        with self.assertRaises(ValueError):
            CycleSet.finite([])
        with self.assertRaises(ValueError):
            CycleSet.finite([0, 1])
        with self.assertRaises(ValueError):
            CycleSet.multiples(0)
        with self.assertRaises(ValueError):
            CycleSet("odd")

    def test_text_codec(self):
        cases = {
            "all": CycleSet.all(),
            "finite:1,3": CycleSet.finite([1, 3]),
            "cofinite:1": CycleSet.cofinite([1]),
            "multiples:3": CycleSet.multiples(3),
            "cofinite:": CycleSet.all(),
        }
        for text, expected in cases.items():
            with self.subTest(text=text):
                self.assertEqual(parse_cycle_set(text), expected)
        self.assertEqual(format_cycle_set(CycleSet.finite([3, 1])), "finite:1,3")
        for text in ["odd", "finite", "finite:a", "multiples:2,3"]:
            with self.subTest(text=text):
                with self.assertRaises(ValueError):
                    parse_cycle_set(text)


class TestCounts(unittest.TestCase):
    """计数表"""

    def test_examples(self):
        cases = [
            (CycleSet.all(), 5, 120),
            (CycleSet.finite([2]), 6, 15),
            (CycleSet.finite([2]), 4, 3),
            (CycleSet.finite([1, 2]), 4, 10),
            (CycleSet.cofinite([1]), 5, 44),
            (CycleSet.finite([2]), 5, 0),
            (CycleSet.multiples(2), 4, 9),
            (CycleSet.multiples(3), 6, 160),
            (CycleSet.cofinite([1, 2]), 6, 160),
        ]
        for cycle_set, n, expected in cases:
            with self.subTest(cycle_set=str(cycle_set), n=n):
                self.assertEqual(count_table(cycle_set, n).count(n), expected)

    def test_recurrence_matches_brute_force(self):
        for cycle_set in ORACLE_SETS:
            table = count_table(cycle_set, 7)
            for n in range(8):
                with self.subTest(cycle_set=str(cycle_set), n=n):
                    self.assertEqual(table.count(n), brute_count(cycle_set, n))

    def test_iter_counts_prefix(self):
        derangements = list(itertools.islice(iter_counts(CycleSet.cofinite([1])), 8))
        self.assertEqual(derangements, [1, 0, 1, 2, 9, 44, 265, 1854])

    def test_table_access(self):
        table = count_table(CycleSet.finite([1, 2]), 4)
        self.assertEqual(table.n_max, 4)
        self.assertEqual(table.t(4), Fraction(10, 24))
        with self.assertRaises(ValueError):
            table.count(5)
        with self.assertRaises(InfeasibleSizeError):
            count_table(CycleSet.finite([2]), 3).require_nonempty(3)
        with self.assertRaises(ValueError):
            count_table(CycleSet.all(), -1)

    def test_egf_crosscheck(self):
        sets = [s for s in ORACLE_SETS if s.is_finite] + [CycleSet.all()]
        for cycle_set in sets:
            with self.subTest(cycle_set=str(cycle_set)):
                self.assertTrue(egf_crosscheck(cycle_set, 20))

    def test_egf_bound(self):
        with self.assertRaises(BudgetExceededError):
            egf_crosscheck(CycleSet.all(), 30, series_bound=20)

    def test_csv_export(self):
        lines = count_table_csv(count_table(CycleSet.finite([1, 2]), 3)).splitlines()
        self.assertEqual(lines[0], "N,a_N,t_N_numerator,t_N_denominator")
        self.assertEqual(lines[1:], ["0,1,1,1", "1,1,1,1", "2,2,1,1", "3,4,2,3"])

    def test_cycle_type(self):
        self.assertEqual(cycle_type((2, 1, 3)), (1, 2))
        self.assertEqual(cycle_type((2, 3, 4, 1)), (4,))


class TestProbabilities(unittest.TestCase):
    """循环概率与图相容概率"""

    def test_p_cycle(self):
        table = count_table(CycleSet.finite([1, 2]), 4)
        self.assertEqual(p_cycle(table, 4, 1), Fraction(2, 5))
        self.assertEqual(p_cycle(table, 4, 2), Fraction(3, 5))
        derangements = count_table(CycleSet.cofinite([1]), 5)
        self.assertEqual(
            [p_cycle(derangements, 5, k) for k in (2, 3, 4, 5)],
            [Fraction(2, 11), Fraction(3, 11), Fraction(0), Fraction(6, 11)],
        )
        with self.assertRaises(ValueError):
            p_cycle(derangements, 5, 1)
        with self.assertRaises(ValueError):
            p_cycle(table, 4, 5)

    def test_p_cycle_all_is_uniform(self):
        table = count_table(CycleSet.all(), 9)
        for k in range(1, 10):
            self.assertEqual(p_cycle(table, 9, k), Fraction(1, 9))

    def test_p_cycle_sums_to_one(self):
        for cycle_set in ORACLE_SETS:
            table = count_table(cycle_set, 60)
            for n in range(1, 61):
                if table.count(n) == 0:
                    continue
                with self.subTest(cycle_set=str(cycle_set), n=n):
                    total = sum(p_cycle(table, n, k) for k in cycle_set.members_upto(n))
                    self.assertEqual(total, 1)

    def test_p_graph_matches_brute_force(self):
        shapes = [((), (1,)), ((2,), ()), ((1,), (1,)), ((), (1, 1)), ((), (2,)), ((3,), ()), ((1,), ())]
        sets = [CycleSet.all(), CycleSet.finite([1, 2]), CycleSet.finite([2]),
                CycleSet.cofinite([1]), CycleSet.finite([1, 3])]
        for (loops, strings), cycle_set, n in itertools.product(shapes, sets, range(4, 7)):
            graph = graph_from_shape(loops, strings)
            if graph.num_vertices > n or not cycle_set.is_nonempty(n):
                continue
            with self.subTest(shape=(loops, strings), cycle_set=str(cycle_set), n=n):
                self.assertEqual(p_graph(cycle_set, n, graph), brute_graph_probability(cycle_set, n, graph))

    def test_p_graph_with_isolated_vertices(self):
        shapes = [((), (1,), 1), ((2,), (), 2), ((1,), (1,), 1), ((), (2,), 2), ((), (), 3)]
        sets = [CycleSet.all(), CycleSet.finite([1, 2]), CycleSet.finite([2]), CycleSet.cofinite([1])]
        for (loops, strings, isolated), cycle_set, n in itertools.product(shapes, sets, range(4, 7)):
            graph = graph_from_shape(loops, strings, isolated=isolated)
            if graph.num_vertices > n or not cycle_set.is_nonempty(n):
                continue
            with self.subTest(shape=(loops, strings, isolated), cycle_set=str(cycle_set), n=n):
                self.assertEqual(p_graph(cycle_set, n, graph), brute_graph_probability(cycle_set, n, graph))

    def test_p_graph_relabel_invariant(self):
        n = 6
        graph = graph_from_shape([2], [1], isolated=1)
        for cycle_set in [CycleSet.all(), CycleSet.finite([1, 2]), CycleSet.cofinite([1])]:
            expected = p_graph(cycle_set, n, graph)
            for image in itertools.permutations(range(1, n + 1), graph.num_vertices):
                relabeled = graph.relabel(dict(zip(graph.vertices, image)))
                with self.subTest(cycle_set=str(cycle_set), image=image):
                    self.assertEqual(p_graph(cycle_set, n, relabeled), expected)
            shifted = graph.relabel({v: 7 - v for v in graph.vertices})
            self.assertEqual(brute_graph_probability(cycle_set, n, shifted), expected)
        with self.assertRaises(ValueError):
            graph.relabel({1: 1, 2: 1, 3: 2, 4: 3, 5: 4})

    def test_single_edge(self):
        edge = graph_from_shape([], [1])
        self.assertEqual(p_graph(CycleSet.all(), 10, edge), Fraction(1, 10))
        self.assertEqual(p_graph(CycleSet.finite([2]), 10, edge), Fraction(1, 9))

    def test_compatible_count_without_strings(self):
        table = count_table(CycleSet.all(), 6)
        self.assertEqual(compatible_count(table, 6, (2,), ()), table.count(4))
        self.assertEqual(compatible_count(count_table(CycleSet.finite([1]), 6), 6, (2,), ()), 0)

    def test_p_graph_errors_and_zero(self):
        with self.assertRaises(ValueError):
            p_graph(CycleSet.all(), 5, word_graph(parse_word("g1 g2")))
        with self.assertRaises(ValueError):
            p_graph(CycleSet.all(), 2, graph_from_shape([], [3]))
        with self.assertRaises(InfeasibleSizeError):
            p_graph(CycleSet.finite([2]), 5, graph_from_shape([], [1]))
        self.assertEqual(p_graph(CycleSet.finite([2]), 6, graph_from_shape([3], [])), 0)


class TestSampling(unittest.TestCase):
    """S_N^(A) 上的均匀抽样"""

    def test_samples_stay_in_class(self):
        for cycle_set in [CycleSet.finite([2]), CycleSet.cofinite([1]), CycleSet.finite([1, 3]),
                          CycleSet.multiples(3)]:
            table = count_table(cycle_set, 12)
            rng = stream_rng(11, 0)
            for _ in range(50):
                sample = sample_permutation(table, 12, rng)
                self.assertEqual(sorted(sample.perm), list(range(1, 13)))
                self.assertTrue(all(cycle_set.contains(k) for k in sample.cycle_type))

    def test_inverse(self):
        sample = sample_permutation(count_table(CycleSet.all(), 6), 6, stream_rng(3, 0))
        inverse = sample.inverse()
        self.assertTrue(all(inverse[sample.perm[i] - 1] == i + 1 for i in range(6)))

    def test_infeasible(self):
        with self.assertRaises(InfeasibleSizeError):
            sample_permutation(count_table(CycleSet.finite([2]), 5), 5, stream_rng(1, 0))

    def test_sampler_builds_one_table(self):
        cycle_set = CycleSet.finite([1, 3])
        count_table.cache_clear()
        _cumulative_weights.cache_clear()
        table = count_table(cycle_set, 40)
        sample = sample_permutation(table, 40, stream_rng(5, 0))
        self.assertEqual(sorted(sample.perm), list(range(1, 41)))
        self.assertEqual(count_table.cache_info().currsize, 1)
        self.assertGreater(_cumulative_weights.cache_info().currsize, 0)

    def test_streams_are_reproducible(self):
        first = [stream_rng(7, 0).random() for _ in range(3)]
        second = [stream_rng(7, 0).random() for _ in range(3)]
        self.assertEqual(first, second)
        self.assertNotEqual(stream_rng(7, 0).random(), stream_rng(7, 1).random())
        self.assertNotEqual(stream_rng(7, 0).random(), stream_rng(8, 0).random())

    def test_uniformity_chisquare(self):
        """S_4^({1,2}) 的 10 个元素，10^5 次抽样"""
        cycle_set = CycleSet.finite([1, 2])
        table = count_table(cycle_set, 4)
        outcomes = list(iter_permutations(cycle_set, 4))
        self.assertEqual(len(outcomes), 10)
        rng = stream_rng(20240521, 0)
        draws = 100000
        counts = Counter(sample_permutation(table, 4, rng).perm for _ in range(draws))
        self.assertEqual(set(counts), set(outcomes))
        observed = [counts[perm] for perm in outcomes]
        result = chisquare(observed, [draws / len(outcomes)] * len(outcomes))
        self.assertGreater(result.pvalue, 1e-3)


class TestFeasibleGrid(unittest.TestCase):
    """可行 N 网格"""

    def test_common_multiples(self):
        grid = feasible_grid([CycleSet.finite([2]), CycleSet.multiples(3)], 10, 200, 6)
        self.assertTrue(all(n % 6 == 0 for n in grid))
        self.assertEqual(list(grid), sorted(set(grid)))
        self.assertTrue(all(10 <= n <= 200 for n in grid))

    def test_all_sets(self):
        grid = feasible_grid([CycleSet.all()], 300, 3000, 8)
        self.assertEqual(grid[0], 300)
        self.assertEqual(grid[-1], 3000)
        self.assertEqual(len(grid), 8)

    def test_skips_unreachable_sizes(self):
        with self.assertRaises(InfeasibleSizeError):
            feasible_grid([CycleSet.finite([3, 5])], 7, 7, 1)
        self.assertEqual(feasible_grid([CycleSet.finite([3, 5])], 7, 8, 1), (8,))

    def test_empty(self):
        with self.assertRaises(InfeasibleSizeError):
            feasible_grid([CycleSet.finite([2])], 3, 3, 2)
        with self.assertRaises(ValueError):
            feasible_grid([CycleSet.all()], 5, 4, 2)


if __name__ == '__main__':
    unittest.main()

"""
单词迹期望单元测试
精确公式、暴力枚举与蒙特卡洛三者的一致性
"""

import itertools
import math
import unittest
from fractions import Fraction
from unittest.mock import patch

from src.cli.handlers import MC_AGREEMENT_SIGMAS
from src.constants import (
    COVARIANCE_SLOPE_BOUND, INFINITY, METHOD_BRUTE, METHOD_EXACT, METHOD_MC,
    RATE_SLOPE_BOUND, VERDICT_EXACT_ZERO, VERDICT_FAIL, VERDICT_PASS,
)
from src.core.asympt import slope_fit
from src.core.cyclecount import CycleSet, iter_permutations
from src.core.errors import BudgetExceededError, InfeasibleSizeError
from src.core.trace import (
    Model, TraceReport, brute_expected_trace, covariance_scan,
    exact_expected_trace, expected_trace_report, fixed_points, freeness_verdict,
    identity_words_are_constant, mc_expected_trace, product_limit,
    summability_verdict,
)
from src.core.words import Letter, Signature, Word, enumerate_words, parse_word, phi_haar
from tests import SLOW_TESTS


def words(*texts):
    return [parse_word(text) for text in texts]


FREE = Model(Signature((INFINITY,)), (CycleSet.all(),))
INVOLUTION = Model(Signature((2,)), (CycleSet.finite([2]),))
MIXED = Model(Signature((2, INFINITY)), (CycleSet.finite([1, 2]), CycleSet.all()))
ORDER_THREE = Model(Signature((3, INFINITY)), (CycleSet.finite([1, 3]), CycleSet.cofinite([1])))
FREE_PAIR = Model(Signature((INFINITY, INFINITY)), (CycleSet.all(), CycleSet.all()))
INVOLUTION_FREE = Model(Signature((2, INFINITY)), (CycleSet.finite([2]), CycleSet.all()))

ORACLE_SETS = [CycleSet.all(), CycleSet.finite([1, 2]), CycleSet.finite([2]), CycleSet.cofinite([1])]


def oracle_models(s):
    for sets in itertools.product(ORACLE_SETS, repeat=s):
        yield Model(Signature(tuple(cs.sup for cs in sets)), tuple(sets))


def oracle_word_lists(s, single_len, pair_len):
    """长度不超过 single_len 的单个单词，以及总长不超过 pair_len 的无序单词对"""
    sig = Signature((INFINITY,) * s)
    nonempty = [w for w in enumerate_words(sig, max(single_len, pair_len - 1)) if not w.is_empty]
    singles = [[w] for w in nonempty if len(w) <= single_len]
    pairs = [
        [a, b] for i, a in enumerate(nonempty) for b in nonempty[i:]
        if len(a) + len(b) <= pair_len
    ]
    return singles + pairs


def brute_moments(model, n, word_lists):
    """一次遍历全部置换元组，对每组单词求 E(∏ tr U_w)"""
    colors = range(1, model.sig.s + 1)
    spaces = [list(iter_permutations(model.cycle_set(r), n)) for r in colors]
    totals = [0] * len(word_lists)
    size = 0
    for combo in itertools.product(*spaces):
        size += 1
        act = {}
        for r, perm in zip(colors, combo):
            inverse = [0] * n
            for i, image in enumerate(perm, start=1):
                inverse[image - 1] = i
            act[Letter(r)] = perm
            act[Letter(r, True)] = tuple(inverse)
        images = {(): tuple(range(1, n + 1))}
        fixed = {}

        def image_of(letters):
            # 最右边的字母最先作用
            if letters not in images:
                table = act[letters[0]]
                images[letters] = tuple(table[y - 1] for y in image_of(letters[1:]))
            return images[letters]

        def fix(word):
            if word.letters not in fixed:
                fixed[word.letters] = sum(
                    1 for x, y in enumerate(image_of(word.letters), start=1) if x == y
                )
            return fixed[word.letters]

        for i, ws in enumerate(word_lists):
            totals[i] += math.prod(fix(w) for w in ws)
    return [Fraction(total, size * n ** len(ws)) for total, ws in zip(totals, word_lists)]


class TestModel(unittest.TestCase):
    """模型校验"""

    def test_sup_must_match_order(self):
        with self.assertRaises(ValueError):
            Model(Signature((2,)), (CycleSet.all(),))
        with self.assertRaises(ValueError):
            Model(Signature((INFINITY,)), (CycleSet.finite([1, 2]),))
        Model(Signature((INFINITY,)), (CycleSet.multiples(2),))

    def test_size_mismatch(self):
        with self.assertRaises(ValueError):
            Model(Signature((2, 2)), (CycleSet.finite([2]),))

    def test_feasibility(self):
        self.assertFalse(INVOLUTION.is_feasible(5))
        self.assertTrue(INVOLUTION.is_feasible(6))
        self.assertTrue(INVOLUTION.singleton_or_infinite)
        self.assertFalse(MIXED.singleton_or_infinite)
        with self.assertRaises(InfeasibleSizeError):
            INVOLUTION.require_feasible(5)
        with self.assertRaises(ValueError):
            FREE.require_grid([10, 5])


class TestExactTrace(unittest.TestCase):
    """精确公式"""

    def test_examples(self):
        self.assertEqual(exact_expected_trace(FREE, words("g1"), 5), Fraction(1, 5))
        self.assertEqual(brute_expected_trace(INVOLUTION, words("g1 g1"), 4), 1)
        self.assertEqual(exact_expected_trace(INVOLUTION, words("g1 g1"), 4), 1)
        self.assertEqual(exact_expected_trace(INVOLUTION, words("g1"), 6), 0)

    def test_matches_brute_force(self):
        cases = [
            (FREE, ["g1"], (4, 5)),
            (FREE, ["g1 g1"], (4, 5)),
            (FREE, ["g1 g1*"], (3, 5)),
            (FREE, ["g1", "g1"], (4, 5)),
            (FREE, ["g1 g1", "g1*"], (4,)),
            (INVOLUTION, ["g1", "g1 g1 g1"], (4, 6)),
            (MIXED, ["g1 g2 g1 g2*"], (4,)),
            (MIXED, ["g1 g2", "g2* g1"], (4,)),
            (MIXED, ["g2 g2 g1"], (5,)),
            (ORDER_THREE, ["g1 g2 g1* g2*"], (4, 5)),
            (ORDER_THREE, ["g1 g1 g1", "g2"], (4,)),
        ]
        for model, texts, sizes in cases:
            for n in sizes:
                with self.subTest(words=texts, n=n):
                    ws = words(*texts)
                    self.assertEqual(exact_expected_trace(model, ws, n), brute_expected_trace(model, ws, n))

    def test_empty_words(self):
        self.assertEqual(exact_expected_trace(FREE, [Word()], 3), 1)
        self.assertEqual(brute_expected_trace(FREE, [Word(), Word()], 3), 1)
        self.assertEqual(
            exact_expected_trace(FREE, [Word(), parse_word("g1")], 4),
            exact_expected_trace(FREE, words("g1"), 4),
        )

    def test_infeasible_size(self):
        with self.assertRaises(InfeasibleSizeError):
            exact_expected_trace(INVOLUTION, words("g1"), 5)
        with self.assertRaises(InfeasibleSizeError):
            brute_expected_trace(INVOLUTION, words("g1"), 5)

    def test_budgets(self):
        with self.assertRaises(BudgetExceededError):
            brute_expected_trace(FREE, words("g1"), 6, budget=100)
        with self.assertRaises(BudgetExceededError):
            exact_expected_trace(FREE, words("g1 g1 g1"), 10, vertex_bound=2)

    def test_invalid_word(self):
        with self.assertRaises(ValueError):
            exact_expected_trace(FREE, words("g2"), 4)
        with self.assertRaises(ValueError):
            exact_expected_trace(FREE, words("g1"), 0)

    def test_fixed_points(self):
        perms = {1: (2, 1, 3)}
        inverses = {1: (2, 1, 3)}
        self.assertEqual(fixed_points(parse_word("g1"), perms, inverses), 1)
        self.assertEqual(fixed_points(parse_word("g1 g1"), perms, inverses), 3)


class TestOracleGrid(unittest.TestCase):
    """精确公式与逐元组暴力枚举在小 N 上逐项相等"""

    def _assert_grid(self, s, sizes, single_len, pair_len):
        word_lists = oracle_word_lists(s, single_len, pair_len)
        for model in oracle_models(s):
            for n in sizes:
                if not model.is_feasible(n):
                    continue
                expected = brute_moments(model, n, word_lists)
                for ws, value in zip(word_lists, expected):
                    label = f"{[str(w) for w in ws]} @ {model.cycle_sets}, N={n}"
                    self.assertEqual(exact_expected_trace(model, ws, n), value, label)

    def test_one_color(self):
        self._assert_grid(1, range(2, 6), 4, 5)

    def test_two_colors(self):
        self._assert_grid(2, range(2, 5), 3, 3)

    @unittest.skipUnless(SLOW_TESTS, "需要 PERMFREE_SLOW_TESTS=1")
    def test_two_colors_full(self):
        self._assert_grid(2, range(2, 6), 4, 5)

    def test_brute_moments_matches_library_brute(self):
        ws = words("g1 g2 g1* g2*")
        self.assertEqual(brute_moments(ORDER_THREE, 4, [ws])[0], brute_expected_trace(ORDER_THREE, ws, 4))

    def test_rotation_invariance(self):
        """E tr U_w 在 w 的循环置换下不变"""
        for model in (MIXED, ORDER_THREE):
            for word in enumerate_words(model.sig, 4):
                if word.is_empty:
                    continue
                value = exact_expected_trace(model, [word], 5)
                for k in range(1, len(word)):
                    self.assertEqual(exact_expected_trace(model, [word.rotate(k)], 5), value, str(word))


class TestLargeN(unittest.TestCase):
    """大 N 下的偏差与衰减速率"""

    def test_pair_of_free_generators_within_two_over_n(self):
        ws = [w for w in enumerate_words(FREE_PAIR.sig, 3) if not w.is_empty]
        for n in (50, 100, 200):
            worst = max(abs(exact_expected_trace(FREE_PAIR, [w], n) - phi_haar(w, FREE_PAIR.sig)) for w in ws)
            self.assertLessEqual(worst, Fraction(2, n), f"N={n}")

    def test_commutator_decay_rate(self):
        word = parse_word("g1 g2 g1* g2*")
        grid = (40, 80, 160, 240, 320, 400)
        for model in (INVOLUTION_FREE, FREE_PAIR):
            points = [(n, float(abs(exact_expected_trace(model, [word], n)))) for n in grid]
            self.assertLessEqual(slope_fit(points), RATE_SLOPE_BOUND, str(model.cycle_sets))

    def test_fixed_point_covariance_summable(self):
        grid = (40, 80, 160, 240, 320, 400)
        report = summability_verdict(FREE, parse_word("g1"), parse_word("g1"), grid)
        self.assertEqual(report.verdict, VERDICT_PASS)
        self.assertLessEqual(report.slope, COVARIANCE_SLOPE_BOUND)

    def test_involution_commutator_closed_form(self):
        """σ 为无不动点对合时 E tr U_{g1 g2 g1* g2*} = 1/(N−1)"""
        word = parse_word("g1 g2 g1* g2*")
        for n in (4, 6, 40):
            self.assertEqual(exact_expected_trace(INVOLUTION_FREE, [word], n), Fraction(1, n - 1))


class TestMonteCarlo(unittest.TestCase):
    """蒙特卡洛"""

    def test_reproducible(self):
        first = mc_expected_trace(MIXED, words("g1 g2 g1 g2*"), 6, 300, seed=7)
        second = mc_expected_trace(MIXED, words("g1 g2 g1 g2*"), 6, 300, seed=7)
        self.assertEqual(first, second)
        self.assertEqual(first.samples, 300)
        self.assertEqual(first.seed, 7)

    def test_identity_word_has_no_variance(self):
        result = mc_expected_trace(INVOLUTION, words("g1 g1"), 6, 50, seed=1)
        self.assertEqual(result.estimate, 1.0)
        self.assertEqual(result.stderr, 0.0)

    def test_single_sample(self):
        result = mc_expected_trace(FREE, words("g1"), 5, 1, seed=3)
        self.assertTrue(math.isnan(result.stderr))
        with self.assertRaises(ValueError):
            mc_expected_trace(FREE, words("g1"), 5, 0)

    def test_agrees_with_exact(self):
        ws = words("g1 g2 g1 g2*")
        exact = exact_expected_trace(MIXED, ws, 5)
        result = mc_expected_trace(MIXED, ws, 5, 4000, seed=11)
        self.assertLessEqual(abs(result.estimate - float(exact)), 5 * result.stderr + 1e-12)

    def test_agreement_over_seeds(self):
        """30 个种子 × 3 种配置，每次都落在 5σ 内"""
        configs = [
            (MIXED, words("g1 g2 g1 g2*"), 5),
            (FREE, words("g1", "g1 g1"), 6),
            (ORDER_THREE, words("g1 g2 g1* g2*"), 5),
        ]
        for model, ws, n in configs:
            exact = float(exact_expected_trace(model, ws, n))
            misses = []
            for seed in range(30):
                result = mc_expected_trace(model, ws, n, 1000, seed=seed)
                if abs(result.estimate - exact) > MC_AGREEMENT_SIGMAS * result.stderr + 1e-12:
                    misses.append(seed)
            self.assertEqual(misses, [], str(model.cycle_sets))

    def test_report_dispatch(self):
        report = expected_trace_report(FREE, words("g1"), 5, METHOD_MC, samples=10, seed=2)
        self.assertIsInstance(report, TraceReport)
        self.assertEqual(report.samples, 10)
        self.assertIsNone(report.value)
        self.assertEqual(expected_trace_report(FREE, words("g1"), 5).value, Fraction(1, 5))
        self.assertEqual(expected_trace_report(FREE, words("g1"), 5, METHOD_BRUTE).method, METHOD_BRUTE)
        self.assertEqual(expected_trace_report(FREE, words("g1"), 5, METHOD_EXACT).words, ("g1",))
        with self.assertRaises(ValueError):
            expected_trace_report(FREE, words("g1"), 5, "guess")


class TestLimits(unittest.TestCase):
    """极限与恒等单词"""

    def test_product_limit(self):
        sig = Signature((2, INFINITY))
        self.assertEqual(product_limit(words("g1 g1", "g2 g2*"), sig), 1)
        self.assertEqual(product_limit(words("g1 g1", "g2"), sig), 0)
        self.assertEqual(product_limit([], sig), 1)

    def test_identity_words_are_constant(self):
        model = Model(Signature((2, INFINITY)), (CycleSet.finite([2]), CycleSet.all()))
        self.assertTrue(identity_words_are_constant(model, parse_word("g1 g2 g1 g1 g2* g1"), 4))
        with self.assertRaises(ValueError):
            identity_words_are_constant(model, parse_word("g1 g2"), 4)
        with self.assertRaises(ValueError):
            identity_words_are_constant(MIXED, parse_word("g1 g1"), 4)


class TestVerdicts(unittest.TestCase):
    """协方差与自由性判定"""

    def test_covariance_of_fixed_points(self):
        grid = (4, 6, 8, 10, 12, 16)
        rows = covariance_scan(FREE, parse_word("g1"), parse_word("g1"), grid)
        self.assertEqual(rows, [(n, Fraction(1, n * n)) for n in grid])
        report = summability_verdict(FREE, parse_word("g1"), parse_word("g1"), grid)
        self.assertEqual(report.verdict, VERDICT_PASS)
        self.assertAlmostEqual(report.slope, -2.0, places=6)

    def test_covariance_exact_zero(self):
        report = summability_verdict(FREE, Word(), parse_word("g1"), (4, 6, 8))
        self.assertEqual(report.verdict, VERDICT_EXACT_ZERO)
        self.assertIsNone(report.slope)

    def test_freeness_involution(self):
        report = freeness_verdict(INVOLUTION, 2, (4, 6, 8))
        self.assertTrue(report.passed)
        self.assertEqual(set(report.exact_zero), {"g1", "g1*"})
        self.assertEqual(max(report.max_deviation.values()), 0.0)

    def test_freeness_free_generator(self):
        report = freeness_verdict(FREE, 1, (10, 20, 40))
        self.assertEqual(report.verdict, VERDICT_PASS)
        self.assertAlmostEqual(report.slopes["g1"], -1.0, places=6)
        self.assertTrue(report.slopes_within_rate)
        strict = freeness_verdict(FREE, 1, (10, 20, 40), envelope=0.5)
        self.assertEqual(strict.verdict, VERDICT_FAIL)

    def test_freeness_requires_rate_when_it_applies(self):
        with patch("src.core.trace._fit_tail", return_value=-0.5):
            report = freeness_verdict(FREE, 1, (10, 20, 40))
        self.assertTrue(report.rate_applies)
        self.assertFalse(report.slopes_within_rate)
        self.assertEqual(report.verdict, VERDICT_FAIL)

    def test_freeness_rate_informational_otherwise(self):
        with patch("src.core.trace._fit_tail", return_value=-0.5):
            report = freeness_verdict(MIXED, 1, (4, 6, 8), envelope=100.0)
        self.assertFalse(report.rate_applies)
        self.assertFalse(report.slopes_within_rate)
        self.assertEqual(report.verdict, VERDICT_PASS)


if __name__ == '__main__':
    unittest.main()

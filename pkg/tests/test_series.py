import random

import numpy as np
from twisted.trial import unittest

from modular_spans.errors import ConfigError, InvariantError, SeriesMismatchError
from modular_spans.series import (
    QExpansion,
    add,
    mul,
    one,
    power,
    scale,
    subgrid_length,
    truncation_bound,
)
from tests import random_expansion


class TruncationBoundTestCase(unittest.TestCase):
    def test_values(self) -> None:
        self.assertEqual(truncation_bound(3, 1), 49)
        self.assertEqual(truncation_bound(3, 4), 193)
        self.assertEqual(truncation_bound(5, 1), 241)
        self.assertEqual(truncation_bound(7, 3), 2017)

    def test_rejects_bad_input(self) -> None:
        with self.assertRaises(ConfigError):
            truncation_bound(4, 1)
        with self.assertRaises(ConfigError):
            truncation_bound(3, 0)

    def test_subgrid_length(self) -> None:
        # 0, 12, 24, 36, 48
        self.assertEqual(subgrid_length(49, 12, 0), 5)
        # 11, 23, 35, 47
        self.assertEqual(subgrid_length(49, 12, 11), 4)
        self.assertEqual(subgrid_length(5, 12, 7), 0)


class QExpansionTestCase(unittest.TestCase):
    def test_from_coefficients_on_class(self) -> None:
        a = QExpansion.from_coefficients(4, [0, 3, 0, 0, 0, 5, 0], support_class=1)
        self.assertEqual(a.support_class, 1)
        self.assertEqual(list(a.values), [3, 5])
        self.assertEqual(a[5], 5)
        self.assertEqual(a[4], 0)
        self.assertEqual(list(a.coefficients), [0, 3, 0, 0, 0, 5, 0])

    def test_class_violation(self) -> None:
        with self.assertRaises(InvariantError):
            QExpansion.from_coefficients(4, [1, 1, 0], support_class=0)

    def test_values_are_read_only(self) -> None:
        a = QExpansion.from_coefficients(4, [1, 2, 3])
        with self.assertRaises(ValueError):
            a.values[0] = 7

    def test_valuation(self) -> None:
        self.assertEqual(QExpansion.from_coefficients(4, [0, 0, 2, 1]).valuation(), 2)
        self.assertIsNone(QExpansion.zero(4, 6).valuation())

    def test_equality_ignores_storage(self) -> None:
        sparse = QExpansion.on_class(3, 7, 2, [1, -1])
        dense = QExpansion.from_coefficients(3, [0, 0, 1, 0, 0, -1, 0])
        self.assertEqual(sparse, dense)

    def test_big_coefficients_stay_exact(self) -> None:
        big = 1 << 70
        a = QExpansion.from_coefficients(1, [big, 1])
        self.assertEqual(a.values.dtype, np.dtype(object))
        square = mul(a, a)
        self.assertEqual(square[0], big * big)
        self.assertEqual(square[1], 2 * big)


class ArithmeticTestCase(unittest.TestCase):
    def test_product_example(self) -> None:
        # (1 + q)(1 - q) = 1 - q^2
        a = QExpansion.from_coefficients(1, [1, 1, 0, 0])
        b = QExpansion.from_coefficients(1, [1, -1, 0, 0])
        self.assertEqual(list(mul(a, b).coefficients), [1, 0, -1, 0])

    def test_class_product_carries(self) -> None:
        # q^(3/4) * q^(2/4) = q^(5/4), class 1 mod 4
        a = QExpansion.from_coefficients(4, [0, 0, 0, 1, 0, 0, 0, 0], 3)
        b = QExpansion.from_coefficients(4, [0, 0, 1, 0, 0, 0, 0, 0], 2)
        product = mul(a, b)
        self.assertEqual(product.support_class, 1)
        self.assertEqual(product.valuation(), 5)

    def test_identities(self) -> None:
        rng = random.Random(0)
        g = random_expansion(rng, 12, 49)
        zero = QExpansion.zero(12, 49)
        self.assertTrue(mul(zero, g).is_zero())
        self.assertEqual(add(g, zero), g)
        self.assertTrue(scale(0, g).is_zero())
        self.assertTrue(add(scale(-1, add(g, g)), scale(2, g)).is_zero())

    def test_hash_ignores_storage(self) -> None:
        sparse = QExpansion.on_class(12, 49, 5, [0, 3, 0, 1])
        dense = QExpansion.from_coefficients(12, [int(c) for c in sparse.coefficients])
        self.assertIsNone(dense.support_class)
        self.assertEqual(sparse, dense)
        self.assertEqual(hash(sparse), hash(dense))
        self.assertEqual(len({sparse, dense}), 1)

    def test_mismatch(self) -> None:
        with self.assertRaises(SeriesMismatchError):
            mul(QExpansion.zero(4, 5), QExpansion.zero(4, 6))
        with self.assertRaises(SeriesMismatchError):
            add(QExpansion.zero(4, 5), QExpansion.zero(8, 5))

    def test_ring_laws(self) -> None:
        rng = random.Random(1)
        for _ in range(50):
            length = rng.randint(1, 40)
            classes = [rng.choice([None, 0, 1, 2, 3]) for _ in range(3)]
            a, b, c = (random_expansion(rng, 4, length, cls) for cls in classes)
            self.assertEqual(mul(a, b), mul(b, a))
            self.assertEqual(mul(mul(a, b), c), mul(a, mul(b, c)))
            self.assertEqual(mul(a, add(b, c)), add(mul(a, b), mul(a, c)))
            self.assertEqual(mul(a, one(4, length)), a)
            self.assertEqual(scale(3, mul(a, b)), mul(scale(3, a), b))

    def test_class_product_matches_dense_product(self) -> None:
        rng = random.Random(2)
        for _ in range(50):
            length = rng.randint(1, 60)
            a = random_expansion(rng, 12, length, rng.randrange(12))
            b = random_expansion(rng, 12, length, rng.randrange(12))
            dense_a = QExpansion.from_coefficients(12, a.coefficients)
            dense_b = QExpansion.from_coefficients(12, b.coefficients)
            self.assertEqual(mul(a, b), mul(dense_a, dense_b))

    def test_truncation_coherence(self) -> None:
        rng = random.Random(3)
        for _ in range(30):
            length = rng.randint(2, 50)
            shorter = rng.randint(1, length)
            a = random_expansion(rng, 4, length, rng.choice([None, 1, 2]))
            b = random_expansion(rng, 4, length, rng.choice([None, 0, 3]))
            self.assertEqual(
                mul(a, b).truncate(shorter),
                mul(a.truncate(shorter), b.truncate(shorter)),
            )

    def test_power(self) -> None:
        x = QExpansion.from_coefficients(1, [1, 1, 0, 0, 0])
        # (1 + q)^3
        self.assertEqual(list(power(x, 3).coefficients), [1, 3, 3, 1, 0])
        self.assertEqual(power(x, 0), one(1, 5))
        with self.assertRaises(ConfigError):
            power(x, -1)

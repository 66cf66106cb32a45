import random

import numpy as np
from twisted.trial import unittest

from modular_spans.constants import CERT_BAREISS, CERT_MODULARN
from modular_spans.errors import CertificationError, ConfigError
from modular_spans.exact_linalg import (
    METHOD_FRACTION_FREE,
    METHOD_MODULAR,
    CertPolicy,
    as_int_matrix,
    kernel_exact,
    kernel_mod_prime,
    rank_bareiss,
    rank_exact,
    rank_mod_prime,
    stack_rows,
)
from modular_spans.primes import check_odd_prime, choose_primes


def _random_matrix(rng: random.Random) -> np.ndarray:
    rows = rng.randint(0, 6)
    cols = rng.randint(1, 6)
    # low-rank products make dependent rows common
    if rows and rng.random() < 0.5:
        inner = rng.randint(1, 3)
        left = [[rng.randint(-3, 3) for _ in range(inner)] for _ in range(rows)]
        right = [[rng.randint(-3, 3) for _ in range(cols)] for _ in range(inner)]
        product = np.array(left, dtype=object).dot(np.array(right, dtype=object))
        return as_int_matrix(product.tolist(), cols)
    return as_int_matrix(
        [[rng.randint(-4, 4) for _ in range(cols)] for _ in range(rows)], cols
    )


class PrimesTestCase(unittest.TestCase):
    def test_check_odd_prime(self) -> None:
        self.assertEqual(check_odd_prime(7), 7)
        for bad in (2, 9, 1, -3):
            with self.assertRaises(ConfigError):
                check_odd_prime(bad)

    def test_choose_primes_is_deterministic(self) -> None:
        primes = choose_primes(4, 31, 0)
        self.assertEqual(primes, choose_primes(4, 31, 0))
        self.assertEqual(choose_primes(2, 31, 0), primes[:2])
        self.assertEqual(len(set(primes)), 4)
        for q in primes:
            self.assertEqual(q.bit_length(), 31)
        self.assertNotEqual(choose_primes(4, 31, 1), primes)


class RankTestCase(unittest.TestCase):
    def test_examples(self) -> None:
        self.assertEqual(rank_bareiss(as_int_matrix([[1, 2], [2, 4]]))[0], 1)
        self.assertEqual(rank_bareiss(as_int_matrix([[0, 1], [1, 0]])), (2, (0, 1)))
        self.assertEqual(rank_mod_prime(as_int_matrix([[2, 4], [1, 2]]), 7), (1, (0,)))
        # the determinant is 7
        m = as_int_matrix([[1, 3], [2, 13]])
        self.assertEqual(rank_mod_prime(m, 7)[0], 1)
        self.assertEqual(rank_mod_prime(m, 11)[0], 2)
        # 2 divides the determinant
        m = as_int_matrix([[1, 1], [1, -1]])
        self.assertEqual(rank_mod_prime(m, 2)[0], 1)
        self.assertEqual(rank_mod_prime(m, 101)[0], 2)
        identity = as_int_matrix(np.eye(3, dtype=np.int64).tolist())
        self.assertEqual(rank_mod_prime(identity, 101), (3, (0, 1, 2)))

    def test_empty(self) -> None:
        empty = np.zeros((0, 3), dtype=np.int64)
        self.assertEqual(rank_exact(empty).rank, 0)
        self.assertEqual(rank_exact(empty, CertPolicy(CERT_BAREISS)).rank, 0)

    def test_modulus_must_be_prime(self) -> None:
        with self.assertRaises(ConfigError):
            rank_mod_prime(as_int_matrix([[1]]), 15)

    def test_bareiss_matches_modular(self) -> None:
        rng = random.Random(0)
        strict = CertPolicy(CERT_BAREISS)
        for _ in range(1000):
            m = _random_matrix(rng)
            exact = rank_exact(m, strict)
            modular = rank_exact(m)
            self.assertEqual(exact.rank, modular.rank)
            self.assertEqual(exact.pivot_columns, modular.pivot_columns)
            self.assertEqual(exact.method, METHOD_FRACTION_FREE)
            self.assertEqual(modular.method, METHOD_MODULAR)

    def test_modular_rank_never_exceeds_exact_rank(self) -> None:
        rng = random.Random(3)
        for _ in range(200):
            m = _random_matrix(rng)
            exact = rank_bareiss(m)[0]
            for q in (2, 3, 5, 101):
                self.assertLessEqual(rank_mod_prime(m, q)[0], exact)

    def test_adding_rows_never_lowers_rank(self) -> None:
        rng = random.Random(1)
        for _ in range(100):
            m = _random_matrix(rng)
            extra = as_int_matrix([[rng.randint(-2, 2) for _ in range(m.shape[1])]])
            bigger = np.vstack([m.astype(object), extra.astype(object)])
            self.assertGreaterEqual(
                rank_exact(as_int_matrix(bigger.tolist(), m.shape[1])).rank,
                rank_exact(m).rank,
            )

    def test_big_entries(self) -> None:
        big = 1 << 80
        m = as_int_matrix([[big, 1], [2 * big, 2]])
        self.assertEqual(m.dtype, np.dtype(object))
        self.assertEqual(rank_exact(m).rank, 1)
        self.assertEqual(rank_exact(m, CertPolicy(CERT_BAREISS)).rank, 1)

    def test_wide_primes(self) -> None:
        policy = CertPolicy(prime_bits=61)
        m = as_int_matrix([[1, 2, 3], [4, 5, 6], [7, 8, 10]])
        certificate = rank_exact(m, policy)
        self.assertEqual(certificate.rank, 3)
        self.assertEqual(len(certificate.primes), 2)

    def test_modular_n_needs_more_agreement(self) -> None:
        policy = CertPolicy(CERT_MODULARN, agreement=3)
        certificate = rank_exact(as_int_matrix([[1, 2], [3, 4]]), policy)
        self.assertEqual(len(certificate.primes), 3)
        self.assertIn(METHOD_MODULAR, certificate.describe())

    def test_unreachable_agreement(self) -> None:
        with self.assertRaises(ConfigError):
            CertPolicy(CERT_MODULARN, agreement=5, max_primes=4)

    def test_exhausted_primes(self) -> None:
        # the first prime hides the full rank, so the two never agree
        q = choose_primes(2, 8, 0)
        m = as_int_matrix([[1, 0], [0, q[0]]])
        with self.assertRaises(CertificationError):
            rank_exact(m, CertPolicy(prime_bits=8, max_primes=2))


class KernelTestCase(unittest.TestCase):
    def test_kernel_exact(self) -> None:
        m = as_int_matrix([[1, 2, 3], [2, 4, 6]])
        self.assertEqual(kernel_exact(m), [[-2, 1, 0], [-3, 0, 1]])

    def test_identity_has_no_kernel(self) -> None:
        identity = as_int_matrix(np.eye(4, dtype=np.int64).tolist())
        self.assertEqual(kernel_exact(identity), [])
        self.assertEqual(kernel_mod_prime(identity, 101), [])
        self.assertEqual(kernel_mod_prime(as_int_matrix([[1, 1]]), 101), [[100, 1]])

    def test_kernel_is_primitive(self) -> None:
        m = as_int_matrix([[2, 3]])
        self.assertEqual(kernel_exact(m), [[-3, 2]])

    def test_kernel_annihilates(self) -> None:
        rng = random.Random(2)
        for _ in range(100):
            m = _random_matrix(rng)
            basis = kernel_exact(m)
            self.assertEqual(len(basis), m.shape[1] - rank_bareiss(m)[0])
            for vector in basis:
                product = m.astype(object).dot(np.array(vector, dtype=object))
                self.assertTrue(all(x == 0 for x in product))

    def test_kernel_mod_prime(self) -> None:
        q = 101
        m = as_int_matrix([[1, 2, 3], [2, 4, 6]])
        basis = kernel_mod_prime(m, q)
        self.assertEqual(basis, [[q - 2, 1, 0], [q - 3, 0, 1]])

    def test_stack_rows(self) -> None:
        rows = [np.array([1, 2], dtype=np.int64), np.array([3, 1 << 70], dtype=object)]
        m = stack_rows(rows, 2)
        self.assertEqual(m.shape, (2, 2))
        self.assertEqual(m.dtype, np.dtype(object))
        self.assertEqual(stack_rows([], 4).shape, (0, 4))

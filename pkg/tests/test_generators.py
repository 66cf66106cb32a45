import numpy as np
from twisted.trial import unittest

from modular_spans.constants import FORM_M, FORM_N, FORM_P
from modular_spans.errors import ConfigError, TruncationError
from modular_spans.exact_linalg import CertPolicy
from modular_spans.generators import (
    GeneratorLabel,
    build_generator,
    generator_labels,
    reduce_to_basis,
    spanning_set,
)
from modular_spans.series import truncation_bound
from modular_spans.theta_series import (
    gamma4_monomials,
    phi_coefficients,
    quarter_coefficients,
    theta_coefficients,
)


class ThetaSeriesTestCase(unittest.TestCase):
    def test_theta_and_phi(self) -> None:
        theta = theta_coefficients(17)
        self.assertEqual([n for n, c in enumerate(theta) if c], [0, 4, 16])
        self.assertEqual(theta[0], 1)
        self.assertEqual(theta[16], 2)
        phi = phi_coefficients(26)
        self.assertEqual([n for n, c in enumerate(phi) if c], [1, 9, 25])
        self.assertEqual(set(phi) - {0}, {2})

    def test_quarter_coefficients(self) -> None:
        # M = theta^2 counts sums of two squares at index 4n
        m = quarter_coefficients(FORM_M, 21)
        self.assertEqual([m[0], m[4], m[8], m[12], m[16], m[20]], [1, 4, 4, 0, 4, 8])
        n = quarter_coefficients(FORM_N, 10)
        self.assertEqual([n[1], n[5], n[9]], [4, 8, 4])
        p = quarter_coefficients(FORM_P, 19)
        self.assertEqual([p[2], p[10], p[18]], [4, 8, 4])

    def test_jacobi_relation(self) -> None:
        count = 200
        m = np.array(quarter_coefficients(FORM_M, count), dtype=object)
        n = np.array(quarter_coefficients(FORM_N, count), dtype=object)
        p = np.array(quarter_coefficients(FORM_P, count), dtype=object)
        lhs = np.convolve(n, n)[:count]
        rhs = 4 * np.convolve(m, p)[:count]
        self.assertEqual(list(lhs), list(rhs))

    def test_gamma4_monomials(self) -> None:
        forms = gamma4_monomials(2, 20)
        self.assertEqual(len(forms), 5)
        # theta^(4-j) phi^j starts at q^(j/4)
        self.assertEqual([form.valuation() for form in forms], [0, 1, 2, 3, 4])


class GeneratorLabelTestCase(unittest.TestCase):
    def test_str_and_parse(self) -> None:
        for text in ("M", "N", "P", "M(0)", "N(4)", "P(12)"):
            self.assertEqual(str(GeneratorLabel.parse(text)), text)
        with self.assertRaises(ConfigError):
            GeneratorLabel.parse("Q(1)")
        with self.assertRaises(ConfigError):
            GeneratorLabel("M", -1)

    def test_classes_at_p3(self) -> None:
        classes = {str(label): label.class_of(3) for label in generator_labels(3)}
        self.assertEqual(
            classes,
            {
                "M": 0,
                "N": 9,
                "P": 6,
                "M(0)": 0,
                "N(0)": 9,
                "P(0)": 6,
                "M(1)": 4,
                "N(1)": 1,
                "P(1)": 10,
                "M(2)": 8,
                "N(2)": 5,
                "P(2)": 2,
            },
        )

    def test_twist_must_be_a_residue(self) -> None:
        with self.assertRaises(ConfigError):
            GeneratorLabel(FORM_M, 5).class_of(5)


class SpanningSetTestCase(unittest.TestCase):
    def test_sizes(self) -> None:
        for p, size in ((3, 12), (5, 18), (13, 42)):
            self.assertEqual(len(generator_labels(p)), size)

    def test_generators_live_on_their_class(self) -> None:
        p = 5
        length = truncation_bound(p, 1)
        gs = spanning_set(p, length)
        for label, expansion in gs.entries:
            self.assertEqual(expansion.support_class, label.class_of(p))
            self.assertFalse(expansion.is_zero())

    def test_base_form_is_a_dilation(self) -> None:
        # M(pz) on the q^(1/4p) grid puts the q^(m/4) coefficient at n = p^2 m
        p = 3
        length = truncation_bound(p, 1)
        expansion = build_generator(GeneratorLabel(FORM_M), p, length)
        quarter = quarter_coefficients(FORM_M, length)
        for n in range(length):
            expected = quarter[n // 9] if n % 9 == 0 else 0
            self.assertEqual(expansion[n], expected)
        n_base = build_generator(GeneratorLabel(FORM_N), p, length)
        self.assertEqual(n_base.support_class, 9)
        self.assertEqual(n_base.valuation(), 9)
        self.assertEqual(n_base[9], 4)

    def test_zero_twist_is_the_base_form_when_p_is_3_mod_4(self) -> None:
        for p in (3, 7):
            length = truncation_bound(p, 1)
            for form in (FORM_M, FORM_N, FORM_P):
                self.assertEqual(
                    build_generator(GeneratorLabel(form), p, length),
                    build_generator(GeneratorLabel(form, 0), p, length),
                )
        length = truncation_bound(5, 1)
        self.assertNotEqual(
            build_generator(GeneratorLabel(FORM_M), 5, length),
            build_generator(GeneratorLabel(FORM_M, 0), 5, length),
        )

    def test_twist_keeps_one_class(self) -> None:
        p = 5
        length = truncation_bound(p, 1)
        expansion = build_generator(GeneratorLabel(FORM_N, 2), p, length)
        quarter = quarter_coefficients(FORM_N, length)
        for n in range(length):
            expected = quarter[n] if n % p == 2 else 0
            self.assertEqual(expansion[n], expected)

    def test_dim_v(self) -> None:
        for p, d in ((3, 9), (5, 18), (7, 21)):
            gs = reduce_to_basis(spanning_set(p, truncation_bound(p, 1)))
            self.assertEqual(gs.d, d)

    def test_dim_v_p13(self) -> None:
        gs = reduce_to_basis(spanning_set(13, truncation_bound(13, 1)))
        self.assertEqual(gs.d, 42)

    def test_basis_prefers_earlier_labels(self) -> None:
        gs = reduce_to_basis(spanning_set(3, truncation_bound(3, 1)))
        labels = [str(label) for label, _ in gs.basis()]
        self.assertEqual(labels[:3], ["M", "N", "P"])
        self.assertNotIn("M(0)", labels)
        self.assertEqual(len(labels), 9)
        self.assertEqual(list(gs.basis_indices or ()), sorted(gs.basis_indices or ()))

    def test_strict_policy_agrees(self) -> None:
        gs = spanning_set(3, truncation_bound(3, 1))
        modular = reduce_to_basis(gs)
        strict = reduce_to_basis(gs, CertPolicy("bareiss"))
        self.assertEqual(modular.basis_indices, strict.basis_indices)
        self.assertEqual(strict.certification, "fraction-free")

    def test_short_truncation_refused(self) -> None:
        gs = spanning_set(3, 20)
        with self.assertRaises(TruncationError):
            reduce_to_basis(gs)
        self.assertLessEqual(reduce_to_basis(gs, allow_unsound=True).d, 12)

    def test_unreduced_set_has_no_d(self) -> None:
        with self.assertRaises(ConfigError):
            _ = spanning_set(3, 49).d

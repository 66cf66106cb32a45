from twisted.trial import unittest

from modular_spans.cusps import (
    RELATION_APPROX,
    RELATION_SIM,
    CuspVector,
    cusp_classes,
    expected_class_count,
    identified_at_level4,
    multipliers,
    primitive_pairs,
    refinement_multiplicities,
)
from modular_spans.errors import ConfigError


class CuspVectorTestCase(unittest.TestCase):
    def test_primitive(self) -> None:
        self.assertEqual(CuspVector(13, 2, 12).residues(), (1, 2))
        with self.assertRaises(ConfigError):
            CuspVector(2, 4, 12)
        # 3 divides a, c and the level
        with self.assertRaises(ConfigError):
            CuspVector(6, 9, 12)

    def test_canonical_sign(self) -> None:
        self.assertEqual(CuspVector(11, 10, 12).canonical(), (1, 2))
        self.assertEqual(CuspVector(1, 2, 12).canonical(), (1, 2))

    def test_identified_at_level4(self) -> None:
        v = CuspVector(1, 2, 12)
        self.assertTrue(identified_at_level4(v, CuspVector(5, 6, 12)))
        self.assertTrue(identified_at_level4(v, CuspVector(3, 2, 12)))
        self.assertFalse(identified_at_level4(v, CuspVector(1, 0, 12)))
        u = CuspVector(1, 0, 12)
        self.assertTrue(identified_at_level4(u, CuspVector(-1, 0, 12)))
        self.assertTrue(identified_at_level4(u, CuspVector(1, 4, 12)))
        self.assertFalse(identified_at_level4(u, CuspVector(0, 1, 12)))


class CuspClassTestCase(unittest.TestCase):
    def test_primitive_pairs(self) -> None:
        for p in (3, 5, 7):
            self.assertEqual(len(primitive_pairs(p)), 12 * (p * p - 1))

    def test_p3_relations_coincide(self) -> None:
        sim = cusp_classes(3, RELATION_SIM)
        approx = cusp_classes(3, RELATION_APPROX)
        self.assertEqual(sim.count, 24)
        self.assertEqual(sim.classes, approx.classes)

    def test_counts(self) -> None:
        self.assertEqual(cusp_classes(5, RELATION_SIM).count, 36)
        self.assertEqual(cusp_classes(5, RELATION_APPROX).count, 72)
        self.assertEqual(cusp_classes(7, RELATION_APPROX).count, 144)

    def test_counts_up_to_23(self) -> None:
        for p in (3, 5, 7, 11, 13, 17, 19, 23):
            for relation in (RELATION_SIM, RELATION_APPROX):
                self.assertEqual(
                    cusp_classes(p, relation).count, expected_class_count(p, relation)
                )

    def test_classes_partition_the_pairs(self) -> None:
        table = cusp_classes(7, RELATION_SIM)
        index = table.class_index()
        self.assertEqual(sorted(index), sorted(primitive_pairs(7)))
        self.assertEqual(len(table.representatives), 48)

    def test_refinement(self) -> None:
        for p in (3, 5, 7, 11):
            multiplicity = refinement_multiplicities(p)
            self.assertEqual(len(multiplicity), 6 * (p + 1))
            self.assertEqual(set(multiplicity.values()), {(p - 1) // 2})

    def test_unknown_relation(self) -> None:
        with self.assertRaises(ConfigError):
            multipliers(5, "equal")
        with self.assertRaises(ConfigError):
            cusp_classes(4, RELATION_SIM)

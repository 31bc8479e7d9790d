import cmath

import pytest

from lib.errors import LeavesVn, NoConsistentMatching, NonGenericBase
from lib.fiber import (
    LabeledFiber,
    base_hash,
    check_generic,
    difference_points,
    match_to_reference,
    negation_partners,
    root_of_unity_orbit,
    solve_fiber,
)
from lib.polyalg import ConfigPoint, set_distance
from lib.reference import load_reference, n2_fiber_roots

EPSILON = 0.8


def test_n2_fiber_over_unit_point():
    x = cmath.exp(1j * EPSILON)
    polys = solve_fiber(ConfigPoint((x,), "V"))
    y = 2 * cmath.exp(0.5j * (EPSILON + cmath.pi))
    assert len(polys) == 2
    assert set_distance([p.nonzero_roots()[0] for p in polys], [y, -y]) < 1e-8


def test_solve_fiber_rejects_points_outside_V():
    with pytest.raises(LeavesVn):
        solve_fiber(ConfigPoint((0j,), "V"))


def test_n2_full_fiber_matches_closed_form(n2_service):
    fiber = n2_service.fiber()
    expected = n2_fiber_roots(EPSILON)
    assert len(fiber) == 4
    for label, p in enumerate(fiber.points):
        assert set_distance(p.nonzero_roots(), expected[label]) < 1e-8


def test_labels_follow_residue_classes(n2_service):
    fiber = n2_service.fiber()
    assert fiber.labels_over(1) == [1, 3]
    assert fiber.labels_over(2) == [0, 2]
    assert [fiber.strand_of(label) for label in range(4)] == [1, 0, 1, 0]


def test_locate_finds_each_label(n2_service):
    fiber = n2_service.fiber()
    for label, p in enumerate(fiber.points):
        assert fiber.locate(p.critical_points) == label
    with pytest.raises(KeyError):
        fiber.locate((10 + 10j,))


def test_fiber_json_keeps_labels(n2_service):
    fiber = n2_service.fiber()
    again = LabeledFiber.from_json(fiber.to_json())
    assert again.provenance == fiber.provenance
    assert again.base_hash == fiber.base_hash


def test_match_to_reference_recovers_relabeling(n2_service):
    fiber = n2_service.fiber()
    ref = [p.nonzero_roots() for p in fiber.points]
    ref[0], ref[2] = ref[2], ref[0]
    relabel, deviation = match_to_reference(fiber, ref)
    assert relabel.images == (2, 1, 0, 3)
    assert deviation < 1e-12


def test_match_to_reference_refuses_cross_class(n2_service):
    fiber = n2_service.fiber()
    ref = [p.nonzero_roots() for p in fiber.points]
    ref[0], ref[1] = ref[1], ref[0]
    with pytest.raises(NoConsistentMatching):
        match_to_reference(fiber, ref)


def test_difference_points_and_genericity():
    xs = difference_points((0j, 1 + 1j, 2))
    assert xs[0].points == (1 + 1j, 2)
    assert xs[1].points == (-1 - 1j, 1 - 1j)
    with pytest.raises(NonGenericBase):
        check_generic((0j, 1j, 2))


def test_base_hash_ignores_signed_zero():
    assert base_hash((complex(0.0, -0.0), 1 + 0j)) == base_hash((0j, 1 + 0j))
    assert base_hash((0j, 1 + 0j)) != base_hash((0j, 1 + 1e-6j))


def test_negation_partners_n2():
    assert negation_partners(n2_fiber_roots(EPSILON)).holds
    report = negation_partners([(1 + 0j,), (2 + 0j,)])
    assert not report.holds
    assert report.checked == 2


def test_root_of_unity_orbit(n2_service):
    p = n2_service.fiber().points[0]
    orbit = root_of_unity_orbit(p)
    assert len(orbit) == 2
    assert set_distance(orbit[1].nonzero_roots(), [-z for z in p.nonzero_roots()]) < 1e-10


@pytest.mark.slow
def test_n3_full_fiber_matches_published(n3_service):
    fiber = n3_service.fiber()
    ref = load_reference(3)
    assert len(fiber) == 27
    worst = max(set_distance(p.nonzero_roots(), r) for p, r in zip(fiber.points, ref.fiber))
    assert worst <= 1e-4
    report = negation_partners([p.nonzero_roots() for p in fiber.points])
    assert report.checked == 54

import cmath
import math

import pytest

from lib.config import RunConfig
from lib.dynamics import (
    count_zeros,
    export_plot,
    forward_orbit,
    modulus_range,
    orbit_summary,
    preimage_tree,
    rotation_defect,
)
from lib.errors import EnumerationBudgetExceeded
from lib.polyalg import ConfigPoint


def test_n2_preimage_moduli_approach_four():
    x = ConfigPoint((cmath.exp(0.8j),), "V")
    tree = preimage_tree(x, 10, RunConfig(n=2))
    assert tree.depth == 10
    assert len(tree.nodes[10]) == 2**10
    low, high = modulus_range(tree)[10]
    assert abs(low - 4) < 0.01
    assert abs(high - 4) < 0.01
    assert modulus_range(tree)[1] == pytest.approx((2.0, 2.0))


def test_preimage_tree_budget():
    with pytest.raises(EnumerationBudgetExceeded):
        preimage_tree(ConfigPoint((1 + 0j, 2 + 0j), "V"), 10, RunConfig(n=3))


def test_n2_preimages_are_symmetric_under_negation():
    tree = preimage_tree(ConfigPoint((1j,), "V"), 3, RunConfig(n=2))
    for j in range(1, 4):
        assert rotation_defect(tree.level_points(j), math.pi) < 1e-8
    assert tree.to_json()["complete"]


def test_forward_orbit_tracks_scale():
    orbit = forward_orbit((1 + 0j,), 3)
    assert orbit.iterates[1][0] == pytest.approx(-1)
    assert orbit.log_scales[1] == pytest.approx(math.log(0.25))
    assert orbit.true_iterate(1)[0] == pytest.approx(-0.25)
    assert orbit.zero_counts == [0, 0, 0, 0]
    assert orbit.limit == 0


def test_forward_orbit_modes_differ_by_scale_for_n2():
    a = forward_orbit((0.3 + 0.9j,), 2, mode="roots")
    b = forward_orbit((0.3 + 0.9j,), 2, mode="critical_points")
    assert a.iterates[1][0] == pytest.approx(b.iterates[1][0])
    assert a.log_scales[1] - b.log_scales[1] == pytest.approx(-math.log(4))


def test_symmetric_n3_start_stays_in_V3():
    orbit = forward_orbit((1 + 0j, -1 + 0j), 8)
    assert all(orbit.in_Vn)
    assert orbit.zero_counts == [0] * 9


def test_repeated_entry_produces_persistent_zero():
    orbit = forward_orbit((1 + 0j, 1 + 0j), 4)
    assert orbit.zero_counts[0] == 0
    assert all(count >= 1 for count in orbit.zero_counts[1:])
    assert all(count <= 1 for count in orbit.zero_counts)


def test_count_zeros():
    assert count_zeros([1, 1e-9, 0.5], 1e-7) == 1
    assert count_zeros([0j, 0j], 1e-7) == 2
    assert count_zeros([], 1e-7) == 0
    # relative to the largest modulus, not absolute
    assert count_zeros([1000, 1e-5], 1e-7) == 1
    assert count_zeros([1e-9, 2e-9], 1e-7) == 0


def test_orbit_summary_reports_leaving_Vn():
    orbit = forward_orbit((1 + 0j, 1 + 0j), 1)
    summary = orbit_summary(orbit)
    assert summary["left_Vn_at"] == 0
    assert summary["steps"] == 1


def test_export_csv(tmp_path):
    out = export_plot([(1, 1 + 2j), (2, -0.5j)], "csv", tmp_path / "tree.csv")
    lines = out.read_text().splitlines()
    assert lines[0] == "depth,re,im"
    assert lines[1] == "1,1.0,2.0"
    assert len(lines) == 3


def test_export_svg_is_deterministic(tmp_path):
    points = [(1, 1 + 2j), (2, -0.5j), (3, 0.25 + 0.25j)]
    a = export_plot(points, "svg", tmp_path / "a.svg", title="tree")
    b = export_plot(points, "svg", tmp_path / "b.svg", title="tree")
    assert a.read_bytes() == b.read_bytes()
    with pytest.raises(ValueError):
        export_plot(points, "png", tmp_path / "c.png")

import cmath
import math

import numpy as np
import pytest

from lib.action import generator_lifts
from lib.braids import BraidWord, braids_equal
from lib.errors import DegenerateProjection, EndpointUnmatched, LeavesVn, NonGenericBase
from lib.lift import (
    CONSTANT,
    DECREASING,
    FAILS,
    INCREASING,
    SampledPath,
    braid_of_C_path,
    check_argument_monotone,
    concatenate,
    end_strand,
    generator_loop,
    lift_path,
    project_to_V,
    read_braid,
    word_loop,
)

BASE = (0j, 1 + 0j, 2.5 + 0j)


def circle(samples=64, radius=1.0, turns=1.0):
    t = np.linspace(0.0, 1.0, samples + 1)
    return SampledPath.from_array("V", t, (radius * np.exp(2j * math.pi * turns * t))[:, None])


def test_sampled_path_validation():
    with pytest.raises(ValueError):
        SampledPath("V", (0.0,), ((1 + 0j,),))
    with pytest.raises(ValueError):
        SampledPath("V", (0.0, 0.7, 0.5, 1.0), ((1j,),) * 4)


def test_at_interpolates_linearly():
    path = SampledPath.from_array("V", [0.0, 1.0], np.array([[1 + 0j], [3 + 2j]]))
    assert path.at(0.25)[0] == pytest.approx(1.5 + 0.5j)
    assert path.at(2.0)[0] == 3 + 2j


def test_reversed_and_closed():
    path = circle()
    assert path.closed
    back = path.reversed()
    assert back.start == path.end
    assert back.at(0.25)[0] == pytest.approx(path.at(0.75)[0])


def test_concatenate_reorders_to_continue():
    ts = [0.0, 1.0]
    a = SampledPath.from_array("V", ts, np.array([[1, 2], [3, 4]], dtype=complex))
    b = SampledPath.from_array("V", ts, np.array([[4, 3], [5, 6]], dtype=complex))
    joined = concatenate([a, b])
    assert joined.ts == (0.0, 0.5, 1.0)
    assert joined.end == (6 + 0j, 5 + 0j)
    with pytest.raises(ValueError):
        concatenate([a, a])


def test_generator_loop_swaps_neighbours():
    loop = generator_loop(3, 1, BASE)
    assert loop.end[0] == pytest.approx(1)
    assert loop.end[1] == pytest.approx(0)
    assert loop.end[2] == BASE[2]
    assert end_strand(loop, 0, BASE) == 1


def test_generator_loop_rejects_strand_in_the_way():
    with pytest.raises(NonGenericBase):
        generator_loop(3, 1, (0j, 1 + 3j, 1.5 + 0j))


@pytest.mark.parametrize("text", ["s1", "s1^-1", "s2", "s1 s2^-1", "s2 s1 s1 s2^-1"])
def test_word_loop_reads_back_its_word(text):
    w = BraidWord.parse(text, 3)
    assert braid_of_C_path(word_loop(w, BASE, 40)) == w


def test_crossing_sign_flips_letters():
    w = BraidWord.parse("s1 s2", 3)
    flipped = braid_of_C_path(word_loop(w, BASE, 40), crossing_sign=-1)
    assert flipped == BraidWord.parse("s1^-1 s2^-1", 3)


def test_read_braid_needs_distinct_real_parts():
    positions = np.array([[0j, 1j], [1 + 0j, 2 + 0j]])
    with pytest.raises(DegenerateProjection):
        read_braid(positions)


def test_project_to_V():
    loop = generator_loop(3, 1, BASE)
    v = project_to_V(loop, 0)
    assert v.start == (1 + 0j, 2.5 + 0j)
    collide = SampledPath.from_array("C", [0.0, 1.0], np.array([[0, 1], [1, 1]], dtype=complex))
    with pytest.raises(LeavesVn):
        project_to_V(collide, 0)


def test_argument_monotone_verdicts():
    assert check_argument_monotone(circle()) == (INCREASING,)
    assert check_argument_monotone(circle().reversed()) == (DECREASING,)
    still = SampledPath.from_array("V", [0.0, 0.5, 1.0], np.full((3, 1), 2 + 1j))
    assert check_argument_monotone(still) == (CONSTANT,)
    t = np.linspace(0.0, 1.0, 41)
    wobble = np.exp(1j * np.sin(2 * math.pi * t))[:, None]
    assert check_argument_monotone(SampledPath.from_array("V", t, wobble)) == (FAILS,)


def test_n2_generator_lifts(n2_service):
    fiber = n2_service.fiber()
    lifts = generator_lifts(2, 1, fiber, n2_service.cfg)
    assert [pp.end_label for pp in lifts] == [1, 2, 3, 0]
    expected = ["e", "s1", "e", "s1"]
    for pp, text in zip(lifts, expected):
        assert braids_equal(pp.braid_roots, BraidWord.parse(text, 2))
        assert pp.ts[0] == 0.0 and pp.ts[-1] == 1.0


def test_lift_refuses_wrong_start(n2_service):
    fiber = n2_service.fiber()
    path = SampledPath.from_array("V", [0.0, 1.0], np.array([[5 + 0j], [5 + 0j]]))
    with pytest.raises(EndpointUnmatched):
        lift_path(path, 0, fiber)


def test_lift_of_constant_path_stays_put(n2_service):
    fiber = n2_service.fiber()
    x = fiber.points[1].critical_values
    path = SampledPath.from_array("V", [0.0, 1.0], np.array([x, x]))
    pp = lift_path(path, 1, fiber, n2_service.cfg)
    assert pp.end_label == 1
    assert pp.braid_roots.letters == ()


def test_polypath_csv(tmp_path, n2_service):
    fiber = n2_service.fiber()
    x = cmath.exp(1j * 0.8) * -1
    loop = circle(samples=200, radius=1.0)
    vpath = SampledPath.from_array("V", loop.ts, loop.array() * x)
    pp = lift_path(vpath, 1, fiber, n2_service.cfg)
    out = tmp_path / "lift.csv"
    pp.write_csv(out)
    header = out.read_text().splitlines()[0]
    assert header == "t,re0,im0,re1,im1"
    assert pp.summary()["start_label"] == 1

import pytest

from lib.braids import BraidWord, braids_equal, exponent_sum
from lib.errors import BadIndex
from lib.lift import CONSTANT, DECREASING, FAILS, INCREASING
from lib.realalg import (
    LOOP_POWERS,
    TheoremWord,
    beta_loop,
    beta_word,
    certify_lift_loop,
    certify_theorem_word,
    check_theorem_condition,
    expand_theorem_word,
    homogeneity_obstruction,
    segments_compatible,
    table_lift,
    theorem_path,
    w_word,
)
from lib.verify import obstruction_braid


def test_expand_single_words():
    assert expand_theorem_word(TheoremWord(1, (1,))) == BraidWord.parse("s2", 3)
    assert expand_theorem_word(TheoremWord(-1, (2,))) == BraidWord.parse("s1^-2", 3)


def test_obstruction_braid_is_a_theorem_word_squared():
    tw = TheoremWord.parse(-1, "5 5 1 5 5 1 2")
    assert braids_equal(expand_theorem_word(tw).power(2), obstruction_braid())
    assert exponent_sum(obstruction_braid()) == -32


@pytest.mark.parametrize(
    "indices,holds",
    [((3,), True), ((1, 2), True), ((4, 5), True), ((1, 4), False), ((5,), False), ((2, 5, 2), False)],
)
def test_theorem_condition(indices, holds):
    report = check_theorem_condition(TheoremWord(1, indices))
    assert report.holds is holds
    assert report.explanation


def test_bad_indices():
    with pytest.raises(BadIndex):
        TheoremWord(1, (6,))
    with pytest.raises(BadIndex):
        TheoremWord(2, (1,))
    with pytest.raises(BadIndex):
        TheoremWord.parse(1, "1 x")
    with pytest.raises(BadIndex):
        w_word(0)
    with pytest.raises(BadIndex):
        beta_word(7)


def test_obstruction_numbers():
    report = homogeneity_obstruction(obstruction_braid())
    assert report.components == 3
    assert sorted(report.linking.values()) == [-10, -8, 2]
    assert report.conway_degree == 30
    assert report.conway_degree < report.bound
    assert report.bound == 38
    assert report.violated
    assert not report.homogeneous_word
    assert report.to_json()["inequality_holds"] is False


def test_obstruction_degenerate_and_trefoil():
    split = homogeneity_obstruction(BraidWord.identity(2))
    assert split.conway_degree is None
    assert not split.violated
    assert split.to_json()["inequality_holds"] is None
    trefoil = homogeneity_obstruction(BraidWord.parse("s1^3", 2))
    assert trefoil.bound == 0
    assert trefoil.conway_degree == 2
    assert not trefoil.violated


def test_beta_loop_argument_verdicts():
    assert beta_loop(1).verdicts == (INCREASING, CONSTANT)
    assert beta_loop(5).verdicts == (CONSTANT, INCREASING)
    assert beta_loop(3).verdicts == (INCREASING, INCREASING)
    assert FAILS not in beta_loop(2).verdicts
    assert FAILS not in beta_loop(4).verdicts


def test_beta_loop_power():
    bl = beta_loop(2)
    assert bl.power == LOOP_POWERS[2]
    assert bl.power_path().closed
    assert bl.to_json()["word"] == "s2^-1 s1^2 s2"


@pytest.mark.parametrize("index", [1, 2, 3, 4, 5])
def test_table_lift_matches_theorem_words(n3_tables, index):
    lifted = table_lift(index, n3_tables)
    assert lifted.power == LOOP_POWERS[index]
    assert braids_equal(lifted.braid, w_word(index))


def test_segments_compatible():
    ok, problems = segments_compatible([(INCREASING, CONSTANT), (INCREASING, INCREASING)])
    assert ok and not problems
    ok, problems = segments_compatible([(INCREASING, CONSTANT), (DECREASING, CONSTANT)])
    assert not ok
    assert "direction" in problems[0]
    ok, _ = segments_compatible([(FAILS, CONSTANT)])
    assert not ok


def test_theorem_path_has_one_segment_per_loop():
    path, segments = theorem_path(TheoremWord(1, (1, 5)), samples=100)
    assert len(segments) == 2
    assert path.ts[0] == 0.0 and path.ts[-1] == 1.0
    assert segments[0] == (INCREASING, CONSTANT)
    assert segments[1] == (CONSTANT, INCREASING)


@pytest.mark.slow
def test_loop_one_certified_from_first_label(n3_service):
    cert = certify_lift_loop(beta_loop(1), n3_service.fiber(), n3_service.cfg)
    assert cert.closed
    assert cert.certified
    assert cert.matches_expected


@pytest.mark.slow
def test_loop_three_once_is_not_closed(n3_service):
    cert = certify_lift_loop(beta_loop(3, power=1), n3_service.fiber(), n3_service.cfg)
    assert cert.closed is False
    assert not cert.certified
    assert cert.expected is None


@pytest.mark.slow
@pytest.mark.parametrize("index", [1, 2, 3, 4, 5])
def test_loop_powers_lift_to_theorem_words(n3_service, index):
    cert = certify_lift_loop(beta_loop(index), n3_service.fiber(), n3_service.cfg)
    assert cert.subject == {"loop": index, "power": LOOP_POWERS[index]}
    assert cert.closed
    assert cert.certified, cert.reasons
    assert cert.matches_expected
    assert braids_equal(cert.braid, w_word(index))


@pytest.mark.slow
@pytest.mark.parametrize("epsilon,indices", [(1, (1, 2)), (-1, (2, 1))])
def test_theorem_word_certified_by_one_lift(n3_service, epsilon, indices):
    tw = TheoremWord(epsilon, indices)
    cert = certify_theorem_word(tw, n3_service.fiber(), n3_service.cfg)
    assert cert.closed
    assert cert.certified, cert.reasons
    assert cert.matches_expected
    assert len(cert.verdicts) == len(indices)
    assert exponent_sum(cert.braid) == epsilon * sum(exponent_sum(w_word(i)) for i in indices)


@pytest.mark.slow
def test_theorem_word_moving_one_strand_is_refused(n3_service):
    cert = certify_theorem_word(TheoremWord(1, (1, 4)), n3_service.fiber(), n3_service.cfg)
    assert not cert.certified
    assert any("condition fails" in reason for reason in cert.reasons)

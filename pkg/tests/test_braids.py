import pytest

from lib.braids import (
    BraidWord,
    Perm,
    alexander_poly,
    braids_equal,
    burau_reduced,
    closure_components,
    compare_braids,
    exponent_sum,
    free_reduce,
    is_homogeneous,
    linking_numbers,
    perm_rep,
)
from lib.errors import BadWord, DegenerateClosure, StrandMismatch

from .conftest import random_word


def w(text: str, n: int = 3) -> BraidWord:
    return BraidWord.parse(text, n)


def test_perm_then_applies_left_first():
    a = Perm.from_cycles(3, [(0, 1)])
    b = Perm.from_cycles(3, [(1, 2)])
    assert a.then(b)(0) == 2
    assert b.then(a)(0) == 1


def test_perm_parse_and_format():
    p = Perm.parse("(0 1 2 3)", 4)
    assert p.images == (1, 2, 3, 0)
    assert p.format() == "(0 1 2 3)"
    assert Perm.identity(5).format() == "()"


def test_perm_power_and_cycle_length():
    p = Perm.parse("(0 1 2)(3 4)", 5)
    assert p.power(6).is_identity()
    assert p.power(-1) == p.inverse()
    assert p.cycle_length_of(1) == 3
    assert p.cycle_length_of(4) == 2
    assert p.cycle_type() == (3, 2)


def test_reduce_mod_recovers_lower_level():
    level2 = Perm.from_cycles(16, [(0, 1, 6, 7, 8, 9, 14, 15), (2, 3, 4, 5, 10, 11, 12, 13)])
    assert level2.reduce_mod(4) == Perm.parse("(0 1 2 3)", 4)


def test_reduce_mod_rejects_incompatible():
    with pytest.raises(ValueError):
        Perm.from_cycles(4, [(0, 1)]).reduce_mod(2)


def test_parse_compact_form():
    word = w("s1^3 s2^-1")
    assert word.letters == ((1, 1), (1, 1), (1, 1), (2, -1))
    assert word.format() == "s1^3 s2^-1"
    assert w("e").letters == ()


@pytest.mark.parametrize("text", ["s3", "x1", "s1 junk", "s0"])
def test_parse_rejects_bad_words(text):
    with pytest.raises(BadWord):
        w(text)


def test_mixed_strand_counts():
    with pytest.raises(StrandMismatch):
        w("s1", 2) * w("s1", 3)


def test_free_reduce_cancels_adjacent_inverses():
    assert free_reduce(w("s1 s2 s2^-1 s1^-1")).letters == ()
    assert free_reduce(w("s1 s2 s1^-1")).format() == "s1 s2 s1^-1"


def test_braid_relation_holds():
    assert braids_equal(w("s1 s2 s1"), w("s2 s1 s2"))
    assert not braids_equal(w("s1 s2"), w("s2 s1"))


def test_compare_braids_reason():
    verdict = compare_braids(w("s1"), w("s1^-1"))
    assert not verdict.equal
    assert verdict.authoritative


def test_word_times_inverse_is_trivial(rng):
    for _ in range(50):
        word = random_word(rng, 3, 8)
        assert braids_equal(word * word.inverse(), BraidWord.identity(3))
        assert burau_reduced(word * word.inverse()).equals(burau_reduced(BraidWord.identity(3)))


def test_perm_rep_and_exponent_sum():
    assert perm_rep(w("s1")).images == (1, 0, 2)
    assert perm_rep(w("s1 s2")) == perm_rep(w("s1")).then(perm_rep(w("s2")))
    assert exponent_sum(w("s1^3 s2^-5")) == -2


def test_alexander_trefoil():
    poly = alexander_poly(w("s1^3", 2))
    assert poly.coefficients == (1, -1, 1)
    assert poly.breadth == 2


def test_alexander_split_closure_is_degenerate():
    with pytest.raises(DegenerateClosure):
        alexander_poly(BraidWord.identity(2))


def test_linking_numbers_of_torus_links():
    assert linking_numbers(w("s1^2", 2)) == {(0, 1): 1}
    assert linking_numbers(w("s1^-4", 2)) == {(0, 1): -2}
    assert len(closure_components(w("s1 s2"))) == 1


def test_is_homogeneous():
    assert is_homogeneous(w("s1 s2^-1 s1 s2^-3"))
    assert not is_homogeneous(w("s1 s2 s1^-1"))

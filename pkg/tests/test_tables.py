import pytest

from lib.braids import BraidWord, braids_equal
from lib.cache import TableCache
from lib.config import RunConfig
from lib.errors import MissingTable
from lib.reference import load_reference, n2_fiber_roots, published_tables, reference_roots
from lib.tables import TableService


def test_published_reference_shapes():
    ref = load_reference(3)
    assert len(ref.fiber) == 27
    assert all(len(roots) == 2 for roots in ref.fiber)
    tables = ref.generator_tables("critical_points")
    assert set(tables.tables) == {1, 2}
    assert tables.embedding == "critical_points"


def test_missing_reference(tmp_path):
    with pytest.raises(MissingTable):
        load_reference(4, tmp_path)
    with pytest.raises(MissingTable):
        published_tables(2, "coefficients")


def test_reference_roots_only_for_published_bases():
    cfg = RunConfig(n=2)
    assert reference_roots(2, cfg.base_points(), cfg.epsilon) == n2_fiber_roots(cfg.epsilon)
    assert reference_roots(2, (0.5 + 0j, -0.25 + 0j)) is None
    assert reference_roots(3, (0j, 1 + 0j, 2 + 0j)) is None
    assert reference_roots(3, RunConfig(n=3).base_points()) is not None


def test_table_cache_computes_once(tmp_path):
    cache = TableCache(tmp_path)
    calls = []

    def compute():
        calls.append(1)
        return {"value": 7}

    descriptor = {"n": 2, "embedding": "roots"}
    assert cache.get_or_compute(descriptor, compute) == {"value": 7}
    assert cache.get_or_compute(descriptor, compute) == {"value": 7}
    assert len(calls) == 1
    assert cache.path_for(TableCache.key_for(descriptor)).exists()
    assert TableCache.key_for(descriptor) != TableCache.key_for({"n": 3, "embedding": "roots"})


@pytest.mark.parametrize("embedding", ["roots", "critical_points"])
def test_computed_n2_tables_match_published(embedding):
    service = TableService(RunConfig(n=2))
    computed = service.tables(embedding)
    published = published_tables(2, embedding)
    assert computed.source == "computed"
    assert computed.base_hash == published.base_hash
    ours, theirs = computed.generator(1), published.generator(1)
    assert ours.perm == theirs.perm
    assert all(braids_equal(a, b) for a, b in zip(ours.lifted, theirs.lifted))


def test_service_reuses_cached_tables(tmp_path):
    cache = TableCache(tmp_path)
    first = TableService(RunConfig(n=2), cache).tables()
    assert len(list(tmp_path.glob("table-*.json"))) == 1
    second = TableService(RunConfig(n=2), cache).tables()
    assert second.generator(1).perm == first.generator(1).perm
    assert len(list(tmp_path.glob("table-*.json"))) == 1


def test_auto_source_prefers_published():
    service = TableService(RunConfig(n=2))
    assert service.has_reference()
    assert service.tables(source="auto").source == "published"
    other = TableService(RunConfig(n=2, base=(0.5 + 0.1j, -0.3 + 0.2j)))
    assert not other.has_reference()


def test_evaluate_memoizes_words():
    tables = published_tables(2)
    word = BraidWord.parse("s1^3", 2)
    assert tables.evaluate(word) is tables.evaluate(word)

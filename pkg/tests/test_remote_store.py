import pytest

from src.filter.level_base import GhostHandle, Level
from src.filter.remote_store import AccessCounters, BaselineKey, OpClass, RemoteStore
from src.utils.errors import ContractError, CorruptionError
from src.utils.wordops import Bits


def triple(quotient: int, remainder: int = 0, seed: int = 1) -> BaselineKey:
  return BaselineKey(seed, Level.PRIMARY, quotient, remainder)


def handle(quotient: int) -> GhostHandle:
  return GhostHandle(Level.PRIMARY, quotient, Bits.parse("1"))


@pytest.fixture
def remote():
  store = RemoteStore()
  with store.counters.attribute(OpClass.INSERT):
    for key, quotient in [(10, 1), (30, 2), (20, 1)]:
      store.remote_insert(key, triple(quotient))
  return store


def test_access_outside_attribution_is_rejected():
  store = RemoteStore()
  with pytest.raises(ContractError):
    store.remote_insert(1, triple(0))
  with pytest.raises(ContractError):
    store.next_keys_above(0, 1)


def test_counts_are_attributed_to_innermost_class(remote):
  counters = remote.counters
  assert counters.classes[OpClass.INSERT].dictionary_ops == 3
  with counters.attribute(OpClass.DELETE):
    with counters.attribute(OpClass.ADAPT_RECLAIM):
      remote.next_keys_above(0, 2)
    remote.remote_delete(20, handle(1))
  assert counters.classes[OpClass.ADAPT_RECLAIM].remote_lookups == 1
  deletes = counters.classes[OpClass.DELETE]
  assert (deletes.dictionary_ops, deletes.remote_updates, deletes.remote_lookups) == (1, 1, 0)


def test_insert_keeps_order_and_rejects_duplicates(remote):
  assert remote.live_keys == [10, 20, 30]
  assert remote.max_key() == 30
  with remote.counters.attribute(OpClass.INSERT):
    with pytest.raises(ContractError):
      remote.remote_insert(20, triple(1))


def test_delete_leaves_ghost_in_order(remote):
  with remote.counters.attribute(OpClass.DELETE):
    remote.remote_delete(30, handle(2))
    remote.remote_delete(10, None)
    with pytest.raises(ContractError):
      remote.remote_delete(10, None)
  assert remote.live_keys == [20]
  assert remote.ghost_keys == [30]
  assert remote.is_ghost(30) and not remote.is_live(30)
  assert remote.max_key() == 30
  assert remote.oldest_ghost() == 30
  assert remote.ghost_handle(30) == handle(2)


def test_next_keys_above_merges_live_and_ghosts(remote):
  counters = remote.counters
  with counters.attribute(OpClass.DELETE):
    remote.remote_delete(20, handle(1))
  with counters.attribute(OpClass.ADAPT_RECLAIM):
    assert remote.next_keys_above(-1, 3) == [(10, True), (20, False), (30, True)]
    assert remote.next_keys_above(10, 1) == [(20, False)]
    assert remote.next_keys_above(30, 3) == []


def test_forget_ghost(remote):
  with remote.counters.attribute(OpClass.DELETE):
    remote.remote_delete(20, handle(1))
  with remote.counters.attribute(OpClass.ADAPT_RECLAIM):
    assert remote.forget_ghost(20) == handle(1)
    with pytest.raises(ContractError):
      remote.forget_ghost(20)
  assert remote.ghost_count == 0 and remote.ghost_keys == []


def test_reinsert_revives_own_ghost_as_one_dictionary_write(remote):
  with remote.counters.attribute(OpClass.DELETE):
    remote.remote_delete(20, handle(1))
  with remote.counters.attribute(OpClass.INSERT):
    remote.remote_insert(20, triple(5))
  inserts = remote.counters.classes[OpClass.INSERT]
  assert (inserts.dictionary_ops, inserts.remote_updates) == (4, 0)
  assert remote.is_live(20) and not remote.is_ghost(20)
  assert remote.ghost_keys == [] and remote.live_keys == [10, 20, 30]
  assert remote.key_baseline[20] == triple(5)


def test_rev_lookup_returns_unique_passing_key(remote):
  prints = {10: Bits.parse("0101"), 20: None}
  with remote.counters.attribute(OpClass.QUERY_FALSE_POSITIVE) as tally:
    assert remote.rev_lookup([triple(1)], prints.get, full_len=32) == 10
    assert remote.rev_lookup([triple(7)], prints.get, full_len=32) is None
  assert tally.remote_lookups == 2


def test_rev_lookup_detects_double_collision(remote):
  prints = {10: Bits.parse("01"), 20: Bits.parse("0101")}
  with remote.counters.attribute(OpClass.QUERY_FALSE_POSITIVE):
    with pytest.raises(CorruptionError):
      remote.rev_lookup([triple(1)], prints.get, full_len=32)


def test_rev_lookup_allows_full_length_tie(remote):
  prints = {10: Bits(3, 4), 20: Bits(3, 4)}
  with remote.counters.attribute(OpClass.QUERY_FALSE_POSITIVE):
    assert remote.rev_lookup([triple(1)], prints.get, full_len=4) == 10


def test_rekey_moves_index_entry(remote):
  with remote.counters.attribute(OpClass.ADAPT_RECLAIM):
    remote.rekey(10, triple(1), triple(5, seed=2))
    with pytest.raises(ContractError):
      remote.rekey(10, triple(1), triple(6))
  assert remote.rev_index[triple(5, seed=2)] == {10}
  assert remote.rev_index[triple(1)] == {20}


def test_mirror_check(remote):
  table = {10: triple(1), 20: triple(1), 30: triple(2)}
  assert remote.mirror_ok(table.get)
  table[30] = triple(3)
  assert not remote.mirror_ok(table.get)


def test_counter_report_and_restore():
  counters = AccessCounters()
  with counters.attribute(OpClass.INSERT) as tally:
    tally.dictionary_ops += 2
  counters.add_local(OpClass.INSERT, 3, 1)
  report = counters.report()
  assert report.classes["insert"].dictionary_ops == 2
  assert report.classes["insert"].local_reads == 3
  restored = AccessCounters()
  restored.restore(counters.snapshot())
  assert restored.snapshot() == counters.snapshot()

import pytest

from src.harness.verify import wordops_suite
from src.model.RunConfigModel import RunConfig
from src.utils import wordops
from src.utils.errors import WordOpsOverflowError, WordOpsRangeError
from src.utils.wordops import Bits, NaiveStrings


def store_of(*texts, capacity=wordops.BUFFER_BITS):
  return wordops.from_strings([Bits.parse(t) for t in texts], capacity)


def texts(store):
  return [str(s) for s in store.strings()]


def test_layout_invariants():
  store = store_of("01", "", "110")
  assert store.count == 3
  assert bin(store.boundaries).count("1") == 3
  # data 是直接拼接，边界单独存放，第一个标记在位置 0
  assert store.data == 0b01110
  assert store.length == 5
  assert store.boundary_bits == 8
  assert store.boundaries == 0b10011000
  assert store.boundaries >> (store.boundary_bits - 1) == 1
  assert texts(store) == ["01", "", "110"]


def test_prefix_match():
  store = store_of("01", "0110", "10")
  bitmap = wordops.prefix_match(store, Bits.parse("0110111"), 1, 3)
  assert wordops.bitmap_indices(bitmap) == [1, 2]


def test_prefix_match_with_empty_query():
  store = store_of("", "1", "")
  assert wordops.bitmap_indices(wordops.prefix_match(store, Bits.parse(""), 1, 3)) == [1, 3]


def test_prefix_match_subrange():
  store = store_of("01", "0110", "0")
  assert wordops.bitmap_indices(wordops.prefix_match(store, Bits.parse("0110"), 2, 3)) == [2, 3]


def test_prefix_lengths():
  store = store_of("0110", "0111", "1")
  assert wordops.prefix_lengths(store, Bits.parse("0111"), 1, 3) == [3, 4, 0]


@pytest.mark.parametrize("j, k", [(0, 1), (2, 1), (1, 4)])
def test_range_errors(j, k):
  store = store_of("0", "1", "01")
  with pytest.raises(WordOpsRangeError):
    wordops.prefix_match(store, Bits.parse("0"), j, k)
  with pytest.raises(IndexError):
    wordops.prefix_lengths(store, Bits.parse("0"), j, k)


def test_insert_delete():
  store = wordops.insert_string(store_of("0", "10"), Bits.parse("11"), 2)
  assert texts(store) == ["0", "11", "10"]
  assert texts(wordops.delete_string(store, 1)) == ["11", "10"]


def test_insert_at_end_and_into_empty():
  assert texts(wordops.insert_string(store_of("0"), Bits.parse("1"), 2)) == ["0", "1"]
  assert texts(wordops.insert_string(wordops.PackedStrings(), Bits.parse(""), 1)) == [""]


def test_splice():
  assert texts(wordops.splice(store_of("0110"), 1, 2)) == ["10"]
  assert texts(wordops.splice(store_of("0"), 1, 5)) == [""]
  assert texts(wordops.splice(store_of("1", "0110", "1"), 2, 1)) == ["1", "110", "1"]


def test_concat_adjacent():
  assert texts(wordops.concat_adjacent(store_of("01", "10", "1"), 1)) == ["0110", "1"]
  with pytest.raises(WordOpsRangeError):
    wordops.concat_adjacent(store_of("01"), 1)


def test_parallel_drop_prefix():
  out, nonempty = wordops.parallel_drop_prefix(store_of("01", "1", "011"), 1)
  assert texts(out) == ["1", "", "11"]
  assert wordops.bitmap_indices(nonempty) == [1, 3]


def test_parallel_drop_prefix_zero_is_identity():
  store = store_of("01", "", "011")
  out, nonempty = wordops.parallel_drop_prefix(store, 0)
  assert out == store
  assert wordops.bitmap_indices(nonempty) == [1, 3]


def test_insert_overflow_is_reported():
  store = store_of("1010101", capacity=16)
  with pytest.raises(WordOpsOverflowError):
    wordops.insert_string(store, Bits.parse("1111000011"), 1)
  # 恰好填满
  full = wordops.insert_string(store, Bits.parse("111100001"), 1)
  assert full.length == 16
  assert texts(full) == ["111100001", "1010101"]


def test_from_strings_overflow():
  with pytest.raises(WordOpsOverflowError):
    wordops.from_strings([Bits(0, 200), Bits(0, 60)])


def test_delete_inverts_insert():
  store = store_of("0", "", "1101", "10")
  for rank in range(1, store.count + 2):
    assert wordops.delete_string(wordops.insert_string(store, Bits.parse("011"), rank), rank) == store


def test_concat_inverts_boundary_insertion():
  store = store_of("1", "01", "0")
  split = wordops.insert_string(store_of("1", "0", "0"), Bits.parse("1"), 3)
  assert wordops.concat_adjacent(split, 2) == store


def test_naive_oracle_matches_examples():
  naive = NaiveStrings(("01", "0110", "10"))
  assert wordops.bitmap_indices(naive.prefix_match("0110111", 1, 3)) == [1, 2]
  assert naive.insert_string("11", 2).items == ("01", "11", "0110", "10")
  dropped, nonempty = NaiveStrings(("01", "1", "011")).parallel_drop_prefix(1)
  assert dropped.items == ("1", "", "11")
  assert wordops.bitmap_indices(nonempty) == [1, 3]


def test_randomized_equivalence_with_naive_oracle():
  result = wordops_suite(RunConfig(command="verify", ops=3000, seeds=[4]))
  assert result.passed, result.failures
  assert result.checked == 3000


@pytest.mark.slow
def test_randomized_equivalence_at_scale():
  result = wordops_suite(RunConfig(command="verify", ops=6 * 10 ** 5, seeds=[1]))
  assert result.passed, result.failures


def test_capacity_counts_string_bits_only():
  # 64 个 4 位串正好 256 位；空串不占容量
  strings = [Bits(i % 16, 4) for i in range(64)]
  store = wordops.from_strings(strings)
  assert store.length == wordops.BUFFER_BITS
  assert store.count == 64
  store = wordops.insert_string(store, Bits.parse(""), 1)
  assert store.count == 65 and store.length == wordops.BUFFER_BITS
  with pytest.raises(WordOpsOverflowError):
    wordops.insert_string(store, Bits.parse("1"), 1)
  assert store.strings()[1:] == strings


def test_naive_oracle_capacity_rule():
  naive = NaiveStrings(("1" * 250,), capacity=256)
  assert naive.insert_string("", 1).items == ("", "1" * 250)
  assert naive.insert_string("0" * 6, 2).items[1] == "0" * 6
  with pytest.raises(WordOpsOverflowError):
    naive.insert_string("0" * 7, 2)


def test_concat_and_splice_keep_data_contiguous():
  store = store_of("01", "", "110")
  joined = wordops.concat_adjacent(store, 1)
  assert joined.data == store.data and joined.length == store.length
  assert texts(joined) == ["01", "110"]
  cut = wordops.splice(store, 3, 2)
  assert cut.data == 0b010 and texts(cut) == ["01", "", "0"]

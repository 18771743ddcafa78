from typing import Dict, List, Tuple

import pytest

from src.filter.broom_filter import BroomFilter
from src.filter.params_hash import PhaseState, derive_params, hash_bits
from src.harness.keys import KeyStream


@pytest.fixture
def small_params():
  # q=8, r=4: small-remainder
  return derive_params(256, eps_log2=4)


@pytest.fixture
def large_params():
  # q=8, r=8: large-remainder
  return derive_params(256, eps_log2=8)


@pytest.fixture
def make_filter():
  def factory(n: int = 256, eps_log2: int = 4, seed: int = 7, **kwargs) -> BroomFilter:
    return BroomFilter(n, eps_log2=eps_log2, seed=seed, **kwargs)

  return factory


@pytest.fixture
def keys():
  return KeyStream(11)


def group_keys(params, seed: int, slot_of, want: int, limit: int = 200000) -> List[int]:
  """找出 want 个 slot_of(quotient, remainder) 相同的 key"""
  phase = PhaseState.initial(seed)
  groups: Dict[Tuple, List[int]] = {}
  for x in range(limit):
    h = hash_bits(params, phase, x)
    baseline = h.prefix(params.q + params.r).value
    label = slot_of(baseline >> params.r, baseline & ((1 << params.r) - 1))
    bucket = groups.setdefault(label, [])
    bucket.append(x)
    if len(bucket) == want:
      return bucket
  raise AssertionError("no group found")


@pytest.fixture
def find_keys():
  return group_keys

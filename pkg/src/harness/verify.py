"""
verify 命令的校验 suite。每个 suite 接收 RunConfig，返回 SuiteResult，不抛出业务异常。
"""
from typing import Callable, Dict, List, Optional

import numpy as np
from loguru import logger

from src.filter.broom_filter import BroomFilter
from src.filter.params_hash import block_hash, derive_seed
from src.harness.game import adaptivity_breaches, run_game
from src.harness.keys import KeyStream
from src.harness.oracle import Oracle
from src.harness.workload import random_workload
from src.model.RunConfigModel import RunConfig
from src.model.SuiteModel import SuiteResult
from src.utils import wordops
from src.utils.errors import BroomError, WordOpsError
from src.utils.wordops import Bits, NaiveStrings

Suite = Callable[[RunConfig], SuiteResult]

# invariant1 在每次操作后做全量检查，只用小容量
INVARIANT1_MAX_N = 256
PROPERTY1_MAX_N = 1024
EQUIVALENCE_SEEDS = 5
# 小容量下 group 数太少，预算检查至少用 1024
ADAPTIVITY_MIN_N = 1024
ADAPTIVITY_ROUNDS = 6
ADAPTIVITY_ADVERSARIES = ("oblivious", "repeat-fp", "delete-reinsert")


def _workload_rng(seed: int, salt: int) -> np.random.Generator:
  return np.random.default_rng([seed, salt])


def paired_hasher(element: int, seed: int, block: int, salt: int) -> int:
  """2k 与 2k+1 的 hash 完全相同，用来制造 full-hash tie"""
  return block_hash(element & ~1, seed, block, salt)


def _check_tie_fixture(result: SuiteResult, config: RunConfig) -> None:
  bf = BroomFilter(64, eps_log2=4, seed=config.seed, build="reference", hasher=paired_hasher)
  oracle = Oracle(bf, 64)
  for k in range(1, 9):
    oracle.insert(2 * k)
    oracle.lookup(2 * k + 1)
    oracle.insert(2 * k + 1)
  result.checked += 1
  if bf.counters.hash_ties == 0:
    result.fail("forced-tie fixture produced no full-hash tie")
  for a, b in bf.local.prefix_violations():
    result.fail(f"forced-tie fixture: {a} is a prefix of {b}")
  for key in sorted(oracle.members):
    result.checked += 1
    if not bf.lookup(key, True):
      result.fail(f"forced-tie fixture: false negative on {key}")
  result.detail["hash_ties"] = bf.counters.hash_ties


def invariant1_suite(config: RunConfig) -> SuiteResult:
  result = SuiteResult(name="invariant1")
  n = min(config.n, INVARIANT1_MAX_N)
  bf = BroomFilter(n, eps_log2=config.eps_log2, seed=config.seed, build="reference")
  oracle = Oracle(bf, n)

  def check(op: str, key: int) -> None:
    result.checked += 1
    for a, b in bf.local.prefix_violations():
      result.fail(f"after {op} {key}: {a} is a prefix of {b}")

  random_workload(oracle, KeyStream(config.seed), _workload_rng(config.seed, 1), config.ops, check)
  _check_tie_fixture(result, config)
  return result


def no_false_negatives_suite(config: RunConfig) -> SuiteResult:
  result = SuiteResult(name="no-false-negatives")
  bf = BroomFilter(config.n, eps_log2=config.eps_log2, seed=config.seed, build=config.build)
  oracle = Oracle(bf, config.n)
  sweep = max(1, config.n)

  def check(op: str, key: int) -> None:
    result.checked += 1
    if result.checked % sweep:
      return
    for member in sorted(oracle.members):
      if not bf.lookup(member, True):
        result.fail(f"member {member} looked up Absent")

  try:
    random_workload(oracle, KeyStream(config.seed), _workload_rng(config.seed, 2), config.ops, check)
  except BroomError as e:
    result.fail(f"{type(e).__name__}: {e}")
  for member in sorted(oracle.members):
    result.checked += 1
    if not bf.lookup(member, True):
      result.fail(f"member {member} looked up Absent at the end")
  return result


def property1_suite(config: RunConfig) -> SuiteResult:
  result = SuiteResult(name="property1")
  n = min(config.n, PROPERTY1_MAX_N)
  seeds = [config.seed + i for i in range(3)]
  for seed in seeds:
    transcript = run_game("broom", "delete-reinsert", n, config.eps_log2, seed, rounds=5,
                          build=config.build, iterations=max(1, config.ops // 50))
    result.checked += 1
    if transcript.repeat_collisions:
      result.fail(f"seed {seed}: {transcript.repeat_collisions} repeated collisions under delete-reinsert")

  bf = BroomFilter(n, eps_log2=config.eps_log2, seed=config.seed, build=config.build)
  random_workload(Oracle(bf, n), KeyStream(config.seed), _workload_rng(config.seed, 3), config.ops)
  result.checked += 1
  if bf.counters.repeat_collisions:
    result.fail(f"random workload: {bf.counters.repeat_collisions} repeated collisions")
  result.detail["fixes"] = len(bf.fixes)
  return result


def equivalence_suite(config: RunConfig) -> SuiteResult:
  result = SuiteResult(name="equivalence")
  for i in range(EQUIVALENCE_SEEDS):
    seed = derive_seed(config.seed, i) & 0xFFFFFFFF
    traces: Dict[str, List] = {}
    filters: Dict[str, BroomFilter] = {}
    for build in ("reference", "packed"):
      bf = BroomFilter(config.n, eps_log2=config.eps_log2, seed=seed, build=build)
      oracle = Oracle(bf, config.n)
      trace: List = []
      random_workload(oracle, KeyStream(seed), _workload_rng(seed, 4), config.ops,
                      lambda op, key, o=oracle, t=trace: t.append((op, key, o.stats.present, o.stats.false_positives)))
      traces[build], filters[build] = trace, bf
    ref, packed = filters["reference"], filters["packed"]
    result.checked += 1
    if traces["reference"] != traces["packed"]:
      first = next(i for i, (a, b) in enumerate(zip(traces["reference"], traces["packed"])) if a != b)
      result.fail(f"seed {seed}: lookup results diverge at op {first}")
    if ref.counter_report() != packed.counter_report():
      result.fail(f"seed {seed}: access counters differ")
    ref_fps = {k: sorted(map(str, v)) for k, v in ref.local.live_fingerprints().items()}
    packed_fps = {k: sorted(map(str, v)) for k, v in packed.local.live_fingerprints().items()}
    if ref_fps != packed_fps:
      result.fail(f"seed {seed}: stored fingerprints differ")
    if ref.local.ghost_count != packed.local.ghost_count:
      result.fail(f"seed {seed}: ghost counts differ")
  return result


def adaptivity_budget_suite(config: RunConfig) -> SuiteResult:
  result = SuiteResult(name="adaptivity-budget")
  n = max(config.n, ADAPTIVITY_MIN_N)
  log_n = n.bit_length() - 1
  for adversary in ADAPTIVITY_ADVERSARIES:
    transcript = run_game("broom", adversary, n, config.eps_log2, config.seed, rounds=ADAPTIVITY_ROUNDS,
                          build=config.build, iterations=max(1, config.ops // 50))
    rounds = transcript.rounds
    result.checked += len(rounds)
    for message in adaptivity_breaches(transcript):
      result.fail(f"{adversary}: {message}")
    spilled = max(r.space.groups_spilled for r in rounds)
    if spilled:
      logger.warning(f"{adversary}: {spilled} groups spilled at n={n}")
    result.detail[adversary] = {
      "n": n,
      "max_bits_per_element": max(r.space.adaptivity_bits for r in rounds) / n,
      "max_group_bits_per_log_n": max(r.space.max_group_bits for r in rounds) / log_n,
      "groups_spilled": spilled,
    }
  return result


# ------------------------------
# wordops 与朴素实现对比
# ------------------------------
def _random_bits(rng: np.random.Generator, max_len: int) -> Bits:
  length = int(rng.integers(0, max_len + 1))
  value = int(rng.integers(0, 1 << length)) if length else 0
  return Bits(value, length)


def _outcome(fn):
  try:
    return fn()
  except WordOpsError as e:
    return type(e)


def _as_text(value):
  if isinstance(value, wordops.PackedStrings):
    return tuple(str(s) for s in value.strings())
  if isinstance(value, NaiveStrings):
    return value.items
  if isinstance(value, tuple):
    return tuple(_as_text(v) for v in value)
  return value


def _wordops_case(rng: np.random.Generator) -> Optional[str]:
  strings = [_random_bits(rng, 12) for _ in range(int(rng.integers(0, 14)))]
  store = wordops.from_strings(strings)
  naive = NaiveStrings(tuple(str(s) for s in strings))
  count = len(strings)
  op = int(rng.integers(0, 7))
  rank = int(rng.integers(0, count + 2))
  j = int(rng.integers(0, count + 1))
  k = int(rng.integers(j, count + 2))
  query = _random_bits(rng, 16)
  x = int(rng.integers(0, 14))
  if op == 0:
    packed = _outcome(lambda: wordops.prefix_match(store, query, j, k))
    plain = _outcome(lambda: naive.prefix_match(str(query), j, k))
  elif op == 1:
    packed = _outcome(lambda: wordops.prefix_lengths(store, query, j, k))
    plain = _outcome(lambda: naive.prefix_lengths(str(query), j, k))
  elif op == 2:
    # 长串让插入时常越过容量边界
    s = _random_bits(rng, 200)
    packed = _outcome(lambda: wordops.insert_string(store, s, rank))
    plain = _outcome(lambda: naive.insert_string(str(s), rank))
  elif op == 3:
    packed = _outcome(lambda: wordops.delete_string(store, rank))
    plain = _outcome(lambda: naive.delete_string(rank))
  elif op == 4:
    packed = _outcome(lambda: wordops.splice(store, rank, x))
    plain = _outcome(lambda: naive.splice(rank, x))
  elif op == 5:
    packed = _outcome(lambda: wordops.concat_adjacent(store, rank))
    plain = _outcome(lambda: naive.concat_adjacent(rank))
  else:
    packed = _outcome(lambda: wordops.parallel_drop_prefix(store, x))
    plain = _outcome(lambda: naive.parallel_drop_prefix(x))
  if _as_text(packed) != _as_text(plain):
    return f"op {op} on {naive.items} (rank={rank}, j={j}, k={k}, x={x}, query={query}): {packed} != {plain}"
  return None


def wordops_suite(config: RunConfig) -> SuiteResult:
  result = SuiteResult(name="wordops")
  rng = _workload_rng(config.seed, 5)
  for _ in range(config.ops):
    result.checked += 1
    mismatch = _wordops_case(rng)
    if mismatch:
      result.fail(mismatch)
  return result


SUITES: Dict[str, Suite] = {
  "invariant1": invariant1_suite,
  "no-false-negatives": no_false_negatives_suite,
  "property1": property1_suite,
  "equivalence": equivalence_suite,
  "wordops": wordops_suite,
  "adaptivity-budget": adaptivity_budget_suite,
}


def run_suites(config: RunConfig) -> List[SuiteResult]:
  names = config.suites or list(SUITES)
  results = []
  for name in names:
    result = SUITES[name](config)
    level = "INFO" if result.passed else "ERROR"
    logger.log(level, result.line())
    results.append(result)
  return results

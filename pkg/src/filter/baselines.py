"""
非自适应基线与白名单基线，接口与 BroomFilter 一致：

- bloom            m = ceil(log2(e) * n * log2(1/eps)) 位，k = ceil(ln2 * m / n) 个 hash，不支持删除
- quotient         与 broom 主层相同的放置规则，只存 baseline 指纹，adapt 为恒等
- whitelist-bloom  eps0 = 1/n 的 Bloom + 误判白名单
"""
import math
import struct
from typing import Callable, Dict, List, Optional, Set

import xxhash
from bitarray import bitarray

from src.config.env import settings
from src.filter.broom_filter import BroomFilter
from src.filter.level_base import Level
from src.filter.local_store import LocalStore
from src.filter.params_hash import PhaseState, derive_params, derive_seed, hash_bits
from src.filter.remote_store import AccessCounters, OpClass, query_class
from src.model.ReportModel import CounterReport, SpaceReport
from src.utils.errors import CapacityError, ContractError, UnknownNameError, UnsupportedOperationError

_KEY = struct.Struct("<Q")


def bloom_m_k(n: int, eps_log2: int):
  m = math.ceil(math.log2(math.e) * n * eps_log2)
  k = math.ceil(math.log(2) * m / n)
  return m, k


class BloomBaseline:
  name = "bloom"
  supports_delete = False

  def __init__(self, n: int, eps_log2: int, seed: Optional[int] = None):
    seed = settings.master_seed if seed is None else seed
    self.n = n
    self.eps_log2 = eps_log2
    self.m, self.k = bloom_m_k(n, eps_log2)
    self.seeds = [derive_seed(seed, 1000 + i) for i in range(self.k)]
    self.bits = bitarray(self.m)
    self.bits.setall(0)
    self.count = 0
    self.counters = AccessCounters()

  def _positions(self, x: int) -> List[int]:
    data = _KEY.pack(x)
    return [xxhash.xxh3_64_intdigest(data, seed=s) % self.m for s in self.seeds]

  def lookup(self, x: int, member: Optional[bool] = None) -> bool:
    present = True
    reads = 0
    for pos in self._positions(x):
      reads += 1
      if not self.bits[pos]:
        present = False
        break
    self.counters.add_local(query_class(present, member), reads, 0)
    return present

  def insert(self, x: int) -> None:
    if self.count >= self.n:
      raise CapacityError(f"bloom filter holds {self.n} keys")
    for pos in self._positions(x):
      self.bits[pos] = 1
    self.count += 1
    self.counters.add_local(OpClass.INSERT, 0, self.k)

  def delete(self, x: int) -> None:
    raise UnsupportedOperationError("bloom filters do not support delete")

  def adapt(self, x: int) -> None:
    return None

  @property
  def live_count(self) -> int:
    return self.count

  def measure(self) -> SpaceReport:
    return SpaceReport(filter_bits=self.m, live=self.count)

  def counter_report(self) -> CounterReport:
    return self.counters.report()


class QuotientBaseline:
  """broom 主层（及第二层 / backyard）只存 baseline 指纹"""
  name = "quotient"
  supports_delete = True

  def __init__(self, n: int, eps_log2: int, seed: Optional[int] = None, build: Optional[str] = None):
    seed = settings.master_seed if seed is None else seed
    self.params = derive_params(n, eps_log2=eps_log2)
    self.phase = PhaseState.initial(seed)
    self.local = LocalStore(self.params, build, adaptive=False)
    self.levels: Dict[int, Level] = {}
    self.counters = AccessCounters()

  def _hash(self, x: int):
    return hash_bits(self.params, self.phase, x)

  def lookup(self, x: int, member: Optional[bool] = None) -> bool:
    present = self.local.fp_query(self._hash(x)).present
    self.counters.add_local(query_class(present, member), *self.local.tally.drain())
    return present

  def insert(self, x: int) -> None:
    if x in self.levels:
      raise ContractError(f"key {x} is already a member")
    if len(self.levels) >= self.params.n:
      raise CapacityError(f"quotient filter holds {self.params.n} keys")
    self.levels[x] = self.local.fp_insert(self._hash(x)).level
    self.counters.add_local(OpClass.INSERT, *self.local.tally.drain())

  def delete(self, x: int) -> None:
    level = self.levels.pop(x, None)
    if level is None:
      raise ContractError(f"key {x} is not a member")
    self.local.remove_entry(level, self._hash(x))
    self.counters.add_local(OpClass.DELETE, *self.local.tally.drain())

  def adapt(self, x: int) -> None:
    return None

  @property
  def live_count(self) -> int:
    return len(self.levels)

  def measure(self) -> SpaceReport:
    return self.local.measure()

  def counter_report(self) -> CounterReport:
    return self.counters.report()


class WhitelistBloom:
  """eps0 = 1/n 的 Bloom，误判写入精确白名单"""
  name = "whitelist-bloom"
  supports_delete = False
  KEY_BITS = 64

  def __init__(self, n: int, eps_log2: int, seed: Optional[int] = None):
    self.bloom = BloomBaseline(n, n.bit_length() - 1, seed)
    self.eps_log2 = eps_log2
    self.whitelist: Set[int] = set()
    self.counters = self.bloom.counters

  def lookup(self, x: int, member: Optional[bool] = None) -> bool:
    if x in self.whitelist:
      self.counters.add_local(OpClass.QUERY_NEGATIVE, 1, 0)
      return False
    return self.bloom.lookup(x, member)

  def insert(self, x: int) -> None:
    self.whitelist.discard(x)
    self.bloom.insert(x)

  def delete(self, x: int) -> None:
    raise UnsupportedOperationError("whitelist bloom filters do not support delete")

  def adapt(self, x: int) -> None:
    self.whitelist.add(x)
    self.counters.add_local(OpClass.QUERY_FALSE_POSITIVE, 0, 1)

  @property
  def live_count(self) -> int:
    return self.bloom.count

  def measure(self) -> SpaceReport:
    report = self.bloom.measure()
    report.whitelist_bits = self.KEY_BITS * len(self.whitelist)
    return report

  def counter_report(self) -> CounterReport:
    return self.counters.report()


AmqFactory = Callable[..., object]

AMQS: Dict[str, AmqFactory] = {
  "broom": lambda n, eps_log2, seed, build=None: BroomFilter(n, eps_log2=eps_log2, seed=seed, build=build),
  "bloom": lambda n, eps_log2, seed, build=None: BloomBaseline(n, eps_log2, seed),
  "quotient": lambda n, eps_log2, seed, build=None: QuotientBaseline(n, eps_log2, seed, build),
  "whitelist-bloom": lambda n, eps_log2, seed, build=None: WhitelistBloom(n, eps_log2, seed),
}


def make_amq(name: str, n: int, eps_log2: int, seed: int, build: Optional[str] = None):
  factory = AMQS.get(name)
  if factory is None:
    raise UnknownNameError(f"unknown amq {name!r}, expected one of {sorted(AMQS)}")
  return factory(n, eps_log2, seed, build)

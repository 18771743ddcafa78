"""
broom filter：Lookup / Insert / Delete / Adapt，以及 frontier 回收。

- lookup 只读本地状态
- 误判由调用方（oracle）发现后调用 adapt，adapt 通过 rev_lookup 找到唯一的冲突元素 y 并 Extend
- 每次 Extend 之后执行一次 reclaim_step：把 frontier 之后最小的 reclaim_batch 个 key 换到新一代 hash
"""
from contextlib import contextmanager
from dataclasses import replace
from typing import Optional, Set, Tuple

from loguru import logger

from src.config.env import settings
from src.filter.local_store import Hit, LocalStore
from src.filter.params_hash import (BlockHasher, HashBits, PhaseState, advance_phase_if_done, block_hash,
                                    derive_params, hash_bits)
from src.filter.remote_store import AccessCounters, BaselineKey, OpClass, RemoteStore, query_class
from src.model.ParamsModel import Params, StoreLayout
from src.model.ReportModel import CounterReport, SpaceReport
from src.utils.errors import CapacityError, ContractError, CorruptionError, HashExhaustedError
from src.utils.wordops import Bits


class BroomFilter:
  name = "broom"
  supports_delete = True

  def __init__(self, n: int, epsilon=None, seed: Optional[int] = None, *, eps_log2: Optional[int] = None,
               build: Optional[str] = None, adaptive: bool = True, c_hash: Optional[int] = None,
               reclaim_batch: Optional[int] = None, debug_checks: Optional[bool] = None,
               hasher: BlockHasher = block_hash, params: Optional[Params] = None,
               layout: Optional[StoreLayout] = None):
    self.params = params or derive_params(n, epsilon, eps_log2=eps_log2, c_hash=c_hash, reclaim_batch=reclaim_batch)
    self.seed = settings.master_seed if seed is None else seed
    self.adaptive = adaptive
    self.hasher = hasher
    self.debug_checks = settings.debug_checks if debug_checks is None else debug_checks
    self.phase = PhaseState.initial(self.seed)
    self.counters = AccessCounters()
    self.local = LocalStore(self.params, build, adaptive, layout)
    self.remote = RemoteStore(self.counters)
    # 已修复的误判 (x, y, seed(x), seed(y))
    self.fixes: Set[Tuple[int, int, int, int]] = set()
    if not adaptive:
      self.name = "broom-oblivious"
    logger.debug(
      f"broom filter created: n={self.params.n} r={self.params.r} regime={self.params.regime.value} "
      f"build={self.local.build} seed={self.seed}"
    )

  @classmethod
  def create(cls, n: int, epsilon, seed: int, **kwargs) -> "BroomFilter":
    return cls(n, epsilon, seed, **kwargs)

  # ------------------------------
  # 内部工具
  # ------------------------------
  def _hash(self, x: int) -> HashBits:
    return hash_bits(self.params, self.phase, x, self.hasher)

  @contextmanager
  def _op(self, cls: OpClass):
    with self.counters.attribute(cls):
      try:
        yield
      finally:
        self.counters.add_local(cls, *self.local.tally.drain())

  def _resolve(self, x: int, h: HashBits, hit: Hit) -> Optional[int]:
    """RevLookup：找出指纹为 hit 且是 h 前缀的 live key"""
    query = self.local.view(hit.level, h).bits()
    seeds = sorted({self.phase.seed_a, self.phase.seed_b})
    triples = [BaselineKey(s, hit.level, hit.quotient, hit.remainder) for s in seeds]

    def check(y: int) -> Optional[Bits]:
      if y == x:
        return None
      fp = self.local.entry_for(self._hash(y), hit.level).fingerprint
      return fp if fp.is_prefix_of(query) else None

    return self.remote.rev_lookup(triples, check, self.params.hash_len)

  def _extend(self, x: int, h: HashBits, hit: Hit, record: bool) -> None:
    y = self._resolve(x, h, hit)
    if y is None:
      logger.error(f"full collision for {x} at {hit.level.name} quotient {hit.quotient} has no owner")
      raise CorruptionError(f"no live key owns the fingerprint colliding with {x}")
    hy = self._hash(y)
    try:
      self.local.fp_extend_entry(hit.level, hy, h)
    except HashExhaustedError:
      self.counters.hash_ties += 1
      logger.warning(f"full-hash tie between {x} and {y}, fingerprints kept at full length")
      return
    if record:
      pair = (x, y, h.seed, hy.seed)
      if pair in self.fixes:
        self.counters.repeat_collisions += 1
        logger.error(f"{x} collided with {y} again under the same hash generations")
      else:
        self.fixes.add(pair)

  def _place(self, x: int, h: HashBits, inherit_ghosts: bool = True) -> Tuple[BaselineKey, int]:
    extends = 0
    if self.adaptive:
      for hit in self.local.fp_query(h).full:
        self._extend(x, h, hit, record=False)
        extends += 1
    inherit = 0
    if self.adaptive and inherit_ghosts:
      ghost = self.local.ghost_match(h)
      inherit = ghost.length if ghost is not None else 0
    placement = self.local.fp_insert(h, inherit)
    return BaselineKey(h.seed, placement.level, placement.quotient, placement.remainder), extends

  def _reclaim_after(self, extends: int) -> None:
    for _ in range(extends):
      self.reclaim_step()

  # ------------------------------
  # AMQ 操作
  # ------------------------------
  def lookup(self, x: int, member: Optional[bool] = None) -> bool:
    """只读本地存储；member 只决定计数归到哪一类"""
    present = self.local.fp_query(self._hash(x)).present
    self.counters.add_local(query_class(present, member), *self.local.tally.drain())
    return present

  def adapt(self, x: int) -> None:
    if self.remote.is_live(x):
      raise ContractError(f"adapt called on member {x}")
    if not self.adaptive:
      return
    with self._op(OpClass.QUERY_FALSE_POSITIVE):
      h = self._hash(x)
      full = self.local.fp_query(h).full
      if not full:
        raise ContractError(f"adapt called for {x} without a full collision")
      for hit in full:
        self._extend(x, h, hit, record=True)
    self._reclaim_after(len(full))

  def insert(self, x: int) -> None:
    if self.remote.is_live(x):
      raise ContractError(f"key {x} is already a member")
    if self.remote.live_count >= self.params.n:
      raise CapacityError(f"filter holds {self.params.n} keys")
    with self._op(OpClass.INSERT):
      h = self._hash(x)
      triple, extends = self._place(x, h)
      own = self.remote.ghost_handle(x)
      if own is not None:
        self.local.purge_ghost(own)
      self.remote.remote_insert(x, triple)
    self._reclaim_after(extends)

  def delete(self, x: int) -> None:
    if not self.remote.is_live(x):
      raise ContractError(f"key {x} is not a member")
    with self._op(OpClass.DELETE):
      level = self.remote.key_baseline[x].level
      handle = self.local.fp_delete(level, self._hash(x))
      self.remote.remote_delete(x, handle)
      if self.remote.ghost_count > self.params.n:
        oldest = self.remote.oldest_ghost()
        self.local.purge_ghost(self.remote.forget_ghost(oldest))

  def reclaim_step(self) -> None:
    with self._op(OpClass.ADAPT_RECLAIM):
      batch = self.remote.next_keys_above(self.phase.frontier_z, self.params.reclaim_batch)
      for key, live in batch:
        if not live:
          self.local.purge_ghost(self.remote.forget_ghost(key))
          self.phase = replace(self.phase, frontier_z=key)
          continue
        old = self.remote.key_baseline[key]
        self.local.remove_entry(old.level, self._hash(key))
        self.phase = replace(self.phase, frontier_z=key)
        new, _ = self._place(key, self._hash(key), inherit_ghosts=False)
        self.remote.rekey(key, old, new)
      self.phase = advance_phase_if_done(self.phase, self.remote.max_key())
    if self.debug_checks:
      self.check_consistency()

  def checked_lookup(self, x: int) -> bool:
    """oracle 入口：成员关系取自字典，误判时自动 adapt"""
    member = self.remote.is_live(x)
    present = self.lookup(x, member)
    if present and not member:
      self.adapt(x)
    return present

  # ------------------------------
  # 统计与检查
  # ------------------------------
  @property
  def live_count(self) -> int:
    return self.remote.live_count

  def measure(self) -> SpaceReport:
    return self.local.measure()

  def counter_report(self) -> CounterReport:
    return self.counters.report()

  def collider_of(self, x: int) -> Optional[int]:
    """修复 x 的误判时与之冲突的 live key（白盒攻击者使用）"""
    ys = [y for (fp, y, _, _) in self.fixes if fp == x and self.remote.is_live(y)]
    return min(ys) if ys else None

  def triple_of(self, key: int) -> BaselineKey:
    """按当前 frontier 重新计算 key 的 baseline 三元组"""
    level = self.remote.key_baseline[key].level
    hit = self.local.entry_for(self._hash(key), level)
    return BaselineKey(self.phase.seed_for(key), level, hit.quotient, hit.remainder)

  def check_consistency(self) -> None:
    for key in self.remote.iter_live():
      registered = self.remote.key_baseline[key]
      if registered.seed != self.phase.seed_for(key):
        logger.error(f"key {key} registered under the wrong generation (frontier {self.phase.frontier_z})")
        raise CorruptionError(f"generation mismatch for key {key}")
    if not self.remote.mirror_ok(self.triple_of):
      logger.error("rev_index differs from the index rebuilt from live keys")
      raise CorruptionError("remote mirror out of sync")
    if self.local.live_count != self.remote.live_count:
      raise CorruptionError(f"local holds {self.local.live_count} entries, remote {self.remote.live_count} keys")

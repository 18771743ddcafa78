"""
远端表示 R：有序 key 集合（live + ghost）、baseline 反查索引 rev_index，以及访问计数。

rev_index 的键是 BaselineKey(seed, level, quotient, remainder)，seed 是产生该 baseline 的 hash 代的种子，
换代（seed_a <- seed_b）时无需重建索引。
"""
from bisect import bisect_right, insort
from contextlib import contextmanager
from dataclasses import dataclass, fields
from enum import Enum
from typing import Callable, Dict, Iterator, List, NamedTuple, Optional, Sequence, Set, Tuple

from loguru import logger

from src.filter.level_base import GhostHandle, Level
from src.model.ReportModel import ClassTally, CounterReport
from src.utils.errors import ContractError, CorruptionError
from src.utils.wordops import Bits


class OpClass(str, Enum):
  QUERY_NEGATIVE = "query_negative"
  QUERY_FALSE_POSITIVE = "query_false_positive"
  QUERY_TRUE_POSITIVE = "query_true_positive"
  # 调用方没给出真实成员关系时的 Present
  QUERY_PRESENT = "query_present"
  INSERT = "insert"
  DELETE = "delete"
  ADAPT_RECLAIM = "adapt_reclaim"


def query_class(present: bool, member: Optional[bool]) -> OpClass:
  """按调用方已知的成员关系归类一次查询，不访问远端"""
  if not present:
    return OpClass.QUERY_NEGATIVE
  if member is None:
    return OpClass.QUERY_PRESENT
  return OpClass.QUERY_TRUE_POSITIVE if member else OpClass.QUERY_FALSE_POSITIVE


class BaselineKey(NamedTuple):
  seed: int
  level: Level
  quotient: int
  remainder: int


@dataclass(slots=True)
class Tally:
  remote_lookups: int = 0
  remote_updates: int = 0
  dictionary_ops: int = 0
  local_reads: int = 0
  local_writes: int = 0


class AccessCounters:

  def __init__(self):
    self.classes: Dict[OpClass, Tally] = {cls: Tally() for cls in OpClass}
    self._stack: List[OpClass] = []
    self.repeat_collisions = 0
    self.hash_ties = 0

  @property
  def current(self) -> Tally:
    if not self._stack:
      raise ContractError("remote access outside of an attributed operation")
    return self.classes[self._stack[-1]]

  @contextmanager
  def attribute(self, cls: OpClass):
    self._stack.append(cls)
    try:
      yield self.classes[cls]
    finally:
      self._stack.pop()

  def add_local(self, cls: OpClass, reads: int, writes: int) -> None:
    tally = self.classes[cls]
    tally.local_reads += reads
    tally.local_writes += writes

  def snapshot(self) -> Dict[str, Dict[str, int]]:
    return {cls.value: {f.name: getattr(t, f.name) for f in fields(t)} for cls, t in self.classes.items()}

  def restore(self, data: Dict[str, Dict[str, int]]) -> None:
    for name, values in data.items():
      self.classes[OpClass(name)] = Tally(**values)

  def report(self) -> CounterReport:
    return CounterReport(
      classes={name: ClassTally(**values) for name, values in self.snapshot().items()},
      repeat_collisions=self.repeat_collisions,
      hash_ties=self.hash_ties,
    )


class RemoteStore:

  def __init__(self, counters: Optional[AccessCounters] = None):
    self.counters = counters or AccessCounters()
    self.live_keys: List[int] = []
    self._live: Set[int] = set()
    self.ghost_keys: List[int] = []
    # key -> 本地 ghost handle，按创建顺序
    self.ghosts: Dict[int, GhostHandle] = {}
    self.rev_index: Dict[BaselineKey, Set[int]] = {}
    self.key_baseline: Dict[int, BaselineKey] = {}

  # ------------------------------
  # 查询
  # ------------------------------
  def is_live(self, key: int) -> bool:
    return key in self._live

  def is_ghost(self, key: int) -> bool:
    return key in self.ghosts

  @property
  def live_count(self) -> int:
    return len(self.live_keys)

  @property
  def ghost_count(self) -> int:
    return len(self.ghosts)

  def max_key(self) -> Optional[int]:
    candidates = [keys[-1] for keys in (self.live_keys, self.ghost_keys) if keys]
    return max(candidates) if candidates else None

  def rev_lookup(self, triples: Sequence[BaselineKey], check: Callable[[int], Optional[Bits]],
                 full_len: int) -> Optional[int]:
    """
    返回指纹是查询 hash 前缀的唯一 live key。
    check(y) 返回 y 的当前指纹（是查询 hash 前缀时），否则 None。
    多个候选同时通过时只允许是 hash 全长平局。
    """
    self.counters.current.remote_lookups += 1
    candidates = set()
    for triple in triples:
      candidates |= self.rev_index.get(triple, set())
    passed = []
    for key in sorted(candidates):
      fp = check(key)
      if fp is not None:
        passed.append((key, fp))
    if not passed:
      return None
    if len(passed) > 1 and any(fp.length < full_len for _, fp in passed):
      logger.error(f"{len(passed)} keys collide with one query: {[k for k, _ in passed]}")
      raise CorruptionError("more than one live fingerprint is a prefix of the query hash")
    return passed[0][0]

  def next_keys_above(self, z: int, count: int) -> List[Tuple[int, bool]]:
    """z 之后最小的 count 个 key（live 或 ghost），标记是否 live"""
    self.counters.current.remote_lookups += 1
    out = []
    i = bisect_right(self.live_keys, z)
    j = bisect_right(self.ghost_keys, z)
    while len(out) < count and (i < len(self.live_keys) or j < len(self.ghost_keys)):
      if j >= len(self.ghost_keys) or (i < len(self.live_keys) and self.live_keys[i] < self.ghost_keys[j]):
        out.append((self.live_keys[i], True))
        i += 1
      else:
        out.append((self.ghost_keys[j], False))
        j += 1
    return out

  def ghost_handle(self, key: int) -> Optional[GhostHandle]:
    return self.ghosts.get(key)

  def oldest_ghost(self) -> Optional[int]:
    return next(iter(self.ghosts), None)

  # ------------------------------
  # 更新
  # ------------------------------
  def remote_insert(self, key: int, triple: BaselineKey) -> None:
    if key in self._live:
      raise ContractError(f"key {key} is already live")
    self.counters.current.dictionary_ops += 1
    # 重新插入的 key 与自己的 ghost 是同一条记录，改状态不另计远端更新
    if self.ghosts.pop(key, None) is not None:
      self._remove_sorted(self.ghost_keys, key)
    insort(self.live_keys, key)
    self._live.add(key)
    self._index(key, triple)

  def remote_delete(self, key: int, handle: Optional[GhostHandle]) -> None:
    if key not in self._live:
      raise ContractError(f"key {key} is not live")
    tally = self.counters.current
    tally.dictionary_ops += 1
    tally.remote_updates += 1
    self._remove_sorted(self.live_keys, key)
    self._live.discard(key)
    self._unindex(key)
    if handle is not None:
      insort(self.ghost_keys, key)
      self.ghosts[key] = handle

  def forget_ghost(self, key: int) -> GhostHandle:
    handle = self.ghosts.pop(key, None)
    if handle is None:
      raise ContractError(f"key {key} is not a ghost")
    self.counters.current.remote_updates += 1
    self._remove_sorted(self.ghost_keys, key)
    return handle

  def rekey(self, key: int, old: BaselineKey, new: BaselineKey) -> None:
    if self.key_baseline.get(key) != old:
      raise ContractError(f"key {key} is not registered under {old}")
    self.counters.current.remote_updates += 1
    self._unindex(key)
    self._index(key, new)

  # ------------------------------
  # 内部
  # ------------------------------
  @staticmethod
  def _remove_sorted(keys: List[int], key: int) -> None:
    i = bisect_right(keys, key) - 1
    if i < 0 or keys[i] != key:
      raise CorruptionError(f"key {key} missing from ordered set")
    del keys[i]

  def _index(self, key: int, triple: BaselineKey) -> None:
    self.rev_index.setdefault(triple, set()).add(key)
    self.key_baseline[key] = triple

  def _unindex(self, key: int) -> None:
    triple = self.key_baseline.pop(key)
    keys = self.rev_index[triple]
    keys.discard(key)
    if not keys:
      del self.rev_index[triple]

  def mirror_ok(self, triple_of: Callable[[int], BaselineKey]) -> bool:
    """从 live_keys 重建 rev_index，与维护中的索引比较"""
    rebuilt: Dict[BaselineKey, Set[int]] = {}
    for key in self.live_keys:
      rebuilt.setdefault(triple_of(key), set()).add(key)
    return rebuilt == self.rev_index and not (self._live & set(self.ghosts))

  def iter_live(self) -> Iterator[int]:
    return iter(list(self.live_keys))

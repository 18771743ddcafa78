"""
quotient filter 层的公共部分：指纹类型、几何参数，以及两种实现（reference / packed）共用的
插入、删除、查询流程。子类只负责存储：

- _cluster(slot)      -> (start, [(quotient, remainder), ...])  按 slot 顺序解码一个 cluster
- _write(start, old_len, entries, positions)                      写回 cluster
- 自适应位串的增删改查（_live_strings / _insert_string / ...）

cluster 内的位置总是贪心布局：pos_i = max(pos_{i-1} + 1, home_i)，
因此两种实现在相同操作序列下得到完全相同的 slot 布局。
"""
from abc import ABC, abstractmethod
from dataclasses import dataclass
from enum import IntEnum
from typing import Iterator, List, Optional, Sequence, Tuple

from src.utils.wordops import EMPTY, Bits


class Level(IntEnum):
  PRIMARY = 0
  SECONDARY = 1
  BACKYARD = 2


@dataclass(frozen=True, slots=True)
class Fingerprint:
  quotient: int
  remainder: int
  adaptivity: Bits = EMPTY

  def bits(self, qbits: int, rbits: int) -> Bits:
    return Bits((self.quotient << rbits) | self.remainder, qbits + rbits).concat(self.adaptivity)


@dataclass(frozen=True, slots=True)
class GhostHandle:
  level: Level
  quotient: int
  adaptivity: Bits


@dataclass(frozen=True, slots=True)
class LevelGeometry:
  kind: Level
  qbits: int
  rbits: int
  slots: int
  probe_cap: Optional[int] = None
  signature_bits: int = 0
  group_width: int = 64
  buffer_bits: int = 256
  # 末尾不作 home 的溢出 slot 数
  tail: int = 0

  @property
  def quotients(self) -> int:
    return 1 << self.qbits

  def home(self, quotient: int) -> int:
    return (quotient * (self.slots - self.tail)) >> self.qbits

  def quotient_at(self, slot: int) -> Optional[int]:
    """slot 是某个 quotient 的 home 时返回该 quotient"""
    quotient = -(-(slot << self.qbits) // (self.slots - self.tail))
    if quotient < self.quotients and self.home(quotient) == slot:
      return quotient
    return None

  def signature(self, remainder: int) -> int:
    return remainder >> (self.rbits - self.signature_bits)


@dataclass(slots=True)
class LevelSpace:
  slot_bits: int = 0
  metadata_bits: int = 0
  adaptivity_bits: int = 0
  boundary_bits: int = 0
  spill_bits: int = 0
  groups_spilled: int = 0
  max_group_bits: int = 0
  live: int = 0
  ghosts: int = 0


Entry = Tuple[int, int]


class QuotientLevel(ABC):

  def __init__(self, geom: LevelGeometry):
    self.geom = geom
    self.live = 0
    self.ghosts = 0

  # ------------------------------
  # 存储相关（子类实现）
  # ------------------------------
  @abstractmethod
  def _cluster(self, slot: int) -> Tuple[int, List[Entry]]:
    ...

  @abstractmethod
  def _write(self, start: int, old_len: int, entries: Sequence[Entry], positions: Sequence[int]) -> None:
    ...

  @abstractmethod
  def _has_run(self, quotient: int) -> bool:
    ...

  @abstractmethod
  def _live_strings(self, quotient: int) -> List[Bits]:
    ...

  @abstractmethod
  def _ghost_strings(self, quotient: int) -> List[Bits]:
    ...

  @abstractmethod
  def _insert_string(self, quotient: int, index: int, bits: Bits) -> None:
    ...

  @abstractmethod
  def _remove_string(self, quotient: int, index: int) -> Bits:
    ...

  @abstractmethod
  def _extend_string(self, quotient: int, index: int, bits: Bits) -> None:
    ...

  @abstractmethod
  def _append_ghost(self, quotient: int, bits: Bits) -> None:
    ...

  @abstractmethod
  def _drop_ghost(self, quotient: int, bits: Bits) -> bool:
    ...

  @abstractmethod
  def occupied_slots(self) -> Iterator[Tuple[int, Entry]]:
    """(slot, (quotient, remainder))，按 slot 递增"""

  @abstractmethod
  def measure(self) -> LevelSpace:
    ...

  # ------------------------------
  # 公共流程
  # ------------------------------
  def _layout(self, start: int, entries: Sequence[Entry]) -> Optional[List[int]]:
    geom = self.geom
    positions = []
    pos = start - 1
    for quotient, _ in entries:
      home = geom.home(quotient)
      pos = max(pos + 1, home)
      if pos >= geom.slots:
        return None
      if geom.probe_cap is not None and pos - home >= geom.probe_cap:
        return None
      positions.append(pos)
    return positions

  def run_entries(self, quotient: int) -> List[Entry]:
    if not self._has_run(quotient):
      return []
    _, cluster = self._cluster(self.geom.home(quotient))
    return [e for e in cluster if e[0] == quotient]

  def run(self, quotient: int) -> List[Fingerprint]:
    entries = self.run_entries(quotient)
    if not entries:
      return []
    strings = self._live_strings(quotient)
    return [Fingerprint(quotient, rem, bits) for (_, rem), bits in zip(entries, strings)]

  def ghost_strings(self, quotient: int) -> List[Bits]:
    return self._ghost_strings(quotient)

  def try_insert(self, fp: Fingerprint) -> bool:
    """追加到 quotient 对应 run 的末尾；探测越界 / 签名冲突 / 越过数组末尾时返回 False"""
    geom = self.geom
    if geom.signature_bits:
      sig = geom.signature(fp.remainder)
      if any(geom.signature(rem) == sig for _, rem in self.run_entries(fp.quotient)):
        return False
    start, cluster = self._cluster(geom.home(fp.quotient))
    idx = len(cluster)
    while idx > 0 and cluster[idx - 1][0] > fp.quotient:
      idx -= 1
    entries = cluster[:idx] + [(fp.quotient, fp.remainder)] + cluster[idx:]
    positions = self._layout(start, entries)
    if positions is None:
      return False
    run_len = sum(1 for quotient, _ in cluster if quotient == fp.quotient)
    self._write(start, len(cluster), entries, positions)
    self._insert_string(fp.quotient, run_len, fp.adaptivity)
    self.live += 1
    return True

  def remove(self, quotient: int, index: int) -> Fingerprint:
    start, cluster = self._cluster(self.geom.home(quotient))
    seen = -1
    for at, (quo, rem) in enumerate(cluster):
      if quo == quotient:
        seen += 1
        if seen == index:
          break
    else:
      raise IndexError(f"quotient {quotient} has no entry {index}")
    entries = cluster[:at] + cluster[at + 1:]
    self._write(start, len(cluster), entries, self._layout(start, entries))
    bits = self._remove_string(quotient, index)
    self.live -= 1
    return Fingerprint(quotient, rem, bits)

  def extend(self, quotient: int, index: int, bits: Bits) -> None:
    self._extend_string(quotient, index, bits)

  def add_ghost(self, quotient: int, bits: Bits) -> None:
    self._append_ghost(quotient, bits)
    self.ghosts += 1

  def remove_ghost(self, quotient: int, bits: Bits) -> bool:
    if self._drop_ghost(quotient, bits):
      self.ghosts -= 1
      return True
    return False

  def ghost_match(self, quotient: int, tail: Bits) -> Optional[Bits]:
    best = None
    for g in self._ghost_strings(quotient):
      if g.is_prefix_of(tail) and (best is None or g.length > best.length):
        best = g
    return best

  def entries(self) -> Iterator[Fingerprint]:
    last = None
    for _, (quotient, rem) in self.occupied_slots():
      if quotient != last:
        strings = iter(self._live_strings(quotient))
        last = quotient
      yield Fingerprint(quotient, rem, next(strings))

  def displacements(self) -> Iterator[int]:
    for slot, (quotient, _) in self.occupied_slots():
      yield slot - self.geom.home(quotient)

"""
按位打包的 quotient filter 层。

slot 数组：
- remainders   定宽整数数组（bitarray，每个 slot rbits 位）
- occupied     slot 是某个 quotient 的 home 且该 quotient 有 run
- continuation slot 中的元素不是其 run 的第一个
- shifted      slot 中的元素不在其 home
三位全 0 的 slot 为空。

自适应位串按 group_width 个 quotient 一组存放在 PackedStrings 缓冲区里：
组内先按 quotient 递增，同一 quotient 内先是 live 串（与 run 中的 slot 顺序一致）再是 ghost 串。
每个 quotient 的 live / ghost 个数记在目录数组中。缓冲区放不下时整组转入 spill 表。
"""
from collections import deque
from typing import Dict, Iterator, List, Optional, Sequence, Tuple

import numpy as np
from bitarray import bitarray
from bitarray.util import ba2int, int2ba
from loguru import logger

from src.filter.level_base import Entry, LevelGeometry, LevelSpace, QuotientLevel
from src.utils.errors import WordOpsOverflowError
from src.utils import wordops
from src.utils.wordops import Bits, PackedStrings


class PackedIntArray:
  """bitarray 上的定宽无符号整数数组"""

  def __init__(self, size: int, width: int):
    self.size = size
    self.width = width
    self.bits = bitarray(size * width, endian="big")
    self.bits.setall(0)

  def __getitem__(self, i: int) -> int:
    w = self.width
    return ba2int(self.bits[i * w:(i + 1) * w])

  def __setitem__(self, i: int, value: int) -> None:
    w = self.width
    self.bits[i * w:(i + 1) * w] = int2ba(value, length=w, endian="big")

  def clear(self, start: int, end: int) -> None:
    self.bits[start * self.width:end * self.width] = 0


class AdaptivityGroups:

  def __init__(self, quotients: int, width: int, capacity: int):
    self.width = width
    self.capacity = capacity
    groups = -(-quotients // width)
    self.buffers: List[Optional[PackedStrings]] = [PackedStrings(capacity=capacity) for _ in range(groups)]
    self.spill: Dict[int, List[Bits]] = {}
    self.live_counts = np.zeros(quotients, dtype=np.int32)
    self.ghost_counts = np.zeros(quotients, dtype=np.int32)

  def _base(self, quotient: int) -> int:
    g0 = quotient - quotient % self.width
    return int(self.live_counts[g0:quotient].sum() + self.ghost_counts[g0:quotient].sum())

  def _strings(self, group: int, first: int, count: int) -> List[Bits]:
    if not count:
      return []
    buf = self.buffers[group]
    if buf is None:
      return self.spill[group][first - 1:first - 1 + count]
    return buf.strings()[first - 1:first - 1 + count]

  def _insert(self, group: int, rank: int, bits: Bits) -> None:
    buf = self.buffers[group]
    if buf is not None:
      try:
        self.buffers[group] = wordops.insert_string(buf, bits, rank)
        return
      except WordOpsOverflowError:
        logger.warning(f"adaptivity group {group} spilled ({buf.length} bits in a {self.capacity}-bit buffer)")
        self.spill[group] = buf.strings()
        self.buffers[group] = None
    self.spill[group].insert(rank - 1, bits)

  def _delete(self, group: int, rank: int) -> Bits:
    buf = self.buffers[group]
    if buf is not None:
      bits = buf.string_at(rank)
      self.buffers[group] = wordops.delete_string(buf, rank)
      return bits
    strings = self.spill[group]
    bits = strings.pop(rank - 1)
    if sum(s.length for s in strings) <= self.capacity:
      self.buffers[group] = wordops.from_strings(strings, self.capacity)
      del self.spill[group]
      logger.debug(f"adaptivity group {group} repacked")
    return bits

  def live(self, quotient: int) -> List[Bits]:
    return self._strings(quotient // self.width, self._base(quotient) + 1, int(self.live_counts[quotient]))

  def ghosts(self, quotient: int) -> List[Bits]:
    first = self._base(quotient) + int(self.live_counts[quotient]) + 1
    return self._strings(quotient // self.width, first, int(self.ghost_counts[quotient]))

  def insert_live(self, quotient: int, index: int, bits: Bits) -> None:
    self._insert(quotient // self.width, self._base(quotient) + index + 1, bits)
    self.live_counts[quotient] += 1

  def remove_live(self, quotient: int, index: int) -> Bits:
    bits = self._delete(quotient // self.width, self._base(quotient) + index + 1)
    self.live_counts[quotient] -= 1
    return bits

  def extend_live(self, quotient: int, index: int, bits: Bits) -> None:
    group = quotient // self.width
    rank = self._base(quotient) + index + 1
    buf = self.buffers[group]
    if buf is None:
      self.spill[group][rank - 1] = bits
      return
    old = buf.string_at(rank)
    if not old.is_prefix_of(bits):
      self._delete(group, rank)
      self._insert(group, rank, bits)
      return
    # 先把新增后缀作为独立串插在后面，再与原串拼接
    self._insert(group, rank + 1, bits.drop(old.length))
    if self.buffers[group] is None:
      strings = self.spill[group]
      strings[rank - 1:rank + 1] = [bits]
    else:
      self.buffers[group] = wordops.concat_adjacent(self.buffers[group], rank)

  def append_ghost(self, quotient: int, bits: Bits) -> None:
    rank = self._base(quotient) + int(self.live_counts[quotient]) + int(self.ghost_counts[quotient]) + 1
    self._insert(quotient // self.width, rank, bits)
    self.ghost_counts[quotient] += 1

  def drop_ghost(self, quotient: int, bits: Bits) -> bool:
    for i, g in enumerate(self.ghosts(quotient)):
      if g == bits:
        first = self._base(quotient) + int(self.live_counts[quotient]) + 1
        self._delete(quotient // self.width, first + i)
        self.ghost_counts[quotient] -= 1
        return True
    return False

  def ghost_match(self, quotient: int, tail: Bits) -> Optional[Bits]:
    count = int(self.ghost_counts[quotient])
    if not count:
      return None
    group = quotient // self.width
    buf = self.buffers[group]
    first = self._base(quotient) + int(self.live_counts[quotient]) + 1
    if buf is None:
      matches = [g for g in self.spill[group][first - 1:first - 1 + count] if g.is_prefix_of(tail)]
    else:
      bitmap = wordops.prefix_match(buf, tail, first, first + count - 1)
      matches = [buf.string_at(i) for i in wordops.bitmap_indices(bitmap)]
    return max(matches, key=lambda g: g.length, default=None)


class PackedLevel(QuotientLevel):

  def __init__(self, geom: LevelGeometry):
    super().__init__(geom)
    n = geom.slots
    self.occupied = bitarray(n)
    self.continuation = bitarray(n)
    self.shifted = bitarray(n)
    for arr in (self.occupied, self.continuation, self.shifted):
      arr.setall(0)
    self.remainders = PackedIntArray(n, geom.rbits)
    self.groups = AdaptivityGroups(geom.quotients, geom.group_width, geom.buffer_bits)

  def _empty(self, j: int) -> bool:
    return not (self.occupied[j] or self.continuation[j] or self.shifted[j])

  def _cluster(self, slot: int) -> Tuple[int, List[Entry]]:
    start = slot
    while self.shifted[start]:
      start -= 1
    out = []
    pending = deque()
    current = None
    j = start
    while j < self.geom.slots and not self._empty(j):
      if self.occupied[j]:
        pending.append(self.geom.quotient_at(j))
      if not self.continuation[j]:
        current = pending.popleft()
      out.append((current, self.remainders[j]))
      j += 1
    return start, out

  def _write(self, start: int, old_len: int, entries: Sequence[Entry], positions: Sequence[int]) -> None:
    end = max(start + old_len, positions[-1] + 1 if positions else start)
    for arr in (self.occupied, self.continuation, self.shifted):
      arr[start:end] = 0
    self.remainders.clear(start, end)
    prev = None
    for (quotient, rem), pos in zip(entries, positions):
      home = self.geom.home(quotient)
      self.occupied[home] = 1
      self.continuation[pos] = quotient == prev
      self.shifted[pos] = pos != home
      self.remainders[pos] = rem
      prev = quotient

  def _has_run(self, quotient: int) -> bool:
    return bool(self.occupied[self.geom.home(quotient)])

  def _live_strings(self, quotient: int) -> List[Bits]:
    return self.groups.live(quotient)

  def _ghost_strings(self, quotient: int) -> List[Bits]:
    return self.groups.ghosts(quotient)

  def _insert_string(self, quotient: int, index: int, bits: Bits) -> None:
    self.groups.insert_live(quotient, index, bits)

  def _remove_string(self, quotient: int, index: int) -> Bits:
    return self.groups.remove_live(quotient, index)

  def _extend_string(self, quotient: int, index: int, bits: Bits) -> None:
    self.groups.extend_live(quotient, index, bits)

  def _append_ghost(self, quotient: int, bits: Bits) -> None:
    self.groups.append_ghost(quotient, bits)

  def _drop_ghost(self, quotient: int, bits: Bits) -> bool:
    return self.groups.drop_ghost(quotient, bits)

  def ghost_match(self, quotient: int, tail: Bits) -> Optional[Bits]:
    return self.groups.ghost_match(quotient, tail)

  def occupied_slots(self) -> Iterator[Tuple[int, Entry]]:
    j = 0
    n = self.geom.slots
    while j < n:
      if self._empty(j):
        j += 1
        continue
      start, cluster = self._cluster(j)
      for offset, entry in enumerate(cluster):
        yield start + offset, entry
      j = start + len(cluster)

  def measure(self) -> LevelSpace:
    geom = self.geom
    space = LevelSpace(
      slot_bits=geom.slots * geom.rbits,
      metadata_bits=3 * geom.slots,
      live=self.live,
      ghosts=self.ghosts,
    )
    for group, buf in enumerate(self.groups.buffers):
      if buf is None:
        strings = self.groups.spill[group]
        bits = sum(s.length for s in strings)
        space.spill_bits += bits + len(strings)
        space.groups_spilled += 1
      else:
        bits = buf.length
        space.boundary_bits += buf.boundary_bits
      space.adaptivity_bits += bits
      space.max_group_bits = max(space.max_group_bits, bits)
    return space

from typing import Dict, Iterator, List, Optional, Sequence, Tuple

from src.filter.level_base import Entry, LevelGeometry, LevelSpace, QuotientLevel
from src.utils.wordops import Bits


class ReferenceLevel(QuotientLevel):
  """朴素实现：slot 是 Python 列表，自适应位串按 quotient 存在字典里"""

  def __init__(self, geom: LevelGeometry):
    super().__init__(geom)
    self.slots: List[Optional[Entry]] = [None] * geom.slots
    self.live_bits: Dict[int, List[Bits]] = {}
    self.ghost_bits: Dict[int, List[Bits]] = {}

  def _cluster(self, slot: int) -> Tuple[int, List[Entry]]:
    start = slot
    while start > 0 and self.slots[start - 1] is not None:
      start -= 1
    out = []
    j = start
    while j < len(self.slots) and self.slots[j] is not None:
      out.append(self.slots[j])
      j += 1
    return start, out

  def _write(self, start: int, old_len: int, entries: Sequence[Entry], positions: Sequence[int]) -> None:
    for j in range(start, start + old_len):
      self.slots[j] = None
    for entry, pos in zip(entries, positions):
      self.slots[pos] = entry

  def _has_run(self, quotient: int) -> bool:
    return quotient in self.live_bits

  def _live_strings(self, quotient: int) -> List[Bits]:
    return list(self.live_bits.get(quotient, ()))

  def _ghost_strings(self, quotient: int) -> List[Bits]:
    return list(self.ghost_bits.get(quotient, ()))

  def _insert_string(self, quotient: int, index: int, bits: Bits) -> None:
    self.live_bits.setdefault(quotient, []).insert(index, bits)

  def _remove_string(self, quotient: int, index: int) -> Bits:
    strings = self.live_bits[quotient]
    bits = strings.pop(index)
    if not strings:
      del self.live_bits[quotient]
    return bits

  def _extend_string(self, quotient: int, index: int, bits: Bits) -> None:
    self.live_bits[quotient][index] = bits

  def _append_ghost(self, quotient: int, bits: Bits) -> None:
    self.ghost_bits.setdefault(quotient, []).append(bits)

  def _drop_ghost(self, quotient: int, bits: Bits) -> bool:
    strings = self.ghost_bits.get(quotient)
    if not strings or bits not in strings:
      return False
    strings.remove(bits)
    if not strings:
      del self.ghost_bits[quotient]
    return True

  def occupied_slots(self) -> Iterator[Tuple[int, Entry]]:
    for slot, entry in enumerate(self.slots):
      if entry is not None:
        yield slot, entry

  def measure(self) -> LevelSpace:
    geom = self.geom
    space = LevelSpace(
      slot_bits=geom.slots * geom.rbits,
      metadata_bits=3 * geom.slots,
      live=self.live,
      ghosts=self.ghosts,
    )
    per_group: Dict[int, int] = {}
    for table in (self.live_bits, self.ghost_bits):
      for quotient, strings in table.items():
        bits = sum(s.length for s in strings)
        space.adaptivity_bits += bits
        space.boundary_bits += len(strings) + bits
        group = quotient // geom.group_width
        per_group[group] = per_group.get(group, 0) + bits
    space.max_group_bits = max(per_group.values(), default=0)
    return space

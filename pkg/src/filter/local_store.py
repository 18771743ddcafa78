"""
本地表示 L：主层 + 第二层（小 remainder 方案）或主层 + backyard（大 remainder 方案）。

- 主层与 backyard 使用主 hash h；第二层使用独立的 h2（HashBits.secondary()）
- 第二层的 quotient / remainder 宽度为 q2 / r2，q2 + r2 = q + r，因此 baseline 长度不变
- backyard 存完整 hash 与逻辑指纹长度
- ghost 只存在于主层 / 第二层的自适应位串组中，不占 slot；backyard 的 ghost 记在主层
"""
import math
from dataclasses import dataclass, field
from typing import Dict, Iterator, List, Optional, Tuple

from loguru import logger

from src.config.env import settings
from src.filter.level_base import Fingerprint, GhostHandle, Level, LevelGeometry, QuotientLevel
from src.filter.packed_level import PackedLevel
from src.filter.params_hash import HashBits, split_view
from src.filter.reference_level import ReferenceLevel
from src.model.ParamsModel import Params, Regime, StoreLayout
from src.model.ReportModel import SpaceReport
from src.utils.errors import (ContractError, CorruptionError, HashExhaustedError, ParamsError,
                              StaleHandleError, StructuralOverflowError)
from src.utils.wordops import Bits

BUILDS = {"packed": PackedLevel, "reference": ReferenceLevel}


@dataclass(frozen=True, slots=True)
class Hit:
  level: Level
  quotient: int
  remainder: int
  index: int
  fingerprint: Bits


@dataclass(slots=True)
class MatchReport:
  full: List[Hit] = field(default_factory=list)
  hard: List[Hit] = field(default_factory=list)

  @property
  def present(self) -> bool:
    return bool(self.full)


@dataclass(frozen=True, slots=True)
class Placement:
  level: Level
  quotient: int
  remainder: int
  length: int


@dataclass(slots=True)
class LocalTally:
  reads: int = 0
  writes: int = 0

  def drain(self) -> Tuple[int, int]:
    out = (self.reads, self.writes)
    self.reads = self.writes = 0
    return out


@dataclass(slots=True)
class BackyardEntry:
  full: Bits
  length: int

  def fingerprint(self) -> Bits:
    return self.full.prefix(self.length)


class Backyard:
  """大 remainder 方案的精确溢出表，按 baseline (quotient, remainder) 分桶"""

  def __init__(self, capacity: int, hash_len: int):
    self.capacity = capacity
    self.hash_len = hash_len
    self.buckets: Dict[Tuple[int, int], List[BackyardEntry]] = {}
    self.count = 0

  def bucket(self, quotient: int, remainder: int) -> List[BackyardEntry]:
    return self.buckets.get((quotient, remainder), [])

  def add(self, quotient: int, remainder: int, full: Bits, length: int) -> None:
    if self.count >= self.capacity:
      raise StructuralOverflowError(f"backyard full ({self.capacity} entries)")
    self.buckets.setdefault((quotient, remainder), []).append(BackyardEntry(full, length))
    self.count += 1

  def pop(self, quotient: int, remainder: int, index: int) -> BackyardEntry:
    entries = self.buckets[(quotient, remainder)]
    entry = entries.pop(index)
    if not entries:
      del self.buckets[(quotient, remainder)]
    self.count -= 1
    return entry

  def entries(self) -> Iterator[BackyardEntry]:
    for entries in self.buckets.values():
      yield from entries

  @property
  def bits(self) -> int:
    return self.count * (self.hash_len + self.hash_len.bit_length())


def layout_from_settings() -> StoreLayout:
  return StoreLayout(
    group_width=settings.group_width,
    buffer_bits=settings.buffer_bits,
    secondary_factor=settings.secondary_factor,
    backyard_factor=settings.backyard_factor,
  )


class LocalStore:

  def __init__(self, params: Params, build: Optional[str] = None, adaptive: bool = True,
               layout: Optional[StoreLayout] = None):
    build = build or settings.build
    if build not in BUILDS:
      raise ParamsError(f"unknown build {build!r}, expected one of {sorted(BUILDS)}")
    self.params = params
    self.build = build
    self.adaptive = adaptive
    self.layout = layout or layout_from_settings()
    self.base = params.q + params.r
    self.tally = LocalTally()
    level_cls = BUILDS[build]
    large = params.regime is Regime.LARGE
    self.primary: QuotientLevel = level_cls(LevelGeometry(
      kind=Level.PRIMARY,
      qbits=params.q,
      rbits=params.r,
      slots=math.ceil((1 + params.alpha) * params.n),
      probe_cap=params.probe_cap_L,
      signature_bits=params.signature_bits if large else 0,
      group_width=self.layout.group_width,
      buffer_bits=self.layout.buffer_bits,
    ))
    self.secondary: Optional[QuotientLevel] = None
    self.backyard: Optional[Backyard] = None
    if large:
      self.backyard = Backyard(math.ceil(self.layout.backyard_factor * params.n / params.q), params.hash_len)
      self.order = (Level.PRIMARY, Level.BACKYARD)
    else:
      # 第二层没有探测上限，末尾留 q2 个 slot 给越过最后一个 home 的 cluster
      tail = params.q2
      self.secondary = level_cls(LevelGeometry(
        kind=Level.SECONDARY,
        qbits=params.q2,
        rbits=params.r2,
        slots=(self.layout.secondary_factor << params.q2) + tail,
        tail=tail,
        group_width=self.layout.group_width,
        buffer_bits=self.layout.buffer_bits,
      ))
      self.order = (Level.PRIMARY, Level.SECONDARY)

  # ------------------------------
  # 辅助
  # ------------------------------
  def level(self, kind: Level) -> QuotientLevel:
    if kind is Level.PRIMARY:
      return self.primary
    if kind is Level.SECONDARY and self.secondary is not None:
      return self.secondary
    raise ValueError(f"level {kind.name} is not a quotient level in this regime")

  @staticmethod
  def view(kind: Level, h: HashBits) -> HashBits:
    return h.secondary() if kind is Level.SECONDARY else h

  def _split(self, kind: Level, view: HashBits) -> Tuple[int, int]:
    if kind is Level.SECONDARY:
      return split_view(view, self.params.q2, self.params.r2)
    return split_view(view, self.params.q, self.params.r)

  def _widths(self, kind: Level) -> Tuple[int, int]:
    if kind is Level.SECONDARY:
      return self.params.q2, self.params.r2
    return self.params.q, self.params.r

  def _run_hits(self, kind: Level, quotient: int, remainder: int) -> Iterator[Hit]:
    qbits, rbits = self._widths(kind)
    for i, fp in enumerate(self.level(kind).run(quotient)):
      if fp.remainder == remainder:
        yield Hit(kind, quotient, remainder, i, fp.bits(qbits, rbits))

  def _backyard_hits(self, quotient: int, remainder: int) -> Iterator[Hit]:
    for i, entry in enumerate(self.backyard.bucket(quotient, remainder)):
      yield Hit(Level.BACKYARD, quotient, remainder, i, entry.fingerprint())

  def _rivals(self, kind: Level, view: HashBits) -> Iterator[Hit]:
    """与 view 同一前缀空间、同一 baseline 的 live 指纹"""
    quotient, remainder = self._split(kind, view)
    if kind is Level.SECONDARY:
      yield from self._run_hits(kind, quotient, remainder)
      return
    yield from self._run_hits(Level.PRIMARY, quotient, remainder)
    if self.backyard is not None:
      yield from self._backyard_hits(quotient, remainder)

  # ------------------------------
  # 查询
  # ------------------------------
  def fp_query(self, h: HashBits) -> MatchReport:
    report = MatchReport()
    spaces = [Level.PRIMARY] if self.backyard is not None else [Level.PRIMARY, Level.SECONDARY]
    for kind in spaces:
      view = self.view(kind, h)
      bits = view.bits()
      self.tally.reads += 1
      for hit in self._rivals(kind, view):
        self.tally.reads += 1
        (report.full if hit.fingerprint.is_prefix_of(bits) else report.hard).append(hit)
    return report

  def entry_for(self, owner: HashBits, kind: Level) -> Hit:
    """owner 自己的指纹所在的条目"""
    view = self.view(kind, owner)
    bits = view.bits()
    quotient, remainder = self._split(kind, view)
    hits = self._backyard_hits(quotient, remainder) if kind is Level.BACKYARD else self._run_hits(kind, quotient, remainder)
    for hit in hits:
      if hit.fingerprint.is_prefix_of(bits):
        return hit
    logger.error(f"no {kind.name} entry is a prefix of the owner's hash")
    raise CorruptionError(f"missing {kind.name} entry for quotient {quotient}")

  def shortest_length(self, kind: Level, view: HashBits, inherit: int = 0) -> int:
    bits = view.bits()
    d = -1
    for hit in self._rivals(kind, view):
      d = max(d, hit.fingerprint.lcp(bits))
    return min(max(self.base + inherit, d + 1), self.params.hash_len)

  def ghost_match(self, h: HashBits) -> Optional[Bits]:
    best = None
    for kind in (Level.PRIMARY, Level.SECONDARY):
      if kind is Level.SECONDARY and self.secondary is None:
        continue
      view = self.view(kind, h)
      quotient, _ = self._split(kind, view)
      g = self.level(kind).ghost_match(quotient, view.bits().drop(self.base))
      if g is not None and (best is None or g.length > best.length):
        best = g
    self.tally.reads += 1
    return best

  # ------------------------------
  # 更新
  # ------------------------------
  def fp_insert(self, h: HashBits, inherit: int = 0) -> Placement:
    for kind in self.order:
      view = self.view(kind, h)
      length = self.shortest_length(kind, view, inherit) if self.adaptive else self.base
      bits = view.prefix(length)
      quotient, remainder = self._split(kind, view)
      if kind is Level.BACKYARD:
        self.backyard.add(quotient, remainder, view.bits(), length)
        self.tally.writes += 1
        return Placement(kind, quotient, remainder, length)
      if self.level(kind).try_insert(Fingerprint(quotient, remainder, bits.drop(self.base))):
        self.tally.writes += 2
        return Placement(kind, quotient, remainder, length)
      logger.debug(f"{kind.name} level rejected quotient {quotient}")
    raise StructuralOverflowError("secondary level cluster ran past the end of its array")

  def fp_extend_entry(self, kind: Level, owner: HashBits, query: HashBits) -> int:
    hit = self.entry_for(owner, kind)
    own = self.view(kind, owner).bits()
    other = self.view(kind, query).bits()
    if not hit.fingerprint.is_prefix_of(other):
      raise ContractError("extend called on an entry that is not a full collision")
    k = own.lcp(other)
    new_len = min(k + 1, self.params.hash_len)
    if new_len > hit.fingerprint.length:
      if kind is Level.BACKYARD:
        self.backyard.bucket(hit.quotient, hit.remainder)[hit.index].length = new_len
      else:
        self.level(kind).extend(hit.quotient, hit.index, own.prefix(new_len).drop(self.base))
      self.tally.writes += 1
    if k >= self.params.hash_len:
      raise HashExhaustedError(f"hashes agree on all {k} bits")
    return new_len - hit.fingerprint.length

  def remove_entry(self, kind: Level, owner: HashBits) -> Fingerprint:
    hit = self.entry_for(owner, kind)
    self.tally.writes += 2
    if kind is Level.BACKYARD:
      entry = self.backyard.pop(hit.quotient, hit.remainder, hit.index)
      return Fingerprint(hit.quotient, hit.remainder, entry.fingerprint().drop(self.base))
    return self.level(kind).remove(hit.quotient, hit.index)

  def fp_delete(self, kind: Level, owner: HashBits) -> Optional[GhostHandle]:
    fp = self.remove_entry(kind, owner)
    if not self.adaptive:
      return None
    ghost_kind = Level.SECONDARY if kind is Level.SECONDARY else Level.PRIMARY
    self.level(ghost_kind).add_ghost(fp.quotient, fp.adaptivity)
    return GhostHandle(ghost_kind, fp.quotient, fp.adaptivity)

  def purge_ghost(self, handle: GhostHandle) -> None:
    if not self.level(handle.level).remove_ghost(handle.quotient, handle.adaptivity):
      raise StaleHandleError(f"no ghost {handle.adaptivity!s} at {handle.level.name} quotient {handle.quotient}")
    self.tally.writes += 1

  # ------------------------------
  # 统计与检查
  # ------------------------------
  @property
  def live_count(self) -> int:
    count = self.primary.live
    if self.secondary is not None:
      count += self.secondary.live
    if self.backyard is not None:
      count += self.backyard.count
    return count

  @property
  def ghost_count(self) -> int:
    return self.primary.ghosts + (self.secondary.ghosts if self.secondary is not None else 0)

  def live_fingerprints(self) -> Dict[str, List[Bits]]:
    q, r = self.params.q, self.params.r
    main = [fp.bits(q, r) for fp in self.primary.entries()]
    if self.backyard is not None:
      main.extend(entry.fingerprint() for entry in self.backyard.entries())
    out = {"main": main}
    if self.secondary is not None:
      out["secondary"] = [fp.bits(self.params.q2, self.params.r2) for fp in self.secondary.entries()]
    return out

  def prefix_violations(self) -> List[Tuple[Bits, Bits]]:
    """返回互为前缀的指纹对；hash 全长相同的平局不计"""
    out = []
    full = self.params.hash_len
    for fps in self.live_fingerprints().values():
      ordered = sorted(fps, key=str)
      for a, b in zip(ordered, ordered[1:]):
        if a.is_prefix_of(b) and not (a == b and a.length == full):
          out.append((a, b))
    return out

  def max_secondary_displacement(self) -> int:
    if self.secondary is None:
      return 0
    return max(self.secondary.displacements(), default=0)

  def measure(self) -> SpaceReport:
    primary = self.primary.measure()
    report = SpaceReport(
      slot_bits=primary.slot_bits,
      metadata_bits=primary.metadata_bits,
      adaptivity_bits=primary.adaptivity_bits,
      boundary_bits=primary.boundary_bits,
      spill_bits=primary.spill_bits,
      groups_spilled=primary.groups_spilled,
      max_group_bits=primary.max_group_bits,
      live=self.live_count,
      ghosts=self.ghost_count,
    )
    if self.secondary is not None:
      second = self.secondary.measure()
      report.secondary_bits = second.slot_bits + second.metadata_bits
      report.adaptivity_bits += second.adaptivity_bits
      report.boundary_bits += second.boundary_bits
      report.spill_bits += second.spill_bits
      report.groups_spilled += second.groups_spilled
      report.max_group_bits = max(report.max_group_bits, second.max_group_bits)
    if self.backyard is not None:
      report.backyard_bits = self.backyard.bits
    return report

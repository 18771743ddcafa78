from typing import Dict, Optional

import orjson
from pydantic import BaseModel, Field


# 每个操作类别的访问计数
class ClassTally(BaseModel):
  remote_lookups: int = 0
  remote_updates: int = 0
  dictionary_ops: int = 0
  local_reads: int = 0
  local_writes: int = 0


class CounterReport(BaseModel):
  classes: Dict[str, ClassTally] = Field(default_factory=dict)
  repeat_collisions: int = Field(default=0, description="同一 (x, y, 两代 seed) 的 false positive 被修复了不止一次")
  hash_ties: int = Field(default=0, description="Extend 用尽 hash 位的次数")

  def totals(self) -> ClassTally:
    total = ClassTally()
    for tally in self.classes.values():
      for name in ClassTally.model_fields:
        setattr(total, name, getattr(total, name) + getattr(tally, name))
    return total

  def to_json(self) -> bytes:
    return orjson.dumps(self.model_dump(mode="json"), option=orjson.OPT_INDENT_2 | orjson.OPT_SORT_KEYS)


# 本地存储空间统计（单位：bit）
class SpaceReport(BaseModel):
  slot_bits: int = 0
  metadata_bits: int = 0
  adaptivity_bits: int = 0
  boundary_bits: int = 0
  secondary_bits: int = 0
  backyard_bits: int = 0
  spill_bits: int = 0
  whitelist_bits: int = 0
  filter_bits: int = Field(default=0, description="Bloom 位数组（仅 Bloom 类基线）")
  groups_spilled: int = 0
  max_group_bits: int = 0
  live: int = 0
  ghosts: int = 0

  @property
  def total_bits(self) -> int:
    return (self.slot_bits + self.metadata_bits + self.adaptivity_bits + self.boundary_bits
            + self.secondary_bits + self.backyard_bits + self.spill_bits + self.whitelist_bits + self.filter_bits)

  @property
  def bits_per_element(self) -> Optional[float]:
    return self.total_bits / self.live if self.live else None

  def to_dict(self) -> dict:
    data = self.model_dump()
    data["total_bits"] = self.total_bits
    data["bits_per_element"] = self.bits_per_element
    return data

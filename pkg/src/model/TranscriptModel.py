from typing import Dict, List, Optional

import orjson
from pydantic import BaseModel, Field

from src.model.ReportModel import ClassTally

JSON_OPTIONS = orjson.OPT_INDENT_2 | orjson.OPT_SORT_KEYS


# 每轮结束时的空间快照
class SpaceSample(BaseModel):
  live: int = 0
  total_bits: int = 0
  adaptivity_bits: int = 0
  max_group_bits: int = 0
  groups_spilled: int = 0
  bits_per_element: Optional[float] = None


# 一轮游戏的记录
class RoundRecord(BaseModel):
  round: int = Field(..., description="轮次，从 1 开始")
  queries: int = Field(default=0, description="本轮查询数")
  present: int = Field(default=0, description="返回 Present 的查询数")
  negatives: int = Field(default=0, description="查询 key 不在集合中的次数")
  false_positives: int = Field(default=0)
  distinct_fps: int = Field(default=0, description="本轮不同的误判 key 数")
  inserts: int = 0
  deletes: int = 0
  counters: Dict[str, ClassTally] = Field(default_factory=dict, description="本轮各操作类别的计数增量")
  space: SpaceSample = Field(default_factory=SpaceSample)

  @property
  def fpr(self) -> Optional[float]:
    return self.false_positives / self.negatives if self.negatives else None


class GameTranscript(BaseModel):
  amq: str
  adversary: str
  n: int
  eps_log2: int
  seed: int
  rounds: List[RoundRecord] = Field(default_factory=list)
  final_query: Optional[int] = Field(default=None, description="adversary 最终输出的 x'")
  final_present: bool = False
  won: bool = Field(default=False, description="final lookup 为 Present 且 x' 不在集合中")
  discovery_failed: bool = Field(default=False, description="delete-reinsert 未找到冲突对")
  white_box: bool = Field(default=False, description="冲突元素来自过滤器内部记录而非黑盒探测")
  repeat_collisions: int = 0
  hash_ties: int = 0

  def to_json(self) -> bytes:
    return orjson.dumps(self.model_dump(mode="json"), option=JSON_OPTIONS)


# summarize 输出的一行
class SummaryRow(BaseModel):
  round: int
  queries: int
  negatives: int
  false_positives: int
  fpr: Optional[float]
  cumulative_fps: int
  remote_query_negative: int = 0
  remote_query_false_positive: int = 0
  remote_query_true_positive: int = 0
  remote_insert: int = 0
  remote_delete: int = 0
  remote_adapt_reclaim: int = 0
  adaptivity_bits: int = 0
  bits_per_element: Optional[float] = None


class SummaryTable(BaseModel):
  amq: str
  adversary: str
  n: int
  eps_log2: int
  seed: int
  rows: List[SummaryRow] = Field(default_factory=list)
  total_queries: int = 0
  total_negatives: int = 0
  total_false_positives: int = 0
  fpr: Optional[float] = None
  max_round_fpr: Optional[float] = None
  won: bool = False
  discovery_failed: bool = False
  repeat_collisions: int = 0
  hash_ties: int = 0

  def to_json(self) -> bytes:
    return orjson.dumps(self.model_dump(mode="json"), option=JSON_OPTIONS)


# CSV 表头：列名 + 单位
CSV_COLUMNS = [
  ("seed", "id"),
  ("round", "index"),
  ("queries", "count"),
  ("negatives", "count"),
  ("false_positives", "count"),
  ("fpr", "fraction"),
  ("cumulative_fps", "count"),
  ("remote_query_negative", "accesses"),
  ("remote_query_false_positive", "accesses"),
  ("remote_query_true_positive", "accesses"),
  ("remote_insert", "accesses"),
  ("remote_delete", "accesses"),
  ("remote_adapt_reclaim", "accesses"),
  ("adaptivity_bits", "bits"),
  ("bits_per_element", "bits"),
]

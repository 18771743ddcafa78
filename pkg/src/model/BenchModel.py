from typing import Optional

from pydantic import BaseModel, Field


# 吞吐量测试的一行（时间不可逐字节复现，计数可以）
class BenchRow(BaseModel):
  amq: str
  operation: str
  ops: int = Field(..., description="执行次数")
  seconds: float = Field(..., description="耗时（秒）")

  @property
  def ops_per_sec(self) -> Optional[float]:
    return self.ops / self.seconds if self.seconds > 0 else None


# 满载空间报告与上界检查
class SpaceCheck(BaseModel):
  amq: str
  n: int
  eps_log2: int
  alpha: float
  total_bits: int
  bits_per_element: Optional[float]
  info_bound_bits: int = Field(..., description="每元素信息论下界 r = log2(1/epsilon)")
  local_bound_bits: float = Field(..., description="(1+alpha)*n*(r+3) + 10n + 第二层/backyard 位数")
  extra_bits: int = Field(..., description="第二层或 backyard 位数")
  extra_bound_bits: float = Field(..., description="2 * n*(q+r)/log2 n")
  adaptivity_bits: int
  groups_spilled: int
  within_bound: bool
  report: dict = Field(default_factory=dict)

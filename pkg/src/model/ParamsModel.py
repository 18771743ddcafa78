from enum import Enum

from pydantic import BaseModel, ConfigDict, Field, computed_field


class Regime(str, Enum):
  SMALL = 'small-remainder'
  LARGE = 'large-remainder'


# 所有派生参数，构造后不可变
class Params(BaseModel):
  model_config = ConfigDict(frozen=True)

  n: int = Field(description="容量，2 的幂")
  eps_log2: int = Field(description="epsilon = 2^-eps_log2")
  q: int = Field(description="quotient 位数 = log2(n)")
  r: int = Field(description="remainder 位数 = log2(1/epsilon)")
  c_hash: int = Field(description="hash 长度 = c_hash * q（可能被自动调高）")
  alpha: float = Field(description="slot 冗余比例")
  probe_cap_L: int = Field(description="主层最大探测长度（slot 数）")
  regime: Regime
  reclaim_batch: int = Field(description="每次 Extend 回收的元素数")
  signature_bits: int = Field(description="大 remainder 方案中的签名位数 s")
  q2: int = Field(description="小 remainder 方案第二层 quotient 位数")
  r2: int = Field(description="小 remainder 方案第二层 remainder 位数")

  @computed_field
  @property
  def epsilon(self) -> float:
    return 2.0 ** -self.eps_log2

  @computed_field
  @property
  def hash_len(self) -> int:
    return self.c_hash * self.q

  @property
  def baseline_len(self) -> int:
    return self.q + self.r


# 本地存储布局，构造时从配置取缺省值，快照中原样保存
class StoreLayout(BaseModel):
  model_config = ConfigDict(frozen=True)

  group_width: int = Field(gt=0, description="每个自适应位串组覆盖的 quotient 数")
  buffer_bits: int = Field(gt=0, description="每组缓冲区位数")
  secondary_factor: int = Field(gt=0, description="第二层每个 quotient 的 slot 数")
  backyard_factor: int = Field(gt=0, description="backyard 容量系数（× n / q）")

from enum import Enum
from typing import List, Optional

from pydantic import BaseModel, Field, field_validator

from src.utils.errors import ParamsError


class Command(str, Enum):
  SIMULATE = 'simulate'
  VERIFY = 'verify'
  BENCH = 'bench'
  SPACE = 'space'


class OutputFormat(str, Enum):
  JSON = 'json'
  CSV = 'csv'


# 命令行参数校验后的运行配置
class RunConfig(BaseModel):
  command: Command
  amq: str = Field(default="broom", description="AMQ 名称")
  adversary: str = Field(default="repeat-fp", description="adversary 名称")
  n: int = Field(default=1 << 14, description="容量，2 的幂")
  eps_log2: int = Field(default=6, ge=1, description="epsilon = 2^-eps_log2")
  seeds: List[int] = Field(default_factory=lambda: [1])
  rounds: int = Field(default=50, ge=1)
  output: Optional[str] = Field(default=None, description="结果文件路径，缺省写到 RESULTS_DIR")
  format: OutputFormat = OutputFormat.CSV
  build: Optional[str] = Field(default=None, description="packed | reference")
  workers: int = Field(default=1, ge=1)
  suites: List[str] = Field(default_factory=list, description="verify 要运行的 suite，空表示全部")
  ops: int = Field(default=20000, ge=1, description="verify / bench 的随机操作数")
  queries: Optional[int] = Field(default=None, description="每轮查询数，缺省为 n")
  trials: Optional[int] = Field(default=None, description="delete-reinsert 探测上限")
  iterations: int = Field(default=100, ge=1, description="delete-reinsert 每轮攻击循环次数")

  @field_validator("n")
  @classmethod
  def _power_of_two(cls, value: int) -> int:
    if value < 16 or value & (value - 1):
      raise ParamsError(f"n must be a power of two >= 16, got {value}")
    return value

  @field_validator("build")
  @classmethod
  def _known_build(cls, value: Optional[str]) -> Optional[str]:
    if value is not None and value not in ("packed", "reference"):
      raise ParamsError(f"unknown build {value!r}")
    return value

  @property
  def seed(self) -> int:
    return self.seeds[0]

  def default_output(self, results_dir: str) -> str:
    suffix = self.format.value
    return self.output or f"{results_dir}/{self.command.value}-{self.amq}-{self.seed}.{suffix}"

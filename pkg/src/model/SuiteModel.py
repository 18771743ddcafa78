from typing import ClassVar, List

import orjson
from pydantic import BaseModel, Field


# 单个校验 suite 的结果
class SuiteResult(BaseModel):
  name: str
  passed: bool = True
  checked: int = Field(default=0, description="执行的检查次数")
  failures: List[str] = Field(default_factory=list, description="前若干条失败信息")
  detail: dict = Field(default_factory=dict)

  MAX_FAILURES: ClassVar[int] = 20

  def fail(self, message: str) -> None:
    self.passed = False
    if len(self.failures) < self.MAX_FAILURES:
      self.failures.append(message)

  def line(self) -> str:
    status = "PASS" if self.passed else "FAIL"
    return f"{status} {self.name} ({self.checked} checks)"


def results_json(results: List[SuiteResult]) -> bytes:
  return orjson.dumps([r.model_dump(mode="json") for r in results],
                      option=orjson.OPT_INDENT_2 | orjson.OPT_SORT_KEYS)

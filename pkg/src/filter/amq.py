from typing import Optional, Protocol, runtime_checkable

from src.model.ReportModel import CounterReport, SpaceReport


@runtime_checkable
class Amq(Protocol):
  """
  harness 使用的统一接口；lookup 返回 True 表示 Present。
  member 是调用方已知的真实成员关系（oracle 的集合），只用来给查询计数归类。
  """
  name: str
  supports_delete: bool

  def lookup(self, x: int, member: Optional[bool] = None) -> bool: ...

  def insert(self, x: int) -> None: ...

  def delete(self, x: int) -> None: ...

  def adapt(self, x: int) -> None: ...

  def measure(self) -> SpaceReport: ...

  def counter_report(self) -> CounterReport: ...

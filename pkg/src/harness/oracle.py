"""
游戏中的 oracle：包住任意 AMQ，维护真实集合 S，保证 adversary 遵守 AMQ 的前置条件，
并且恰好在误判时调用 adapt。
"""
from dataclasses import dataclass, field
from typing import Set

from loguru import logger

from src.filter.amq import Amq
from src.utils.errors import CapacityError, ContractError, CorruptionError, UnsupportedOperationError


@dataclass
class RoundStats:
  queries: int = 0
  present: int = 0
  negatives: int = 0
  false_positives: int = 0
  inserts: int = 0
  deletes: int = 0
  fp_keys: Set[int] = field(default_factory=set)


class Oracle:

  def __init__(self, amq: Amq, capacity: int):
    self.amq = amq
    self.capacity = capacity
    self.members: Set[int] = set()
    self.stats = RoundStats()

  def reset_stats(self) -> RoundStats:
    stats, self.stats = self.stats, RoundStats()
    return stats

  def lookup(self, x: int) -> bool:
    present = self.amq.lookup(x, member=x in self.members)
    stats = self.stats
    stats.queries += 1
    stats.present += present
    if x in self.members:
      if not present:
        logger.error(f"{self.amq.name} returned Absent for member {x}")
        raise CorruptionError(f"false negative on {x}")
      return present
    stats.negatives += 1
    if present:
      stats.false_positives += 1
      stats.fp_keys.add(x)
      self.amq.adapt(x)
    return present

  def insert(self, x: int) -> None:
    if x in self.members:
      raise ContractError(f"{x} is already in the set")
    if len(self.members) >= self.capacity:
      raise CapacityError(f"set already holds {self.capacity} keys")
    self.amq.insert(x)
    self.members.add(x)
    self.stats.inserts += 1

  def delete(self, x: int) -> None:
    if not self.amq.supports_delete:
      raise UnsupportedOperationError(f"{self.amq.name} does not support delete")
    if x not in self.members:
      raise ContractError(f"{x} is not in the set")
    self.amq.delete(x)
    self.members.discard(x)
    self.stats.deletes += 1

  @property
  def room(self) -> int:
    return self.capacity - len(self.members)

"""
满足 oracle 前置条件的随机操作序列（insert / delete / 重新插入 / 正查询 / 负查询 / 重复负查询）。
"""
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional

import numpy as np

from src.harness.keys import KeyStream
from src.harness.oracle import Oracle

OpCallback = Callable[[str, int], None]


@dataclass
class _KeyPool:
  items: List[int] = field(default_factory=list)
  where: Dict[int, int] = field(default_factory=dict)

  def add(self, key: int) -> None:
    self.where[key] = len(self.items)
    self.items.append(key)

  def remove(self, key: int) -> None:
    i = self.where.pop(key)
    last = self.items.pop()
    if last != key:
      self.items[i] = last
      self.where[last] = i

  def pick(self, rng: np.random.Generator) -> int:
    return self.items[int(rng.integers(len(self.items)))]

  def __len__(self) -> int:
    return len(self.items)


def random_workload(oracle: Oracle, keys: KeyStream, rng: np.random.Generator, ops: int,
                    after: Optional[OpCallback] = None, recent: int = 64) -> Dict[str, int]:
  live = _KeyPool()
  for key in oracle.members:
    live.add(key)
  gone = _KeyPool()
  negatives: List[int] = []
  counts = {"insert": 0, "delete": 0, "lookup": 0}
  can_delete = oracle.amq.supports_delete

  for _ in range(ops):
    roll = rng.random()
    if roll < 0.35 and oracle.room > 0:
      if len(gone) and rng.random() < 0.3:
        key = gone.pick(rng)
        gone.remove(key)
      else:
        key = keys.members(1)[0]
      oracle.insert(key)
      live.add(key)
      op = "insert"
    elif roll < 0.5 and can_delete and len(live):
      key = live.pick(rng)
      oracle.delete(key)
      live.remove(key)
      gone.add(key)
      op = "delete"
    elif roll < 0.7 and len(live):
      key = live.pick(rng)
      oracle.lookup(key)
      op = "lookup"
    else:
      if negatives and rng.random() < 0.5:
        key = negatives[int(rng.integers(len(negatives)))]
      else:
        key = keys.negatives(1)[0]
        negatives.append(key)
        if len(negatives) > recent:
          negatives.pop(0)
      oracle.lookup(key)
      op = "lookup"
    counts[op] += 1
    if after is not None:
      after(op, key)
  return counts

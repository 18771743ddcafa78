"""
确定性 key 流：可插入 key 在 [0, 2^63)，负查询 key 最高位为 1，两者天然不相交。
"""
from typing import List, Set

import numpy as np

NEGATIVE_BIT = 1 << 63
_SPAN = 1 << 63


def is_negative_key(x: int) -> bool:
  return bool(x & NEGATIVE_BIT)


class KeyStream:

  def __init__(self, seed: int):
    self.rng = np.random.default_rng(seed)
    self.issued: Set[int] = set()

  def _fresh(self, count: int, tag: int) -> List[int]:
    out: List[int] = []
    while len(out) < count:
      draw = self.rng.integers(0, _SPAN, size=count - len(out), dtype=np.uint64)
      for value in draw.tolist():
        key = value | tag
        if key not in self.issued:
          self.issued.add(key)
          out.append(key)
    return out

  def members(self, count: int) -> List[int]:
    """从未发出过的可插入 key"""
    return self._fresh(count, 0)

  def negatives(self, count: int) -> List[int]:
    """从未发出过的负查询 key"""
    return self._fresh(count, NEGATIVE_BIT)

"""
adversary 集合：

- oblivious        插满 n 个 key 后，每轮发 n 个从未出现过的负查询，不看结果
- repeat-fp        第一轮发 n 个负查询，之后每轮只重放上一轮的误判集合，集合为空后空转
- delete-reinsert  先找到误判 x 及其冲突元素 y，再循环 lookup(x)、delete(y)、insert(y)
"""
from abc import ABC, abstractmethod
from typing import TYPE_CHECKING, Dict, List, Optional, Type

from loguru import logger

from src.utils.errors import UnknownNameError

if TYPE_CHECKING:
  from src.harness.game import Game


def fill(game: "Game", count: int) -> List[int]:
  keys = game.keys.members(count)
  for key in keys:
    game.oracle.insert(key)
  return keys


class Adversary(ABC):
  name: str

  def __init__(self, rounds: int, queries: Optional[int] = None, trials: Optional[int] = None,
               iterations: int = 100):
    self.rounds = rounds
    self.queries = queries
    self.trials = trials
    self.iterations = iterations

  @abstractmethod
  def play(self, game: "Game") -> int:
    """执行整局游戏，返回最终猜测 x'"""


class ObliviousAdversary(Adversary):
  name = "oblivious"

  def play(self, game: "Game") -> int:
    fill(game, game.n)
    per_round = self.queries or game.n
    for _ in range(self.rounds):
      for x in game.keys.negatives(per_round):
        game.oracle.lookup(x)
      game.close_round()
    return game.keys.negatives(1)[0]


class RepeatFpAdversary(Adversary):
  name = "repeat-fp"

  def play(self, game: "Game") -> int:
    fill(game, game.n)
    batch = game.keys.negatives(self.queries or game.n)
    guess = None
    for _ in range(self.rounds):
      fps = [x for x in batch if game.oracle.lookup(x)]
      game.close_round()
      if fps:
        guess = fps[0]
      batch = fps
    return guess if guess is not None else game.keys.negatives(1)[0]


class DeleteReinsertAdversary(Adversary):
  name = "delete-reinsert"

  def _find_false_positive(self, game: "Game", cap: int) -> Optional[int]:
    chunk = max(1, min(cap, 1024))
    tried = 0
    while tried < cap:
      for x in game.keys.negatives(min(chunk, cap - tried)):
        tried += 1
        if game.oracle.lookup(x):
          return x
    return None

  def _find_collider(self, game: "Game", x: int, members: List[int], cap: int) -> Optional[int]:
    oracle = game.oracle
    if oracle.lookup(x):
      # x 仍是误判：依次删除成员直到 x 变为 Absent，最后删掉的就是 y；之后全部插回
      removed: List[int] = []
      found = None
      for y in members[:cap]:
        oracle.delete(y)
        removed.append(y)
        if not oracle.lookup(x):
          found = y
          break
      for y in removed:
        oracle.insert(y)
      return found
    hint = getattr(game.amq, "collider_of", None)
    if hint is None:
      return None
    game.transcript.white_box = True
    return hint(x)

  def play(self, game: "Game") -> int:
    members = fill(game, max(1, game.n // 2))
    cap = self.trials or 4 * game.n
    x = self._find_false_positive(game, cap)
    y = None
    if x is not None and game.amq.supports_delete:
      y = self._find_collider(game, x, members, cap)
    if y is None:
      game.transcript.discovery_failed = True
      logger.info(f"{game.amq.name}: no colliding pair found within {cap} trials")
    oracle = game.oracle
    for _ in range(self.rounds):
      if y is not None:
        for _ in range(self.iterations):
          oracle.lookup(x)
          oracle.delete(y)
          oracle.insert(y)
      game.close_round()
    return x if x is not None else game.keys.negatives(1)[0]


ADVERSARIES: Dict[str, Type[Adversary]] = {
  cls.name: cls for cls in (ObliviousAdversary, RepeatFpAdversary, DeleteReinsertAdversary)
}


def make_adversary(name: str, rounds: int, **options) -> Adversary:
  cls = ADVERSARIES.get(name)
  if cls is None:
    raise UnknownNameError(f"unknown adversary {name!r}, expected one of {sorted(ADVERSARIES)}")
  return cls(rounds, **options)

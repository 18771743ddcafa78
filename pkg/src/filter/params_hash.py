"""
参数推导与两代 hash（h_a / h_b）。

hash 位按 64 位块懒生成：块 i = xxh3_64(element, block=i, salt) 以 generation seed 为种子，
各块按 MSB-first 依次拼接，截断到 c_hash * q 位。salt=0 为主 hash，salt=1 为第二层 h2。
"""
import math
import struct
from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Callable, Optional, Tuple

import xxhash
from loguru import logger

from src.config.env import settings
from src.model.ParamsModel import Params, Regime
from src.utils.errors import ParamsError
from src.utils.wordops import Bits

NEG_INF = -1
KEY_MASK = (1 << 64) - 1
BLOCK_BITS = 64
MAIN_SALT = 0
SECONDARY_SALT = 1

_BLOCK = struct.Struct("<QIB")
_SEED = struct.Struct("<QQ")

BlockHasher = Callable[[int, int, int, int], int]


def block_hash(element: int, seed: int, block: int, salt: int) -> int:
  return xxhash.xxh3_64_intdigest(_BLOCK.pack(element & KEY_MASK, block, salt), seed=seed)


def derive_seed(master_seed: int, index: int) -> int:
  return xxhash.xxh3_64_intdigest(_SEED.pack(master_seed & KEY_MASK, index), seed=0x5EED)


def _exact_log2(value: int, what: str) -> int:
  if value < 1 or value & (value - 1):
    raise ParamsError(f"{what}={value} is not a power of two")
  return value.bit_length() - 1


def _eps_log2(epsilon) -> int:
  frac = Fraction(epsilon) if not isinstance(epsilon, float) else Fraction(epsilon).limit_denominator(1 << 62)
  if frac <= 0 or frac.numerator != 1:
    raise ParamsError(f"epsilon={epsilon} is not a reciprocal power of two")
  return _exact_log2(frac.denominator, "1/epsilon")


def derive_params(n: int, epsilon=None, *, eps_log2: Optional[int] = None,
                  c_hash: Optional[int] = None, reclaim_batch: Optional[int] = None) -> Params:
  """
  由 (n, epsilon) 推导全部参数；epsilon 可以是 float / Fraction，或直接给 eps_log2。
  """
  q = _exact_log2(n, "n")
  if n < 16:
    raise ParamsError(f"n={n} must be at least 16")
  if eps_log2 is None:
    if epsilon is None:
      raise ParamsError("either epsilon or eps_log2 is required")
    eps_log2 = _eps_log2(epsilon)
  r = eps_log2
  if r < 1:
    raise ParamsError(f"eps_log2={r} must be at least 1")

  c = c_hash or settings.c_hash
  if c * q < q + r + 16:
    raised = math.ceil((q + r + 16) / q)
    logger.debug(f"c_hash raised from {c} to {raised} (q={q}, r={r})")
    c = raised

  lglg = math.log2(q)
  regime = Regime.SMALL if r <= 2 * lglg else Regime.LARGE
  floor = settings.alpha_floor
  if regime is Regime.SMALL:
    alpha = max(floor, math.sqrt(9 * r * lglg / q))
    probe_cap = math.ceil(q / r)
  else:
    alpha = max(floor, math.sqrt(18 * lglg * lglg / q))
    probe_cap = math.ceil(q / (2 * lglg))

  q2 = q - round(lglg)
  return Params(
    n=n,
    eps_log2=r,
    q=q,
    r=r,
    c_hash=c,
    alpha=alpha,
    probe_cap_L=max(1, probe_cap),
    regime=regime,
    reclaim_batch=reclaim_batch or settings.reclaim_batch,
    signature_bits=2 * math.ceil(lglg),
    q2=q2,
    r2=q + r - q2,
  )


class HashBits:
  """某个元素在某一代 hash 下的位序列，按块懒生成"""
  __slots__ = ("element", "seed", "length", "salt", "hasher", "_value", "_have")

  def __init__(self, element: int, seed: int, length: int, salt: int = MAIN_SALT,
               hasher: BlockHasher = block_hash):
    self.element = element
    self.seed = seed
    self.length = length
    self.salt = salt
    self.hasher = hasher
    self._value = 0
    self._have = 0

  @classmethod
  def fixed(cls, text: str, length: Optional[int] = None) -> "HashBits":
    """由显式位串构造（不足 length 的部分补 0）"""
    length = length or len(text)
    h = cls(0, 0, length)
    h._value = int(text.ljust(length, "0")[:length], 2)
    h._have = length
    return h

  def _ensure(self, k: int) -> None:
    while self._have < k:
      block = self._have // BLOCK_BITS
      self._value = (self._value << BLOCK_BITS) | self.hasher(self.element, self.seed, block, self.salt)
      self._have += BLOCK_BITS

  def prefix(self, k: int) -> Bits:
    k = min(k, self.length)
    self._ensure(k)
    return Bits(self._value >> (self._have - k), k)

  def bits(self) -> Bits:
    return self.prefix(self.length)

  def bit(self, i: int) -> int:
    if not 0 <= i < self.length:
      raise IndexError(f"bit {i} outside hash of length {self.length}")
    self._ensure(i + 1)
    return (self._value >> (self._have - i - 1)) & 1

  def secondary(self) -> "HashBits":
    if self.salt == SECONDARY_SALT:
      return self
    return HashBits(self.element, self.seed, self.length, SECONDARY_SALT, self.hasher)

  def __eq__(self, other) -> bool:
    return isinstance(other, HashBits) and self.length == other.length and self.bits() == other.bits()

  def __hash__(self) -> int:
    return hash(self.bits())

  def __repr__(self) -> str:
    return f"HashBits({self.bits()!s})"


@dataclass(frozen=True, slots=True)
class PhaseState:
  master_seed: int
  frontier_z: int = NEG_INF
  phase_index: int = 0
  seed_a: int = 0
  seed_b: int = 0

  @classmethod
  def initial(cls, master_seed: int) -> "PhaseState":
    return cls(master_seed, NEG_INF, 0, derive_seed(master_seed, 0), derive_seed(master_seed, 1))

  def seed_for(self, x: int) -> int:
    return self.seed_b if x <= self.frontier_z else self.seed_a


def hash_bits(params: Params, phase: PhaseState, x: int, hasher: BlockHasher = block_hash) -> HashBits:
  return HashBits(x, phase.seed_for(x), params.hash_len, MAIN_SALT, hasher)


def split_baseline(params: Params, h: HashBits) -> Tuple[int, int]:
  return split_view(h, params.q, params.r)


def split_view(h: HashBits, qbits: int, rbits: int) -> Tuple[int, int]:
  baseline = h.prefix(qbits + rbits).value
  return baseline >> rbits, baseline & ((1 << rbits) - 1)


def advance_phase_if_done(phase: PhaseState, max_key: Optional[int]) -> PhaseState:
  # frontier 仍在 -inf 时不换代
  if phase.frontier_z == NEG_INF:
    return phase
  if max_key is not None and phase.frontier_z < max_key:
    return phase
  index = phase.phase_index + 1
  logger.info(f"phase {index} begins (frontier passed {phase.frontier_z})")
  return replace(
    phase,
    frontier_z=NEG_INF,
    phase_index=index,
    seed_a=phase.seed_b,
    seed_b=derive_seed(phase.master_seed, index + 1),
  )

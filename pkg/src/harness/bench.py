"""
bench：各 AMQ 的吞吐量；space：broom filter 满载时的本地空间与上界。
"""
import time
from typing import List, Optional

from loguru import logger

from src.filter.baselines import make_amq
from src.filter.broom_filter import BroomFilter
from src.harness.game import ADAPTIVITY_BITS_PER_ELEMENT
from src.harness.keys import KeyStream
from src.model.BenchModel import BenchRow, SpaceCheck


def _timed(amq: str, operation: str, keys: List[int], fn) -> BenchRow:
  start = time.perf_counter()
  for key in keys:
    fn(key)
  return BenchRow(amq=amq, operation=operation, ops=len(keys), seconds=time.perf_counter() - start)


def bench_amq(name: str, n: int, eps_log2: int, seed: int, build: Optional[str] = None) -> List[BenchRow]:
  amq = make_amq(name, n, eps_log2, seed, build)
  stream = KeyStream(seed)
  members = stream.members(n)
  negatives = stream.negatives(n)
  rows = [
    _timed(name, "insert", members, amq.insert),
    _timed(name, "lookup_positive", members, lambda x: amq.lookup(x, True)),
  ]
  fps: List[int] = []

  def negative(x: int) -> None:
    if amq.lookup(x, False):
      fps.append(x)

  rows.append(_timed(name, "lookup_negative", negatives, negative))
  rows.append(_timed(name, "adapt", fps, amq.adapt))
  if amq.supports_delete:
    rows.append(_timed(name, "delete", members[: n // 2], amq.delete))
  for row in rows:
    logger.debug(f"{name} {row.operation}: {row.ops} ops in {row.seconds:.3f}s")
  return rows


def space_check(n: int, eps_log2: int, seed: int, adapt_rounds: int = 1) -> SpaceCheck:
  """插满 n 个 key，再做 adapt_rounds 轮负查询（误判即 adapt），然后测量"""
  bf = BroomFilter(n, eps_log2=eps_log2, seed=seed, build="packed")
  stream = KeyStream(seed)
  for key in stream.members(n):
    bf.insert(key)
  for _ in range(adapt_rounds):
    for x in stream.negatives(n):
      bf.checked_lookup(x)
  report = bf.measure()
  p = bf.params
  extra = report.secondary_bits + report.backyard_bits
  local_bound = (1 + p.alpha) * n * (p.r + 3) + ADAPTIVITY_BITS_PER_ELEMENT * n + extra
  extra_bound = 2 * n * (p.q + p.r) / p.q
  check = SpaceCheck(
    amq=bf.name,
    n=n,
    eps_log2=eps_log2,
    alpha=p.alpha,
    total_bits=report.total_bits,
    bits_per_element=report.bits_per_element,
    info_bound_bits=p.r,
    local_bound_bits=local_bound,
    extra_bits=extra,
    extra_bound_bits=extra_bound,
    adaptivity_bits=report.adaptivity_bits,
    groups_spilled=report.groups_spilled,
    within_bound=report.total_bits <= local_bound and extra <= extra_bound,
    report=report.to_dict(),
  )
  logger.info(f"space n={n} r={p.r}: {check.total_bits} bits, {check.bits_per_element:.2f} bits/element")
  return check

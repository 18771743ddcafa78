"""
adaptivity game：oracle + adversary + 每轮记录，以及 transcript 汇总。
"""
from concurrent.futures import ThreadPoolExecutor
from typing import Dict, Iterable, List, Optional

from loguru import logger

from src.filter.amq import Amq
from src.filter.baselines import make_amq
from src.filter.params_hash import derive_seed
from src.harness.adversaries import make_adversary
from src.harness.keys import KeyStream
from src.harness.oracle import Oracle
from src.model.ReportModel import ClassTally
from src.model.TranscriptModel import GameTranscript, RoundRecord, SpaceSample, SummaryRow, SummaryTable

# key 流种子与 AMQ 种子分开派生
KEY_STREAM_INDEX = 0x6B6579

# adaptivity 位预算：总量按元素计，单个 group 按 log2 n 计
ADAPTIVITY_BITS_PER_ELEMENT = 10
GROUP_BITS_PER_LOG_N = 8


def _delta(before: Dict[str, ClassTally], after: Dict[str, ClassTally]) -> Dict[str, ClassTally]:
  out = {}
  for name, tally in after.items():
    prev = before.get(name, ClassTally())
    out[name] = ClassTally(**{f: getattr(tally, f) - getattr(prev, f) for f in ClassTally.model_fields})
  return out


def _remote(tally: Optional[ClassTally]) -> int:
  if tally is None:
    return 0
  return tally.remote_lookups + tally.remote_updates + tally.dictionary_ops


class Game:

  def __init__(self, amq: Amq, transcript: GameTranscript):
    self.amq = amq
    self.transcript = transcript
    self.n = transcript.n
    self.oracle = Oracle(amq, transcript.n)
    self.keys = KeyStream(derive_seed(transcript.seed, KEY_STREAM_INDEX))
    self._counters = amq.counter_report().classes

  def close_round(self) -> RoundRecord:
    stats = self.oracle.reset_stats()
    counters = self.amq.counter_report().classes
    space = self.amq.measure()
    record = RoundRecord(
      round=len(self.transcript.rounds) + 1,
      queries=stats.queries,
      present=stats.present,
      negatives=stats.negatives,
      false_positives=stats.false_positives,
      distinct_fps=len(stats.fp_keys),
      inserts=stats.inserts,
      deletes=stats.deletes,
      counters=_delta(self._counters, counters),
      space=SpaceSample(
        live=space.live,
        total_bits=space.total_bits,
        adaptivity_bits=space.adaptivity_bits,
        max_group_bits=space.max_group_bits,
        groups_spilled=space.groups_spilled,
        bits_per_element=space.bits_per_element,
      ),
    )
    self._counters = counters
    self.transcript.rounds.append(record)
    return record


def run_game(amq: str, adversary: str, n: int, eps_log2: int, seed: int, rounds: int,
             build: Optional[str] = None, **options) -> GameTranscript:
  player = make_adversary(adversary, rounds, **options)
  filt = make_amq(amq, n, eps_log2, seed, build)
  transcript = GameTranscript(amq=amq, adversary=adversary, n=n, eps_log2=eps_log2, seed=seed)
  game = Game(filt, transcript)
  guess = player.play(game)

  # 最终查询：b <- Oracle.Lookup[x']
  present = game.oracle.lookup(guess)
  game.oracle.reset_stats()
  transcript.final_query = guess
  transcript.final_present = present
  transcript.won = present and guess not in game.oracle.members
  report = filt.counter_report()
  transcript.repeat_collisions = report.repeat_collisions
  transcript.hash_ties = report.hash_ties
  logger.debug(f"game {amq} vs {adversary} seed={seed}: won={transcript.won}")
  return transcript


def run_games(amq: str, adversary: str, n: int, eps_log2: int, seeds: Iterable[int], rounds: int,
              workers: int = 1, build: Optional[str] = None, **options) -> List[GameTranscript]:
  """多个种子并行跑，结果按种子排序"""
  seeds = sorted(set(seeds))
  with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
    futures = {
      s: pool.submit(run_game, amq, adversary, n, eps_log2, s, rounds, build, **options) for s in seeds
    }
    return [futures[s].result() for s in seeds]


def summarize(transcript: GameTranscript) -> SummaryTable:
  rows = []
  cumulative = 0
  for record in transcript.rounds:
    cumulative += record.false_positives
    counters = record.counters
    rows.append(SummaryRow(
      round=record.round,
      queries=record.queries,
      negatives=record.negatives,
      false_positives=record.false_positives,
      fpr=record.fpr,
      cumulative_fps=cumulative,
      remote_query_negative=_remote(counters.get("query_negative")),
      remote_query_false_positive=_remote(counters.get("query_false_positive")),
      remote_query_true_positive=_remote(counters.get("query_true_positive")),
      remote_insert=_remote(counters.get("insert")),
      remote_delete=_remote(counters.get("delete")),
      remote_adapt_reclaim=_remote(counters.get("adapt_reclaim")),
      adaptivity_bits=record.space.adaptivity_bits,
      bits_per_element=record.space.bits_per_element,
    ))
  negatives = sum(r.negatives for r in rows)
  rates = [r.fpr for r in rows if r.fpr is not None]
  return SummaryTable(
    amq=transcript.amq,
    adversary=transcript.adversary,
    n=transcript.n,
    eps_log2=transcript.eps_log2,
    seed=transcript.seed,
    rows=rows,
    total_queries=sum(r.queries for r in rows),
    total_negatives=negatives,
    total_false_positives=cumulative,
    fpr=cumulative / negatives if negatives else None,
    max_round_fpr=max(rates) if rates else None,
    won=transcript.won,
    discovery_failed=transcript.discovery_failed,
    repeat_collisions=transcript.repeat_collisions,
    hash_ties=transcript.hash_ties,
  )


def win_rate(transcripts: Iterable[GameTranscript]) -> float:
  games = list(transcripts)
  return sum(t.won for t in games) / len(games) if games else 0.0


def adaptivity_breaches(transcript: GameTranscript) -> List[str]:
  """
  逐轮检查空间快照：adaptivity 总位数不超过 10n，
  最大 group 不超过 8 log2 n，已溢出到 spill 表的除外。
  """
  n = transcript.n
  total_cap = ADAPTIVITY_BITS_PER_ELEMENT * n
  group_cap = GROUP_BITS_PER_LOG_N * (n.bit_length() - 1)
  breaches = []
  for record in transcript.rounds:
    space = record.space
    if space.adaptivity_bits > total_cap:
      breaches.append(f"round {record.round}: {space.adaptivity_bits} adaptivity bits > {total_cap}")
    if space.max_group_bits > group_cap and not space.groups_spilled:
      breaches.append(f"round {record.round}: group holds {space.max_group_bits} bits > {group_cap}")
  return breaches

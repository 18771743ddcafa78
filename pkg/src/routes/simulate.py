import argparse
from typing import Optional

from loguru import logger

from src.config.env import env
from src.filter.baselines import AMQS
from src.harness.adversaries import ADVERSARIES
from src.harness.export import transcripts_json, write_summary
from src.harness.game import run_games, summarize
from src.model.RunConfigModel import RunConfig
from src.routes.root import add_common_arguments, output_path, write_bytes


def simulate(config: RunConfig, transcript_path: Optional[str] = None) -> int:
  """跑 adaptivity game，写出 summarize 结果"""
  transcripts = run_games(
    config.amq, config.adversary, config.n, config.eps_log2, config.seeds, config.rounds,
    workers=config.workers, build=config.build,
    queries=config.queries, trials=config.trials, iterations=config.iterations,
  )
  tables = [summarize(t) for t in transcripts]
  path = write_summary(tables, output_path(config), config.format.value)
  if transcript_path:
    write_bytes(transcript_path, transcripts_json(transcripts))
  for table in tables:
    logger.info(
      f"{table.amq} vs {table.adversary} seed={table.seed}: {table.total_false_positives} false positives "
      f"over {table.total_negatives} negative queries, max round fpr={table.max_round_fpr}, won={table.won}"
    )
  print(path)
  return 0


def add_command(subparsers) -> None:
  parser: argparse.ArgumentParser = subparsers.add_parser(
    "simulate", help="play the adaptivity game and write per-round statistics")
  parser.add_argument("--amq", default="broom", help=f"one of {', '.join(sorted(AMQS))} (default: %(default)s)")
  parser.add_argument("--adversary", default="repeat-fp",
                      help=f"one of {', '.join(sorted(ADVERSARIES))} (default: %(default)s)")
  parser.add_argument("--rounds", type=int, default=50, help="rounds per game (default: %(default)s)")
  parser.add_argument("--queries", type=int, default=None, help="queries per round (default: n)")
  parser.add_argument("--trials", type=int, default=None, help="delete-reinsert discovery cap (default: 4n)")
  parser.add_argument("--iterations", type=int, default=100, help="delete-reinsert attack loops per round")
  parser.add_argument("--workers", type=int, default=env.workers, help="threads for multi-seed runs")
  parser.add_argument("--transcript", default=None, help="also write the full transcripts as JSON")
  add_common_arguments(parser)
  parser.set_defaults(command="simulate", handler=lambda config, args: simulate(config, args.transcript))

import argparse
import csv
import io
from typing import List

import orjson
from loguru import logger

from src.filter.baselines import AMQS
from src.harness.bench import bench_amq
from src.model.BenchModel import BenchRow
from src.model.RunConfigModel import RunConfig
from src.routes.root import add_common_arguments, output_path, write_bytes
from src.utils.errors import UnknownNameError


def _bench_csv(rows: List[BenchRow]) -> str:
  buf = io.StringIO()
  writer = csv.writer(buf, lineterminator="\n")
  writer.writerow(["amq (name)", "operation (name)", "ops (count)", "seconds (s)", "ops_per_sec (ops/s)"])
  for row in rows:
    rate = row.ops_per_sec
    writer.writerow([row.amq, row.operation, row.ops, f"{row.seconds:.6f}", "" if rate is None else f"{rate:.1f}"])
  return buf.getvalue()


def _bench_json(rows: List[BenchRow]) -> bytes:
  data = [{**row.model_dump(), "ops_per_sec": row.ops_per_sec} for row in rows]
  return orjson.dumps(data, option=orjson.OPT_INDENT_2 | orjson.OPT_SORT_KEYS)


def bench(config: RunConfig) -> int:
  names = sorted(AMQS) if config.amq == "all" else [config.amq]
  for name in names:
    if name not in AMQS:
      raise UnknownNameError(f"unknown amq {name!r}, expected one of {sorted(AMQS)} or 'all'")
  rows: List[BenchRow] = []
  for name in names:
    rows.extend(bench_amq(name, config.n, config.eps_log2, config.seed, config.build))
  data = _bench_csv(rows) if config.format.value == "csv" else _bench_json(rows)
  path = write_bytes(output_path(config), data)
  logger.info(f"bench finished: {len(rows)} rows")
  print(path)
  return 0


def add_command(subparsers) -> None:
  parser: argparse.ArgumentParser = subparsers.add_parser(
    "bench", help="measure insert / lookup / delete / adapt throughput")
  parser.add_argument("--amq", default="all", help=f"one of {', '.join(sorted(AMQS))} or 'all' (default: %(default)s)")
  add_common_arguments(parser)
  parser.set_defaults(command="bench", handler=lambda config, args: bench(config))

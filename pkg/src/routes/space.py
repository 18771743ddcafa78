import argparse
import csv
import io

import orjson
from loguru import logger

from src.harness.bench import space_check
from src.model.BenchModel import SpaceCheck
from src.model.RunConfigModel import RunConfig
from src.routes.root import add_common_arguments, output_path, write_bytes

SPACE_COLUMNS = [
  ("n", "elements"),
  ("eps_log2", "bits"),
  ("alpha", "fraction"),
  ("total_bits", "bits"),
  ("bits_per_element", "bits"),
  ("info_bound_bits", "bits"),
  ("local_bound_bits", "bits"),
  ("extra_bits", "bits"),
  ("extra_bound_bits", "bits"),
  ("adaptivity_bits", "bits"),
  ("groups_spilled", "count"),
  ("within_bound", "bool"),
]


def _space_csv(check: SpaceCheck) -> str:
  buf = io.StringIO()
  writer = csv.writer(buf, lineterminator="\n")
  writer.writerow([f"{name} ({unit})" for name, unit in SPACE_COLUMNS])
  data = check.model_dump()
  writer.writerow([f"{data[name]:.6f}" if isinstance(data[name], float) else data[name] for name, _ in SPACE_COLUMNS])
  return buf.getvalue()


def space(config: RunConfig) -> int:
  """满载测量本地空间；超出上界返回 1"""
  check = space_check(config.n, config.eps_log2, config.seed, adapt_rounds=config.rounds)
  data = _space_csv(check) if config.format.value == "csv" else orjson.dumps(
    check.model_dump(mode="json"), option=orjson.OPT_INDENT_2 | orjson.OPT_SORT_KEYS)
  path = write_bytes(output_path(config), data)
  if not check.within_bound:
    logger.error(f"local space {check.total_bits} bits exceeds the bound {check.local_bound_bits:.0f}")
    return 1
  print(path)
  return 0


def add_command(subparsers) -> None:
  parser: argparse.ArgumentParser = subparsers.add_parser(
    "space", help="fill the filter to capacity and report local space against the bound")
  parser.add_argument("--rounds", type=int, default=1, help="rounds of n negative queries before measuring")
  add_common_arguments(parser)
  parser.set_defaults(command="space", amq="broom", handler=lambda config, args: space(config))

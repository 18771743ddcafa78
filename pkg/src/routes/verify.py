import argparse
import sys

from src.harness import verify as suites
from src.model.RunConfigModel import RunConfig
from src.model.SuiteModel import results_json
from src.routes.root import add_common_arguments, write_bytes
from src.utils.errors import UnknownNameError


def verify(config: RunConfig) -> int:
  """逐个运行校验 suite；全部通过返回 0，否则 1"""
  unknown = [name for name in config.suites if name not in suites.SUITES]
  if unknown:
    raise UnknownNameError(f"unknown suite(s) {unknown}, expected some of {list(suites.SUITES)}")
  results = suites.run_suites(config)
  for result in results:
    print(result.line())
    for failure in result.failures:
      print(f"  {failure}", file=sys.stderr)
  if config.output:
    write_bytes(config.output, results_json(results))
  return 0 if all(r.passed for r in results) else 1


def add_command(subparsers) -> None:
  parser: argparse.ArgumentParser = subparsers.add_parser(
    "verify", help="run the invariant suites; exit 0 iff all pass")
  parser.add_argument("--suite", action="append", default=None,
                      help=f"suite to run, repeatable (default: all of {', '.join(suites.SUITES)})")
  parser.add_argument("--ops", type=int, default=20000, help="random operations per suite (default: %(default)s)")
  add_common_arguments(parser, default_n=1 << 10, default_format="json")
  parser.set_defaults(command="verify", handler=lambda config, args: verify(config))

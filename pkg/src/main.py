import sys
from typing import List, Optional

from loguru import logger
from pydantic import ValidationError

from src.create_app import configure_logging, create_app
from src.routes.bench import add_command as add_bench_command
from src.routes.root import to_config
from src.routes.simulate import add_command as add_simulate_command
from src.routes.space import add_command as add_space_command
from src.routes.verify import add_command as add_verify_command
from src.utils.errors import BroomError, ParamsError, UnknownNameError

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_USAGE = 2


def build_parser():
  parser, subparsers = create_app()

  # 注册子命令
  add_simulate_command(subparsers)
  add_verify_command(subparsers)
  add_bench_command(subparsers)
  add_space_command(subparsers)
  return parser


def main(argv: Optional[List[str]] = None) -> int:
  parser = build_parser()
  try:
    args = parser.parse_args(argv)
  except SystemExit as e:
    return e.code if isinstance(e.code, int) else EXIT_USAGE
  configure_logging(args.log_level)

  try:
    config = to_config(args)
  except ValidationError as e:
    error = e.errors()[0]
    print(f"error: invalid {'.'.join(map(str, error['loc']))}: {error['msg']}", file=sys.stderr)
    return EXIT_USAGE

  try:
    return args.handler(config, args)
  except (UnknownNameError, ParamsError) as e:
    logger.error(f"{args.command}: {e}")
    print(f"error: {e}", file=sys.stderr)
    return EXIT_USAGE
  except BroomError as e:
    logger.error(f"{args.command} failed: {type(e).__name__}: {e}")
    print(f"error: {e}", file=sys.stderr)
    return EXIT_CHECK_FAILED


# 启动应用
if __name__ == "__main__":
  sys.exit(main())

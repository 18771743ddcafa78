import argparse
import sys
from typing import Optional

from loguru import logger

from src.config.env import env


def configure_logging(level: Optional[str] = None) -> None:
  logger.remove()
  logger.add(sys.stderr, level=level or env.log_level)


def create_app():
  """创建命令行应用，返回 (parser, subparsers)，子命令由 main 注册"""
  parser = argparse.ArgumentParser(
    prog="broom",
    description="broom filter adaptive AMQ: adversarial games, invariant suites, throughput and space reports",
  )
  parser.add_argument("--version", action="version", version=f"%(prog)s {env.app_version}")
  parser.add_argument("--log-level", default=None, help=f"loguru level (default: {env.log_level})")
  subparsers = parser.add_subparsers(dest="command", metavar="command", required=True)
  return parser, subparsers

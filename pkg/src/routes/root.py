"""
各子命令共用的参数与输出工具
"""
import argparse
from pathlib import Path
from typing import List, Union

from src.config.env import env, settings
from src.model.RunConfigModel import RunConfig


def parse_seeds(text: str) -> List[int]:
  try:
    return [int(part) for part in text.split(",") if part.strip()]
  except ValueError:
    raise argparse.ArgumentTypeError(f"seeds must be comma separated integers, got {text!r}")


def add_common_arguments(parser: argparse.ArgumentParser, *, default_n: int = 1 << 14,
                         default_format: str = "csv") -> None:
  parser.add_argument("--n", type=int, default=default_n, help="capacity, a power of two >= 16 (default: %(default)s)")
  parser.add_argument("--eps-log2", type=int, default=6, help="epsilon = 2^-EPS_LOG2 (default: %(default)s)")
  parser.add_argument("--seed", type=int, default=settings.master_seed, help="master seed (default: %(default)s)")
  parser.add_argument("--seeds", type=parse_seeds, default=None, help="comma separated seeds, overrides --seed")
  parser.add_argument("--build", choices=["packed", "reference"], default=None,
                      help=f"local store build (default: {settings.build})")
  parser.add_argument("--output", default=None, help=f"results file (default: under {env.results_dir}/)")
  parser.add_argument("--format", choices=["json", "csv"], default=default_format,
                      help="results file format (default: %(default)s)")


def to_config(args: argparse.Namespace) -> RunConfig:
  data = {k: v for k, v in vars(args).items() if v is not None and k in RunConfig.model_fields}
  data["seeds"] = args.seeds or [args.seed]
  if getattr(args, "suite", None):
    data["suites"] = args.suite
  return RunConfig(**data)


def output_path(config: RunConfig) -> Path:
  return Path(config.default_output(env.results_dir))


def write_bytes(path: Union[str, Path], data: Union[str, bytes]) -> Path:
  path = Path(path)
  path.parent.mkdir(parents=True, exist_ok=True)
  if isinstance(data, str):
    path.write_text(data, encoding="utf-8")
  else:
    path.write_bytes(data)
  return path

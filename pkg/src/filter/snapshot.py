"""
broom filter 快照（仅 packed 构建）：

  magic "BROOMSNP" | u16 版本 | u32 头长度 | orjson 头 | 若干 (u32 长度 + 原始字节) 块

头中保存参数、存储布局、种子、phase、计数器、backyard、自适应位串组与远端 key 集合；
载入时按头中的布局重建各层，不读当前配置；块长度与布局不符即报错。
块依次是每个 quotient 层的 occupied / continuation / shifted / remainders 位数组与 live / ghost 目录。
"""
import struct
from pathlib import Path
from typing import Dict, List, Tuple, Union

import numpy as np
import orjson
from bitarray import bitarray
from loguru import logger
from pydantic import ValidationError

from src.filter.broom_filter import BroomFilter
from src.filter.level_base import GhostHandle, Level
from src.filter.local_store import BackyardEntry
from src.filter.packed_level import PackedLevel
from src.filter.params_hash import PhaseState
from src.filter.remote_store import BaselineKey
from src.model.ParamsModel import Params, StoreLayout
from src.utils.errors import SnapshotError
from src.utils.wordops import Bits, PackedStrings

MAGIC = b"BROOMSNP"
VERSION = 2
_HEAD = struct.Struct(">8sHI")
_BLOB = struct.Struct(">I")


def _bits_out(bits: Bits) -> List:
  return [format(bits.value, "x"), bits.length]


def _bits_in(data: List) -> Bits:
  return Bits(int(data[0], 16), data[1])


def _level_header(level: PackedLevel) -> Dict:
  groups = level.groups
  return {
    "live": level.live,
    "ghosts": level.ghosts,
    "buffers": [
      None if buf is None else [format(buf.data, "x"), format(buf.boundaries, "x"), buf.count, buf.length]
      for buf in groups.buffers
    ],
    "spill": {str(g): [_bits_out(s) for s in strings] for g, strings in groups.spill.items()},
  }


def _level_blobs(level: PackedLevel) -> List[bytes]:
  return [
    level.occupied.tobytes(),
    level.continuation.tobytes(),
    level.shifted.tobytes(),
    level.remainders.bits.tobytes(),
    level.groups.live_counts.tobytes(),
    level.groups.ghost_counts.tobytes(),
  ]


def _restore_bits(data: bytes, length: int) -> bitarray:
  ba = bitarray(endian="big")
  ba.frombytes(data)
  del ba[length:]
  return ba


def _expected_sizes(level: PackedLevel) -> List[int]:
  geom = level.geom
  flags = -(-geom.slots // 8)
  counts = geom.quotients * np.dtype(np.int32).itemsize
  return [flags, flags, flags, -(-geom.slots * geom.rbits // 8), counts, counts]


def _restore_level(name: str, level: PackedLevel, header: Dict, blobs: List[bytes]) -> None:
  sizes = [len(b) for b in blobs]
  if sizes != _expected_sizes(level):
    raise SnapshotError(f"{name} level buffers {sizes} do not match its layout {_expected_sizes(level)}")
  groups = level.groups
  if len(header["buffers"]) != len(groups.buffers):
    raise SnapshotError(f"{name} level has {len(header['buffers'])} adaptivity groups, expected {len(groups.buffers)}")
  n = level.geom.slots
  level.occupied = _restore_bits(blobs[0], n)
  level.continuation = _restore_bits(blobs[1], n)
  level.shifted = _restore_bits(blobs[2], n)
  level.remainders.bits = _restore_bits(blobs[3], n * level.geom.rbits)
  groups.live_counts = np.frombuffer(blobs[4], dtype=np.int32).copy()
  groups.ghost_counts = np.frombuffer(blobs[5], dtype=np.int32).copy()
  groups.buffers = [
    None if buf is None else PackedStrings(int(buf[0], 16), int(buf[1], 16), buf[2], buf[3], groups.capacity)
    for buf in header["buffers"]
  ]
  groups.spill = {int(g): [_bits_in(s) for s in strings] for g, strings in header["spill"].items()}
  for g, buf in enumerate(groups.buffers):
    if buf is not None and buf.length > groups.capacity:
      raise SnapshotError(f"{name} group {g} holds {buf.length} bits, buffer is {groups.capacity}")
    if buf is None and g not in groups.spill:
      raise SnapshotError(f"{name} group {g} is neither packed nor spilled")
  level.live = header["live"]
  level.ghosts = header["ghosts"]


def _quotient_levels(bf: BroomFilter) -> List[Tuple[str, PackedLevel]]:
  levels = [("primary", bf.local.primary)]
  if bf.local.secondary is not None:
    levels.append(("secondary", bf.local.secondary))
  return levels


def dumps(bf: BroomFilter) -> bytes:
  if bf.local.build != "packed":
    raise SnapshotError("only the packed build can be snapshotted")
  remote = bf.remote
  header = {
    "params": bf.params.model_dump(mode="json", exclude={"epsilon", "hash_len"}),
    "layout": bf.local.layout.model_dump(),
    "seed": bf.seed,
    "adaptive": bf.adaptive,
    "phase": [bf.phase.frontier_z, bf.phase.phase_index, bf.phase.seed_a, bf.phase.seed_b],
    "counters": bf.counters.snapshot(),
    "repeat_collisions": bf.counters.repeat_collisions,
    "hash_ties": bf.counters.hash_ties,
    "fixes": sorted(bf.fixes),
    "levels": {name: _level_header(level) for name, level in _quotient_levels(bf)},
    "backyard": None if bf.local.backyard is None else [
      [q, r, _bits_out(entry.full), entry.length]
      for (q, r), entries in bf.local.backyard.buckets.items() for entry in entries
    ],
    "live": [[key, *bf.remote.key_baseline[key]] for key in remote.live_keys],
    "ghosts": [[key, int(h.level), h.quotient, _bits_out(h.adaptivity)] for key, h in remote.ghosts.items()],
  }
  head = orjson.dumps(header)
  out = [_HEAD.pack(MAGIC, VERSION, len(head)), head]
  for _, level in _quotient_levels(bf):
    for blob in _level_blobs(level):
      out.append(_BLOB.pack(len(blob)))
      out.append(blob)
  return b"".join(out)


def loads(data: bytes) -> BroomFilter:
  if len(data) < _HEAD.size:
    raise SnapshotError("snapshot is truncated")
  magic, version, head_len = _HEAD.unpack_from(data)
  if magic != MAGIC:
    raise SnapshotError("not a broom filter snapshot")
  if version != VERSION:
    raise SnapshotError(f"snapshot version {version} is not supported (expected {VERSION})")
  offset = _HEAD.size
  try:
    header = orjson.loads(data[offset:offset + head_len])
    params = Params(**header["params"])
    layout = StoreLayout(**header["layout"])
  except (orjson.JSONDecodeError, ValidationError, KeyError, TypeError) as e:
    raise SnapshotError(f"snapshot header is unreadable: {e}") from e
  offset += head_len
  blobs = []
  while offset < len(data):
    if offset + _BLOB.size > len(data):
      raise SnapshotError("snapshot ends inside a buffer header")
    (size,) = _BLOB.unpack_from(data, offset)
    offset += _BLOB.size
    blobs.append(data[offset:offset + size])
    offset += size

  bf = BroomFilter(0, params=params, seed=header["seed"], build="packed", adaptive=header["adaptive"],
                   layout=layout)
  frontier, index, seed_a, seed_b = header["phase"]
  bf.phase = PhaseState(bf.seed, frontier, index, seed_a, seed_b)
  bf.counters.restore(header["counters"])
  bf.counters.repeat_collisions = header["repeat_collisions"]
  bf.counters.hash_ties = header["hash_ties"]
  bf.fixes = {tuple(pair) for pair in header["fixes"]}

  levels = _quotient_levels(bf)
  if len(blobs) != 6 * len(levels):
    raise SnapshotError(f"expected {6 * len(levels)} buffers, found {len(blobs)}")
  for i, (name, level) in enumerate(levels):
    _restore_level(name, level, header["levels"][name], blobs[6 * i:6 * i + 6])

  if header["backyard"] is not None:
    backyard = bf.local.backyard
    for q, r, full, length in header["backyard"]:
      backyard.buckets.setdefault((q, r), []).append(BackyardEntry(_bits_in(full), length))
      backyard.count += 1

  remote = bf.remote
  for key, seed, level, quotient, remainder in header["live"]:
    remote.live_keys.append(key)
    remote._live.add(key)
    remote._index(key, BaselineKey(seed, Level(level), quotient, remainder))
  for key, level, quotient, bits in header["ghosts"]:
    remote.ghosts[key] = GhostHandle(Level(level), quotient, _bits_in(bits))
  remote.ghost_keys = sorted(remote.ghosts)
  return bf


def save_snapshot(bf: BroomFilter, path: Union[str, Path]) -> Path:
  path = Path(path)
  path.parent.mkdir(parents=True, exist_ok=True)
  path.write_bytes(dumps(bf))
  logger.info(f"snapshot written to {path} ({bf.live_count} keys)")
  return path


def load_snapshot(path: Union[str, Path]) -> BroomFilter:
  return loads(Path(path).read_bytes())

import struct

import orjson
import pytest

from src.config.env import settings
from src.filter.broom_filter import BroomFilter
from src.filter.snapshot import MAGIC, VERSION, dumps, load_snapshot, loads, save_snapshot
from src.utils.errors import SnapshotError


def played_filter(keys, eps_log2: int) -> BroomFilter:
  bf = BroomFilter(256, eps_log2=eps_log2, seed=21, build="packed")
  members = keys.members(256)
  for x in members:
    bf.insert(x)
  for x in members[:40]:
    bf.delete(x)
  for x in keys.negatives(3000):
    bf.checked_lookup(x)
  return bf


@pytest.mark.parametrize("eps_log2", [4, 8])
def test_round_trip_preserves_state(keys, eps_log2):
  bf = played_filter(keys, eps_log2)
  data = dumps(bf)
  assert data.startswith(MAGIC)
  restored = loads(data)
  assert dumps(restored) == data
  assert restored.phase == bf.phase
  assert restored.counter_report() == bf.counter_report()
  assert restored.local.live_fingerprints() == bf.local.live_fingerprints()
  assert restored.local.ghost_count == bf.local.ghost_count
  restored.check_consistency()

  queries = keys.negatives(2000)
  assert [restored.lookup(x) for x in queries] == [bf.lookup(x) for x in queries]
  more = keys.members(30)
  for filt in (bf, restored):
    for x in more:
      filt.insert(x)
    for x in queries:
      filt.checked_lookup(x)
  assert dumps(restored) == dumps(bf)


def test_save_and_load(tmp_path, keys):
  bf = played_filter(keys, 4)
  path = save_snapshot(bf, tmp_path / "snap" / "broom.bin")
  assert load_snapshot(path).live_count == bf.live_count


def test_reference_build_cannot_be_snapshotted():
  bf = BroomFilter(64, eps_log2=4, seed=1, build="reference")
  with pytest.raises(SnapshotError):
    dumps(bf)


def test_rejects_foreign_data():
  with pytest.raises(SnapshotError):
    loads(b"not a snapshot at all")
  with pytest.raises(SnapshotError):
    loads(MAGIC[:4])


def test_rejects_other_versions():
  data = dumps(BroomFilter(64, eps_log2=4, seed=1, build="packed"))
  bumped = data[:8] + struct.pack(">H", VERSION + 1) + data[10:]
  with pytest.raises(SnapshotError):
    loads(bumped)


def test_rejects_missing_buffers():
  data = dumps(BroomFilter(64, eps_log2=4, seed=1, build="packed"))
  head_len = struct.unpack_from(">I", data, 10)[0]
  with pytest.raises(SnapshotError):
    loads(data[:14 + head_len])


def rewrite_header(data: bytes, edit) -> bytes:
  head_len = struct.unpack_from(">I", data, 10)[0]
  header = orjson.loads(data[14:14 + head_len])
  edit(header)
  head = orjson.dumps(header)
  return data[:10] + struct.pack(">I", len(head)) + head + data[14 + head_len:]


def test_load_uses_saved_layout_not_current_settings(monkeypatch, keys):
  bf = played_filter(keys, 4)
  data = dumps(bf)
  monkeypatch.setattr(settings, "group_width", 16)
  monkeypatch.setattr(settings, "buffer_bits", 64)
  monkeypatch.setattr(settings, "secondary_factor", 4)
  assert BroomFilter(64, eps_log2=4, seed=1, build="packed").local.layout.group_width == 16

  restored = loads(data)
  assert restored.local.layout == bf.local.layout
  assert dumps(restored) == data
  queries = keys.negatives(1000)
  assert [restored.lookup(x) for x in queries] == [bf.lookup(x) for x in queries]
  restored.check_consistency()


@pytest.mark.parametrize("field, value", [("group_width", 16), ("secondary_factor", 4)])
def test_rejects_layout_that_does_not_fit_buffers(keys, field, value):
  data = dumps(played_filter(keys, 4))

  def edit(header):
    header["layout"][field] = value

  with pytest.raises(SnapshotError):
    loads(rewrite_header(data, edit))


def test_rejects_header_without_layout():
  data = dumps(BroomFilter(64, eps_log2=4, seed=1, build="packed"))

  def edit(header):
    del header["layout"]

  with pytest.raises(SnapshotError):
    loads(rewrite_header(data, edit))


def test_rejects_groups_larger_than_saved_buffer(keys):
  bf = played_filter(keys, 4)
  longest = max(buf.length for buf in bf.local.primary.groups.buffers if buf is not None)
  assert longest > 0
  data = dumps(bf)

  def edit(header):
    header["layout"]["buffer_bits"] = longest - 1

  with pytest.raises(SnapshotError):
    loads(rewrite_header(data, edit))

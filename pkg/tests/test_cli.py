import orjson
import pytest

from src.harness import verify as suites
from src.main import EXIT_CHECK_FAILED, EXIT_OK, EXIT_USAGE, main
from src.model.SuiteModel import SuiteResult


def simulate_args(output, *extra):
  return ["simulate", "--amq", "quotient", "--adversary", "oblivious", "--n", "64", "--eps-log2", "4",
          "--rounds", "5", "--seed", "1", "--output", str(output), *extra]


def test_simulate_writes_csv(tmp_path, capsys):
  out = tmp_path / "sim.csv"
  assert main(simulate_args(out, "--format", "csv")) == EXIT_OK
  lines = out.read_text(encoding="utf-8").splitlines()
  assert lines[0].startswith("seed (id),round (index),queries (count)")
  assert len(lines) == 6
  assert str(out) in capsys.readouterr().out


def test_simulate_is_byte_identical_across_runs(tmp_path):
  first, second = tmp_path / "a.json", tmp_path / "b.json"
  args = ["--amq", "broom", "--adversary", "repeat-fp", "--format", "json", "--seeds", "1,2"]
  assert main(simulate_args(first, *args)) == EXIT_OK
  assert main(simulate_args(second, *args)) == EXIT_OK
  assert first.read_bytes() == second.read_bytes()
  tables = orjson.loads(first.read_bytes())
  assert [t["seed"] for t in tables] == [1, 2]


def test_simulate_writes_transcripts(tmp_path):
  transcript = tmp_path / "transcripts.json"
  assert main(simulate_args(tmp_path / "sim.csv", "--transcript", str(transcript))) == EXIT_OK
  games = orjson.loads(transcript.read_bytes())
  assert len(games) == 1 and len(games[0]["rounds"]) == 5


@pytest.mark.parametrize("extra", [["--amq", "cuckoo"], ["--adversary", "psychic"], ["--n", "1000"],
                                   ["--eps-log2", "0"], ["--rounds", "0"]])
def test_simulate_usage_errors(tmp_path, extra):
  assert main(simulate_args(tmp_path / "sim.csv", *extra)) == EXIT_USAGE


def test_verify_passes(tmp_path, capsys):
  out = tmp_path / "verify.json"
  code = main(["verify", "--suite", "wordops", "--ops", "200", "--output", str(out)])
  assert code == EXIT_OK
  assert "PASS wordops" in capsys.readouterr().out
  assert orjson.loads(out.read_bytes())[0]["passed"] is True


def test_verify_reports_failure(monkeypatch):
  monkeypatch.setitem(suites.SUITES, "wordops", lambda config: SuiteResult(name="wordops", passed=False))
  assert main(["verify", "--suite", "wordops"]) == EXIT_CHECK_FAILED


def test_verify_unknown_suite():
  assert main(["verify", "--suite", "nonsense"]) == EXIT_USAGE


def test_bench_csv(tmp_path):
  out = tmp_path / "bench.csv"
  code = main(["bench", "--amq", "bloom", "--n", "64", "--eps-log2", "4", "--output", str(out)])
  assert code == EXIT_OK
  lines = out.read_text(encoding="utf-8").splitlines()
  assert lines[0].startswith("amq (name),operation (name)")
  assert [line.split(",")[1] for line in lines[1:]] == ["insert", "lookup_positive", "lookup_negative", "adapt"]


def test_bench_unknown_amq(tmp_path):
  assert main(["bench", "--amq", "cuckoo", "--output", str(tmp_path / "b.csv")]) == EXIT_USAGE


def test_space_within_bound(tmp_path):
  out = tmp_path / "space.json"
  code = main(["space", "--n", "256", "--eps-log2", "4", "--format", "json", "--output", str(out)])
  assert code == EXIT_OK
  check = orjson.loads(out.read_bytes())
  assert check["within_bound"] is True
  assert check["total_bits"] <= check["local_bound_bits"]


@pytest.mark.parametrize("argv", [["--help"], ["simulate", "--help"], ["--version"]])
def test_help_and_version(argv):
  assert main(argv) == EXIT_OK


def test_missing_command_is_a_usage_error():
  assert main([]) == EXIT_USAGE

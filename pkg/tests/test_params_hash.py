from fractions import Fraction

import numpy as np
import pytest

from src.filter.params_hash import (NEG_INF, HashBits, PhaseState, advance_phase_if_done, derive_params, derive_seed,
                                    hash_bits, split_baseline, split_view)
from src.model.ParamsModel import Regime
from src.utils.errors import ParamsError


def test_small_remainder_regime():
  p = derive_params(2 ** 14, Fraction(1, 2 ** 6))
  assert (p.q, p.r) == (14, 6)
  assert p.regime is Regime.SMALL
  assert p.c_hash == 4 and p.hash_len == 56


def test_large_remainder_regime():
  p = derive_params(2 ** 14, eps_log2=12)
  assert (p.q, p.r) == (14, 12)
  assert p.regime is Regime.LARGE
  assert p.signature_bits == 8


def test_c_hash_raised_to_leave_room_for_adaptivity_bits():
  p = derive_params(16, 0.25)
  assert (p.q, p.r) == (4, 2)
  # 4 * 4 = 16 < 4 + 2 + 16
  assert p.c_hash == 6
  assert p.hash_len == 24
  assert p.hash_len >= p.q + p.r + 16


def test_alpha_and_displacement_cap():
  p = derive_params(2 ** 14, eps_log2=6)
  assert p.alpha == pytest.approx(max(0.05, (9 * 6 * np.log2(14) / 14) ** 0.5))
  assert p.probe_cap_L == 3
  large = derive_params(2 ** 14, eps_log2=12)
  assert large.probe_cap_L == 2


@pytest.mark.parametrize("n, epsilon", [(1000, Fraction(1, 16)), (1024, Fraction(3, 7)), (8, Fraction(1, 4)),
                                        (1024, 0.3), (1024, 1)])
def test_rejects_non_power_of_two(n, epsilon):
  with pytest.raises(ParamsError):
    derive_params(n, epsilon)


def test_params_error_is_value_error():
  with pytest.raises(ValueError):
    derive_params(100, eps_log2=4)


@pytest.mark.parametrize("text, q, r, expected", [
  ("01101101", 2, 2, (1, 2)),
  ("00000000", 2, 2, (0, 0)),
  ("101110011000", 3, 6, (5, 51)),
])
def test_split_view(text, q, r, expected):
  assert split_view(HashBits.fixed(text), q, r) == expected


def test_split_baseline_uses_q_and_r():
  p = derive_params(16, eps_log2=2)
  h = HashBits.fixed("1011" + "01" + "1" * 18)
  assert split_baseline(p, h) == (11, 1)


def test_generation_follows_frontier():
  p = derive_params(1024, eps_log2=4)
  phase = PhaseState.initial(5)
  assert hash_bits(p, phase, 12345).seed == phase.seed_a
  moved = PhaseState(5, 100, 0, phase.seed_a, phase.seed_b)
  assert hash_bits(p, moved, 100).seed == phase.seed_b
  assert hash_bits(p, moved, 101).seed == phase.seed_a


def test_hash_is_deterministic():
  p = derive_params(1024, eps_log2=4)
  phase = PhaseState.initial(3)
  a = hash_bits(p, phase, 42)
  b = hash_bits(p, phase, 42)
  assert a.bits() == b.bits()
  assert a == b
  assert hash_bits(p, PhaseState.initial(4), 42).bits() != a.bits()


def test_hash_bits_are_lazy_and_consistent_across_blocks():
  p = derive_params(2 ** 20, eps_log2=4)
  h = hash_bits(p, PhaseState.initial(1), 99)
  assert h.length == 80
  first = h.prefix(10)
  full = h.bits()
  assert full.length == 80
  assert first.is_prefix_of(full)
  text = str(full)
  assert all(h.bit(i) == int(text[i]) for i in range(80))
  with pytest.raises(IndexError):
    h.bit(80)


def test_secondary_stream_differs():
  p = derive_params(1024, eps_log2=4)
  h = hash_bits(p, PhaseState.initial(1), 7)
  second = h.secondary()
  assert second.seed == h.seed
  assert second.bits() != h.bits()
  assert second.secondary() is second


def test_advance_phase_at_max_key():
  phase = PhaseState(9, 500, 2, derive_seed(9, 2), derive_seed(9, 3))
  nxt = advance_phase_if_done(phase, 500)
  assert nxt.frontier_z == NEG_INF
  assert nxt.phase_index == 3
  assert nxt.seed_a == phase.seed_b
  assert nxt.seed_b == derive_seed(9, 4)


def test_advance_phase_unchanged_below_max():
  phase = PhaseState(9, 499, 0, 1, 2)
  assert advance_phase_if_done(phase, 500) is phase


def test_no_phase_churn_on_empty_filter():
  phase = PhaseState.initial(9)
  assert advance_phase_if_done(phase, None) is phase


def test_moved_frontier_with_empty_set_advances():
  phase = PhaseState(9, 40, 0, 1, 2)
  assert advance_phase_if_done(phase, None).phase_index == 1


def test_quotient_buckets_are_uniform():
  p = derive_params(64, eps_log2=4)
  phase = PhaseState.initial(1)
  count = 50000
  quotients = np.array([split_baseline(p, hash_bits(p, phase, x))[0] for x in range(count)])
  counts = np.bincount(quotients, minlength=64)
  mean = count / 64
  sd = np.sqrt(count * (1 / 64) * (1 - 1 / 64))
  assert np.all(np.abs(counts - mean) <= 5 * sd)


@pytest.mark.slow
def test_quotient_buckets_are_uniform_at_scale():
  p = derive_params(2 ** 10, eps_log2=4)
  phase = PhaseState.initial(2)
  count = 10 ** 6
  quotients = np.array([split_baseline(p, hash_bits(p, phase, x))[0] for x in range(count)])
  counts = np.bincount(quotients, minlength=p.n)
  mean = count / p.n
  sd = np.sqrt(count * (1 / p.n) * (1 - 1 / p.n))
  assert np.all(np.abs(counts - mean) <= 5 * sd)

"""Statistical test battery: published known answers, oracles and edge cases.

The reference p-values below are the worked examples from NIST Special
Publication 800-22 rev 1a (sections 2.1-2.15), which uses the binary
expansions of pi and e (integer part included) as its example inputs.
"""

import numpy as np
import pytest

from softdyn import nist
from softdyn.nist import (approximate_entropy, battery_report,
                          binary_matrix_rank, block_frequency,
                          cumulative_sums, dft_spectral_test,
                          frequency_monobit, linear_complexity,
                          longest_run_of_ones, non_overlapping_template,
                          overlapping_template, random_excursions,
                          random_excursions_variant, run_battery, runs_test,
                          serial_test, universal_statistical)

TOL = 1e-4


class TestKnownAnswers:
    """Each case is an SP 800-22 rev 1a worked example, exact to 1e-4."""

    def test_monobit_pi_100(self, pi_bits_1m):
        r = frequency_monobit(pi_bits_1m[:100])
        assert r.p_values[0] == pytest.approx(0.109599, abs=TOL)

    def test_block_frequency_pi_100(self, pi_bits_1m):
        r = block_frequency(pi_bits_1m[:100], block_size=10)
        assert r.p_values[0] == pytest.approx(0.706438, abs=TOL)

    def test_runs_pi_100(self, pi_bits_1m):
        r = runs_test(pi_bits_1m[:100])
        assert r.p_values[0] == pytest.approx(0.500798, abs=TOL)

    def test_cusum_pi_100(self, pi_bits_1m):
        r = cumulative_sums(pi_bits_1m[:100])
        assert r.p_values[0] == pytest.approx(0.219194, abs=TOL)  # forward
        assert r.p_values[1] == pytest.approx(0.114866, abs=TOL)  # backward

    def test_approximate_entropy_pi_100(self, pi_bits_1m):
        r = approximate_entropy(pi_bits_1m[:100], pattern_length=2)
        assert r.p_values[0] == pytest.approx(0.235301, abs=TOL)

    def test_matrix_rank_e_100k(self, e_bits_1m):
        r = binary_matrix_rank(e_bits_1m[:100_000])
        assert r.p_values[0] == pytest.approx(0.532069, abs=TOL)

    def test_universal_e_1m(self, e_bits_1m):
        r = universal_statistical(e_bits_1m)
        assert r.p_values[0] == pytest.approx(0.282568, abs=TOL)

    def test_serial_e_1m(self, e_bits_1m):
        r = serial_test(e_bits_1m, pattern_length=2)
        assert r.p_values[0] == pytest.approx(0.843764, abs=TOL)
        assert r.p_values[1] == pytest.approx(0.561915, abs=TOL)

    def test_non_overlapping_e_1m(self, e_bits_1m):
        r = non_overlapping_template(e_bits_1m)
        assert r.p_values[0] == pytest.approx(0.078790, abs=TOL)

    def test_excursions_variant_e_1m(self, e_bits_1m):
        r = random_excursions_variant(e_bits_1m)
        # states run -9..-1, 1..9; x = -1 is index 8
        assert r.p_values[8] == pytest.approx(0.826009, abs=TOL)

    def test_excursions_pi_1m(self, pi_bits_1m):
        r = random_excursions(pi_bits_1m)
        # states -4..-1, 1..4; x = +1 is index 4
        assert r.p_values[4] == pytest.approx(0.844143, abs=TOL)


class TestOracles:
    def test_berlekamp_massey_lfsr_example(self):
        # SP 800-22 section 2.10: s = 1101011110001 has complexity 4
        s = np.array([1, 1, 0, 1, 0, 1, 1, 1, 1, 0, 0, 0, 1])
        assert nist._berlekamp_massey_length(s) == 4

    def test_berlekamp_massey_reproduces_lfsr(self):
        # bits from a known LFSR of length L have complexity exactly L
        taps, L = 0b101001, 6
        state = 0b000001
        out = []
        for _ in range(200):
            out.append(state & 1)
            fb = (state & taps).bit_count() & 1
            state = (state >> 1) | (fb << (L - 1))
        assert nist._berlekamp_massey_length(np.array(out)) == L

    def test_gf2_rank_matches_elimination(self):
        rng = np.random.default_rng(7)
        for _ in range(20):
            m = rng.integers(0, 2, (32, 32))
            rows = [int("".join(map(str, row)), 2) for row in m]
            got = nist._gf2_rank(rows)
            # reference: rank over GF(2) by explicit elimination
            a = m.copy()
            rank = 0
            for col in range(32):
                piv = np.flatnonzero(a[rank:, col]) + rank
                if len(piv) == 0:
                    continue
                a[[rank, piv[0]]] = a[[piv[0], rank]]
                for r2 in range(32):
                    if r2 != rank and a[r2, col]:
                        a[r2] ^= a[rank]
                rank += 1
            assert got == rank


class TestDegenerateInputs:
    def test_all_zeros_fails_applicable_tests(self):
        results = run_battery(np.zeros(200_000, dtype=np.int64))
        applicable = [r for r in results if r.applicable]
        assert len(applicable) >= 10
        assert all(not r.passed for r in applicable)

    def test_alternating_bits_fail_runs(self):
        bits = np.tile([0, 1], 50_000)
        assert not runs_test(bits).passed
        assert not dft_spectral_test(bits).passed

    def test_short_input_not_applicable(self):
        r = universal_statistical(np.ones(1000, dtype=np.int64))
        assert not r.applicable
        assert r.note

    def test_excursions_too_few_cycles(self):
        bits = np.ones(2000, dtype=np.int64)
        r = random_excursions(bits)
        assert not r.applicable


class TestBattery:
    def test_reference_generator_passes_all(self, reference_bits_1m):
        results = run_battery(reference_bits_1m)
        assert len(results) == 15
        failed = [r.name for r in results if r.applicable and not r.passed]
        assert failed == []

    def test_pvalues_in_unit_interval(self, reference_bits_1m):
        for r in run_battery(reference_bits_1m[:200_000]):
            for p in r.p_values:
                assert 0.0 <= p <= 1.0

    def test_battery_report_structure(self, tmp_path, reference_bits_1m):
        results = run_battery(reference_bits_1m[:200_000])
        path = tmp_path / "report.json"
        report = battery_report(results, path)
        assert path.exists()
        assert report["summary"]["applicable"] >= 10
        assert report["summary"]["passed"] <= report["summary"]["applicable"]
        names = {r["name"] for r in report["results"]}
        assert len(names) == 15

    def test_longest_run_and_overlapping_sane(self, e_bits_1m):
        assert longest_run_of_ones(e_bits_1m).passed
        assert overlapping_template(e_bits_1m).passed
        assert linear_complexity(e_bits_1m).passed
        assert dft_spectral_test(e_bits_1m).passed

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from nflevo.algorithms import get_algorithm
from nflevo.core import BitGenotype, RngStream
from nflevo.engine import EngineParams
from nflevo.tables import (
    TableEaParams,
    TableFormatError,
    TableFunction,
    crossover_with_mask,
    eval_table,
    evolve_table_function,
    from_bytes,
    load_table,
    mutate_table,
    save_table,
    to_bytes,
    uniform_crossover,
)


def popcount(a: np.ndarray) -> int:
    return int(np.unpackbits(a.astype("<u8").view(np.uint8)).sum())


class TestEvaluate:
    def test_examples(self):
        assert eval_table(TableFunction.constant(0), BitGenotype(0x1234, 16)) == 0
        vals = np.arange(1 << 16, dtype=np.uint64) % 256
        f = TableFunction(vals)
        assert eval_table(f, BitGenotype(0x1234, 16)) == 0x34
        assert f.evaluate(BitGenotype(0xFFFF, 16)) == 255.0

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            eval_table(TableFunction.constant(0), BitGenotype(0, 8))

    def test_value_range(self):
        with pytest.raises(ValueError):
            TableFunction(np.full(16, 256), n=4, m=8)
        with pytest.raises(ValueError):
            TableFunction(np.zeros(15), n=4)

    def test_random_regenerates_from_seed(self):
        f = TableFunction.random(RngStream(42))
        oracle = RngStream(42)
        expected = np.array([oracle.next_u64() >> 56 for _ in range(1 << 16)], dtype=np.uint64)
        assert np.array_equal(f.values, expected)
        assert f == TableFunction.random(RngStream(42))

    def test_random_values_uniform(self):
        vals = TableFunction.random(RngStream(3)).values
        counts = np.bincount(vals.astype(np.int64), minlength=256)
        expected = (1 << 16) / 256
        chi2 = ((counts - expected) ** 2 / expected).sum()
        assert chi2 < 330.5  # 99.9% quantile, 255 dof


class TestCrossover:
    def test_mask_examples(self):
        a = TableFunction.constant(0)
        b = TableFunction.constant(255)
        assert crossover_with_mask(a, b, np.zeros(1 << 16, np.uint64)) == a
        assert crossover_with_mask(a, b, np.full(1 << 16, 255, np.uint64)) == b
        mixed = crossover_with_mask(a, b, np.full(1 << 16, 0x0F, np.uint64))
        assert set(mixed.values.tolist()) == {0x0F}

    def test_each_bit_from_a_parent(self):
        rng = RngStream(4)
        a, b = TableFunction.random(rng), TableFunction.random(rng)
        c = uniform_crossover(a, b, rng)
        agree = ~(a.values ^ b.values)
        assert np.array_equal(c.values & agree & np.uint64(255), a.values & agree & np.uint64(255))

    def test_constant_parents_share_of_bits(self):
        c = uniform_crossover(TableFunction.constant(0), TableFunction.constant(255), RngStream(5))
        ones = popcount(c.values)
        total = (1 << 16) * 8
        assert abs(ones - total / 2) < 3 * np.sqrt(total / 4)

    def test_exhaustive_small(self):
        a = TableFunction(np.arange(16), n=4, m=4)
        b = TableFunction(15 - np.arange(16), n=4, m=4)
        for seed in range(50):
            c = uniform_crossover(a, b, RngStream(seed))
            for i in range(16):
                for bit in range(4):
                    got = (int(c.values[i]) >> bit) & 1
                    assert got in {(int(a.values[i]) >> bit) & 1, (int(b.values[i]) >> bit) & 1}

    def test_shape_mismatch(self):
        with pytest.raises(ValueError):
            uniform_crossover(TableFunction.constant(0), TableFunction.constant(0, n=8), RngStream(1))


class TestMutate:
    def test_zero_probability_is_identity(self):
        f = TableFunction.random(RngStream(6))
        assert mutate_table(f, 0.0, RngStream(1)) == f

    def test_one_flips_everything(self):
        f = TableFunction.constant(0b10100101)
        assert set(mutate_table(f, 1.0, RngStream(1)).values.tolist()) == {0b01011010}

    def test_bad_probability(self):
        with pytest.raises(ValueError):
            mutate_table(TableFunction.constant(0), 1.5, RngStream(1))

    def test_mean_flips(self):
        rng = RngStream(7)
        f = TableFunction.constant(0)
        flips = np.array([popcount(mutate_table(f, 0.01, rng).values) for _ in range(100)])
        n_bits = (1 << 16) * 8
        mean = n_bits * 0.01
        assert mean == pytest.approx(5242.88)
        se = np.sqrt(n_bits * 0.01 * 0.99 / flips.size)
        assert abs(flips.mean() - mean) < 3 * se

    def test_flip_positions_uniform(self):
        rng = RngStream(8)
        f = TableFunction.constant(0, n=4, m=8)
        counts = np.zeros(128)
        for _ in range(3000):
            v = mutate_table(f, 0.05, rng).values
            counts += np.unpackbits(v.astype("<u8").view(np.uint8).reshape(16, 8)[:, :1], axis=1,
                                    bitorder="little").reshape(-1)
        expected = 3000 * 0.05
        chi2 = ((counts - expected) ** 2 / expected).sum()
        assert chi2 < 181.9  # 99.9% quantile, 127 dof


class TestFileFormat:
    def test_round_trip(self, tmp_path):
        f = TableFunction.random(RngStream(9))
        save_table(f, tmp_path / "t.nflf")
        assert load_table(tmp_path / "t.nflf") == f

    @given(st.integers(1, 10), st.integers(1, 40), st.integers(0, 2**32))
    def test_round_trip_dimensions(self, n, m, seed):
        f = TableFunction.random(RngStream(seed), n, m)
        assert from_bytes(to_bytes(f)) == f

    def test_header_and_size(self):
        data = to_bytes(TableFunction.constant(0))
        assert data[:7] == b"NFLF\x01\x10\x08"
        assert len(data) == 7 + (1 << 16) + 4

    def test_corruption_detected(self, tmp_path):
        data = bytearray(to_bytes(TableFunction.random(RngStream(10))))
        data[100] ^= 1
        p = tmp_path / "bad.nflf"
        p.write_bytes(bytes(data))
        with pytest.raises(TableFormatError, match="bad.nflf"):
            load_table(p)

    @pytest.mark.parametrize("data", [b"", b"XXXX\x01\x10\x08", b"NFLF\x02\x04\x08" + bytes(20),
                                      b"NFLF\x01\x04\x08" + bytes(10)])
    def test_malformed(self, data):
        with pytest.raises(TableFormatError):
            from_bytes(data)

    def test_missing_file(self, tmp_path):
        with pytest.raises(TableFormatError, match="nope.nflf"):
            load_table(tmp_path / "nope.nflf")


class TestEvolve:
    SMALL = TableEaParams(population_size=4, generations=2, duel_runs=10, n=8)

    def test_self_duel_is_zero(self):
        b3 = get_algorithm("B3", length=8)
        res = evolve_table_function(b3, b3, self.SMALL, EngineParams(max_steps=20), RngStream(11),
                                    paired_seeds=True)
        assert res.fitness == 0.0

    def test_history_monotone_and_deterministic(self):
        args = (get_algorithm("B4", length=8), get_algorithm("B1", length=8), self.SMALL,
                EngineParams(max_steps=20))
        r1 = evolve_table_function(*args, RngStream(12))
        r2 = evolve_table_function(*args, RngStream(12))
        assert r1.history == r2.history and r1.best == r2.best
        assert all(b <= a for a, b in zip(r1.history, r1.history[1:]))
        assert len(r1.history) == 1 + 4 * 2

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            evolve_table_function(get_algorithm("B1"), get_algorithm("B1"), self.SMALL,
                                  EngineParams(), RngStream(1))

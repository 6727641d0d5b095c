import numpy as np
import pytest

from madgan.dataset import load_csv
from madgan.numerics import make_rng
from madgan.synth import (AttackSpec, SynthConfig, default_coupling,
                          generate_normal, inject_attacks, write_csv)


class TestGenerateNormal:
    def test_shape_and_zero_labels(self):
        s = generate_normal(SynthConfig(num_variables=3, length=500), make_rng(0))
        assert s.values.shape == (500, 3)
        assert np.all(s.labels == 0)

    def test_deterministic_per_seed(self):
        cfg = SynthConfig(num_variables=2, length=100)
        a = generate_normal(cfg, make_rng(5))
        b = generate_normal(cfg, make_rng(5))
        np.testing.assert_array_equal(a.values, b.values)

    def test_noiseless_is_pure_coupled_sinusoid(self):
        cfg = SynthConfig(num_variables=1, length=200, noise_std=0.0)
        s = generate_normal(cfg, make_rng(0))
        t = np.arange(200)
        expected = np.sin(2 * np.pi * cfg.frequencies[0] * t + cfg.phases[0])
        np.testing.assert_allclose(s.values[:, 0], expected, atol=1e-12)

    def test_coupling_mixes_variables(self):
        cfg = SynthConfig(num_variables=2, length=400, noise_std=0.0,
                          coupling=default_coupling(2, 0.3))
        mixed = generate_normal(cfg, make_rng(0))
        plain = generate_normal(SynthConfig(num_variables=2, length=400,
                                            noise_std=0.0), make_rng(0))
        np.testing.assert_allclose(mixed.values[:, 0],
                                   plain.values[:, 0] + 0.3 * plain.values[:, 1],
                                   atol=1e-12)

    def test_validation(self):
        with pytest.raises(ValueError):
            SynthConfig(length=0)
        with pytest.raises(ValueError):
            SynthConfig(num_variables=2, noise_std=-1.0)
        with pytest.raises(ValueError):
            SynthConfig(num_variables=2, frequencies=np.ones(3))


class TestInjectAttacks:
    def _normal(self):
        return generate_normal(SynthConfig(num_variables=2, length=300), make_rng(1))

    def test_spike_adds_magnitude(self):
        s = self._normal()
        a = AttackSpec("spike", 0, 50, 20, 1.5)
        out = inject_attacks(s, [a])
        np.testing.assert_allclose(out.values[50:70, 0], s.values[50:70, 0] + 1.5)
        np.testing.assert_array_equal(out.values[:, 1], s.values[:, 1])

    def test_stuck_freezes_first_value(self):
        s = self._normal()
        out = inject_attacks(s, [AttackSpec("stuck", 1, 100, 30, 0.0)])
        np.testing.assert_array_equal(out.values[100:130, 1], s.values[100, 1])

    def test_drift_ramps_linearly(self):
        s = self._normal()
        out = inject_attacks(s, [AttackSpec("drift", 0, 10, 5, 2.0)])
        added = out.values[10:15, 0] - s.values[10:15, 0]
        np.testing.assert_allclose(added, np.linspace(0.0, 2.0, 5), atol=1e-12)

    def test_labels_mark_exact_intervals(self):
        s = self._normal()
        out = inject_attacks(s, [AttackSpec("spike", 0, 50, 20, 1.0),
                                 AttackSpec("stuck", 1, 200, 10, 0.0)])
        expected = np.zeros(300, dtype=int)
        expected[50:70] = 1
        expected[200:210] = 1
        np.testing.assert_array_equal(out.labels, expected)

    def test_untouched_outside_intervals(self):
        s = self._normal()
        out = inject_attacks(s, [AttackSpec("spike", 0, 50, 20, 1.0)])
        np.testing.assert_array_equal(out.values[:50], s.values[:50])
        np.testing.assert_array_equal(out.values[70:], s.values[70:])

    def test_same_variable_overlap_rejected(self):
        s = self._normal()
        with pytest.raises(ValueError, match="overlap"):
            inject_attacks(s, [AttackSpec("spike", 0, 50, 20, 1.0),
                               AttackSpec("stuck", 0, 60, 20, 0.0)])

    def test_cross_variable_overlap_allowed(self):
        s = self._normal()
        out = inject_attacks(s, [AttackSpec("spike", 0, 50, 20, 1.0),
                                 AttackSpec("stuck", 1, 60, 20, 0.0)])
        assert out.labels.sum() == 30

    def test_out_of_range_rejected(self):
        s = self._normal()
        with pytest.raises(ValueError):
            inject_attacks(s, [AttackSpec("spike", 5, 0, 10, 1.0)])
        with pytest.raises(ValueError):
            inject_attacks(s, [AttackSpec("spike", 0, 290, 20, 1.0)])

    def test_bad_spec_rejected(self):
        with pytest.raises(ValueError):
            AttackSpec("teleport", 0, 0, 10, 1.0)
        with pytest.raises(ValueError):
            AttackSpec("spike", 0, 0, 0, 1.0)


class TestCsvRoundTrip:
    def test_write_then_load_is_exact(self, tmp_path):
        s = generate_normal(SynthConfig(num_variables=2, length=50), make_rng(2))
        s = inject_attacks(s, [AttackSpec("spike", 0, 10, 5, 1.0)])
        p = tmp_path / "synthetic.csv"
        write_csv(s, p)
        back = load_csv(p, label_column="label")
        np.testing.assert_array_equal(back.values, s.values)
        np.testing.assert_array_equal(back.labels, s.labels)


class TestCoupling:
    def test_rows_mix_identity_plus_strength(self):
        c = default_coupling(3, 0.3)
        np.testing.assert_allclose(np.diag(c), 1.0)
        np.testing.assert_allclose(c[0, 1], 0.15)
        np.testing.assert_allclose(c.sum(axis=1), 1.3)

    def test_single_variable(self):
        np.testing.assert_array_equal(default_coupling(1, 0.5), [[1.0]])

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qssfm.grid import ComplexField, make_grid, wavenumbers
from qssfm.scenarios import soliton_1d
from qssfm.ssfm import (SsfmConfig, Trajectory, evolve, kinetic_half_phase, nonlinear_phase,
                        sample_steps, strang_step)

from conftest import random_unit


class TestKineticHalfPhase:
    def test_zero_mode(self):
        g = make_grid((8,), (3.0,))
        assert kinetic_half_phase(g, 0.7)[0] == 0

    def test_mode_one(self):
        g = make_grid((4,), (2 * np.pi,))
        assert kinetic_half_phase(g, 1.0)[1] == pytest.approx(-0.25)

    def test_2d_mode(self):
        g = make_grid((4, 4), (2 * np.pi, 2 * np.pi))
        assert kinetic_half_phase(g, 0.1)[1 * 4 + 1] == pytest.approx(-0.05)


class TestNonlinearPhase:
    def test_free(self, rng):
        g = make_grid((8,), (1.0,))
        f = ComplexField(g, random_unit(rng, 8))
        np.testing.assert_array_equal(nonlinear_phase(f, SsfmConfig(0.1), 0.0), 0.0)

    def test_delta(self):
        g = make_grid((4,), (1.0,))
        phase = nonlinear_phase(ComplexField(g, [1, 0, 0, 0]), SsfmConfig(1.0, g=1.0), 0.0)
        np.testing.assert_allclose(phase, [-1, 0, 0, 0])

    def test_soliton_phase_matches_physical_density(self):
        spec = soliton_1d()
        g, c = spec.coupling()
        raw = spec.raw_initial()
        phase = nonlinear_phase(spec.initial_field(), spec.ssfm_config(tau=1.0), 0.0)
        # attractive coupling: the phase is +tau |psi_phys|^2 for g_phys = -1
        np.testing.assert_allclose(phase, np.abs(raw) ** 2, atol=1e-12)
        assert g == pytest.approx(-np.sum(np.abs(raw) ** 2))
        assert c == 1.0

    def test_potential_sampled(self):
        g = make_grid((4,), (1.0,))
        cfg = SsfmConfig(0.5, potential=lambda grid, t: np.full(grid.size, t))
        np.testing.assert_allclose(nonlinear_phase(ComplexField(g, [1, 0, 0, 0]), cfg, 2.0), -1.0)


class TestStrangStep:
    @pytest.mark.parametrize("mode", [0, 1, 3, 5])
    def test_free_mode_exact(self, mode):
        g = make_grid((8,), (2 * np.pi,))
        (x,) = g.flat_coordinates()
        k = wavenumbers(g, 0)[mode]
        f = ComplexField(g, np.exp(1j * k * x) / np.sqrt(8))
        out = strang_step(f, SsfmConfig(0.3), 0.0)
        np.testing.assert_allclose(out.values, f.values * np.exp(-0.5j * 0.3 * k**2), atol=1e-12)

    def test_commuting_case_exact(self, rng):
        g = make_grid((16,), (5.0,))
        f = ComplexField(g, random_unit(rng, 16))
        cfg = SsfmConfig(0.2, potential=lambda grid, t: np.full(grid.size, 1.5))
        k2 = wavenumbers(g, 0) ** 2
        exact = np.fft.ifft(np.fft.fft(f.values) * np.exp(-0.5j * 0.2 * k2)) * np.exp(-0.2j * 1.5)
        np.testing.assert_allclose(strang_step(f, cfg, 0.0).values, exact, atol=1e-12)


class TestEvolve:
    def test_zero_duration(self, rng):
        g = make_grid((8,), (1.0,))
        f = ComplexField(g, random_unit(rng, 8))
        traj = evolve(f, SsfmConfig(0.1, g=1.0), 0.0)
        assert len(traj) == 1 and traj.final is f

    def test_merged_matches_unmerged(self):
        spec = soliton_1d()
        a = evolve(spec.initial_field(), spec.ssfm_config(), 0.1, sample_every=10)
        b = evolve(spec.initial_field(), spec.ssfm_config(merge_halves=True), 0.1, sample_every=10)
        assert a.times == b.times
        for fa, fb in zip(a.fields, b.fields):
            assert np.max(np.abs(fa.values - fb.values)) < 1e-12

    def test_norm_conservation(self):
        spec = soliton_1d()
        traj = evolve(spec.initial_field(), spec.ssfm_config(merge_halves=True), 10.0, sample_every=1000)
        for f in traj.fields:
            assert abs(np.linalg.norm(f.values) - 1) < 1e-9

    @settings(max_examples=10, deadline=None)
    @given(st.integers(1, 40), st.floats(-5, 5), st.integers(0, 2**31))
    def test_time_reversible(self, steps, g, seed):
        rng = np.random.default_rng(seed)
        grid = make_grid((32,), (10.0,))
        f = ComplexField(grid, random_unit(rng, 32))
        fwd = SsfmConfig(0.01, g=g)
        bwd = SsfmConfig(-0.01, g=g)
        a = f
        for _ in range(steps):
            a = strang_step(a, fwd, 0.0)
        for _ in range(steps):
            a = strang_step(a, bwd, 0.0)
        np.testing.assert_allclose(a.values, f.values, atol=1e-8)

    def test_soliton_shape_retained(self):
        spec = soliton_1d()
        traj = evolve(spec.initial_field(), spec.ssfm_config(merge_halves=True), spec.t_end,
                      sample_times=spec.sample_times)
        peak0 = traj.fields[0].density.max()
        assert abs(traj.final.density.max() - peak0) / peak0 < 0.05
        assert traj.times == pytest.approx(list(spec.sample_times))

    def test_evolve_rejects_negative_tau(self, rng):
        g = make_grid((8,), (1.0,))
        with pytest.raises(ValueError):
            evolve(ComplexField(g, random_unit(rng, 8)), SsfmConfig(-0.1), 1.0)

    def test_zero_tau_rejected(self):
        with pytest.raises(ValueError):
            SsfmConfig(0.0)

    def test_non_multiple_rejected(self, rng):
        g = make_grid((8,), (1.0,))
        with pytest.raises(ValueError):
            evolve(ComplexField(g, random_unit(rng, 8)), SsfmConfig(0.3), 1.0)


class TestSampling:
    def test_marks_include_ends(self):
        assert sample_steps(10, 4, None, 0.1) == {0, 4, 8, 10}

    def test_sample_times(self):
        assert sample_steps(10, None, [0.5], 0.1) == {0, 5, 10}


class TestTrajectoryIo:
    def test_round_trip(self, tmp_path, rng):
        g = make_grid((4, 2), (1.0, 2.0))
        traj = Trajectory()
        traj.append(0.0, ComplexField(g, random_unit(rng, 8)))
        traj.append(0.5, ComplexField(g, random_unit(rng, 8)))
        traj.save(tmp_path, {"tau": 0.1})
        back = Trajectory.load(tmp_path)
        assert back.times == traj.times
        for a, b in zip(back.fields, traj.fields):
            np.testing.assert_array_equal(a.values, b.values)
            assert a.grid == b.grid

    def test_times_increasing(self, rng):
        g = make_grid((2,), (1.0,))
        traj = Trajectory()
        traj.append(1.0, ComplexField(g, [1, 0]))
        with pytest.raises(ValueError):
            traj.append(1.0, ComplexField(g, [1, 0]))

    def test_at(self, rng):
        g = make_grid((2,), (1.0,))
        traj = Trajectory()
        traj.append(0.25, ComplexField(g, [1, 0]))
        assert traj.at(0.25 + 1e-12) is traj.fields[0]
        with pytest.raises(KeyError):
            traj.at(0.3)

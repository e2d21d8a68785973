"""Independent-distortion-noise model: determinism, port-power matching,
direction-flat mean patterns, and the contrast report against the
behavioral model."""

import numpy as np
import pytest

from imdbeam import (
    ArrayGeometry,
    BandDefinition,
    FrequencyGrid,
    GridMismatchError,
    NoiseModelConfig,
    PolynomialNonlinearity,
    independent_noise_transmit,
    matched_noise_config,
    mean_pattern,
    model_contrast_report,
    pattern_sweep,
    steer_tones,
    transmit,
    uniform_phase,
)

GRID = FrequencyGrid(2 * np.pi, 64)
BAND = BandDefinition.around((8, 12), 4)
CUBIC = PolynomialNonlinearity.third_order(0.1)
GEO = ArrayGeometry(2, 1.0 / 26.0)
TAU = 0.01


def scenario():
    assignment = steer_tones(GRID, GEO, {9: TAU, 11: TAU})
    behavioral = transmit(assignment, CUBIC, BAND)
    desired = transmit(assignment, PolynomialNonlinearity.identity(), BAND)
    return behavioral, desired


class TestNoiseModelConfig:
    def test_validation(self):
        with pytest.raises(ValueError):
            NoiseModelConfig((13,), -1.0, 10, 0)
        with pytest.raises(ValueError):
            NoiseModelConfig((13,), 1.0, 0, 0)
        with pytest.raises(ValueError):
            NoiseModelConfig((0,), 1.0, 10, 0)
        with pytest.raises(ValueError):
            NoiseModelConfig((13,), 1.0, 10, 2**63)


class TestUniformPhase:
    def test_deterministic_and_in_range(self):
        a = uniform_phase(42, 3, 1, 13)
        assert a == uniform_phase(42, 3, 1, 13)
        assert 0.0 <= a < 2 * np.pi

    def test_keys_decorrelate(self):
        base = uniform_phase(42, 3, 1, 13)
        assert base != uniform_phase(43, 3, 1, 13)
        assert base != uniform_phase(42, 4, 1, 13)
        assert base != uniform_phase(42, 3, 0, 13)
        assert base != uniform_phase(42, 3, 1, 7)

    def test_negative_seed_allowed(self):
        assert 0.0 <= uniform_phase(-5, 0, 0, 13) < 2 * np.pi


class TestIndependentNoiseTransmit:
    def test_zero_power_returns_desired(self):
        _, desired = scenario()
        cfg = NoiseModelConfig((13,), 0.0, 5, 7)
        assert independent_noise_transmit(desired, cfg, 0) is desired

    def test_same_key_reproduces(self):
        _, desired = scenario()
        cfg = NoiseModelConfig((13, 7), 0.004, 5, 7)
        a = independent_noise_transmit(desired, cfg, 2)
        b = independent_noise_transmit(desired, cfg, 2)
        for m in range(2):
            assert a.per_antenna[m] == b.per_antenna[m]

    def test_desired_lines_untouched(self):
        _, desired = scenario()
        cfg = NoiseModelConfig((13, 7), 0.004, 5, 7)
        noisy = independent_noise_transmit(desired, cfg, 0)
        for m in range(2):
            for k in (9, 11):
                assert noisy.per_antenna[m].coefficient(k) == desired.per_antenna[
                    m
                ].coefficient(k)

    def test_port_line_power_is_configured_power(self):
        _, desired = scenario()
        cfg = NoiseModelConfig((13,), 0.004, 5, 7)
        for trial in range(5):
            noisy = independent_noise_transmit(desired, cfg, trial)
            for m in range(2):
                assert noisy.per_antenna[m].line_power(13) == pytest.approx(
                    0.004, rel=1e-12
                )

    def test_trial_bounds(self):
        _, desired = scenario()
        cfg = NoiseModelConfig((13,), 0.004, 5, 7)
        with pytest.raises(ValueError):
            independent_noise_transmit(desired, cfg, 5)

    def test_monte_carlo_mean_received_power_is_flat(self):
        # expected received power at any direction is M * per-antenna power
        _, desired = scenario()
        power = 0.0028125
        cfg = NoiseModelConfig((13,), power, 10_000, 314)
        pattern = mean_pattern(cfg, desired, GEO, 13, 64)
        np.testing.assert_allclose(pattern.powers, 2 * power, rtol=0.1)


class TestMeanPattern:
    def test_single_trial_matches_sweep(self):
        _, desired = scenario()
        cfg = NoiseModelConfig((13,), 0.005, 1, 42)
        mp = mean_pattern(cfg, desired, GEO, 13, 64)
        sp = pattern_sweep(independent_noise_transmit(desired, cfg, 0), 13, GEO, 64)
        np.testing.assert_allclose(mp.powers, sp.powers, rtol=1e-12)

    def test_contrast_near_one(self):
        _, desired = scenario()
        cfg = NoiseModelConfig((13,), 0.0028125, 10_000, 1234)
        pattern = mean_pattern(cfg, desired, GEO, 13, 1024)
        assert abs(pattern.contrast - 1.0) <= 0.1

    def test_flatness_improves_like_one_over_trials(self):
        _, desired = scenario()
        power = 0.0028125
        few = NoiseModelConfig((13,), power, 500, 7)
        many = NoiseModelConfig((13,), power, 8000, 7)
        var_few = np.var(mean_pattern(few, desired, GEO, 13, 256).powers)
        var_many = np.var(mean_pattern(many, desired, GEO, 13, 256).powers)
        assert var_many < var_few / 4  # 16x the trials

    def test_concurrent_equals_sequential_bitwise(self):
        _, desired = scenario()
        cfg = NoiseModelConfig((13,), 0.0028125, 5000, 99)
        seq = mean_pattern(cfg, desired, GEO, 13, 512, workers=1)
        par = mean_pattern(cfg, desired, GEO, 13, 512, workers=4)
        assert np.array_equal(seq.powers, par.powers)

    def test_unconfigured_line_rejected(self):
        _, desired = scenario()
        cfg = NoiseModelConfig((13,), 0.004, 5, 7)
        with pytest.raises(ValueError):
            mean_pattern(cfg, desired, GEO, 12, 64)


class TestMatchedNoiseConfig:
    def test_port_powers_agree_between_models(self):
        behavioral, desired = scenario()
        cfg = matched_noise_config(behavioral, (13, 7), 100, 5)
        assert cfg.per_antenna_line_power == pytest.approx(0.075**2 / 2, rel=1e-12)
        noisy = independent_noise_transmit(desired, cfg, 0)
        for m in range(2):
            for k in (13, 7):
                assert noisy.per_antenna[m].line_power(k) == pytest.approx(
                    behavioral.per_antenna[m].line_power(k), rel=1e-9
                )

    def test_unequal_powers_rejected(self):
        behavioral, _ = scenario()
        with pytest.raises(ValueError):
            matched_noise_config(behavioral, (13, 9), 100, 5)  # product vs fundamental


class TestModelContrastReport:
    def test_behavioral_directive_baseline_not(self):
        behavioral, desired = scenario()
        cfg = matched_noise_config(behavioral, (13,), 10_000, 1234)
        bp = pattern_sweep(behavioral, 13, GEO, 1024)
        mp = mean_pattern(cfg, desired, GEO, 13, 1024)
        report = model_contrast_report(bp, mp)
        assert report.behavioral_directive and not report.baseline_directive
        assert report.behavioral_contrast > 1.9
        assert abs(report.baseline_contrast - 1.0) < 0.1
        assert report.peak_power_ratio == pytest.approx(2.0, rel=0.05)
        assert report.baseline_flatness < 0.05 < report.behavioral_flatness

    def test_self_comparison_unit_ratio(self):
        behavioral, _ = scenario()
        bp = pattern_sweep(behavioral, 13, GEO, 256)
        report = model_contrast_report(bp, bp)
        assert report.peak_power_ratio == 1.0
        assert report.behavioral_contrast == report.baseline_contrast

    def test_zero_distortion_marker(self):
        _, desired = scenario()
        cfg = NoiseModelConfig((13,), 0.0, 10, 1)
        mp = mean_pattern(cfg, desired, GEO, 13, 64)
        report = model_contrast_report(mp, mp)
        assert report.note == "no distortion lines"
        assert report.peak_power_ratio is None
        assert not report.behavioral_directive

    def test_mismatched_sweeps_rejected(self):
        behavioral, desired = scenario()
        cfg = matched_noise_config(behavioral, (13, 7), 10, 1)
        bp = pattern_sweep(behavioral, 13, GEO, 256)
        with pytest.raises(GridMismatchError):
            model_contrast_report(bp, mean_pattern(cfg, desired, GEO, 7, 256))
        with pytest.raises(GridMismatchError):
            model_contrast_report(bp, mean_pattern(cfg, desired, GEO, 13, 128))

import numpy as np
import pytest
from scipy.constants import c as C_LIGHT

from ringpairs import (
    AmbiguousLadderError,
    IllConditionedFitError,
    InsufficientDataError,
    ModeLadder,
    PumpNotResonantError,
    ResonanceDip,
    ResonanceSet,
    ValidationError,
    build_mode_ladder,
    fit_dispersion,
    integrated_dispersion,
    linewidth_crossover_mu,
)
from ringpairs.fixtures import grid_ladder

TWO_PI = 2 * np.pi
D1_REF = TWO_PI * 145e9
D2_REF = TWO_PI * 0.71e6
D3_REF = TWO_PI * 6.37e3


def set_on_grid(frequencies_hz, fwhm_pm=1.5):
    dips = [
        ResonanceDip.from_wavelength_fit(C_LIGHT / f * 1e9, fwhm_pm, 0.7)
        for f in frequencies_hz
    ]
    return ResonanceSet.from_dips(dips)


def binary_exact_ladder(n=12, cubic_scale=None, linear_scale=2.0**39):
    """Ladder whose entries are exact float64 integers, so sums and
    differences of entries incur zero rounding."""
    omega0 = 2.0**50
    entries = {}
    for mu in range(-n, n + 1):
        value = omega0 + mu * linear_scale
        if cubic_scale is not None:
            value += cubic_scale * mu**3
        entries[mu] = value
    return ModeLadder(entries=entries)


class TestBuildModeLadder:
    def test_exact_grid_indices(self):
        f0 = C_LIGHT / 1550.63e-9
        mus = np.arange(-47, 48)
        rset = set_on_grid(f0 + 145e9 * mus)
        ladder = build_mode_ladder(rset, pump_wavelength_nm=1550.63)
        assert ladder.mus == tuple(range(-47, 48))
        for mu in mus:
            assert ladder.entries[int(mu)] == pytest.approx(
                TWO_PI * (f0 + 145e9 * mu), rel=1e-12
            )
        assert ladder.omega0 == pytest.approx(TWO_PI * f0, rel=1e-12)
        assert all(g > 0 for g in ladder.linewidths.values())

    def test_gap_leaves_holes(self):
        f0 = C_LIGHT / 1550.63e-9
        mus = [m for m in range(-8, 9) if m not in (-5, -4, -3)]
        rset = set_on_grid([f0 + 145e9 * m for m in mus])
        ladder = build_mode_ladder(rset, 1550.63)
        assert ladder.mus == tuple(mus)

    def test_singleton(self):
        rset = set_on_grid([C_LIGHT / 1550.63e-9])
        ladder = build_mode_ladder(rset, 1550.63)
        assert ladder.mus == (0,)

    def test_pump_not_resonant(self):
        f0 = C_LIGHT / 1550.63e-9
        rset = set_on_grid(f0 + 145e9 * np.arange(-5, 6))
        # pump 3 FSRs beyond the last dip: nearest dip is far outside half an FSR
        bad_pump_hz = f0 + 8 * 145e9
        with pytest.raises(PumpNotResonantError):
            build_mode_ladder(rset, C_LIGHT / bad_pump_hz * 1e9)

    def test_colliding_dips_listed(self):
        f0 = C_LIGHT / 1550.63e-9
        freqs = list(f0 + 145e9 * np.arange(-5, 6)) + [f0 + 3 * 145e9 + 30e9]
        rset = set_on_grid(freqs)
        with pytest.raises(AmbiguousLadderError) as err:
            build_mode_ladder(rset, 1550.63)
        assert err.value.collisions

    def test_provenance_points_at_source_dips(self):
        f0 = C_LIGHT / 1550.63e-9
        rset = set_on_grid(f0 + 145e9 * np.arange(-3, 4))
        ladder = build_mode_ladder(rset, 1550.63)
        for mu, dip_index in ladder.provenance.items():
            dip = rset.dips[dip_index]
            assert ladder.entries[mu] == pytest.approx(
                TWO_PI * dip.center_frequency, rel=1e-14
            )


class TestModeLadderInvariants:
    def test_requires_pump_mode(self):
        with pytest.raises(ValidationError):
            ModeLadder(entries={1: 1.0, 2: 2.0})

    def test_omega_must_increase_with_mu(self):
        with pytest.raises(ValidationError):
            ModeLadder(entries={-1: 2.0, 0: 1.5, 1: 1.0})

    def test_positive_linewidths(self):
        with pytest.raises(ValidationError):
            ModeLadder(entries={0: 1.0}, linewidths={0: 0.0})


class TestIntegratedDispersion:
    def test_linear_grid_is_exactly_zero(self):
        ladder = binary_exact_ladder(n=10)
        dint = integrated_dispersion(ladder, 2.0**39)
        assert all(v == 0.0 for v in dint.values())

    def test_quadratic_reference_value(self):
        ladder = grid_ladder(n_modes=47, d2=D2_REF)
        dint = integrated_dispersion(ladder, D1_REF)
        for mu in range(-47, 48):
            expected = np.pi * 0.71e6 * mu**2  # D2/2 * mu^2
            assert abs(dint[mu] - expected) <= 2.0 + 1e-6 * expected

    def test_dint_zero_at_pump_for_any_d1(self):
        ladder = grid_ladder(n_modes=5, d2=D2_REF, d3=D3_REF)
        for d1 in (D1_REF, 0.5 * D1_REF, 1e10):
            assert integrated_dispersion(ladder, d1)[0] == 0.0

    def test_d1_perturbation_is_exactly_linear(self):
        ladder = binary_exact_ladder(n=8, cubic_scale=2.0**10)
        d1, delta = 2.0**39, 2.0**20
        a = integrated_dispersion(ladder, d1)
        b = integrated_dispersion(ladder, d1 + delta)
        for mu in a:
            assert b[mu] - a[mu] == -mu * delta

    def test_odd_even_decomposition_pure_cubic_cancels_exactly(self):
        ladder = binary_exact_ladder(n=12, cubic_scale=2.0**10)
        dint = integrated_dispersion(ladder, 2.0**39)
        for mu in range(1, 13):
            assert dint[mu] + dint[-mu] == 0.0


class TestFitDispersion:
    def test_reference_cubic_recovered_to_1e9(self):
        ladder = grid_ladder(n_modes=47, d2=D2_REF, d3=D3_REF)
        fit = fit_dispersion(ladder, order=3)
        assert abs(fit.d1 - D1_REF) / D1_REF < 1e-9
        assert abs(fit.d2 - D2_REF) / D2_REF < 1e-9
        assert abs(fit.d3 - D3_REF) / D3_REF < 1e-9
        assert fit.mode_range == (-47, 47)

    def test_jitter_recovers_d2_within_5_percent(self):
        # the jittered pump anchor leaks ~2% sigma into D2, so this is a
        # quota check, not a per-seed bound
        rng = np.random.default_rng(4)
        base = grid_ladder(n_modes=47, d2=D2_REF, d3=D3_REF)
        errors = []
        for _ in range(20):
            entries = {
                mu: omega + rng.normal(0.0, TWO_PI * 10e6)
                for mu, omega in base.entries.items()
            }
            fit = fit_dispersion(ModeLadder(entries=entries), order=3)
            errors.append(abs(fit.d2 - D2_REF) / D2_REF)
        assert sum(e < 0.05 for e in errors) >= 19
        assert np.mean(errors) < 0.05

    def test_pure_linear_gives_numerically_zero_curvature(self):
        ladder = grid_ladder(n_modes=47)
        fit = fit_dispersion(ladder, order=3)
        bound = 1e-6 * fit.d1 / 47**2
        assert abs(fit.d2) < bound
        assert abs(fit.d3) < bound

    def test_one_sided_modes_ill_conditioned(self):
        entries = {mu: 2.0**50 + mu * 2.0**39 for mu in range(0, 4)}
        with pytest.raises(IllConditionedFitError):
            fit_dispersion(ModeLadder(entries=entries), order=3)

    def test_too_few_modes(self):
        ladder = grid_ladder(n_modes=2)  # 5 entries, order 3 needs >= 5... use 4
        entries = {mu: ladder.entries[mu] for mu in (-1, 0, 1, 2)}
        with pytest.raises(InsufficientDataError):
            fit_dispersion(ModeLadder(entries=entries), order=3)

    def test_fit_evaluate_consistency(self):
        rng = np.random.default_rng(12)
        base = grid_ladder(n_modes=30, d2=D2_REF, d3=D3_REF)
        entries = {
            mu: omega + rng.normal(0.0, TWO_PI * 5e6)
            for mu, omega in base.entries.items()
        }
        ladder = ModeLadder(entries=entries)
        fit = fit_dispersion(ladder, order=3)
        mus = np.array(ladder.mus, dtype=np.longdouble)
        actual = np.array(
            [ladder.entries[int(m)] for m in ladder.mus], dtype=np.longdouble
        )
        # independent recomputation: residuals of y = omega - omega0 against
        # the returned coefficients, evaluated in extended precision
        model = np.zeros_like(mus)
        factorial = 1.0
        for k, coef in enumerate(fit.coefficients, start=1):
            factorial *= k
            model += np.longdouble(coef) * mus**k / factorial
        rms = float(np.sqrt(np.mean(((actual - ladder.omega0) - model) ** 2)))
        assert rms == pytest.approx(fit.rms_residual, rel=1e-12)

    def test_higher_order_fit(self):
        d4 = TWO_PI * 40.0
        ladder = grid_ladder(n_modes=47, d2=D2_REF, d3=D3_REF)
        entries = {
            mu: omega + d4 * mu**4 / 24.0 for mu, omega in ladder.entries.items()
        }
        fit = fit_dispersion(ModeLadder(entries=entries), order=4)
        assert len(fit.coefficients) == 4
        assert fit.coefficients[3] == pytest.approx(d4, rel=1e-6)


class TestReferenceScaleComparison:
    """The +mu/-mu mismatch sum is GHz-scale at the reference dispersion,
    while per-mode Dint stays within one linewidth only out to mu ~ 19;
    the toolkit reports the crossover instead of asserting either claim."""

    def test_pair_sum_exceeds_linewidth(self):
        ladder = grid_ladder(n_modes=47, d2=D2_REF, d3=D3_REF)
        dint = integrated_dispersion(ladder, D1_REF)
        pair_sum_hz = max(
            abs(dint[mu] + dint[-mu]) / TWO_PI for mu in range(1, 48)
        )
        assert pair_sum_hz == pytest.approx(0.71e6 * 47**2, rel=1e-3)
        assert pair_sum_hz > 132e6

    @pytest.mark.parametrize("d3", [0.0, D3_REF])
    def test_crossover_matches_brute_force(self, d3):
        ladder = grid_ladder(n_modes=47, d2=D2_REF, d3=d3)
        dint = integrated_dispersion(ladder, D1_REF)
        crossover = linewidth_crossover_mu(dint, TWO_PI * 132e6)
        # independent scan
        expected = 0
        for m in range(1, 48):
            if abs(dint[m]) > TWO_PI * 132e6 or abs(dint[-m]) > TWO_PI * 132e6:
                break
            expected = m
        assert crossover == expected
        if d3 == 0.0:
            assert crossover == 19

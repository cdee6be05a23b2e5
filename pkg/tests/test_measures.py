"""Weighted measure, frozen density, weighted norms, coefficient distances."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import stablesde as ss
from stablesde.coefficients import make_pair
from stablesde.measures import DensityModel, TimeGrid, default_time_grid

G0_15 = 0.28735275145216445


@pytest.fixture(scope="module")
def law15():
    return ss.make_stable_law(1.5)


@pytest.fixture(scope="module")
def gentle_model(law15):
    pair = make_pair("identical", 1.5, {"s1": 0.05})
    return pair, DensityModel(mode="frozen_plain", law=law15,
                              sigma_ref=pair.sigma, x0=pair.x0)


class TestWeightedMeasure:
    def test_center_value(self, law15):
        val = ss.weighted_measure_density(law15, 0.0, 1.0, 1.0, 0.0)
        assert val == pytest.approx(G0_15, abs=1e-8)

    def test_center_by_substitution(self, law15):
        # y = x0 gives g(0) / (t^(1/a) sigma^(1/a))
        val = ss.weighted_measure_density(law15, 2.0, 1.3, 0.7, 2.0)
        scale = 0.7 ** (1 / 1.5) * 1.3 ** (1 / 1.5)
        assert val == pytest.approx(G0_15 / scale, rel=1e-8)

    def test_total_mass_one(self, law15):
        norm = ss.weighted_norm(lambda y: np.ones_like(np.asarray(y, float)),
                                1.0, law15, 0.5, 1.2, 0.8)
        assert norm == pytest.approx(1.0, abs=1e-4)

    def test_preconditions(self, law15):
        with pytest.raises(ss.DomainError):
            ss.weighted_measure_density(law15, 0.0, 1.0, 0.0, 1.0)
        with pytest.raises(ss.DomainError):
            ss.weighted_measure_density(law15, 0.0, -1.0, 1.0, 1.0)


class TestFrozenDensity:
    def test_constant_sigma_matches_weighted_measure(self, law15):
        model = DensityModel(mode="frozen_plain", law=law15,
                             sigma_ref=lambda y: np.full_like(np.asarray(y, float), 1.3),
                             x0=0.5)
        for y in (-1.0, 0.5, 2.0):
            assert ss.frozen_density(model, 0.7, y) == pytest.approx(
                ss.weighted_measure_density(law15, 0.5, 1.3, 0.7, y), rel=1e-12)

    def test_mass_near_one_on_time_grid(self, law15, gentle_model):
        _, model = gentle_model
        for t in default_time_grid(1.5, n_nodes=8).nodes(1.0)[1:]:
            mass = ss.frozen_density_mass(model, float(t), (0.95, 1.05))
            assert abs(mass - 1.0) < 1e-3

    def test_upper_mode_scales_by_M(self, law15, gentle_model):
        pair, _ = gentle_model
        upper = DensityModel(mode="frozen_upper", law=law15,
                             sigma_ref=pair.sigma, x0=0.0, M=2.5)
        plain = DensityModel(mode="frozen_plain", law=law15,
                             sigma_ref=pair.sigma, x0=0.0)
        y = np.linspace(-3, 3, 11)
        assert np.allclose(ss.frozen_density(upper, 0.5, y),
                           2.5 * ss.frozen_density(plain, 0.5, y), rtol=1e-13)

    def test_tail_envelope_band(self, law15, gentle_model):
        _, model = gentle_model
        ys = np.array([20.0, 35.0, -25.0])
        dens = ss.frozen_density(model, 1.0, ys)
        env = ss.density_envelope(law15, ys)
        ratio = dens / env
        assert np.all(ratio > 0.01) and np.all(ratio < 10.0)

    def test_short_time_localizes(self, law15, gentle_model):
        _, model = gentle_model
        assert ss.frozen_density(model, 1e-6, 1.0) < 1e-6

    def test_empirical_mode_has_no_density(self, law15, gentle_model):
        pair, _ = gentle_model
        emp = DensityModel(mode="empirical", law=law15, sigma_ref=pair.sigma,
                           x0=0.0, sim_config=ss.SimConfig(T=1.0, n_steps=10,
                                                           n_paths=10, seed=1))
        with pytest.raises(ss.DomainError):
            ss.frozen_density(emp, 0.5, 0.0)

    def test_model_validation(self, law15, gentle_model):
        pair, _ = gentle_model
        with pytest.raises(ss.DomainError):
            DensityModel(mode="nonsense", law=law15, sigma_ref=pair.sigma, x0=0.0)
        with pytest.raises(ss.DomainError):
            DensityModel(mode="frozen_upper", law=law15, sigma_ref=pair.sigma,
                         x0=0.0, M=0.5)
        with pytest.raises(ss.DomainError):
            DensityModel(mode="empirical", law=law15, sigma_ref=pair.sigma, x0=0.0)


class TestWeightedNorm:
    def test_constant(self, law15):
        f = lambda y: -2.0 * np.ones_like(np.asarray(y, float))
        assert ss.weighted_norm(f, 1.3, law15, 0.0, 1.0, 1.0) == pytest.approx(
            2.0, rel=1e-6)

    def test_far_indicator_below_tail_bound(self, law15):
        f = lambda y: (np.abs(np.asarray(y, float)) > 30.0).astype(float)
        val = ss.weighted_norm(f, 1.0, law15, 0.0, 1.0, 1.0)
        # mass beyond 30 is at most the envelope integral
        bound = 2.0 * law15.c_alpha * 30.0 ** -1.5 / 1.5 * 2.0
        assert val < bound

    def test_fast_growth_rejected(self, law15):
        f = lambda y: np.abs(np.asarray(y, float)) ** 2.6
        with pytest.raises(ss.DomainError):
            ss.weighted_norm(f, 1.0, law15, 0.0, 1.0, 1.0)


class TestDistances:
    def test_zero_for_identical(self, law15, gentle_model):
        pair, model = gentle_model
        assert ss.distance_B(pair, model, 1.0) == 0.0
        assert ss.distance_S(pair, model, 1.0) == 0.0

    def test_constant_drift_shift(self, law15):
        pair = make_pair("drift_shift", 1.5, {"shift": 0.3, "s1": 0.0})
        model = DensityModel(mode="frozen_plain", law=law15,
                             sigma_ref=pair.sigma, x0=0.0)
        assert ss.distance_B(pair, model, 1.0) == pytest.approx(0.3, rel=1e-3)
        assert ss.distance_B(pair, model, 2.0) == pytest.approx(0.6, rel=1e-3)

    def test_constant_jump_shift(self, law15):
        pair = make_pair("jump_shift", 1.5, {"shift": 0.2, "s1": 0.0})
        model = DensityModel(mode="frozen_plain", law=law15,
                             sigma_ref=pair.sigma, x0=0.0)
        assert ss.distance_S(pair, model, 1.0) == pytest.approx(0.2, rel=1e-3)
        assert ss.distance_S(pair, model, 2.0) == pytest.approx(
            0.2 * 2.0 ** (1 / 1.5), rel=1e-3)

    def test_upper_mode_ratio_exactly_M(self, law15):
        pair = make_pair("drift_bump", 1.5, {"amp": 0.25})
        plain = DensityModel(mode="frozen_plain", law=law15,
                             sigma_ref=pair.sigma, x0=0.0)
        upper = DensityModel(mode="frozen_upper", law=law15,
                             sigma_ref=pair.sigma, x0=0.0, M=3.0)
        b_plain = ss.distance_B(pair, plain, 1.0)
        b_upper = ss.distance_B(pair, upper, 1.0)
        assert b_upper == pytest.approx(3.0 * b_plain, rel=1e-9)
        assert b_plain <= b_upper

    def test_bump_scaling_slope(self, law15):
        from stablesde.quadrature import ols_loglog
        amps = np.array([1.0, 0.5, 0.25, 0.125])
        vals_B, vals_S = [], []
        for amp in amps:
            pb = make_pair("drift_bump", 1.5, {"amp": amp})
            js = make_pair("jump_bump", 1.5, {"amp": amp * 0.3})
            model = DensityModel(mode="frozen_plain", law=law15,
                                 sigma_ref=pb.sigma, x0=0.0)
            vals_B.append(ss.distance_B(pb, model, 1.0))
            vals_S.append(ss.distance_S(js, model, 1.0))
        slope_B, _, _ = ols_loglog(1.0 / amps, np.array(vals_B))
        slope_S, _, _ = ols_loglog(1.0 / amps, np.array(vals_S))
        assert slope_B == pytest.approx(-1.0, abs=0.05)
        assert slope_S == pytest.approx(-1.0, abs=0.05)

    def test_monotone_in_perturbation(self, law15):
        model = None
        vals = []
        for amp in (0.1, 0.2, 0.4):
            pair = make_pair("drift_bump", 1.5, {"amp": amp})
            model = DensityModel(mode="frozen_plain", law=law15,
                                 sigma_ref=pair.sigma, x0=0.0)
            vals.append(ss.distance_B(pair, model, 1.0))
        assert vals[0] < vals[1] < vals[2]

    def test_T_domain(self, law15, gentle_model):
        pair, model = gentle_model
        with pytest.raises(ss.DomainError):
            ss.distance_B(pair, model, 0.0)

    def test_empirical_mode_close_to_frozen(self, law15):
        pair = make_pair("drift_bump", 1.5, {"amp": 0.4, "s1": 0.05})
        frozen = DensityModel(mode="frozen_plain", law=law15,
                              sigma_ref=pair.sigma, x0=0.0)
        b_frozen = ss.distance_B(pair, frozen, 1.0)
        emp = DensityModel(mode="empirical", law=law15, sigma_ref=pair.sigma,
                           x0=0.0,
                           sim_config=ss.SimConfig(T=1.0, n_steps=200,
                                                   n_paths=20000, seed=31))
        b_emp = ss.distance_B(pair, emp, 1.0)
        assert 0.5 < b_emp / b_frozen < 2.0


class TestSupDistances:
    def test_identical_zero(self, gentle_model):
        pair, _ = gentle_model
        assert ss.distance_B_sup(pair, 1.0) == 0.0
        assert ss.distance_S_sup(pair, 1.5, 1.0) == 0.0

    def test_constant_shift_variants(self):
        pair = make_pair("drift_shift", 1.5, {"shift": 0.25})
        assert ss.distance_B_sup(pair, 2.0) == pytest.approx(0.5, rel=1e-12)
        assert ss.distance_B_sup(pair, 2.0, variant="time_sup") == pytest.approx(
            0.25, rel=1e-12)
        js = make_pair("jump_shift", 1.5, {"shift": 0.25})
        assert ss.distance_S_sup(js, 1.5, 2.0) == pytest.approx(
            0.25 * 2.0 ** (1 / 1.5), rel=1e-6)

    def test_unknown_variant(self, gentle_model):
        pair, _ = gentle_model
        with pytest.raises(ss.DomainError):
            ss.distance_B_sup(pair, 1.0, variant="bogus")


class TestTimeGrid:
    def test_nodes_graded(self):
        grid = TimeGrid(n_nodes=10, gamma=1.5)
        nodes = grid.nodes(2.0)
        assert nodes[0] == 0.0 and nodes[-1] == 2.0
        assert np.all(np.diff(nodes) > 0)
        # grading concentrates nodes near zero
        assert nodes[1] < 2.0 / 10

    def test_validation(self):
        with pytest.raises(ss.DomainError):
            TimeGrid(n_nodes=1)
        with pytest.raises(ss.DomainError):
            TimeGrid(gamma=0.0)


class TestRegularity:
    def test_spot_check_accepts_catalog(self):
        pair = make_pair("jump_bump", 1.5, {"amp": 0.2})
        ss.spot_check_regularity(pair, 1.5, ss.RngStream(3))

    def test_eta_tilde_domain(self):
        pair = make_pair("jump_kink", 1.5, {"amp": 0.2, "eta_tilde": 0.5})
        with pytest.raises(ss.DomainError):
            ss.spot_check_regularity(pair, 1.5, ss.RngStream(3))

    @given(amp=st.floats(0.01, 0.5), width=st.floats(0.5, 3.0))
    @settings(max_examples=10, deadline=None)
    def test_bump_pairs_pass_spot_checks(self, amp, width):
        pair = make_pair("drift_bump", 1.5, {"amp": amp, "width": width})
        ss.spot_check_regularity(pair, 1.5, ss.RngStream(11))

import math

import numpy as np
import pytest

from spingrover.engines import EngineKind, basis_vector, ground_state
from spingrover.experiments import (
    DegenerateDataError,
    FitError,
    eval_decay_model,
    fidelity,
    fit_decay,
    mixed_fidelity,
    reference_trajectory,
    run_ensemble,
    subensemble_error,
    sweep_amplitudes,
)
from spingrover.grover_compiler import RegisterLayout, compile_grover
from spingrover.noise_model import NoiseSpec
from spingrover.spin_model import BasisState, SpinSystem

REF4 = SpinSystem(4, (50.0, 200.0, 350.0, 500.0), 10.0, 0.4)
LAYOUT = RegisterLayout(4)
OMEGA = 0.1008
NEAR = EngineKind(kind="near_resonant")


@pytest.fixture(scope="module")
def program():
    return compile_grover(REF4, LAYOUT, BasisState(0), OMEGA)


class TestFidelity:
    def test_basic_values(self):
        a = basis_vector(3, 0)
        b = basis_vector(3, 1)
        assert fidelity(a, a) == 1.0
        assert fidelity(a, b) == 0.0
        plus = (a + b) / math.sqrt(2)
        assert fidelity(plus, a) == pytest.approx(0.5)

    def test_rejects_unnormalized(self):
        with pytest.raises(ValueError):
            fidelity(2 * basis_vector(3, 0), basis_vector(3, 0))

    def test_mixed_fidelity_is_mean_of_pure(self):
        rng = np.random.default_rng(0)
        ideal = rng.standard_normal(8) + 1j * rng.standard_normal(8)
        ideal /= np.linalg.norm(ideal)
        runs = []
        for _ in range(5):
            v = rng.standard_normal(8) + 1j * rng.standard_normal(8)
            runs.append(v / np.linalg.norm(v))
        expect = np.mean([fidelity(ideal, r) for r in runs])
        assert abs(mixed_fidelity(ideal, runs) - expect) < 1e-14

    def test_mixed_fidelity_examples(self):
        ideal = basis_vector(2, 0)
        assert mixed_fidelity(ideal, [ideal, basis_vector(2, 1)]) == pytest.approx(0.5)
        with pytest.raises(ValueError):
            mixed_fidelity(ideal, [])


class TestSubensembleError:
    def test_two_group_worked_example(self):
        mean, sigma = subensemble_error([0.8, 0.6], p=2)
        assert mean == pytest.approx(0.7)
        assert sigma == pytest.approx(0.1)

    def test_constant_input(self):
        mean, sigma = subensemble_error([0.3] * 10, p=5)
        assert (mean, sigma) == (pytest.approx(0.3), 0.0)

    def test_trailing_remainder_dropped(self):
        # 7 values, p=3 -> groups of 2, last value ignored
        vals = [1, 1, 2, 2, 3, 3, 99]
        mean, _ = subensemble_error(vals, p=3)
        assert mean == pytest.approx(2.0)

    def test_sigma_shrinks_with_sample_size(self):
        rng = np.random.default_rng(1)
        small = subensemble_error(rng.normal(0.5, 0.1, 100), p=10)[1]
        large = subensemble_error(rng.normal(0.5, 0.1, 10000), p=10)[1]
        assert large < small

    def test_domain_errors(self):
        with pytest.raises(ValueError):
            subensemble_error([0.1, 0.2], p=1)
        with pytest.raises(ValueError):
            subensemble_error([0.1, 0.2], p=3)


class TestEnsembles:
    def test_zero_noise_gives_unit_fidelity(self, program):
        spec = NoiseSpec(channel="larmor", mode="static", amplitude=0.0, seed=1)
        res = run_ensemble(REF4, program, NEAR, spec, 3, reference_mode="noiseless_pulses")
        assert np.allclose(res.fidelities, 1.0, atol=1e-12)

    def test_reproducible_and_thread_count_independent(self, program):
        spec = NoiseSpec(channel="larmor", mode="static", amplitude=0.02, seed=5)
        serial = run_ensemble(REF4, program, NEAR, spec, 6, max_workers=1)
        threaded = run_ensemble(REF4, program, NEAR, spec, 6, max_workers=3)
        assert np.array_equal(serial.fidelities, threaded.fidelities)

    def test_reference_modes(self, program):
        psi0 = ground_state(4)
        tgt = reference_trajectory(REF4, program, NEAR, psi0, "target_state")
        assert np.array_equal(tgt.final, basis_vector(4, 0))
        with pytest.raises(ValueError):
            reference_trajectory(REF4, program, NEAR, psi0, "wishful_thinking")

    def test_collect_curves(self, program):
        spec = NoiseSpec(channel="larmor", mode="static", amplitude=0.02, seed=5)
        res = run_ensemble(
            REF4, program, NEAR, spec, 2, reference_mode="resonant_only",
            collect_curves=True, max_workers=1,
        )
        assert res.curves.shape == (2, len(program) + 1)
        assert res.times_tph.shape == (len(program) + 1,)
        assert np.array_equal(res.fidelities, res.curves[:, -1])

    def test_sweep_rows(self, program):
        spec = NoiseSpec(channel="larmor", mode="static", amplitude=0.0, seed=5)
        rows = sweep_amplitudes(
            REF4, program, NEAR, spec, (0.0, 0.02), 4, p_groups=2, max_workers=1
        )
        assert [r[0] for r in rows] == [0.0, 0.02]
        assert rows[0][1] == pytest.approx(1.0, abs=1e-12)
        assert rows[1][1] < 1.0
        assert all(r[3] == 4 for r in rows)


class TestDecayModels:
    def test_unity_at_zero_amplitude(self):
        for model in ("exp_gauss", "algebraic"):
            assert eval_decay_model(model, (0.2, 0.05, 0.03), 0.0) == pytest.approx(1.0)

    def test_limits(self):
        # both models approach the baseline at large amplitude
        assert eval_decay_model("exp_gauss", (0.2, 0.05, 0.03), 10.0) == pytest.approx(0.2)
        assert eval_decay_model("algebraic", (0.2, 0.05, 0.03), 1e6) == pytest.approx(0.2, abs=1e-3)

    def test_unknown_model(self):
        with pytest.raises(ValueError):
            eval_decay_model("linear", (0.2, 0.05, 0.03), 0.1)


class TestFitDecay:
    def _synthetic(self, model, params, noise_sigma, seed):
        rng = np.random.default_rng(seed)
        eps = np.linspace(0.002, 0.2, 12)
        f = eval_decay_model(model, params, eps)
        f = f + rng.normal(0.0, noise_sigma, eps.size)
        return [(e, v, noise_sigma) for e, v in zip(eps, f)]

    @pytest.mark.parametrize("model", ["exp_gauss", "algebraic"])
    def test_roundtrip_within_three_sigma(self, model):
        truth = (0.17, 0.05, 0.03)
        pts = self._synthetic(model, truth, 0.01, seed=42)
        fit = fit_decay(pts, model)
        for got, want, sig in zip(fit.params, truth, fit.sigmas):
            assert abs(got - want) <= 3 * max(sig, 1e-6)

    def test_noise_free_recovery_is_tight(self):
        truth = (0.1, 0.04, 0.02)
        eps = np.linspace(0.005, 0.15, 10)
        pts = [(e, eval_decay_model("exp_gauss", truth, e), 1e-3) for e in eps]
        fit = fit_decay(pts, "exp_gauss")
        assert np.allclose(fit.params, truth, rtol=1e-4)
        assert fit.chi2_reduced < 1e-6

    def test_degenerate_data(self):
        pts = [(e, 0.5, 0.01) for e in (0.01, 0.02, 0.03, 0.04)]
        with pytest.raises(DegenerateDataError):
            fit_decay(pts, "exp_gauss")

    def test_too_few_points(self):
        with pytest.raises(ValueError):
            fit_decay([(0.01, 0.9, 0.01)] * 3, "exp_gauss")

    def test_invalid_sigma(self):
        pts = [(0.01, 0.9, 0.0), (0.02, 0.8, 0.01), (0.03, 0.6, 0.01), (0.04, 0.4, 0.01)]
        with pytest.raises(ValueError):
            fit_decay(pts, "exp_gauss")

    def test_fit_error_carries_best_params(self):
        # FitError, when raised, must still expose the best parameters found
        try:
            raise FitError("did not converge", best=(0.1, 0.2, 0.3))
        except FitError as exc:
            assert exc.best == (0.1, 0.2, 0.3)

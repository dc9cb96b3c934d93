import numpy as np
import pytest
import scipy.linalg

from jtcqed import (
    DegenerateSteadyStateError,
    DensityMatrix,
    DissipationParams,
    NonStationaryStateError,
    SpaceSpec,
    ValidationError,
    annihilation,
    basis_ket,
    build_dimensionless_hamiltonian,
    build_liouvillian,
    correlation,
    evolve,
    expectation,
    identity,
    liouvillian_from_operators,
    number_operator,
    steady_state,
)

from conftest import random_density, random_hermitian, truncated_geometric

CAVITY = SpaceSpec((5,), 0)
SMALL = SpaceSpec((2, 2), 1)


def thermal_cavity(kappa=0.001, n_th=0.15, omega=1.0, dim=5):
    space = SpaceSpec((dim,), 0)
    h = omega * number_operator(space, 0)
    diss = DissipationParams(kappa1=kappa, kappa2=0.0, gamma=0.0, gamma_phi=0.0, n_th=n_th)
    return space, build_liouvillian(h, diss)


class TestBuildLiouvillian:
    def test_unitary_limit(self, rng):
        h = random_hermitian(SMALL, rng)
        diss = DissipationParams(kappa1=0.0, kappa2=0.0, gamma=0.0, gamma_phi=0.0, n_th=0.0)
        liou = build_liouvillian(h, diss)
        rho = random_density(SMALL, rng)
        expected = -1j * (h.matrix @ rho.matrix - rho.matrix @ h.matrix)
        assert np.allclose(liou.apply(rho.matrix), expected, atol=1e-13)
        eigs = np.linalg.eigvals(liou.matrix)
        assert np.abs(eigs.real).max() <= 1e-10

    def test_rejects_non_hermitian(self):
        from jtcqed import QOperator

        m = np.zeros((8, 8), dtype=complex)
        m[0, 3] = 1.0
        with pytest.raises(ValidationError):
            build_liouvillian(QOperator(SMALL, m), DissipationParams())

    def test_trace_row_annihilates_generator(self, rng):
        h = build_dimensionless_hamiltonian(SMALL, 0.2, 0.3)
        liou = build_liouvillian(h, DissipationParams())
        d = SMALL.total_dim
        trace_row = np.eye(d, dtype=complex).ravel(order="F")
        assert np.abs(trace_row @ liou.matrix).max() <= 1e-12

    def test_no_positive_real_part(self):
        h = build_dimensionless_hamiltonian(SMALL, 0.1, 0.2)
        liou = build_liouvillian(h, DissipationParams())
        assert np.linalg.eigvals(liou.matrix).real.max() <= 1e-10

    def test_matrix_matches_elementwise_action(self, rng):
        _, liou = thermal_cavity(kappa=0.05)
        rho = random_density(CAVITY, rng)
        vec = rho.matrix.ravel(order="F")
        via_matrix = (liou.matrix @ vec).reshape((5, 5), order="F")
        assert np.allclose(via_matrix, liou.apply(rho.matrix), atol=1e-13)


class TestEvolve:
    def test_unitary_preserves_purity(self, rng):
        h = random_hermitian(SMALL, rng)
        diss = DissipationParams(kappa1=0.0, kappa2=0.0, gamma=0.0, gamma_phi=0.0, n_th=0.0)
        liou = build_liouvillian(h, diss)
        rho0 = DensityMatrix.from_pure(SMALL, basis_ket(SMALL, [1, 0], ["e"]))
        traj = evolve(liou, rho0, np.linspace(0.0, 20.0, 11))
        purities = [s.purity() for s in traj.states]
        assert np.abs(np.array(purities) - 1.0).max() <= 1e-8

    def test_trace_preserved(self, rng):
        h = build_dimensionless_hamiltonian(SMALL, 0.3, 0.5)
        liou = build_liouvillian(h, DissipationParams(kappa1=0.02, kappa2=0.02))
        rho0 = random_density(SMALL, rng)
        traj = evolve(liou, rho0, np.linspace(0.0, 50.0, 26))
        assert traj.trace_drift <= 1e-8
        for state in traj.states:
            assert abs(np.trace(state.matrix) - 1.0) <= 1e-9

    def test_matches_exponential_oracle(self, rng):
        # Oracle: one-shot expm(L t) on the vectorized state at each time,
        # independent of both production propagation paths.
        h = build_dimensionless_hamiltonian(SMALL, 0.15, 0.4)
        liou = build_liouvillian(h, DissipationParams(kappa1=0.01, kappa2=0.02, gamma=0.01))
        rho0 = DensityMatrix.from_pure(SMALL, basis_ket(SMALL, [1, 0], ["e"]))
        times = np.linspace(0.0, 40.0, 9)
        traj = evolve(liou, rho0, times)
        vec0 = rho0.matrix.ravel(order="F")
        for t, state in zip(times, traj.states):
            oracle = (scipy.linalg.expm(liou.matrix * t) @ vec0).reshape((8, 8), order="F")
            assert np.abs(state.matrix - oracle).max() <= 1e-7

    def test_expm_path_matches_adaptive(self, rng):
        h = build_dimensionless_hamiltonian(SMALL, 0.2, 0.3)
        liou = build_liouvillian(h, DissipationParams())
        rho0 = random_density(SMALL, rng)
        times = np.linspace(0.0, 30.0, 16)
        t_a = evolve(liou, rho0, times, method="adaptive")
        t_e = evolve(liou, rho0, times, method="expm")
        for sa, se in zip(t_a.states, t_e.states):
            assert np.abs(sa.matrix - se.matrix).max() <= 1e-7

    def test_observable_recording(self):
        space, liou = thermal_cavity(kappa=0.05)
        rho0 = DensityMatrix.from_pure(space, basis_ket(space, [2], []))
        times = np.linspace(0.0, 100.0, 21)
        traj = evolve(liou, rho0, times, observables={"n": number_operator(space, 0)})
        assert traj.states is None
        n = traj.expectations["n"].real
        assert n[0] == pytest.approx(2.0, abs=1e-9)
        assert n[-1] < n[0]  # relaxing toward the thermal value
        assert traj.final_state.space == space

    def test_time_grid_validation(self, rng):
        _, liou = thermal_cavity()
        rho0 = random_density(CAVITY, rng)
        with pytest.raises(ValueError):
            evolve(liou, rho0, [1.0, 2.0])
        with pytest.raises(ValueError):
            evolve(liou, rho0, [0.0, 2.0, 1.0])
        with pytest.raises(ValueError):
            evolve(liou, rho0, [0.0, 1.0, 3.0], method="expm")


class TestSteadyState:
    def test_empty_cavity(self):
        space, liou = thermal_cavity(kappa=0.01, n_th=0.0)
        rho = steady_state(liou)
        expected = np.zeros((5, 5))
        expected[0, 0] = 1.0
        assert np.abs(rho.matrix - expected).max() <= 1e-10

    def test_thermal_distribution(self):
        space, liou = thermal_cavity()
        rho = steady_state(liou)
        probs = truncated_geometric(5, 0.15)
        assert np.abs(np.diag(rho.matrix).real - probs).max() <= 1e-12
        off = rho.matrix - np.diag(np.diag(rho.matrix))
        assert np.abs(off).max() <= 1e-12
        n = expectation(number_operator(space, 0), rho).real
        assert n == pytest.approx((np.arange(5) * probs).sum(), abs=1e-12)
        assert abs(n - 0.15) <= 2e-4  # closed-form truncation correction

    def test_unitary_only_is_degenerate(self, rng):
        h = random_hermitian(SMALL, rng)
        liou = liouvillian_from_operators(h, [])
        with pytest.raises(DegenerateSteadyStateError):
            steady_state(liou)

    def test_production_model_has_unique_mixed_steady_state(self):
        h = build_dimensionless_hamiltonian(SMALL, 0.05 / np.sqrt(2.0), 0.0)
        liou = build_liouvillian(h, DissipationParams())
        rho = steady_state(liou)
        assert liou.stationarity_residual(rho) <= 1e-10
        assert rho.purity() < 1.0

    def test_residual_small_on_random_models(self, rng):
        for _ in range(5):
            h = random_hermitian(SMALL, rng)
            diss = DissipationParams(
                kappa1=rng.uniform(0.001, 0.1),
                kappa2=rng.uniform(0.001, 0.1),
                gamma=rng.uniform(0.001, 0.1),
                gamma_phi=rng.uniform(0.001, 0.1),
                n_th=rng.uniform(0.0, 0.5),
            )
            liou = build_liouvillian(h, diss)
            rho = steady_state(liou)
            assert liou.stationarity_residual(rho) <= 1e-10


class TestCorrelation:
    def test_identity_pair_is_flat(self):
        space, liou = thermal_cavity(kappa=0.05)
        rho = steady_state(liou)
        one = identity(space)
        series = correlation(liou, rho, one, one, np.linspace(0.0, 50.0, 11))
        assert np.abs(series.values - 1.0).max() <= 1e-8

    def test_zero_delay_is_static_expectation(self):
        space, liou = thermal_cavity(kappa=0.05)
        rho = steady_state(liou)
        a = annihilation(space, 0)
        series = correlation(liou, rho, a.dag(), a, np.linspace(0.0, 10.0, 5))
        static = np.trace(a.dag().matrix @ a.matrix @ rho.matrix)
        assert abs(series.values[0] - static) <= 1e-12

    def test_thermal_occupation_and_decay(self):
        space, liou = thermal_cavity(kappa=0.05)
        rho = steady_state(liou)
        a = annihilation(space, 0)
        taus = np.linspace(0.0, 200.0, 101)
        series = correlation(liou, rho, a.dag(), a, taus)
        probs = truncated_geometric(5, 0.15)
        assert series.values[0].real == pytest.approx((np.arange(5) * probs).sum(), abs=1e-12)
        mags = np.abs(series.values)
        assert np.all(np.diff(mags) <= 1e-12)

    def test_matches_exponential_oracle(self):
        space, liou = thermal_cavity(kappa=0.05)
        rho = steady_state(liou)
        a = annihilation(space, 0)
        taus = np.linspace(0.0, 100.0, 26)
        series = correlation(liou, rho, a.dag(), a, taus, method="adaptive")
        seed = a.matrix @ rho.matrix
        for tau, value in zip(taus, series.values):
            prop = scipy.linalg.expm(liou.matrix * tau)
            oracle = np.trace(
                a.dag().matrix @ (prop @ seed.ravel(order="F")).reshape((5, 5), order="F")
            )
            assert abs(value - oracle) <= 1e-6
        # phase convention: C(tau) rotates as exp(+i omega tau)
        tau1 = taus[1]
        assert abs(np.angle(series.values[1] * np.exp(-1j * 1.0 * tau1))) < 0.05

    def test_linear_in_both_operators(self, rng):
        # checked on the exponential path: adaptive stepping is state
        # dependent, so its discretization error is not linear in the seed
        space, liou = thermal_cavity(kappa=0.05)
        rho = steady_state(liou)
        taus = np.linspace(0.0, 20.0, 6)
        ops = [random_hermitian(space, rng) for _ in range(4)]
        alpha, beta = 0.7 - 0.2j, -1.3 + 0.4j

        def corr(a_op, b_op):
            return correlation(liou, rho, a_op, b_op, taus, method="expm").values

        combined_a = corr(alpha * ops[0] + beta * ops[1], ops[2])
        split_a = alpha * corr(ops[0], ops[2]) + beta * corr(ops[1], ops[2])
        assert np.abs(combined_a - split_a).max() <= 1e-10

        combined_b = corr(ops[2], alpha * ops[0] + beta * ops[1])
        split_b = alpha * corr(ops[2], ops[0]) + beta * corr(ops[2], ops[1])
        assert np.abs(combined_b - split_b).max() <= 1e-10

    def test_rejects_non_stationary_state(self):
        space, liou = thermal_cavity(kappa=0.05)
        rho0 = DensityMatrix.from_pure(space, basis_ket(space, [2], []))
        a = annihilation(space, 0)
        with pytest.raises(NonStationaryStateError):
            correlation(liou, rho0, a.dag(), a, np.linspace(0.0, 10.0, 5))

    def test_delay_grid_validation(self):
        space, liou = thermal_cavity(kappa=0.05)
        rho = steady_state(liou)
        a = annihilation(space, 0)
        with pytest.raises(ValueError):
            correlation(liou, rho, a.dag(), a, [1.0, 2.0])

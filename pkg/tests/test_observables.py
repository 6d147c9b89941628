import math

import numpy as np
import pytest
from scipy.linalg import expm
from scipy.stats import binom

from andersonlab.fields import (
    Box,
    ConstantBase,
    FieldSample,
    FieldSpec,
    UniformBase,
    sample_field,
)
from andersonlab.hamiltonian import (
    HamiltonianSpec,
    InteractionSpec,
    assemble,
    assemble_trial,
    sample_for_cube,
)
from andersonlab.lattice import (
    Cube,
    cube,
    cube_points_array,
    origin_cube,
    row_indices,
    separated_config,
)
from andersonlab.observables import (
    combes_thomas_ratio,
    dynamical_moment,
    eigenfunction_decay,
    large_deviation_probability,
    lifshitz_tail,
    spectral_edge_estimate,
    weyl_tensor_residual,
)
from andersonlab.spectral import dense_eigh, lowest_eigenpair

FREE_1D = HamiltonianSpec(n=1, d=1, field=FieldSpec.constant(1, 0.0))


def iid_spec(n, d, a=1.0, seed=0, interaction=None):
    return HamiltonianSpec(
        n=n,
        d=d,
        field=FieldSpec.iid(d, UniformBase(a), seed=seed),
        interaction=interaction or InteractionSpec.none(),
    )


# --- independent oracle for the large-deviation probability -----------------


def irwin_hall_cdf(x: float, n: int) -> float:
    if n == 0:
        return 1.0 if x >= 0 else 0.0
    if x <= 0:
        return 0.0
    if x >= n:
        return 1.0
    total = 0.0
    for j in range(int(math.floor(x)) + 1):
        total += (-1) ** j * math.comb(n, j) * (x - j) ** n
    return total / math.factorial(n)


def exact_truncated_mean_tail(m: int, cap: float, s: float) -> float:
    """P(sum_i min(U_i, cap) < s) for U_i iid uniform[0,1].

    Enumerates the number k of sites below the cap (binomial) and uses the
    Irwin-Hall law for the below-cap part; independent of the sampling path.
    """
    total = 0.0
    for k in range(m + 1):
        thr = s / cap - (m - k)
        total += (
            math.comb(m, k)
            * cap**k
            * (1 - cap) ** (m - k)
            * irwin_hall_cdf(thr, k)
        )
    return total


class TestLargeDeviation:
    E, BETA, C = 0.3, 0.6, 3.0  # gives L = 2, cap = 1/4, threshold E/2 = 0.15

    def test_zero_field_always_below(self):
        spec = FieldSpec.constant(1, 0.0)
        r = large_deviation_probability(spec, self.E, self.BETA, self.C, 2000)
        assert r.estimate == 1.0

    def test_capped_field_never_below(self):
        # constant 1.0 >= cap, so the truncated field sits at the cap and the
        # cube mean equals cap = 0.25 > E/2
        spec = FieldSpec.constant(1, 1.0)
        r = large_deviation_probability(spec, self.E, self.BETA, self.C, 2000)
        assert r.estimate == 0.0

    def test_iid_uniform_matches_enumeration_oracle(self):
        r = large_deviation_probability(
            FieldSpec.iid(1, UniformBase(1.0), seed=5), self.E, self.BETA, self.C, 50_000
        )
        assert r.big_l == 2 and r.cube_size == 5
        exact = exact_truncated_mean_tail(5, 0.25, 5 * self.E / 2)
        assert exact == pytest.approx(0.0227294921875, abs=1e-12)  # frozen
        sigma = math.sqrt(exact * (1 - exact) / 50_000)
        assert abs(r.estimate - exact) < 4 * sigma

    def test_count_bound_from_binomial(self):
        # mean < E/2 forces more than M*(1 - (E/2)/cap) sites below the cap
        r = large_deviation_probability(
            FieldSpec.iid(1, UniformBase(1.0), seed=5), self.E, self.BETA, self.C, 50_000
        )
        kstar = math.floor(5 * (1 - (self.E / 2) / 0.25)) + 1
        bound = float(binom.sf(kstar - 1, 5, 0.25))
        assert bound == pytest.approx(0.103515625, abs=1e-12)  # frozen
        assert r.estimate <= bound

    def test_small_scale_rejected(self):
        with pytest.raises(ValueError):
            large_deviation_probability(FieldSpec.constant(1, 0.0), 10.0, 1.0, 3.0, 2000)


class TestLifshitzTail:
    def test_free_field_estimate_one(self):
        r = lifshitz_tail(FREE_1D, 1, 32, 1.0, 100)
        assert r.estimate == 1.0

    def test_large_constant_estimate_zero(self):
        spec = HamiltonianSpec(n=1, d=1, field=FieldSpec.constant(1, 5.0))
        r = lifshitz_tail(spec, 1, 16, 1.0, 100)
        assert r.estimate == 0.0

    def test_two_particle_never_exceeds_single(self):
        """E0 grows with the particle count pathwise, so the n = 2 tail
        estimate sits below the n = 1 estimate at equal parameters."""
        spec = iid_spec(2, 1, seed=14)
        r1 = lifshitz_tail(spec, 1, 8, 1.0, 200)
        r2 = lifshitz_tail(spec, 2, 8, 1.0, 200)
        assert r2.estimate <= r1.estimate + (r1.ci[1] - r1.ci[0])

    def test_ci_inside_unit_interval(self):
        r = lifshitz_tail(iid_spec(1, 1, seed=2), 1, 16, 1.0, 150)
        assert 0.0 <= r.ci[0] <= r.ci[1] <= 1.0


class TestCombesThomas:
    def test_scalar_ratio_half(self):
        spec = HamiltonianSpec(n=1, d=1, field=FieldSpec.constant(1, 0.4))
        op = assemble_trial(spec, origin_cube(0, 1, 1), 0)
        assert combes_thomas_ratio(op, 2.4 - 0.8) == pytest.approx(0.5)

    def test_free_three_site(self):
        op = assemble_trial(FREE_1D, origin_cube(1, 1, 1), 0)
        assert combes_thomas_ratio(op, 0.0) <= 1.0

    def test_eta_precondition(self):
        op = assemble_trial(FREE_1D, origin_cube(1, 1, 1), 0)
        with pytest.raises(ValueError):
            combes_thomas_ratio(op, -5.0)  # eta > 1

    def test_random_instances_certified(self):
        sizes = [(1, 1, 6), (2, 1, 3), (1, 2, 3)]
        from andersonlab import prng

        for trial in range(60):
            n, d, big_l = sizes[trial % len(sizes)]
            op = assemble_trial(
                iid_spec(n, d, a=2.0, seed=21), origin_cube(big_l, n, d), trial
            )
            e0, _ = lowest_eigenpair(op)
            eta = 0.05 + 0.95 * prng.unit_from_words(21, trial)
            assert combes_thomas_ratio(op, e0 - eta) <= 1.0 + 1e-12


class TestEigenfunctionDecay:
    def test_single_site_degenerate(self):
        spec = HamiltonianSpec(n=1, d=1, field=FieldSpec.constant(1, 0.4))
        op = assemble_trial(spec, origin_cube(0, 1, 1), 0)
        fits = eigenfunction_decay(op, (0.0, 10.0))
        assert len(fits) == 1 and fits[0].degenerate
        assert math.isnan(fits[0].fitted_rate)

    def test_impurity_ground_state(self):
        region = Box((-10,), (10,))
        values = np.full(21, 10.0)
        values[10] = 0.0
        sample = FieldSample(region, values)
        spec = HamiltonianSpec(n=1, d=1, field=FieldSpec.constant(1, 10.0))
        op = assemble(spec, origin_cube(10, 1, 1), sample)
        e0, _ = lowest_eigenpair(op)
        fit = eigenfunction_decay(op, (e0, e0))[0]
        assert fit.center.coords == (0,)
        assert fit.fitted_rate > 1.0
        assert not fit.degenerate
        # log shell maxima decrease monotonically for the single-well state
        assert np.all(np.diff(fit.shell_log_amp) < 0)

    def test_disorder_median_rate_positive(self):
        rates = []
        spec = iid_spec(1, 1, a=5.0, seed=31)
        for trial in range(100):
            op = assemble_trial(spec, origin_cube(20, 1, 1), trial)
            e0, _ = lowest_eigenpair(op)
            fits = eigenfunction_decay(op, (e0, e0 + 0.1))
            rates.extend(f.fitted_rate for f in fits if not f.degenerate)
        assert np.median(rates) > 0.0


class TestDynamicalMoment:
    def test_projector_frobenius_norm(self):
        op = assemble_trial(iid_spec(1, 1, seed=7), origin_cube(5, 1, 1), 1)
        w, _ = dense_eigh(op)
        full = origin_cube(5, 1, 1)
        dm = dynamical_moment(op, (w[0] - 1, w[-1] + 1), 0.0, full, [0.0])
        assert dm.values[0] == pytest.approx(op.dim, rel=1e-10)

    def test_disjoint_interval_zero(self):
        op = assemble_trial(iid_spec(1, 1, seed=7), origin_cube(4, 1, 1), 2)
        dm = dynamical_moment(op, (-10.0, -5.0), 1.0, origin_cube(1, 1, 1), [0.0, 1.0])
        assert np.all(dm.values == 0.0) and dm.bound == 0.0

    def test_matches_matrix_exponential_oracle(self):
        times = [0.0, 0.3, 2.0, 17.0]
        for trial in range(6):
            op = assemble_trial(iid_spec(1, 1, a=2.0, seed=8), origin_cube(9, 1, 1), trial)
            w, v = np.linalg.eigh(op.dense())
            interval = (w[0], w[0] + 1.5)
            sub = origin_cube(3, 1, 1)
            dm = dynamical_moment(op, interval, 0.8, sub, times)

            keep = (w >= interval[0]) & (w <= interval[1])
            proj = v[:, keep] @ v[:, keep].T
            pts = cube_points_array(op.cube)
            weights = np.abs(pts).max(axis=1).astype(float) ** 0.8
            kcols = row_indices(op.cube, cube_points_array(sub))
            scale = max(dm.values.max(), 1.0)
            for i, t in enumerate(times):
                u_t = expm(-1j * t * op.dense())
                block = (u_t @ proj)[:, kcols]
                oracle = float(np.sum(weights[:, None] * np.abs(block) ** 2))
                assert abs(dm.values[i] - oracle) <= 1e-8 * scale
                assert dm.values[i] <= dm.bound + 1e-10

    def test_k_must_be_contained(self):
        op = assemble_trial(iid_spec(1, 1, seed=7), origin_cube(3, 1, 1), 0)
        with pytest.raises(ValueError):
            dynamical_moment(op, (0, 5), 1.0, origin_cube(4, 1, 1), [0.0])


class TestWeylTensor:
    INTERACTION = InteractionSpec.constant(1.0, 2)

    def spec(self, n=2, d=1):
        return HamiltonianSpec(
            n=n, d=d, field=FieldSpec.constant(d, 0.0), interaction=self.INTERACTION
        )

    def test_residual_bounded_by_single_sum(self):
        spec = self.spec()
        km = 3
        op1 = assemble_trial(
            HamiltonianSpec(n=1, d=1, field=FieldSpec.constant(1, 0.0)),
            origin_cube(km, 1, 1),
            0,
        )
        _, phi = lowest_eigenpair(op1)
        residual = weyl_tensor_residual(spec, 1, km, [phi, phi])
        # recompute the single-particle side independently
        x_sep = separated_config(2, 1, 2, 1, km)
        sample = sample_for_cube(spec, Cube(x_sep, km + 1), 0)
        single = HamiltonianSpec(n=1, d=1, field=spec.field)
        total = 0.0
        for j in range(2):
            cj = cube(x_sep.particle(j), km + 1, 1, 1)
            opj = assemble(single, cj, sample)
            embedded = np.zeros(opj.dim)
            embedded[km + 1 - km : km + 1 + km + 1] = phi
            total += np.linalg.norm(opj.apply(embedded))
        assert residual <= total + 1e-10

    def test_decoupled_tensor_additivity(self):
        """Tensor products of restricted eigenvectors are exact eigenvectors
        of the decoupled product operator: ||H phi|| = (E1 + E2) ||phi||."""
        km = 3
        spec = self.spec()
        x_sep = separated_config(2, 1, 2, 1, km)
        product_cube = Cube(x_sep, km)  # interaction vanishes on this cube
        sample = sample_for_cube(spec, product_cube, 0)
        single = HamiltonianSpec(n=1, d=1, field=spec.field)
        singles = []
        energies = []
        for j in range(2):
            cj = cube(x_sep.particle(j), km, 1, 1)
            opj = assemble(single, cj, sample)
            e, v = lowest_eigenpair(opj)
            energies.append(e)
            singles.append(v)
        phi = np.kron(singles[0], singles[1])
        op = assemble(spec, product_cube, sample)
        value = np.linalg.norm(op.apply(phi)) / np.linalg.norm(phi)
        assert value == pytest.approx(sum(energies), abs=1e-9)

    def test_free_quasimode_residual_decreases(self):
        spec = self.spec()
        free_single = HamiltonianSpec(n=1, d=1, field=FieldSpec.constant(1, 0.0))
        residuals = []
        for m in (2, 4, 8, 12):
            op1 = assemble_trial(free_single, origin_cube(m, 1, 1), 0)
            _, phi = lowest_eigenpair(op1)
            residuals.append(weyl_tensor_residual(spec, 1, m, [phi, phi]))
        assert all(a > b for a, b in zip(residuals, residuals[1:]))
        assert residuals[-1] < 0.25 * residuals[0]

    def test_oversized_support_rejected(self):
        spec = self.spec()
        with pytest.raises(ValueError):
            weyl_tensor_residual(spec, 1, 2, [np.ones(7), np.ones(7)])  # radius 3 > km=2

    def test_wrong_vector_count_rejected(self):
        with pytest.raises(ValueError):
            weyl_tensor_residual(self.spec(), 1, 2, [np.ones(5)])


class TestSpectralEdge:
    def test_free_ground_energy(self):
        r = spectral_edge_estimate(FREE_1D, 1, 8, 10)
        assert r.minimum == pytest.approx(2 - 2 * math.cos(math.pi / 18), abs=1e-10)

    def test_constant_shift_tensor_sum(self):
        v = 0.7
        spec = HamiltonianSpec(n=2, d=1, field=FieldSpec.constant(1, v))
        r = spectral_edge_estimate(spec, 2, 4, 10)
        free_pair = 2 * (2 - 2 * math.cos(math.pi / 10))
        assert r.minimum == pytest.approx(2 * v + free_pair, abs=1e-10)

    def test_minimum_decreases_with_scale(self):
        spec = iid_spec(2, 1, seed=41)
        small = spectral_edge_estimate(spec, 2, 4, 200)
        large = spectral_edge_estimate(spec, 2, 12, 200)
        assert large.minimum < small.minimum

"""The verifiable estimates, run as numerical experiments.

Each operation here turns one of the quantitative statements about the
model into something a desk-scale Monte Carlo run can check: large
deviations of cube averages, the low-energy tail of the ground state,
Combes-Thomas off-diagonal resolvent decay, exponential eigenfunction
decay, the Hilbert-Schmidt dynamical moment, and the tensor-product
Weyl construction at well-separated particle configurations.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .fields import Box, FieldSpec, _bulk_values_at
from .hamiltonian import (
    AssembledOperator,
    HamiltonianSpec,
    assemble,
    assemble_trial,
    sample_for_cube,
)
from .lattice import (
    Cube,
    ParticleConfig,
    cube,
    cube_points_array,
    iter_shells,
    max_norm,
    origin_cube,
    row_indices,
    separated_config,
)
from .spectral import dist_to_spectrum, lowest_eigenvalue, spectrum_in_window
from .stats import log_slope, wilson_ci

#: Shell amplitudes at or below this floor are numerical noise.
AMPLITUDE_FLOOR = 10 * np.finfo(np.float64).eps


# ---------------------------------------------------------------------------
# large deviations of truncated cube averages
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LargeDeviationResult:
    estimate: float
    ci: tuple[float, float]
    big_l: int
    cube_size: int
    trials: int
    below_count: int

    @property
    def gamma_hat(self) -> float | None:
        """Empirical decay rate -ln(estimate) / |C_L|, when defined."""
        if self.estimate <= 0.0:
            return None
        return -math.log(self.estimate) / self.cube_size


def large_deviation_probability(
    spec: FieldSpec, energy: float, beta: float, c: float, trials: int
) -> LargeDeviationResult:
    """Frequency of {cube average of the truncated field < E/2}.

    The cube radius is tied to the energy through L = floor((beta*E)^(-1/2))
    and the field is capped at c/3 * L^(-2) before averaging.
    """
    if energy <= 0 or beta <= 0:
        raise ValueError("need E > 0 and beta > 0")
    if trials < 1000:
        raise ValueError("large-deviation estimate needs at least 10^3 trials")
    big_l = int(math.floor((beta * energy) ** -0.5))
    if big_l < 2:
        raise ValueError(
            f"beta*E = {beta * energy} gives L = {big_l} < 2; choose smaller beta*E"
        )
    region = Box.centered((0,) * spec.d, big_l)
    sites = region.sites()
    cap = c / 3.0 * float(big_l) ** -2

    tt = np.arange(trials, dtype=np.int64)
    values = _bulk_values_at(spec, sites, tt)  # (T, M)
    means = np.minimum(values, cap).mean(axis=1)
    below = int(np.count_nonzero(means < energy / 2.0))
    return LargeDeviationResult(
        estimate=below / trials,
        ci=wilson_ci(below, trials),
        big_l=big_l,
        cube_size=sites.shape[0],
        trials=trials,
        below_count=below,
    )


# ---------------------------------------------------------------------------
# low-energy tail of the finite-volume ground state
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TailResult:
    estimate: float
    ci: tuple[float, float]
    threshold: float
    big_l: int
    n: int
    trials: int
    below_count: int
    ground_energies: np.ndarray


def ground_energies(
    spec: HamiltonianSpec, n: int, big_l: int, trials: int
) -> np.ndarray:
    """Lowest eigenvalue of H on C^(n)_L(0) for each disorder trial."""
    spec_n = HamiltonianSpec(
        n=n, d=spec.d, field=spec.field, interaction=spec.interaction
    )
    c = origin_cube(big_l, n, spec.d)
    return np.array(
        [lowest_eigenvalue(assemble_trial(spec_n, c, t)) for t in range(trials)]
    )


def lifshitz_tail(
    spec: HamiltonianSpec, n: int, big_l: int, c_const: float, trials: int
) -> TailResult:
    """Empirical P{E_0 <= 2*C*L^(-1/2)} over disorder realizations."""
    if trials < 100:
        raise ValueError("tail estimate needs at least 10^2 trials")
    threshold = 2.0 * c_const * float(big_l) ** -0.5
    energies = ground_energies(spec, n, big_l, trials)
    below = int(np.count_nonzero(energies <= threshold))
    return TailResult(
        estimate=below / trials,
        ci=wilson_ci(below, trials),
        threshold=threshold,
        big_l=big_l,
        n=n,
        trials=trials,
        below_count=below,
        ground_energies=energies,
    )


# ---------------------------------------------------------------------------
# Combes-Thomas off-diagonal resolvent decay
# ---------------------------------------------------------------------------


def combes_thomas_ratio(op: AssembledOperator, energy: float) -> float:
    """Worst ratio of |G(E; x, y)| to the off-diagonal decay bound
    2/eta * exp(-eta/(12 nu) |x - y|), nu = n*d.

    A value <= 1 certifies the decay bound on this instance.  The
    spectral distance eta must lie in (0, 1].
    """
    eta = dist_to_spectrum(op, energy)
    if not 0.0 < eta <= 1.0:
        raise ValueError(f"spectral distance eta = {eta} outside (0, 1]")
    if not op.is_dense_eligible():
        raise ValueError("full-pair ratio check requires a dense-eligible cube")
    nu = op.cube.n * op.cube.d
    green = np.linalg.inv(op.dense() - energy * np.eye(op.dim))
    points = op.points()
    worst = 0.0
    block = max(1, 2_000_000 // max(op.dim, 1))
    for start in range(0, op.dim, block):
        stop = min(start + block, op.dim)
        dist = np.max(
            np.abs(points[start:stop, None, :] - points[None, :, :]), axis=2
        )
        bound = (2.0 / eta) * np.exp(-eta / (12.0 * nu) * dist)
        worst = max(worst, float(np.max(np.abs(green[start:stop]) / bound)))
    return worst


# ---------------------------------------------------------------------------
# eigenfunction decay profiles
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DecayFit:
    """Exponential-decay fit of one eigenfunction in max-norm shells."""

    eigenvalue: float
    center: ParticleConfig
    shell_radii: np.ndarray
    shell_log_amp: np.ndarray
    rates: np.ndarray
    fitted_rate: float
    r_range: tuple[int, int]
    degenerate: bool


def eigenfunction_decay(op: AssembledOperator, window) -> list[DecayFit]:
    """Decay fits for every eigenpair with eigenvalue in the window.

    The localization center is the amplitude argmax; the fitted rate is
    minus the least-squares slope of log shell maxima against shell
    radius, using only shells above the numerical noise floor.
    """
    res = spectrum_in_window(op, window)
    points = cube_points_array(op.cube)
    fits = []
    for j in range(len(res)):
        psi = res.eigenvectors[:, j]
        amp = np.abs(psi)
        center_row = int(np.argmax(amp))
        center = ParticleConfig(
            n=op.cube.n, d=op.cube.d, coords=tuple(points[center_row])
        )
        radii, log_amp = [], []
        for r, idx in iter_shells(op.cube, center):
            shell_max = float(np.max(amp[idx]))
            if shell_max > AMPLITUDE_FLOOR:
                radii.append(r)
                log_amp.append(math.log(shell_max))
        radii = np.asarray(radii)
        log_amp = np.asarray(log_amp)
        degenerate = radii.size < 2
        if degenerate:
            fitted = math.nan
            rates = np.empty(0)
            r_range = (int(radii[0]), int(radii[0])) if radii.size else (0, 0)
        else:
            fitted = -log_slope(radii, log_amp)
            rates = -np.diff(log_amp) / np.diff(radii)
            r_range = (int(radii[0]), int(radii[-1]))
        fits.append(
            DecayFit(
                eigenvalue=float(res.eigenvalues[j]),
                center=center,
                shell_radii=radii,
                shell_log_amp=log_amp,
                rates=rates,
                fitted_rate=fitted,
                r_range=r_range,
                degenerate=degenerate,
            )
        )
    return fits


# ---------------------------------------------------------------------------
# dynamical localization moment
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DynamicalMoment:
    times: np.ndarray
    values: np.ndarray
    sup: float
    bound: float


def dynamical_moment(
    op: AssembledOperator, interval, s: float, sub: Cube, times
) -> DynamicalMoment:
    """Weighted Hilbert-Schmidt moment of the time evolution.

    M(t) = sum_x sum_{y in K} |x|^s |sum_{j: lambda_j in I}
    e^{-i t lambda_j} psi_j(x) psi_j(y)|^2, together with the
    time-uniform correlator bound obtained by moving absolute values
    inside the eigensum.  M(t) <= bound for every t.
    """
    if s < 0:
        raise ValueError("moment exponent s must be non-negative")
    if sub.n != op.cube.n or sub.d != op.cube.d:
        raise ValueError("K must live on the same particle lattice")
    center_gap = max_norm(np.subtract(sub.center.coords, op.cube.center.coords))
    if center_gap + sub.radius > op.cube.radius:
        raise ValueError("K must be contained in the operator's cube")

    times = np.asarray(times, dtype=np.float64)
    res = spectrum_in_window(op, interval)
    if res.is_empty:
        zeros = np.zeros(times.size)
        return DynamicalMoment(times=times, values=zeros, sup=0.0, bound=0.0)

    points = cube_points_array(op.cube)
    weights = np.max(np.abs(points), axis=1).astype(np.float64) ** s
    kidx = row_indices(op.cube, cube_points_array(sub))
    psi = res.eigenvectors  # (M, K)
    psi_k = psi[kidx, :]  # (|K|, K)

    abs_corr = np.abs(psi) @ np.abs(psi_k).T  # (M, |K|)
    bound = float(np.sum(weights[:, None] * abs_corr**2))

    values = np.empty(times.size)
    lam = res.eigenvalues
    for i, t in enumerate(times):
        phase = np.exp(-1j * t * lam)
        kernel = (psi * phase[None, :]) @ psi_k.T  # (M, |K|) complex
        values[i] = float(
            np.sum(weights[:, None] * (kernel.real**2 + kernel.imag**2))
        )
    return DynamicalMoment(
        times=times, values=values, sup=float(np.max(values)), bound=bound
    )


# ---------------------------------------------------------------------------
# tensor Weyl construction at separated configurations
# ---------------------------------------------------------------------------


def _infer_radius(length: int, d: int) -> int:
    side = round(length ** (1.0 / d))
    for cand in (side - 1, side, side + 1):
        if cand >= 1 and cand % 2 == 1 and cand**d == length:
            return (cand - 1) // 2
    raise ValueError(f"vector of length {length} is not a d={d} cube enumeration")


def weyl_tensor_residual(
    spec: HamiltonianSpec,
    k: int,
    m: int,
    singles,
    trial: int = 0,
) -> float:
    """Relative residual ||H phi|| / ||phi|| of the tensor quasi-mode.

    Each single-particle vector phi_j (given on a cube of radius <= k*m
    around the origin) is translated to sit around its slot of the
    separated configuration, where the pair interaction vanishes on the
    product support; phi is their tensor product.  The result never
    exceeds the sum of the single-particle residuals (triangle
    inequality for the decoupled Kronecker sum).
    """
    n, d = spec.n, spec.d
    if len(singles) != n:
        raise ValueError(f"need {n} single-particle vectors, got {len(singles)}")
    if k < 1 or m < 1:
        raise ValueError("need k >= 1 and m >= 1")
    km = k * m
    r0 = spec.interaction.r0

    vecs = []
    for j, phi in enumerate(singles):
        phi = np.asarray(phi, dtype=np.float64)
        r = _infer_radius(phi.size, d)
        if r > km:
            raise ValueError(
                f"vector {j} lives on radius {r} > k*m = {km}; support too large"
            )
        if not np.any(phi):
            raise ValueError(f"vector {j} is identically zero")
        # embed into the radius-(km+1) cube: the +1 ring captures the
        # infinite-volume action on the support
        inner = origin_cube(r, 1, d)
        outer = origin_cube(km + 1, 1, d)
        embedded = np.zeros(outer.num_points)
        embedded[row_indices(outer, cube_points_array(inner))] = phi
        vecs.append(embedded)

    x_sep = separated_config(n, d, r0, k, m)
    product_cube = Cube(x_sep, km + 1)
    sample = sample_for_cube(spec, product_cube, trial)
    op = assemble(spec, product_cube, sample)

    phi_total = vecs[0]
    for v in vecs[1:]:
        phi_total = np.kron(phi_total, v)
    residual = float(
        np.linalg.norm(op.apply(phi_total)) / np.linalg.norm(phi_total)
    )

    singles_sum = 0.0
    single_spec = spec.single_particle()
    for j, v in enumerate(vecs):
        cj = cube(x_sep.particle(j), km + 1, 1, d)
        opj = assemble(single_spec, cj, sample)
        singles_sum += float(np.linalg.norm(opj.apply(v)) / np.linalg.norm(v))

    if residual > singles_sum + 1e-10:
        raise RuntimeError(
            f"tensor residual {residual} exceeds single-mode sum {singles_sum}"
        )
    return residual


# ---------------------------------------------------------------------------
# lower spectral edge
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class EdgeResult:
    minimum: float
    ground_energies: np.ndarray
    big_l: int
    n: int


def spectral_edge_estimate(
    spec: HamiltonianSpec, n: int, big_l: int, trials: int
) -> EdgeResult:
    """Per-trial ground energies and their minimum on C^(n)_L(0).

    As L and the trial count grow the minimum drifts toward the
    (non-random) bottom of the spectrum.
    """
    if trials < 10:
        raise ValueError("edge estimate needs at least 10 trials")
    energies = ground_energies(spec, n, big_l, trials)
    return EdgeResult(
        minimum=float(np.min(energies)),
        ground_energies=energies,
        big_l=big_l,
        n=n,
    )

"""Assembly of the multi-particle Hamiltonian on a finite cube.

H = -Laplacian + sum_j V(x_j) + U(x), restricted to the cube by simply
dropping hopping terms that leave it (simple boundary conditions).  The
diagonal keeps the full 2*d*n kinetic term at boundary sites, which
makes the restricted kinetic part positive semidefinite with the exact
1-d free spectrum 2 - 2cos(j*pi/(2L+2)).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .errors import CoverageError
from .fields import Box, FieldSample, FieldSpec, sample_field
from .lattice import Cube, ParticleConfig, cube_points_array

#: Cubes up to this dimension may use dense linear algebra.
DENSE_LIMIT = 2000


@dataclass(frozen=True)
class InteractionSpec:
    """Pair interaction U(x) = sum_{i<j} phi(|x_i - x_j|) of finite range.

    ``phi`` is tabulated on integer distances 0..r0; distances beyond r0
    contribute nothing.  Pair distance uses the max-norm on Z^d.
    """

    r0: int = 0
    phi: tuple[float, ...] = (0.0,)

    def __post_init__(self):
        if self.r0 < 0:
            raise ValueError("interaction range must be non-negative")
        phi = tuple(float(v) for v in self.phi)
        if len(phi) != self.r0 + 1:
            raise ValueError("phi table must have r0 + 1 entries")
        if any(v < 0 for v in phi):
            raise ValueError("phi values must be non-negative")
        object.__setattr__(self, "phi", phi)

    @classmethod
    def constant(cls, u: float, r0: int) -> "InteractionSpec":
        """phi = u on [0, r0], the default interaction shape."""
        return cls(r0=r0, phi=(float(u),) * (r0 + 1))

    @classmethod
    def none(cls) -> "InteractionSpec":
        return cls(r0=0, phi=(0.0,))

    @property
    def sup(self) -> float:
        return max(self.phi)

    def phi_at(self, r: int) -> float:
        return self.phi[r] if 0 <= r <= self.r0 else 0.0

    def phi_array(self, max_dist: int) -> np.ndarray:
        """phi tabulated on 0..max_dist with zeros beyond the range."""
        out = np.zeros(max_dist + 1)
        upto = min(self.r0, max_dist)
        out[: upto + 1] = self.phi[: upto + 1]
        return out


@dataclass(frozen=True)
class HamiltonianSpec:
    """n interacting particles in Z^d over a given random field."""

    n: int
    d: int
    field: FieldSpec
    interaction: InteractionSpec = field(default_factory=InteractionSpec.none)

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("particle count must be >= 1")
        if self.d != self.field.d:
            raise ValueError("field dimension does not match the Hamiltonian")

    def single_particle(self) -> "HamiltonianSpec":
        return HamiltonianSpec(n=1, d=self.d, field=self.field)


def interaction_energy(x: ParticleConfig, spec: InteractionSpec) -> float:
    """U(x) = sum over unordered particle pairs of phi(max-norm distance)."""
    if x.n < 2:
        return 0.0
    total = 0.0
    for i in range(x.n):
        for j in range(i + 1, x.n):
            diff = np.subtract(x.particle(i), x.particle(j))
            total += spec.phi_at(int(np.max(np.abs(diff))))
    return total


@dataclass(frozen=True, eq=False)
class AssembledOperator:
    """Sparse symmetric matrix of H restricted to a cube.

    Row/column order is the lexicographic enumeration of the cube's
    points (``lattice.cube_points_array``).  Identity equality/hash, so
    spectral decompositions can be cached per instance.
    """

    cube: Cube
    matrix: sp.csr_matrix

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def center_index(self) -> int:
        return self.cube.index_of(self.cube.center)

    def points(self) -> np.ndarray:
        return cube_points_array(self.cube)

    def apply(self, psi: np.ndarray) -> np.ndarray:
        """Matrix-vector product A @ psi."""
        psi = np.asarray(psi)
        if psi.shape[0] != self.dim:
            raise ValueError(f"vector length {psi.shape[0]} != dim {self.dim}")
        return self.matrix @ psi

    def dense(self) -> np.ndarray:
        return self.matrix.toarray()

    def is_dense_eligible(self) -> bool:
        return self.dim <= DENSE_LIMIT

    def diagonal(self) -> np.ndarray:
        return self.matrix.diagonal()

    def write_coordinate_text(self, path) -> None:
        """Debug export: one 'row col value' line per stored entry."""
        coo = self.matrix.tocoo()
        with open(path, "w", encoding="utf-8") as fh:
            for r, c, v in zip(coo.row, coo.col, coo.data):
                fh.write(f"{int(r)} {int(c)} {float(v)!r}\n")


def apply(op: AssembledOperator, psi: np.ndarray) -> np.ndarray:
    return op.apply(psi)


def required_region(spec: HamiltonianSpec, cube: Cube) -> Box:
    """Smallest field box covering every particle's projection of the cube."""
    los, his = [], []
    for j in range(cube.n):
        pos = cube.center.particle(j)
        los.append(tuple(c - cube.radius for c in pos))
        his.append(tuple(c + cube.radius for c in pos))
    lo = tuple(min(l[k] for l in los) for k in range(cube.d))
    hi = tuple(max(h[k] for h in his) for k in range(cube.d))
    return Box(lo, hi)


def sample_for_cube(spec: HamiltonianSpec, cube: Cube, trial: int) -> FieldSample:
    """Field sample on exactly the region the cube needs."""
    return sample_field(spec.field, required_region(spec, cube), trial)


def assemble(
    spec: HamiltonianSpec, cube: Cube, sample: FieldSample
) -> AssembledOperator:
    """Build the restricted operator matrix from a realized field sample."""
    if cube.n != spec.n or cube.d != spec.d:
        raise ValueError("cube particle structure does not match the spec")
    if not sample.region.contains_box(required_region(spec, cube)):
        raise CoverageError(
            f"field region {sample.region} does not cover the cube's projections"
        )

    points = cube_points_array(cube)  # (M, n*d)
    m = points.shape[0]
    n, d = spec.n, spec.d

    diag = np.full(m, 2.0 * d * n)
    for j in range(n):
        diag += sample.value_at(points[:, j * d : (j + 1) * d]).reshape(m)

    if n >= 2:
        phi = spec.interaction.phi_array(2 * cube.radius + spec.interaction.r0 + 1)
        for i in range(n):
            for j in range(i + 1, n):
                diff = points[:, i * d : (i + 1) * d] - points[:, j * d : (j + 1) * d]
                dist = np.max(np.abs(diff), axis=1)
                diag += phi[np.minimum(dist, len(phi) - 1)]

    side = cube.side
    nd = n * d
    rows, cols = [], []
    # hop along axis k: partner index differs by the lexicographic stride
    digits = (points - cube.lower[None, :]).astype(np.int64)
    stride = 1
    for k in range(nd - 1, -1, -1):
        src = np.flatnonzero(digits[:, k] < side - 1)
        rows.append(src)
        cols.append(src + stride)
        stride *= side

    rows = np.concatenate(rows) if rows else np.empty(0, dtype=np.int64)
    cols = np.concatenate(cols) if cols else np.empty(0, dtype=np.int64)
    data = np.full(rows.size, -1.0)

    all_rows = np.concatenate([rows, cols, np.arange(m)])
    all_cols = np.concatenate([cols, rows, np.arange(m)])
    all_data = np.concatenate([data, data, diag])
    matrix = sp.coo_matrix((all_data, (all_rows, all_cols)), shape=(m, m)).tocsr()
    return AssembledOperator(cube=cube, matrix=matrix)


def assemble_trial(
    spec: HamiltonianSpec, cube: Cube, trial: int
) -> AssembledOperator:
    """Sample the field for this trial and assemble in one step."""
    return assemble(spec, cube, sample_for_cube(spec, cube, trial))

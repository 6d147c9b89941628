"""Initial-scale singularity statistics.

A cube is (E, m)-non-singular when its center-to-boundary Green
amplitudes fall below exp(-gamma(m, L, n) L).  The initial-scale
experiment estimates P{some E <= E* makes the cube singular}.  Per
trial, a large ground-state energy certifies non-singularity for every
E below the threshold at once (the gap shortcut); otherwise an energy
grid is scanned explicitly.
"""

from andersonlab import FieldSpec, HamiltonianSpec, UniformBase
from andersonlab.msa import MsaParams, scale_sequence, singularity_probability

# strong disorder: the gap shortcut fires on essentially every trial
strong = HamiltonianSpec(n=1, d=1, field=FieldSpec.iid(1, UniformBase(1e9), seed=1))
# weak disorder: every trial needs the explicit grid scan
weak = HamiltonianSpec(n=1, d=1, field=FieldSpec.iid(1, UniformBase(1.0), seed=1))

print("scale sequence from L0 = 16 at alpha = 3/2:",
      [scale_sequence(16, 1.5, k) for k in range(4)])

print(f"\n{'field':>8} {'L0':>4} {'m':>7} {'E*':>9} {'estimate':>9} {'shortcut':>9} {'target':>10}")
for label, spec in (("strong", strong), ("weak", weak)):
    for big_l0 in (8, 16, 32):
        params = MsaParams(N=1, d=1, p=1.0, L0=big_l0)
        stats = singularity_probability(spec, params, 1, 200)
        print(
            f"{label:>8} {big_l0:>4} {params.m:>7.3f} {params.Estar:>9.1f} "
            f"{stats.estimate:>9.3f} {stats.shortcut_rate:>9.2f} "
            f"{params.target_probability(1):>10.2e}"
        )

print(
    "\nat desk scales the weak-disorder cubes are singular at every grid energy:\n"
    "the decay threshold exp(-gamma L) is astronomically small until L0 grows\n"
    "far beyond what a desktop can diagonalize, which is exactly the regime\n"
    "the scale theorem's 'L0 large enough' refers to."
)

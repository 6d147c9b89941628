"""Restricted free Laplacian: exact spectrum check.

With simple boundary conditions the 1-d kinetic operator on a cube of
radius L keeps the full diagonal 2 and drops outgoing hops, so its
eigenvalues are 2 - 2cos(j*pi/(2L+2)).  This script assembles the free
operator at several scales and prints the worst deviation.
"""

import numpy as np

from andersonlab import FieldSpec, HamiltonianSpec, assemble_trial, origin_cube
from andersonlab.spectral import spectrum_in_window

free = HamiltonianSpec(n=1, d=1, field=FieldSpec.constant(1, 0.0))

print(f"{'L':>4} {'dim':>5} {'E0':>12} {'worst |dev|':>12}")
for big_l in (1, 5, 10, 25, 50):
    op = assemble_trial(free, origin_cube(big_l, 1, 1), 0)
    res = spectrum_in_window(op, (-1.0, 10.0))
    j = np.arange(1, 2 * big_l + 2)
    exact = 2 - 2 * np.cos(j * np.pi / (2 * big_l + 2))
    dev = np.max(np.abs(res.eigenvalues - exact))
    print(f"{big_l:>4} {op.dim:>5} {res.eigenvalues[0]:>12.8f} {dev:>12.2e}")

print("\nthe multi-particle kinetic part is the Kronecker sum of 1-d pieces:")
free2 = HamiltonianSpec(n=2, d=1, field=FieldSpec.constant(1, 0.0))
op2 = assemble_trial(free2, origin_cube(4, 2, 1), 0)
res2 = spectrum_in_window(op2, (-1.0, 0.5))
e1 = 2 - 2 * np.cos(np.pi / 10)
print(f"  2-particle ground energy {res2.eigenvalues[0]:.10f} vs 2*E0(1d) = {2*e1:.10f}")

"""In-place statevector gate kernels over a batch of states.

``psi`` has shape ``(batch, 2**n)``; qubit ``q`` is bit ``n - 1 - q`` of
the column index.
"""

import numba as nb
import numpy as np


@nb.njit(cache=True)
def apply_1q_inplace(psi, u, q, n):
    stride = 1 << (n - 1 - q)
    dim = psi.shape[1]
    u00, u01, u10, u11 = u[0, 0], u[0, 1], u[1, 0], u[1, 1]
    for b in range(psi.shape[0]):
        for base in range(0, dim, 2 * stride):
            for off in range(base, base + stride):
                a0 = psi[b, off]
                a1 = psi[b, off + stride]
                psi[b, off] = u00 * a0 + u01 * a1
                psi[b, off + stride] = u10 * a0 + u11 * a1


@nb.njit(cache=True)
def apply_2q_inplace(psi, u, q0, q1, n):
    s0 = 1 << (n - 1 - q0)
    s1 = 1 << (n - 1 - q1)
    dim = psi.shape[1]
    amp = np.empty(4, dtype=psi.dtype)
    for b in range(psi.shape[0]):
        for x in range(dim):
            if x & s0 or x & s1:
                continue
            i0 = x
            i1 = x | s1
            i2 = x | s0
            i3 = x | s0 | s1
            amp[0] = psi[b, i0]
            amp[1] = psi[b, i1]
            amp[2] = psi[b, i2]
            amp[3] = psi[b, i3]
            psi[b, i0] = u[0, 0] * amp[0] + u[0, 1] * amp[1] + u[0, 2] * amp[2] + u[0, 3] * amp[3]
            psi[b, i1] = u[1, 0] * amp[0] + u[1, 1] * amp[1] + u[1, 2] * amp[2] + u[1, 3] * amp[3]
            psi[b, i2] = u[2, 0] * amp[0] + u[2, 1] * amp[1] + u[2, 2] * amp[2] + u[2, 3] * amp[3]
            psi[b, i3] = u[3, 0] * amp[0] + u[3, 1] * amp[1] + u[3, 2] * amp[2] + u[3, 3] * amp[3]

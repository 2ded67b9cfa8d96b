"""Hot-loop kernels for the split-step integrator.

Numba-compiled single-pass loops; plain numpy fallbacks keep the package
usable when numba is unavailable.  Both variants mutate their field arguments
in place and are dtype-generic (complex64 or complex128).
"""

from __future__ import annotations

import numpy as np

try:
    import numba

    _HAVE_NUMBA = True
except ImportError:  # pragma: no cover - exercised only without numba
    _HAVE_NUMBA = False


def _nl_substep_np(pc, px, phase_c, pump_dt, ramp_value, dt):
    rho = px.real * px.real + px.imag * px.imag
    theta = rho * dt
    px *= np.cos(theta) - 1j * np.sin(theta)
    pc *= phase_c
    pc += pump_dt * ramp_value


def _apply_prop_np(pc, px, u11, u12, u21, u22):
    a = pc.copy()
    np.multiply(u11, a, out=pc)
    pc += u12 * px
    px *= u22
    px += u21 * a


if _HAVE_NUMBA:

    @numba.njit(cache=True, fastmath=True)
    def nl_substep(pc, px, phase_c, pump_dt, ramp_value, dt):
        n0, n1 = pc.shape
        for i in range(n0):
            for j in range(n1):
                x = px[i, j]
                theta = (x.real * x.real + x.imag * x.imag) * dt
                px[i, j] = x * complex(np.cos(theta), -np.sin(theta))
                pc[i, j] = pc[i, j] * phase_c[i, j] + pump_dt[i, j] * ramp_value

    @numba.njit(cache=True, fastmath=True)
    def apply_prop(pc, px, u11, u12, u21, u22):
        n0, n1 = pc.shape
        for i in range(n0):
            for j in range(n1):
                a = pc[i, j]
                b = px[i, j]
                pc[i, j] = u11[i, j] * a + u12[i, j] * b
                px[i, j] = u21[i, j] * a + u22[i, j] * b

else:  # pragma: no cover
    nl_substep = _nl_substep_np
    apply_prop = _apply_prop_np

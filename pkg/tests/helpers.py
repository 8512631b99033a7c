"""Shared reference solutions for the test suite."""
import numpy as np

from consboltz.transport import SpatialGrid, transport_step
from consboltz.velocity_grid import build_grid


def tanh_cell_average(lo, hi, steep=3.0):
    """Exact cell averages of ``1 + tanh(steep (x - 0.3)) / 2``."""
    F = lambda x: x + 0.5 * np.log(np.cosh(steep * (x - 0.3))) / steep
    return (F(hi) - F(lo)) / (hi - lo)


def advection_errors(cells, end_time=0.4, cfl=0.9, steep=3.0):
    """Discrete L1 and L2 errors of pure advection of a smooth monotone profile.

    Uses the ``N = 4, L = 2`` lattice and reports the node with ``v_1 = 1``.
    Ghosts carry the exact solution at each stage time, so only the
    interior scheme is measured.
    """
    g = build_grid(4, 2.0)
    k = int(np.argmin(np.abs(g.v_nodes - 1.0)))
    v1 = g.v_nodes[:, None, None]
    out = []
    for n in cells:
        sg = SpatialGrid.uniform(0.0, 1.0, n)
        c, w = sg.local_geometry(0, n)
        e = np.concatenate([c - w / 2, [c[-1] + w[-1] / 2]])

        def exact(t):
            lo, hi = e[:-1, None, None, None], e[1:, None, None, None]
            return tanh_cell_average(lo - v1 * t, hi - v1 * t, steep) * np.ones(g.shape)

        steps = int(np.ceil(end_time / (cfl * w.min() / g.L)))
        dt = end_time / steps
        fe = exact(0.0)
        for i in range(steps):
            stage = [0]

            def fill(a, i=i, stage=stage):
                ex = exact((i + stage[0]) * dt)  # Heun stage times t and t + dt
                stage[0] += 1
                a[:2], a[-2:] = ex[:2], ex[-2:]

            fe = transport_step(fe, c, w, dt, g, fill).field
        err = (fe - exact(end_time))[2:-2, k, 0, 0]
        wi = w[2:-2]
        out.append((np.sum(wi * np.abs(err)), np.sqrt(np.sum(wi * err**2))))
    return np.array(out)


def observed_orders(errors):
    return np.log2(errors[:-1] / errors[1:])

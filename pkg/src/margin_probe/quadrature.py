"""Adaptive two-dimensional quadrature on axis-aligned rectangles.

Each cell is integrated with a tensor Gauss-Legendre rule at two orders;
the difference between the two estimates drives a global refinement loop
that always splits the worst cells first. The routine is reentrant and
vectorizes the integrand over all evaluation points of a batch of cells.
"""

from __future__ import annotations

import numpy as np

from .errors import QuadratureNotConverged

_NODES_LO, _WEIGHTS_LO = np.polynomial.legendre.leggauss(7)
_NODES_HI, _WEIGHTS_HI = np.polynomial.legendre.leggauss(15)


def _tensor_rule(func, cells, nodes, weights):
    """Apply a tensor GL rule to every cell; cells is (n, 4) [x0,x1,y0,y1]."""
    x0, x1, y0, y1 = cells[:, 0], cells[:, 1], cells[:, 2], cells[:, 3]
    hx = 0.5 * (x1 - x0)
    hy = 0.5 * (y1 - y0)
    cx = 0.5 * (x1 + x0)
    cy = 0.5 * (y1 + y0)
    # (n, k) node coordinates per axis
    xs = cx[:, None] + hx[:, None] * nodes[None, :]
    ys = cy[:, None] + hy[:, None] * nodes[None, :]
    # (n, k, k) grids via broadcasting
    gx = np.broadcast_arrays(xs[:, :, None], ys[:, None, :])
    fx = func(np.ascontiguousarray(gx[0]), np.ascontiguousarray(gx[1]))
    w2 = weights[:, None] * weights[None, :]
    return hx * hy * np.einsum("nij,ij->n", fx, w2)


_BATCH = 4096


def _estimate(func, cells):
    vals = np.empty(len(cells))
    errs = np.empty(len(cells))
    for start in range(0, len(cells), _BATCH):
        chunk = cells[start:start + _BATCH]
        lo = _tensor_rule(func, chunk, _NODES_LO, _WEIGHTS_LO)
        hi = _tensor_rule(func, chunk, _NODES_HI, _WEIGHTS_HI)
        vals[start:start + _BATCH] = hi
        errs[start:start + _BATCH] = np.abs(hi - lo)
    return vals, errs


def _split4(cells):
    x0, x1, y0, y1 = cells[:, 0], cells[:, 1], cells[:, 2], cells[:, 3]
    xm = 0.5 * (x0 + x1)
    ym = 0.5 * (y0 + y1)
    quads = [
        np.stack([x0, xm, y0, ym], axis=1),
        np.stack([xm, x1, y0, ym], axis=1),
        np.stack([x0, xm, ym, y1], axis=1),
        np.stack([xm, x1, ym, y1], axis=1),
    ]
    return np.concatenate(quads, axis=0)


def integrate_2d(func, cells, rel_tol: float = 1e-4, abs_tol: float = 0.0,
                 max_cells: int = 2_000_000) -> tuple[float, float]:
    """Integrate ``func`` over the union of rectangular ``cells``.

    func(x, y) must accept broadcastable float arrays and return values of
    the same shape. Returns (integral, error_estimate). Raises
    QuadratureNotConverged when the subdivision budget runs out before the
    total error estimate falls below rel_tol * |integral| + abs_tol.
    """
    cells = np.atleast_2d(np.asarray(cells, dtype=float))
    if cells.shape[1] != 4:
        raise ValueError("cells must have shape (n, 4)")
    vals, errs = _estimate(func, cells)

    while True:
        total = float(vals.sum())
        err_total = float(errs.sum())
        target = rel_tol * abs(total) + abs_tol
        if err_total <= target or target == 0.0 and err_total == 0.0:
            return total, err_total
        # Split cells whose error exceeds their equidistributed share,
        # capped per iteration to bound memory growth; always split at
        # least the worst 1% of cells to guarantee progress.
        share = target / max(len(vals), 1)
        bad = errs > share
        if not bad.any():
            n_worst = max(1, len(errs) // 100)
            bad[np.argpartition(errs, -n_worst)[-n_worst:]] = True
        cap = max(1024, len(vals) // 4)
        cap = min(cap, (max_cells - len(vals)) // 3)
        if cap < 1:
            raise QuadratureNotConverged(
                f"error {err_total:.3e} above target {target:.3e} "
                f"with {len(vals)} cells")
        if int(bad.sum()) > cap:
            keep = np.argpartition(errs, -cap)[-cap:]
            bad = np.zeros_like(bad)
            bad[keep] = True
        children = _split4(cells[bad])
        child_vals, child_errs = _estimate(func, children)
        cells = np.concatenate([cells[~bad], children], axis=0)
        vals = np.concatenate([vals[~bad], child_vals])
        errs = np.concatenate([errs[~bad], child_errs])

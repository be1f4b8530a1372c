"""Discrete-vs-exact error norms and observed convergence rates.

The broken H1 norm is the full norm (L2 of the value plus L2 of the broken
gradient).  The energy norm combines the element strain-energy term with
the jump penalty over interior and Dirichlet edges; the exact field is
continuous so interior jumps come from the discrete field alone.
"""

from dataclasses import dataclass

import numpy as np

from .assembly import AssembledSystem, _EdgeBatch, _split_edges, _voigt_of_grad
from .material import PronyMaterial
from .space import DGSpace
from .stepper import State


@dataclass(frozen=True)
class ErrorReport:
    err_u_L2: float
    err_u_H1: float
    err_u_energy: float
    err_w_L2: float
    err_w_H1: float
    err_w_energy: float
    t: float
    h: float
    dt: float
    degree: int
    scheme: str

    def as_row(self):
        return (
            self.err_u_L2,
            self.err_u_H1,
            self.err_u_energy,
            self.err_w_L2,
            self.err_w_H1,
            self.err_w_energy,
        )


def _field_error_norms(
    space: DGSpace,
    system: AssembledSystem,
    material: PronyMaterial,
    coeffs: np.ndarray,
    exact,
    grad_exact,
):
    """L2, full broken H1 and energy norms of (exact - discrete)."""
    xq = space.physical_quad_points()
    wdet = space.elem_weights[None, :] * space.det_jac[:, None]

    ex, ey = exact(xq[..., 0], xq[..., 1])
    uh = space.evaluate(coeffs)
    dx = np.broadcast_to(ex, uh.shape[:-1]) - uh[..., 0]
    dy = np.broadcast_to(ey, uh.shape[:-1]) - uh[..., 1]
    l2_sq = float(np.sum(wdet * (dx * dx + dy * dy)))

    g = np.asarray(grad_exact(xq[..., 0], xq[..., 1]), dtype=float)
    if g.shape[:2] == (2, 2):
        g = np.moveaxis(g, (0, 1), (-2, -1))
    g = np.broadcast_to(g, uh.shape[:-1] + (2, 2))
    gh = space.evaluate_gradients(coeffs)
    dg = g - gh
    h1_sq = l2_sq + float(np.sum(wdet[..., None, None] * dg * dg))

    C = material.elastic_voigt
    deps = _voigt_of_grad(dg)
    sig = deps @ C.T
    energy_sq = float(np.sum(wdet * np.sum(sig * deps, axis=-1)))

    # jump penalty of the error over interior and Dirichlet edges
    interior, dirichlet, _ = _split_edges(space.mesh)
    nb = space.dofs_per_component
    cshape = coeffs.reshape(space.mesh.n_triangles, 2, nb)
    for edges, arity in ((interior, 2), (dirichlet, 1)):
        if not edges:
            continue
        batch = _EdgeBatch(space, edges)
        jump = np.zeros(batch.x.shape)
        if arity == 2:
            # exact field is continuous: only the discrete jump contributes
            signs = (1.0, -1.0)
            for side in range(2):
                vals, _ = batch.side_traces(space, side)
                tr = np.einsum("eqi,eci->eqc", vals, cshape[batch.elems[:, side]])
                jump -= signs[side] * tr
        else:
            ex_b, ey_b = exact(batch.x[..., 0], batch.x[..., 1])
            vals, _ = batch.side_traces(space, 0)
            tr = np.einsum("eqi,eci->eqc", vals, cshape[batch.elems[:, 0]])
            jump[..., 0] = np.broadcast_to(ex_b, tr.shape[:-1]) - tr[..., 0]
            jump[..., 1] = np.broadcast_to(ey_b, tr.shape[:-1]) - tr[..., 1]
        pen = system.alpha0 / batch.length**system.beta0
        energy_sq += float(
            np.einsum(
                "eq,q,e->", np.sum(jump * jump, axis=-1), space.edge_weights, batch.length * pen
            )
        )

    return np.sqrt(l2_sq), np.sqrt(h1_sq), np.sqrt(energy_sq)


def error_norms(
    state: State,
    case,
    space: DGSpace,
    system: AssembledSystem,
    material: PronyMaterial | None = None,
    dt: float = 0.0,
) -> ErrorReport:
    """All six error norms of a state against the exact fields of ``case``."""
    material = material or case.material
    t = state.t
    u_l2, u_h1, u_en = _field_error_norms(
        space,
        system,
        material,
        state.U,
        lambda x, y: case.displacement(x, y, t),
        lambda x, y: case.grad_displacement(x, y, t),
    )
    w_l2, w_h1, w_en = _field_error_norms(
        space,
        system,
        material,
        state.W,
        lambda x, y: case.velocity(x, y, t),
        lambda x, y: case.grad_velocity(x, y, t),
    )
    return ErrorReport(
        u_l2, u_h1, u_en, w_l2, w_h1, w_en, t, space.mesh.h, dt, space.degree, state.scheme.value
    )


def convergence_rate(errors, scales):
    """Observed order between successive refinements: one rate per adjacent pair."""
    errors = np.asarray(errors, dtype=float)
    scales = np.asarray(scales, dtype=float)
    if np.any(errors <= 0):
        raise ValueError("error values must be positive")
    if np.any(np.diff(scales) >= 0):
        raise ValueError("scales must be strictly decreasing")
    return list(np.diff(np.log(errors)) / np.diff(np.log(scales)))

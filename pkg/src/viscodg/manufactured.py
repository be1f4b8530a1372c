"""Closed-form verification case on the unit square.

Exact displacement u(x, y, t) = (x*y*exp(1-t), cos(t)*sin(x*y)) with
identity elastic tensor, rho = 1, two Prony terms (phi0 = 0.5, phi1 = 0.1,
phi2 = 0.4, tau1 = 0.5, tau2 = 1.5) and T = 1.  The Dirichlet boundary is
{x=0} union {y=0}, where u vanishes identically.

Both components are separable, u_i = X_i(x, y) * T_i(t), so every
hereditary integral reduces to a scalar convolution in time with a closed
form.  All closed forms here are cross-checked in the test suite against an
adaptive-quadrature convolution oracle.
"""

import numpy as np

from .material import PronyMaterial


def benchmark_material() -> PronyMaterial:
    return PronyMaterial(rho=1.0, phi0=0.5, phis=(0.1, 0.4), taus=(0.5, 1.5))


class ManufacturedCase:
    """Exact fields and forcing data for the verification benchmark."""

    T = 1.0

    def __init__(self, material: PronyMaterial | None = None):
        self.material = material or benchmark_material()
        if self.material.elastic is not None:
            raise ValueError("the manufactured case assumes the identity elastic tensor")

    # scalar time convolutions -------------------------------------------------

    @staticmethod
    def _kernel_exp(t, tau):
        """(1/tau) int_0^t exp(-(t-s)/tau) exp(1-s) ds, closed form (tau != 1)."""
        return np.e / (1.0 - tau) * (np.exp(-t) - np.exp(-t / tau))

    @staticmethod
    def _kernel_cos(t, tau):
        """(1/tau) int_0^t exp(-(t-s)/tau) cos(s) ds, closed form."""
        a = 1.0 / tau
        return a * (a * np.cos(t) + np.sin(t) - a * np.exp(-t / tau)) / (a * a + 1.0)

    @staticmethod
    def _kernel_sin(t, tau):
        """int_0^t exp(-(t-s)/tau) sin(s) ds, closed form."""
        a = 1.0 / tau
        return (a * np.sin(t) - np.cos(t) + np.exp(-t / tau)) / (a * a + 1.0)

    def _time_factors(self, t):
        """Time factors of the displacement-form effective field u - sum psi_q."""
        m = self.material
        g1 = np.exp(1.0 - t) - sum(
            p * self._kernel_exp(t, tau) for p, tau in zip(m.phis, m.taus)
        )
        g2 = np.cos(t) - sum(p * self._kernel_cos(t, tau) for p, tau in zip(m.phis, m.taus))
        return g1, g2

    # exact fields -------------------------------------------------------------

    def displacement(self, x, y, t):
        return x * y * np.exp(1.0 - t), np.cos(t) * np.sin(x * y)

    def grad_displacement(self, x, y, t):
        """Gradient with index order [component, derivative]."""
        e = np.exp(1.0 - t)
        c = np.cos(t) * np.cos(x * y)
        return ((y * e, x * e), (y * c, x * c))

    def velocity(self, x, y, t):
        return -x * y * np.exp(1.0 - t), -np.sin(t) * np.sin(x * y)

    def grad_velocity(self, x, y, t):
        e = np.exp(1.0 - t)
        c = np.sin(t) * np.cos(x * y)
        return ((-y * e, -x * e), (-y * c, -x * c))

    def acceleration(self, x, y, t):
        return x * y * np.exp(1.0 - t), -np.cos(t) * np.sin(x * y)

    # internal variables -------------------------------------------------------

    def internal_displacement(self, q, x, y, t):
        """psi_q, the displacement-form internal variable."""
        m = self.material
        p, tau = m.phis[q], m.taus[q]
        return p * x * y * self._kernel_exp(t, tau), p * np.sin(x * y) * self._kernel_cos(t, tau)

    def internal_velocity(self, q, x, y, t):
        """zeta_q, the velocity-form internal variable."""
        m = self.material
        p, tau = m.phis[q], m.taus[q]
        z1 = -p * tau * self._kernel_exp(t, tau) * x * y
        z2 = -p * self._kernel_sin(t, tau) * np.sin(x * y)
        return z1, z2

    # forcing data -------------------------------------------------------------

    def body_force(self, x, y, t):
        """f = rho*u_tt - div eps(u - sum_q psi_q) for the identity tensor."""
        rho = self.material.rho
        g1, g2 = self._time_factors(t)
        s = np.sin(x * y)
        c = np.cos(x * y)
        f1 = rho * x * y * np.exp(1.0 - t) - 0.5 * (c - x * y * s) * g2
        f2 = -rho * np.cos(t) * s - 0.5 * g1 + (x * x + 0.5 * y * y) * s * g2
        return f1, f2

    def stress(self, x, y, t):
        """Viscoelastic stress from the displacement-form constitutive law.

        Returns Voigt-free components (s11, s22, s12).
        """
        g1, g2 = self._time_factors(t)
        s11 = y * g1
        s22 = x * np.cos(x * y) * g2
        s12 = 0.5 * (x * g1 + y * np.cos(x * y) * g2)
        return s11, s22, s12

    def stress_velocity(self, x, y, t):
        """Same stress from the velocity-form law (equivalent by identity)."""
        m = self.material
        decay = [p * np.exp(-t / tau) for p, tau in zip(m.phis, m.taus)]
        g1 = (
            m.phi0 * np.exp(1.0 - t)
            - sum(p * tau * self._kernel_exp(t, tau) for p, tau in zip(m.phis, m.taus))
            + np.e * sum(decay)
        )
        g2 = (
            m.phi0 * np.cos(t)
            - sum(p * self._kernel_sin(t, tau) for p, tau in zip(m.phis, m.taus))
            + sum(decay)
        )
        s11 = y * g1
        s22 = x * np.cos(x * y) * g2
        s12 = 0.5 * (x * g1 + y * np.cos(x * y) * g2)
        return s11, s22, s12

    def traction(self, x, y, t, n):
        """g_N = sigma(u(t)) . n for points on the Neumann boundary."""
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        on_neumann = np.isclose(x, 1.0) | np.isclose(y, 1.0)
        if not np.all(on_neumann):
            raise ValueError("traction requested off the Neumann boundary")
        s11, s22, s12 = self.stress(x, y, t)
        n = np.asarray(n, dtype=float)
        g1 = s11 * n[..., 0] + s12 * n[..., 1]
        g2 = s12 * n[..., 0] + s22 * n[..., 1]
        return g1, g2

    # time-bound closures for the assembly layer ------------------------------

    def body_force_at(self, t):
        return lambda x, y: self.body_force(x, y, t)

    def traction_at(self, t):
        return lambda x, y, n: self.traction(x, y, t, n)

    def displacement_at(self, t):
        return lambda x, y: self.displacement(x, y, t)

    def grad_displacement_at(self, t):
        return lambda x, y: self.grad_displacement(x, y, t)

    def velocity_at(self, t):
        return lambda x, y: self.velocity(x, y, t)


# numerical convolution oracle -------------------------------------------------


def adaptive_convolution(f, t: float, tol: float = 1e-12, max_halvings: int = 24) -> float:
    """int_0^t f(s) ds by composite Gauss-Legendre, panels halved to tolerance."""
    if t == 0.0:
        return 0.0
    nodes, weights = np.polynomial.legendre.leggauss(8)
    prev = None
    panels = 1
    for _ in range(max_halvings):
        edges = np.linspace(0.0, t, panels + 1)
        mid = 0.5 * (edges[:-1] + edges[1:])
        half = 0.5 * (edges[1:] - edges[:-1])
        s = (mid[:, None] + half[:, None] * nodes[None, :]).ravel()
        w = (half[:, None] * weights[None, :]).ravel()
        total = float(np.dot(w, f(s)))
        if prev is not None and abs(total - prev) < tol:
            return total
        prev = total
        panels *= 2
    return prev


def internal_displacement_oracle(case: ManufacturedCase, q, x, y, t):
    """psi_q by direct quadrature of its defining convolution."""
    m = case.material
    p, tau = m.phis[q], m.taus[q]

    def comp(i):
        def f(s):
            u = case.displacement(x, y, s)
            return (p / tau) * np.exp(-(t - s) / tau) * u[i]

        return adaptive_convolution(f, t)

    return comp(0), comp(1)


def internal_velocity_oracle(case: ManufacturedCase, q, x, y, t):
    """zeta_q by direct quadrature of its defining convolution."""
    m = case.material
    p, tau = m.phis[q], m.taus[q]

    def comp(i):
        def f(s):
            w = case.velocity(x, y, s)
            return p * np.exp(-(t - s) / tau) * w[i]

        return adaptive_convolution(f, t)

    return comp(0), comp(1)


def stress_oracle(case: ManufacturedCase, x, y, t):
    """Stress by quadrature of the hereditary law with the Prony kernel.

    sigma(t) = phi(t) eps(u(0)) + int_0^t phi(t-s) eps(u_dot(s)) ds for the
    identity elastic tensor.  Returns (s11, s22, s12).
    """
    from .material import relaxation

    m = case.material

    def eps_of_grad(g):
        (g11, g12), (g21, g22) = g
        return g11, g22, 0.5 * (g12 + g21)

    eps0 = eps_of_grad(case.grad_displacement(x, y, 0.0))

    def comp(i):
        def f(s):
            deps = eps_of_grad(case.grad_velocity(x, y, s))
            return relaxation(m, t - s) * deps[i]

        return adaptive_convolution(f, t)

    phi_t = relaxation(m, t)
    return tuple(phi_t * eps0[i] + comp(i) for i in range(3))

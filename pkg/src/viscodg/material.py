"""Generalised Maxwell (Prony series) material description.

The relaxation function is phi(t) = phi0 + sum_q phi_q exp(-t/tau_q),
normalised so that phi(0) = 1, with phi0 > 0 (a solid with long-term
stiffness).  The elastic tensor is either the identity (used by the
verification benchmark) or isotropic with Lame parameters.
"""

from dataclasses import dataclass

import numpy as np

_NORMALIZATION_TOL = 1e-12


@dataclass(frozen=True)
class PronyMaterial:
    """Density, Prony coefficients and the elastic tensor specification.

    ``elastic`` is ``None`` for the identity tensor or a ``(lam, mu)`` pair
    for the isotropic tensor 2*mu*eps + lam*tr(eps)*I.
    """

    rho: float
    phi0: float
    phis: tuple[float, ...]
    taus: tuple[float, ...]
    elastic: tuple[float, float] | None = None

    def __post_init__(self):
        object.__setattr__(self, "phis", tuple(float(p) for p in self.phis))
        object.__setattr__(self, "taus", tuple(float(t) for t in self.taus))
        if self.rho <= 0:
            raise ValueError("density must be positive")
        if self.phi0 <= 0:
            raise ValueError("phi0 must be positive (solid material)")
        if len(self.phis) != len(self.taus):
            raise ValueError("phis and taus must have equal length")
        if any(p <= 0 for p in self.phis) or any(t <= 0 for t in self.taus):
            raise ValueError("all phi_q and tau_q must be positive")
        total = self.phi0 + sum(self.phis)
        if abs(total - 1.0) > _NORMALIZATION_TOL:
            raise ValueError(f"coefficients must sum to 1, got {total}")

    @property
    def n_internal(self) -> int:
        return len(self.phis)

    @property
    def elastic_voigt(self) -> np.ndarray:
        """Elastic tensor in the orthonormal Voigt basis (e11, e22, sqrt2*e12)."""
        if self.elastic is None:
            return np.eye(3)
        lam, mu = self.elastic
        return np.array(
            [
                [lam + 2 * mu, lam, 0.0],
                [lam, lam + 2 * mu, 0.0],
                [0.0, 0.0, 2 * mu],
            ]
        )


def relaxation(m: PronyMaterial, t) -> np.ndarray | float:
    """Stress relaxation function phi(t) for t >= 0."""
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise ValueError("relaxation time must be nonnegative")
    out = m.phi0 + sum(p * np.exp(-t / tau) for p, tau in zip(m.phis, m.taus))
    return float(out) if out.ndim == 0 else out


def apply_elastic(m: PronyMaterial, eps: np.ndarray) -> np.ndarray:
    """Apply the elastic tensor to a symmetric 2x2 strain."""
    eps = np.asarray(eps, dtype=float)
    if m.elastic is None:
        return eps.copy()
    lam, mu = m.elastic
    return 2 * mu * eps + lam * np.trace(eps) * np.eye(2)


def internal_kernel_constant_history(m: PronyMaterial, q: int, c: float, t: float) -> float:
    """Displacement-form internal variable for the constant history u(s) = c.

    Closed form of the convolution (phi_q/tau_q) int_0^t exp(-(t-s)/tau_q) c ds.
    Used as an oracle for the time-stepper recurrences.
    """
    if not 0 <= q < m.n_internal:
        raise IndexError(f"internal variable index {q} out of range")
    return m.phis[q] * c * (1.0 - np.exp(-t / m.taus[q]))

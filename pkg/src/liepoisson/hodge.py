"""Hodge/Leray decomposition on the torus: X = grad(theta) + Y + mean."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .fields import DivFreeField, ScalarField, VectorField


@dataclass(frozen=True)
class HodgeParts:
    """Orthogonal pieces of a vector field.

    ``solenoidal`` is mean-free and divergence-free, ``gradient`` is
    ``grad(potential)`` with a mean-zero potential, and ``harmonic_mean`` is
    the constant component, kept exactly and separately.
    """

    solenoidal: DivFreeField
    gradient: VectorField
    potential: ScalarField
    harmonic_mean: np.ndarray

    def reconstruct(self) -> VectorField:
        data = self.solenoidal.data + self.gradient.data + self.harmonic_mean[:, None, None]
        return VectorField.from_array(self.solenoidal.grid, data)


def decompose(X: VectorField) -> HodgeParts:
    grid = X.grid
    sp = grid.spectral
    xh = X.hat()
    mean = xh[:, 0, 0].real.copy()
    theta_h = -sp.inv_k2 * sp.div(xh)
    grad_h = sp.grad(theta_h)
    sol_h = xh - grad_h
    sol_h[:, 0, 0] = 0.0
    return HodgeParts(
        solenoidal=DivFreeField._from_hat(grid, sol_h),
        gradient=VectorField._from_hat(grid, grad_h),
        potential=ScalarField._from_hat(grid, theta_h),
        harmonic_mean=mean,
    )


def leray(X: VectorField) -> DivFreeField:
    """P_e X: divergence-free part of X, constant component included."""
    return DivFreeField._from_hat(X.grid, X.grid.spectral.leray(X.hat()))


def gradient_part(X: VectorField) -> VectorField:
    """Q X = X - P_e X."""
    return VectorField._from_hat(X.grid, X.hat() - X.grid.spectral.leray(X.hat()))

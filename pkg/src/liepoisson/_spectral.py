"""Array-level Fourier machinery on the periodic square [0, 2*pi)^2.

Coefficients live in numpy's ``rfft2`` layout over the last two axes with
``norm="forward"``, so entry ``[0, 0]`` is the grid mean.  Axis -2 is x
(index i, x_i = i*h) and axis -1 is y.  Every function broadcasts over
leading axes, which the integrators use to push whole batches of tangent
vectors through one transform.

Nyquist modes (|k| = n/2 along either axis) carry no derivative: their
effective wavenumber is zero.  Dealiased products ignore them entirely.
"""

from __future__ import annotations

import functools

import numpy as np


@functools.lru_cache(maxsize=None)
def ops(n: int) -> "SpectralOps":
    return SpectralOps(n)


class SpectralOps:
    """Cached wavenumber tables and transforms for an ``n x n`` grid."""

    def __init__(self, n: int):
        if n % 2:
            raise ValueError("grid size must be even")
        self.n = n
        half = n // 2
        self.shape = (n, n)
        self.rshape = (n, half + 1)

        kx = np.fft.fftfreq(n, 1.0 / n)
        ky = np.arange(half + 1, dtype=float)
        self.kx_int = kx[:, None]
        self.ky_int = ky[None, :]
        kx_eff = kx.copy()
        kx_eff[half] = 0.0
        ky_eff = ky.copy()
        ky_eff[half] = 0.0
        self.kx = np.broadcast_to(kx_eff[:, None], self.rshape)
        self.ky = np.broadcast_to(ky_eff[None, :], self.rshape)
        self.ikx = 1j * self.kx
        self.iky = 1j * self.ky
        self.k2 = self.kx**2 + self.ky**2
        with np.errstate(divide="ignore"):
            inv = np.where(self.k2 > 0, 1.0 / np.where(self.k2 > 0, self.k2, 1.0), 0.0)
        self.inv_k2 = inv
        self.nyquist = (np.abs(self.kx_int) == half) | (self.ky_int == half)
        self.kinf = np.maximum(np.abs(self.kx_int), self.ky_int)

        # Hermitian weight for sums over the full spectrum from rfft storage.
        w = np.full(self.rshape, 2.0)
        w[:, 0] = 1.0
        w[:, half] = 1.0
        self.herm_weight = w

        # 3/2-rule padding: exact products for inputs with |k|_inf < n/2.
        self.m = 3 * n // 2
        self._keep_pos = slice(0, half)
        self._keep_neg_src = slice(half + 1, n)
        self._keep_neg_dst = slice(self.m - half + 1, self.m)

    # -- transforms ---------------------------------------------------
    def fft(self, f: np.ndarray) -> np.ndarray:
        return np.fft.rfft2(f, norm="forward")

    def ifft(self, fh: np.ndarray) -> np.ndarray:
        return np.fft.irfft2(fh, s=self.shape, norm="forward")

    # -- band handling ------------------------------------------------
    def band_mask(self, kmax: int) -> np.ndarray:
        return self.kinf <= kmax

    def truncate(self, fh: np.ndarray, kmax: int) -> np.ndarray:
        return np.where(self.band_mask(kmax), fh, 0.0)

    # -- dealiased products -------------------------------------------
    def pad(self, fh: np.ndarray) -> np.ndarray:
        half = self.n // 2
        m = self.m
        out = np.zeros(fh.shape[:-2] + (m, m // 2 + 1), dtype=complex)
        out[..., self._keep_pos, :half] = fh[..., self._keep_pos, :half]
        out[..., self._keep_neg_dst, :half] = fh[..., self._keep_neg_src, :half]
        return out

    def unpad(self, gh: np.ndarray) -> np.ndarray:
        half = self.n // 2
        out = np.zeros(gh.shape[:-2] + self.rshape, dtype=complex)
        out[..., self._keep_pos, :half] = gh[..., self._keep_pos, :half]
        out[..., self._keep_neg_src, :half] = gh[..., self._keep_neg_dst, :half]
        return out

    def to_padded_grid(self, fh: np.ndarray) -> np.ndarray:
        return np.fft.irfft2(self.pad(fh), s=(self.m, self.m), norm="forward")

    def from_padded_grid(self, g: np.ndarray) -> np.ndarray:
        return self.unpad(np.fft.rfft2(g, norm="forward"))

    # -- differential operators on coefficient arrays -----------------
    def grad(self, fh: np.ndarray) -> np.ndarray:
        return np.stack([self.ikx * fh, self.iky * fh], axis=-3)

    def div(self, uh: np.ndarray) -> np.ndarray:
        return self.ikx * uh[..., 0, :, :] + self.iky * uh[..., 1, :, :]

    def curl(self, uh: np.ndarray) -> np.ndarray:
        return self.ikx * uh[..., 1, :, :] - self.iky * uh[..., 0, :, :]

    def perp_grad(self, fh: np.ndarray) -> np.ndarray:
        """(d/dy, -d/dx) f: the velocity of streamfunction f."""
        return np.stack([self.iky * fh, -self.ikx * fh], axis=-3)

    def leray(self, uh: np.ndarray) -> np.ndarray:
        kdotu = self.kx * uh[..., 0, :, :] + self.ky * uh[..., 1, :, :]
        return np.stack([uh[..., 0, :, :] - self.kx * kdotu * self.inv_k2,
                         uh[..., 1, :, :] - self.ky * kdotu * self.inv_k2], axis=-3)

    def advect(self, xh: np.ndarray, yh: np.ndarray) -> np.ndarray:
        """Coefficients of (X . grad) Y, dealiased."""
        xp = self.to_padded_grid(xh)
        dy_dx = self.to_padded_grid(self.ikx[..., None, :, :] * yh)
        dy_dy = self.to_padded_grid(self.iky[..., None, :, :] * yh)
        prod = xp[..., 0:1, :, :] * dy_dx + xp[..., 1:2, :, :] * dy_dy
        return self.from_padded_grid(prod)

    def transpose_grad_dot(self, zh: np.ndarray, wh: np.ndarray) -> np.ndarray:
        """Coefficients of V_m = sum_j Z_j d_m W_j, i.e. (DW)^T Z, dealiased."""
        zp = self.to_padded_grid(zh)
        dw_dx = self.to_padded_grid(self.ikx[..., None, :, :] * wh)
        dw_dy = self.to_padded_grid(self.iky[..., None, :, :] * wh)
        vx = (zp * dw_dx).sum(axis=-3)
        vy = (zp * dw_dy).sum(axis=-3)
        return self.from_padded_grid(np.stack([vx, vy], axis=-3))

    def product(self, ah: np.ndarray, bh: np.ndarray) -> np.ndarray:
        return self.from_padded_grid(self.to_padded_grid(ah) * self.to_padded_grid(bh))

    # -- reductions ---------------------------------------------------
    def inner(self, ah: np.ndarray, bh: np.ndarray, ncomp_axes: int = 0) -> np.ndarray:
        """L2 inner product (4 pi^2 sum_k a_k conj b_k) from rfft coefficients."""
        s = (self.herm_weight * (ah * np.conj(bh)).real)
        axes = tuple(range(-2 - ncomp_axes, 0))
        return 4.0 * np.pi**2 * s.sum(axis=axes)

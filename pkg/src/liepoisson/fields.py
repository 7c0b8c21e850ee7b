"""Periodic scalar and vector fields on the flat torus [0, 2*pi)^2.

Fields hold point values on the uniform grid x_ij = (i*h, j*h); spectral
operators act through the Fourier coefficients ``u_hat(k)`` normalised so
that ``u(x) = sum_k u_hat(k) exp(i k.x)`` (hence ``u_hat(0)`` is the mean and
``sin x`` has ``u_hat(+1, 0) = -i/2``, ``u_hat(-1, 0) = +i/2``).
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass
from pathlib import Path
from typing import Union

import numpy as np

from . import rng
from ._spectral import ops

try:  # pragma: no cover - exercised implicitly
    import finufft
except ImportError:  # pragma: no cover
    finufft = None

DIV_TOL = 1e-10

# Threads for the non-uniform FFT; one thread keeps results bit-reproducible.
NUFFT_THREADS = int(os.environ.get("LIEPOISSON_THREADS", "1"))


@dataclass(frozen=True)
class Grid:
    """Uniform ``n x n`` grid on the torus with an active band limit.

    ``n`` must be a multiple of 8 (at least 16) and ``kmax <= n/8``: with that
    margin triple products of band-limited fields, and inner products of
    those, are resolved exactly by the 3/2-padded transforms.
    """

    n: int
    kmax: int | None = None

    def __post_init__(self):
        if self.n < 16 or self.n % 8:
            raise ValueError(f"grid size n={self.n} must be a multiple of 8 and >= 16")
        if self.kmax is None:
            object.__setattr__(self, "kmax", self.n // 8)
        if not 1 <= self.kmax <= self.n // 8:
            raise ValueError(f"kmax={self.kmax} must satisfy 1 <= kmax <= n/8 = {self.n // 8}")

    @property
    def h(self) -> float:
        return 2.0 * math.pi / self.n

    @property
    def spectral(self):
        return ops(self.n)

    def coords(self) -> tuple[np.ndarray, np.ndarray]:
        """Meshgrid ``(X, Y)`` with ``indexing="ij"``."""
        x = np.arange(self.n) * self.h
        return np.meshgrid(x, x, indexing="ij")

    def points(self) -> np.ndarray:
        """Grid nodes as an ``(n*n, 2)`` array in row-major (i, j) order."""
        X, Y = self.coords()
        return np.stack([X.ravel(), Y.ravel()], axis=-1)


def _check_same_grid(a, b):
    if a.grid.n != b.grid.n:
        raise ValueError(f"grid mismatch: n={a.grid.n} vs n={b.grid.n}")


class ScalarField:
    """Real periodic function sampled on a :class:`Grid`."""

    __slots__ = ("grid", "values")

    def __init__(self, grid: Grid, values):
        values = np.array(values, dtype=float)
        if values.shape != (grid.n, grid.n):
            raise ValueError(f"expected shape {(grid.n, grid.n)}, got {values.shape}")
        if not np.all(np.isfinite(values)):
            raise ValueError("scalar field has non-finite values")
        values.flags.writeable = False
        self.grid = grid
        self.values = values

    @classmethod
    def from_function(cls, grid: Grid, func) -> "ScalarField":
        X, Y = grid.coords()
        return cls(grid, np.broadcast_to(func(X, Y), X.shape))

    @classmethod
    def _from_hat(cls, grid: Grid, fh: np.ndarray) -> "ScalarField":
        return cls(grid, grid.spectral.ifft(fh))

    def hat(self) -> np.ndarray:
        return self.grid.spectral.fft(self.values)

    def mean(self) -> float:
        return float(self.values.mean())

    def norm(self) -> float:
        return math.sqrt(inner(self, self))

    def _combine(self, other, op):
        if isinstance(other, ScalarField):
            _check_same_grid(self, other)
            return ScalarField(self.grid, op(self.values, other.values))
        return ScalarField(self.grid, op(self.values, other))

    def __add__(self, other):
        return self._combine(other, np.add)

    def __sub__(self, other):
        return self._combine(other, np.subtract)

    def __mul__(self, other):
        return self._combine(other, np.multiply)

    __rmul__ = __mul__
    __radd__ = __add__

    def __neg__(self):
        return ScalarField(self.grid, -self.values)

    def __truediv__(self, c):
        return ScalarField(self.grid, self.values / c)

    def __repr__(self):
        return f"ScalarField(n={self.grid.n}, mean={self.mean():.3g})"


class VectorField:
    """Real periodic vector field; components in the global flat chart.

    ``data`` has shape ``(2, n, n)``; ``ux``/``uy`` are views on it.
    """

    __slots__ = ("grid", "data")

    def __init__(self, grid: Grid, ux, uy):
        data = np.stack([np.asarray(ux, dtype=float), np.asarray(uy, dtype=float)])
        self._set(grid, data)

    def _set(self, grid, data):
        if data.shape != (2, grid.n, grid.n):
            raise ValueError(f"expected components of shape {(grid.n, grid.n)}")
        if not np.all(np.isfinite(data)):
            raise ValueError("vector field has non-finite values")
        data.flags.writeable = False
        self.grid = grid
        self.data = data

    @classmethod
    def from_array(cls, grid: Grid, data) -> "VectorField":
        obj = cls.__new__(cls)
        VectorField._set(obj, grid, np.array(data, dtype=float))
        if cls is not VectorField:
            obj._validate()
        return obj

    @classmethod
    def _trusted(cls, grid: Grid, data: np.ndarray):
        obj = cls.__new__(cls)
        VectorField._set(obj, grid, np.array(data, dtype=float))
        return obj

    @classmethod
    def _from_hat(cls, grid: Grid, uh: np.ndarray):
        return cls._trusted(grid, grid.spectral.ifft(uh))

    @classmethod
    def from_function(cls, grid: Grid, func) -> "VectorField":
        X, Y = grid.coords()
        ux, uy = func(X, Y)
        return cls.from_array(grid, [np.broadcast_to(ux, X.shape),
                                     np.broadcast_to(uy, X.shape)])

    @classmethod
    def zeros(cls, grid: Grid):
        return cls._trusted(grid, np.zeros((2, grid.n, grid.n)))

    def _validate(self):
        pass

    @property
    def ux(self) -> np.ndarray:
        return self.data[0]

    @property
    def uy(self) -> np.ndarray:
        return self.data[1]

    def hat(self) -> np.ndarray:
        return self.grid.spectral.fft(self.data)

    def mean(self) -> np.ndarray:
        return self.data.mean(axis=(1, 2))

    def norm(self) -> float:
        return math.sqrt(inner(self, self))

    def as_vector(self) -> "VectorField":
        return VectorField._trusted(self.grid, self.data)

    def _result_type(self, other):
        if isinstance(other, VectorField) and type(other) is type(self):
            return type(self)
        return VectorField

    def __add__(self, other):
        _check_same_grid(self, other)
        return self._result_type(other)._trusted(self.grid, self.data + other.data)

    def __sub__(self, other):
        _check_same_grid(self, other)
        return self._result_type(other)._trusted(self.grid, self.data - other.data)

    def __mul__(self, c):
        return type(self)._trusted(self.grid, self.data * float(c))

    __rmul__ = __mul__

    def __truediv__(self, c):
        return type(self)._trusted(self.grid, self.data / float(c))

    def __neg__(self):
        return type(self)._trusted(self.grid, -self.data)

    def __repr__(self):
        return f"{type(self).__name__}(n={self.grid.n}, norm={self.norm():.6g})"


class DivFreeField(VectorField):
    """A :class:`VectorField` certified divergence-free.

    Construction checks ``||div u||_2 <= 1e-10 ||u||_2`` with the spectral
    divergence.  Linear combinations of div-free fields stay div-free and
    skip the check.
    """

    __slots__ = ()

    def __init__(self, grid: Grid, ux, uy):
        super().__init__(grid, ux, uy)
        self._validate()

    def _validate(self):
        d = divergence_norm(self)
        if d > DIV_TOL * max(self.norm(), 1e-300):
            raise ValueError(f"field is not divergence-free: ||div u|| = {d:.3e}")

    @classmethod
    def from_vector(cls, u: VectorField) -> "DivFreeField":
        return cls.from_array(u.grid, u.data)


Field = Union[ScalarField, VectorField]


# ---------------------------------------------------------------------------
# Spectra


@dataclass(frozen=True)
class SpectrumView:
    """Full complex Fourier coefficients in numpy ``fft2`` ordering.

    ``coeffs[..., a, b]`` is the coefficient of wavevector
    ``(fftfreq(n)[a]*n, fftfreq(n)[b]*n)``; scalar fields have shape
    ``(n, n)``, vector fields ``(2, n, n)``.
    """

    n: int
    coeffs: np.ndarray
    kind: str

    def __getitem__(self, k):
        kx, ky = k
        return self.coeffs[..., kx % self.n, ky % self.n]

    def band_limit(self, kmax: int) -> "SpectrumView":
        k = np.fft.fftfreq(self.n, 1.0 / self.n)
        mask = (np.abs(k)[:, None] <= kmax) & (np.abs(k)[None, :] <= kmax)
        return SpectrumView(self.n, np.where(mask, self.coeffs, 0.0), self.kind)


def to_spectrum(f: Field) -> SpectrumView:
    n = f.grid.n
    if isinstance(f, ScalarField):
        return SpectrumView(n, np.fft.fft2(f.values) / n**2, "scalar")
    return SpectrumView(n, np.fft.fft2(f.data, axes=(-2, -1)) / n**2, "vector")


def from_spectrum(s: SpectrumView, grid: Grid | None = None) -> Field:
    grid = grid or Grid(s.n)
    vals = np.fft.ifft2(s.coeffs * s.n**2, axes=(-2, -1)).real
    if s.kind == "scalar":
        return ScalarField(grid, vals)
    return VectorField.from_array(grid, vals)


# ---------------------------------------------------------------------------
# Differential operators


def grad(f: ScalarField) -> VectorField:
    sp = f.grid.spectral
    return VectorField._from_hat(f.grid, sp.grad(f.hat()))


def div(u: VectorField) -> ScalarField:
    return ScalarField._from_hat(u.grid, u.grid.spectral.div(u.hat()))


def curl2d(u: VectorField) -> ScalarField:
    """Scalar vorticity d_x u_y - d_y u_x."""
    return ScalarField._from_hat(u.grid, u.grid.spectral.curl(u.hat()))


def perp_grad(psi: ScalarField) -> DivFreeField:
    """Velocity ``(d_y psi, -d_x psi)`` of a streamfunction (zero mean)."""
    return DivFreeField._from_hat(psi.grid, psi.grid.spectral.perp_grad(psi.hat()))


def laplacian(f: ScalarField) -> ScalarField:
    sp = f.grid.spectral
    return ScalarField._from_hat(f.grid, -sp.k2 * f.hat())


def laplacian_inv(f: ScalarField) -> ScalarField:
    """Mean-zero solution of ``Delta theta = f``; ``f`` must have zero mean."""
    scale = max(1.0, float(np.abs(f.values).max()))
    if abs(f.mean()) > 1e-12 * scale:
        raise ValueError(f"laplacian_inv needs a mean-zero source, got mean {f.mean():.3e}")
    sp = f.grid.spectral
    return ScalarField._from_hat(f.grid, -sp.inv_k2 * f.hat())


def divergence_norm(u: VectorField) -> float:
    sp = u.grid.spectral
    dh = sp.div(u.hat())
    return math.sqrt(float(sp.inner(dh, dh)))


# ---------------------------------------------------------------------------
# Inner products


def inner(a: Field, b: Field) -> float:
    """L2 pairing ``int <a, b> dmu`` by the trapezoid rule ``h^2 sum a.b``.

    Exact for the trigonometric interpolants of the two grid fields.
    """
    _check_same_grid(a, b)
    h2 = a.grid.h**2
    if isinstance(a, ScalarField) and isinstance(b, ScalarField):
        return h2 * float(np.vdot(a.values, b.values))
    if isinstance(a, VectorField) and isinstance(b, VectorField):
        return h2 * float(np.vdot(a.data, b.data))
    raise TypeError("inner needs two scalar or two vector fields")


def spectral_inner(a: Field, b: Field) -> float:
    """Same pairing computed from Fourier coefficients (Parseval)."""
    _check_same_grid(a, b)
    sp = a.grid.spectral
    ncomp = 1 if isinstance(a, VectorField) else 0
    return float(sp.inner(a.hat(), b.hat(), ncomp_axes=ncomp))


# ---------------------------------------------------------------------------
# Interpolation


def _full_centered(values: np.ndarray) -> np.ndarray:
    """Centered full spectrum (k from -n/2 to n/2-1 on both axes)."""
    n = values.shape[-1]
    c = np.fft.fft2(values, axes=(-2, -1)) / n**2
    return np.ascontiguousarray(np.fft.fftshift(c, axes=(-2, -1)))


def trig_eval_direct(values: np.ndarray, pts: np.ndarray) -> np.ndarray:
    """Evaluate the trigonometric interpolant by direct summation.

    Dense O(P n^2) reference path; ``values`` is ``(..., n, n)``.
    """
    n = values.shape[-1]
    c = _full_centered(values)
    k = np.arange(-(n // 2), n // 2)
    ex = np.exp(1j * np.outer(pts[:, 0], k))
    ey = np.exp(1j * np.outer(pts[:, 1], k))
    t = np.einsum("pa,...ab->...pb", ex, c)
    return np.einsum("...pb,pb->...p", t, ey).real


def _trig_eval(values: np.ndarray, pts: np.ndarray) -> np.ndarray:
    if finufft is None:
        return trig_eval_direct(values, pts)
    c = _full_centered(values)
    x = np.ascontiguousarray(pts[:, 0])
    y = np.ascontiguousarray(pts[:, 1])
    lead = c.shape[:-2]
    flat = c.reshape((-1,) + c.shape[-2:])
    out = finufft.nufft2d2(x, y, flat if flat.shape[0] > 1 else flat[0], isign=1, eps=1e-14,
                              nthreads=NUFFT_THREADS)
    return out.real.reshape(lead + (len(x),))


def _bicubic_eval(values: np.ndarray, pts: np.ndarray, h: float) -> np.ndarray:
    from scipy.ndimage import map_coordinates

    coords = np.stack([pts[:, 0] / h, pts[:, 1] / h])
    lead = values.shape[:-2]
    flat = values.reshape((-1,) + values.shape[-2:])
    out = np.stack([map_coordinates(v, coords, order=3, mode="grid-wrap") for v in flat])
    return out.reshape(lead + (pts.shape[0],))


def interpolate(f: Field, pts, method: str = "spectral") -> np.ndarray:
    """Evaluate ``f`` at arbitrary points (wrapped mod 2*pi).

    ``method="spectral"`` evaluates the trigonometric interpolant (exact at
    nodes and for band-limited fields; the Nyquist coefficient is split
    symmetrically so the interpolant is real).  ``method="bicubic"`` uses
    periodic cubic B-splines, fourth order in h and much cheaper for large
    point sets.  Returns shape ``pts.shape[:-1]`` for scalars and
    ``(2,) + pts.shape[:-1]`` for vectors.
    """
    pts = np.asarray(pts, dtype=float)
    shape = pts.shape[:-1]
    flat = np.mod(pts.reshape(-1, 2), 2.0 * math.pi)
    vals = f.values if isinstance(f, ScalarField) else f.data
    if method == "spectral":
        out = _trig_eval(vals, flat)
    elif method == "bicubic":
        out = _bicubic_eval(vals, flat, f.grid.h)
    else:
        raise ValueError(f"unknown interpolation method {method!r}")
    return out.reshape(vals.shape[:-2] + shape)


# ---------------------------------------------------------------------------
# Random fields


def half_plane_modes(kmax: int) -> list[tuple[int, int]]:
    """Wavevectors with ``|k|_inf <= kmax`` in the half plane ky > 0 or (ky = 0, kx > 0).

    Ordered by ky, then kx, ascending; this order fixes the draw sequence of
    :func:`random_divfree`.
    """
    return [(kx, ky) for ky in range(0, kmax + 1) for kx in range(-kmax, kmax + 1)
            if ky > 0 or kx > 0]


def divfree_basis(grid: Grid, kmax: int) -> list[DivFreeField]:
    """L2-orthonormal real divergence-free Fourier basis with ``|k|_inf <= kmax``.

    Two constant fields, then ``e(k) cos(k.x)`` and ``e(k) sin(k.x)`` for each
    mode of :func:`half_plane_modes`, with polarisation ``e(k) = (-ky, kx)/|k|``.
    """
    if not 0 <= kmax < grid.n // 2:
        raise ValueError(f"kmax={kmax} outside [0, {grid.n // 2})")
    X, Y = grid.coords()
    c0 = 1.0 / (2.0 * math.pi)
    c1 = 1.0 / (math.pi * math.sqrt(2.0))
    out = [DivFreeField._trusted(grid, np.stack([np.full(X.shape, c0), np.zeros(X.shape)])),
           DivFreeField._trusted(grid, np.stack([np.zeros(X.shape), np.full(X.shape, c0)]))]
    for kx, ky in half_plane_modes(kmax):
        r = math.hypot(kx, ky)
        e = np.array([-ky / r, kx / r])[:, None, None]
        ph = kx * X + ky * Y
        out.append(DivFreeField._trusted(grid, e * (c1 * np.cos(ph))))
        out.append(DivFreeField._trusted(grid, e * (c1 * np.sin(ph))))
    return out


def random_streamfunction(seed: int, grid: Grid, kmax: int) -> ScalarField:
    """Band-limited streamfunction with coefficients drawn from :mod:`rng`.

    For each mode of :func:`half_plane_modes`, two uniforms in [-1, 1) give
    the real and imaginary parts of ``psi_hat(k)``, scaled by ``1/|k|^2`` so
    that velocity amplitudes fall off like ``1/|k|``.
    """
    if kmax > grid.kmax:
        raise ValueError(f"kmax={kmax} exceeds grid band limit {grid.kmax}")
    modes = half_plane_modes(kmax)
    draws = rng.uniform(seed, 2 * len(modes), -1.0, 1.0)
    n = grid.n
    c = np.zeros((n, n), dtype=complex)
    for idx, (kx, ky) in enumerate(modes):
        val = complex(draws[2 * idx], draws[2 * idx + 1]) / (kx * kx + ky * ky)
        c[kx % n, ky % n] = val
        c[-kx % n, -ky % n] = np.conj(val)
    return ScalarField(grid, np.fft.ifft2(c * n**2).real)


def random_divfree(seed: int, grid: Grid, kmax: int | None = None,
                   amplitude: float = 1.0) -> DivFreeField:
    """Deterministic mean-zero divergence-free field, curl of a random streamfunction.

    Normalised so the RMS speed ``||u||_2 / (2 pi)`` equals ``amplitude``.
    """
    kmax = grid.kmax if kmax is None else kmax
    u = perp_grad(random_streamfunction(seed, grid, kmax))
    rms = u.norm() / (2.0 * math.pi)
    return u * (amplitude / rms)


def random_vector(seed: int, grid: Grid, kmax: int | None = None,
                  amplitude: float = 1.0) -> VectorField:
    """Generic band-limited field: random solenoidal part plus gradient and mean."""
    kmax = grid.kmax if kmax is None else kmax
    sol = random_divfree(rng.derive_seed(seed, 1), grid, kmax, amplitude)
    phi = random_streamfunction(rng.derive_seed(seed, 2), grid, kmax)
    g = grad(phi)
    g = g * (amplitude / (g.norm() / (2.0 * math.pi)))
    m = rng.uniform(rng.derive_seed(seed, 3), 2, -amplitude, amplitude)
    return VectorField.from_array(grid, sol.data + g.data + m[:, None, None])


def taylor_green(grid: Grid, amplitude: float = 1.0) -> DivFreeField:
    """``(sin x cos y, -cos x sin y)``, a steady solution of the Euler equations."""
    X, Y = grid.coords()
    return DivFreeField._trusted(
        grid, amplitude * np.stack([np.sin(X) * np.cos(Y), -np.cos(X) * np.sin(Y)]))


# ---------------------------------------------------------------------------
# Text snapshots


def write_field(path, f: Field) -> None:
    """Write ``VFIELD2 v1`` text: header, then ``i j val`` or ``i j ux uy`` rows."""
    n = f.grid.n
    kind = "scalar" if isinstance(f, ScalarField) else "vector"
    lines = [f"VFIELD2 v1 n={n} kind={kind}"]
    if kind == "scalar":
        for i in range(n):
            for j in range(n):
                lines.append(f"{i} {j} {f.values[i, j]:.17g}")
    else:
        for i in range(n):
            for j in range(n):
                lines.append(f"{i} {j} {f.ux[i, j]:.17g} {f.uy[i, j]:.17g}")
    Path(path).write_text("\n".join(lines) + "\n")


def _parse_header(line: str, magic: str) -> dict:
    parts = line.split()
    if len(parts) < 3 or parts[0] != magic or parts[1] != "v1":
        raise ValueError(f"not a {magic} v1 file: {line!r}")
    return dict(p.split("=", 1) for p in parts[2:])


def read_field(path, kmax: int | None = None) -> Field:
    lines = Path(path).read_text().splitlines()
    meta = _parse_header(lines[0], "VFIELD2")
    n = int(meta["n"])
    grid = Grid(n, kmax)
    rows = np.loadtxt(lines[1:], ndmin=2)
    if rows.shape[0] != n * n:
        raise ValueError(f"expected {n * n} rows, found {rows.shape[0]}")
    i = rows[:, 0].astype(int)
    j = rows[:, 1].astype(int)
    if meta.get("kind") == "scalar":
        vals = np.zeros((n, n))
        vals[i, j] = rows[:, 2]
        return ScalarField(grid, vals)
    data = np.zeros((2, n, n))
    data[0, i, j] = rows[:, 2]
    data[1, i, j] = rows[:, 3]
    return VectorField.from_array(grid, data)

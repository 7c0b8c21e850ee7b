"""Brute-force Galerkin reference on a tiny mode set.

Fields are dense Fourier coefficient arrays ``c[kx + M, ky + M, comp]``
over ``|k|_inf <= M``; products are explicit convolution sums and grid
values come from explicit exponential sums.  Nothing here touches the FFT
or projection code of :mod:`liepoisson.fields`, so agreement between the
two paths is evidence rather than tautology.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import rng

AREA = 4.0 * math.pi**2
K_LIMIT = 4


@dataclass(frozen=True)
class Coeffs:
    """Vector field coefficients on ``|k|_inf <= M``; shape ``(2M+1, 2M+1, 2)``."""

    M: int
    c: np.ndarray

    def __post_init__(self):
        s = 2 * self.M + 1
        if self.c.shape != (s, s, 2):
            raise ValueError(f"coefficient array must have shape {(s, s, 2)}")

    def wavevectors(self):
        r = np.arange(-self.M, self.M + 1)
        return np.meshgrid(r, r, indexing="ij")

    def widen(self, M: int) -> "Coeffs":
        if M < self.M:
            raise ValueError("cannot narrow with widen; use truncate")
        out = np.zeros((2 * M + 1, 2 * M + 1, 2), dtype=complex)
        o = M - self.M
        out[o:o + 2 * self.M + 1, o:o + 2 * self.M + 1] = self.c
        return Coeffs(M, out)

    def truncate(self, K: int) -> "Coeffs":
        if K >= self.M:
            return self.widen(K)
        o = self.M - K
        return Coeffs(K, self.c[o:o + 2 * K + 1, o:o + 2 * K + 1].copy())

    def __add__(self, other: "Coeffs") -> "Coeffs":
        M = max(self.M, other.M)
        return Coeffs(M, self.widen(M).c + other.widen(M).c)

    def __sub__(self, other: "Coeffs") -> "Coeffs":
        return self + other * -1.0

    def __mul__(self, s: float) -> "Coeffs":
        return Coeffs(self.M, self.c * s)

    __rmul__ = __mul__

    @classmethod
    def zeros(cls, M: int) -> "Coeffs":
        return cls(M, np.zeros((2 * M + 1, 2 * M + 1, 2), dtype=complex))


@dataclass(frozen=True)
class ModeSet:
    """Divergence-free sector ``|k|_inf <= K``, ``k != 0``, plus an optional mean.

    A field is described by one complex amplitude per wavevector along the
    polarisation ``e(k) = (-ky, kx)/|k|``; reality requires
    ``a(-k) = -conj(a(k))`` since ``e(-k) = -e(k)``.
    """

    K: int

    def __post_init__(self):
        if not 1 <= self.K <= K_LIMIT:
            raise ValueError(f"ModeSet needs 1 <= K <= {K_LIMIT}, got {self.K}")

    def modes(self) -> list[tuple[int, int]]:
        """Half-plane representatives, ordered by ky then kx."""
        K = self.K
        return [(kx, ky) for ky in range(0, K + 1) for kx in range(-K, K + 1)
                if ky > 0 or kx > 0]

    def field(self, amplitudes, mean=(0.0, 0.0)) -> Coeffs:
        """Coefficients of ``sum_k a(k) e(k) exp(i k.x) + c.c. + mean``."""
        K = self.K
        out = Coeffs.zeros(K)
        for a, (kx, ky) in zip(amplitudes, self.modes()):
            r = math.hypot(kx, ky)
            e = np.array([-ky / r, kx / r])
            out.c[kx + K, ky + K] += a * e
            out.c[-kx + K, -ky + K] += np.conj(a) * e
        out.c[K, K] += np.asarray(mean, dtype=float)
        return out

    def random(self, seed: int, mean: bool = False) -> Coeffs:
        """Amplitudes with real and imaginary parts uniform in [-1, 1)."""
        m = len(self.modes())
        u = rng.uniform(seed, 2 * m + 2, -1.0, 1.0)
        a = u[0:2 * m:2] + 1j * u[1:2 * m:2]
        return self.field(a, u[2 * m:] if mean else (0.0, 0.0))


# ---------------------------------------------------------------------------
# Dense sums


def _dft_matrices(n: int, M: int):
    x = 2.0 * math.pi * np.arange(n) / n
    k = np.arange(-M, M + 1)
    return np.exp(1j * np.outer(x, k))  # (n, 2M+1)


def synthesize(a: Coeffs, n: int) -> np.ndarray:
    """Grid values ``(2, n, n)`` by explicit exponential sums."""
    E = _dft_matrices(n, a.M)
    vals = np.einsum("ia,abc,jb->cij", E, a.c, E)
    return vals.real


def analyse(values: np.ndarray, M: int) -> Coeffs:
    """Coefficients ``|k|_inf <= M`` of grid values ``(2, n, n)`` by explicit sums."""
    n = values.shape[-1]
    if 2 * M >= n:
        raise ValueError(f"band {M} not resolvable on n={n}")
    E = _dft_matrices(n, M).conj()
    c = np.einsum("ia,cij,jb->abc", E, values, E) / n**2
    return Coeffs(M, c)


def _convolve(a: Coeffs, b: Coeffs, kernel) -> Coeffs:
    """``out(k) = sum_{p+q=k} kernel(a(p), b(q), p, q)`` summed pair by pair."""
    M = a.M + b.M
    out = Coeffs.zeros(M)
    ka = [(i - a.M, j - a.M) for i in range(2 * a.M + 1) for j in range(2 * a.M + 1)]
    kb = [(i - b.M, j - b.M) for i in range(2 * b.M + 1) for j in range(2 * b.M + 1)]
    for p in ka:
        ap = a.c[p[0] + a.M, p[1] + a.M]
        if not np.any(ap):
            continue
        for q in kb:
            bq = b.c[q[0] + b.M, q[1] + b.M]
            if not np.any(bq):
                continue
            out.c[p[0] + q[0] + M, p[1] + q[1] + M] += kernel(ap, bq, p, q)
    return out


def oracle_advect(X: Coeffs, Y: Coeffs) -> Coeffs:
    """``(X . grad) Y``: ``sum_{p+q=k} (X(p) . i q) Y(q)``, exact on the doubled band."""
    return _convolve(X, Y, lambda xp, yq, p, q: (1j * (xp[0] * q[0] + xp[1] * q[1])) * yq)


def oracle_transpose_grad(Z: Coeffs, W: Coeffs) -> Coeffs:
    """``(DW)^T Z``, component i: ``sum_j Z_j d_i W_j``."""
    return _convolve(Z, W, lambda zp, wq, p, q: 1j * np.array(q, dtype=float) * (zp @ wq))


def oracle_project(a: Coeffs) -> Coeffs:
    """Divergence-free part mode by mode: ``a - k (k.a)/|k|^2``; mean kept."""
    kx, ky = a.wavevectors()
    k2 = kx**2 + ky**2
    kd = kx * a.c[..., 0] + ky * a.c[..., 1]
    with np.errstate(invalid="ignore", divide="ignore"):
        s = np.where(k2 > 0, kd / np.where(k2 > 0, k2, 1), 0.0)
    out = a.c.copy()
    out[..., 0] -= kx * s
    out[..., 1] -= ky * s
    return Coeffs(a.M, out)


def oracle_inner(a: Coeffs, b: Coeffs) -> float:
    M = max(a.M, b.M)
    return float(AREA * np.sum((a.widen(M).c * b.widen(M).c.conj()).real))


def oracle_b(Z: Coeffs, W: Coeffs) -> Coeffs:
    return oracle_project(oracle_transpose_grad(Z, W))


# ---------------------------------------------------------------------------
# Functionals


@dataclass(frozen=True, eq=False)
class OracleFunctional:
    """Linear or quadratic functional in coefficient form.

    ``kind`` is ``"linear"`` (with ``a``), ``"energy"`` or ``"enstrophy"``.
    """

    kind: str
    a: Coeffs | None = None

    def __post_init__(self):
        if self.kind not in ("linear", "energy", "enstrophy"):
            raise ValueError(f"unsupported oracle functional {self.kind!r}")
        if self.kind == "linear" and self.a is None:
            raise ValueError("linear functional needs coefficients")

    def value(self, v: Coeffs) -> float:
        if self.kind == "linear":
            return oracle_inner(oracle_project(self.a), v)
        if self.kind == "energy":
            return 0.5 * oracle_inner(v, v)
        w = _curl_star_curl(v)
        return 0.5 * oracle_inner(w, v)

    def grad(self, v: Coeffs) -> Coeffs:
        if self.kind == "linear":
            return oracle_project(self.a)
        if self.kind == "energy":
            return v
        return _curl_star_curl(v)

    def hess(self, v: Coeffs, u: Coeffs) -> Coeffs:
        if self.kind == "linear":
            return Coeffs.zeros(u.M)
        if self.kind == "energy":
            return u
        return _curl_star_curl(u)


def _curl_star_curl(v: Coeffs) -> Coeffs:
    """``(d_y w, -d_x w)`` with ``w = d_x v_y - d_y v_x``."""
    kx, ky = v.wavevectors()
    w = 1j * (kx * v.c[..., 1] - ky * v.c[..., 0])
    return Coeffs(v.M, np.stack([1j * ky * w, -1j * kx * w], axis=-1))


def oracle_bracket(f: OracleFunctional, g: OracleFunctional, v: Coeffs) -> float:
    """``<dg, nabla_df v> - <df, nabla_dg v>`` by dense sums."""
    if f is g:
        return 0.0
    df, dg = f.grad(v), g.grad(v)
    return oracle_inner(dg, oracle_advect(df, v)) - oracle_inner(df, oracle_advect(dg, v))


def oracle_bracket_differential(f: OracleFunctional, g: OracleFunctional, v: Coeffs) -> Coeffs:
    """Riesz representative of ``d{f, g}(v)`` assembled from dense sums."""
    df, dg = f.grad(v), g.grad(v)
    out = oracle_project(oracle_advect(dg, df) - oracle_advect(df, dg))
    out = out + f.hess(v, oracle_b(dg, v)) - g.hess(v, oracle_b(df, v))
    out = out + g.hess(v, oracle_project(oracle_advect(df, v)))
    out = out - f.hess(v, oracle_project(oracle_advect(dg, v)))
    return out


def _bracket_with(f: OracleFunctional, dG: Coeffs, v: Coeffs) -> float:
    df = f.grad(v)
    return oracle_inner(dG, oracle_advect(df, v)) - oracle_inner(df, oracle_advect(dG, v))


def oracle_jacobi(f: OracleFunctional, g: OracleFunctional, h: OracleFunctional,
                  v: Coeffs) -> float:
    """``{f,{g,h}} + {h,{f,g}} + {g,{h,f}}`` at ``v``."""
    return (_bracket_with(f, oracle_bracket_differential(g, h, v), v)
            + _bracket_with(h, oracle_bracket_differential(f, g, v), v)
            + _bracket_with(g, oracle_bracket_differential(h, f, v), v))


def oracle_scale(v: Coeffs, *diffs: Coeffs, kmax: int) -> float:
    """Same normalisation as the main bracket scale, computed from coefficients."""
    s = math.sqrt(oracle_inner(v, v))
    for d in diffs:
        s *= math.sqrt(oracle_inner(d, d))
    return s * (kmax / math.sqrt(AREA)) ** (len(diffs) - 1)

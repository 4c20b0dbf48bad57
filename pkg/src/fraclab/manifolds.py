"""Compact base manifolds with spectral transforms and dealiased pointwise algebra.

Three explicit manifolds are supported: the circle of circumference 2*pi,
the square torus [0,2pi)^2, and the unit sphere (in `sphere.py`).  Each
carries a collocation grid with quadrature weights summing to the volume,
an eigenbasis of -Delta with a hard mode cutoff, and exact forward/backward
transforms for band-limited fields.  Nonlinear pointwise operations are
evaluated on a refined grid and re-truncated to the cutoff, which keeps all
spectral operations exact for polynomial inputs whose total band stays
within the cutoff.
"""

from __future__ import annotations

from dataclasses import dataclass, field as _dc_field

import numpy as np

__all__ = [
    "Circle",
    "Torus",
    "GridField",
    "SpectralField",
    "analyze",
    "synthesize",
    "laplacian",
    "gradient",
    "pointwise_product",
    "pointwise_map",
    "hessian_sq_norm",
    "ricci_quadratic",
    "integrate",
    "l2_norm",
    "sup_norm",
    "spectral_inner",
    "random_band_limited",
    "constant_field",
]


@dataclass
class SpectralField:
    """Coefficients of a real-valued function on the manifold eigenbasis."""

    manifold: object
    coeffs: np.ndarray


@dataclass
class GridField:
    """Point values of a real-valued function on a collocation grid.

    `refine` records which grid the values live on (1 = base grid,
    d = grid of the d-times refined cutoff used for dealiasing).
    """

    manifold: object
    values: np.ndarray
    refine: int = 1


class Circle:
    """Circle of circumference 2*pi; modes e^{ikx}, |k| <= resolution, lambda_k = k^2."""

    kind = "circle"
    dim = 1

    def __init__(self, resolution: int):
        if resolution < 4:
            raise ValueError("resolution N >= 4 required")
        self.resolution = int(resolution)
        self.volume = 2.0 * np.pi

    # -- grids ---------------------------------------------------------------
    def n_points(self, refine: int = 1) -> int:
        return 2 * (refine * self.resolution + 1)

    def grid_shape(self, refine: int = 1):
        return (self.n_points(refine),)

    def nodes(self, refine: int = 1):
        n = self.n_points(refine)
        return (2.0 * np.pi / n) * np.arange(n)

    def weights(self, refine: int = 1) -> np.ndarray:
        n = self.n_points(refine)
        return np.full(n, 2.0 * np.pi / n)

    # -- spectral layout: complex coeffs c[k], k = 0..N (negative by conjugation)
    def zero_coeffs(self) -> np.ndarray:
        return np.zeros(self.resolution + 1, dtype=complex)

    def eigenvalues(self) -> np.ndarray:
        k = np.arange(self.resolution + 1)
        return (k * k).astype(float)

    def analyze_values(self, values: np.ndarray, refine: int = 1) -> np.ndarray:
        n = self.n_points(refine)
        if values.shape != (n,):
            raise ValueError("grid/resolution mismatch")
        spec = np.fft.rfft(values) / n
        return spec[: self.resolution + 1].copy()

    def synthesize_coeffs(self, coeffs: np.ndarray, refine: int = 1) -> np.ndarray:
        n = self.n_points(refine)
        spec = np.zeros(n // 2 + 1, dtype=complex)
        spec[: self.resolution + 1] = coeffs * n
        return np.fft.irfft(spec, n=n)

    def gradient_values(self, coeffs: np.ndarray, refine: int = 1):
        k = np.arange(self.resolution + 1)
        return (self.synthesize_coeffs(1j * k * coeffs, refine),)

    def hessian_sq_values(self, coeffs: np.ndarray, refine: int = 1) -> np.ndarray:
        k = np.arange(self.resolution + 1)
        upp = self.synthesize_coeffs(-(k * k) * coeffs, refine)
        return upp * upp

    def ricci_quadratic_values(self, grads) -> np.ndarray:
        return np.zeros_like(grads[0])


class Torus:
    """Flat torus [0,2pi)^2; modes e^{i(k1 x1 + k2 x2)}, |k_i| <= resolution."""

    kind = "torus"
    dim = 2

    def __init__(self, resolution: int):
        if resolution < 4:
            raise ValueError("resolution N >= 4 required")
        self.resolution = int(resolution)
        self.volume = (2.0 * np.pi) ** 2

    def n_points(self, refine: int = 1) -> int:
        return 2 * (refine * self.resolution + 1)

    def grid_shape(self, refine: int = 1):
        n = self.n_points(refine)
        return (n, n)

    def nodes(self, refine: int = 1):
        n = self.n_points(refine)
        x = (2.0 * np.pi / n) * np.arange(n)
        return np.meshgrid(x, x, indexing="ij")

    def weights(self, refine: int = 1) -> np.ndarray:
        n = self.n_points(refine)
        return np.full((n, n), (2.0 * np.pi / n) ** 2)

    # coeffs layout: shape (2N+1, N+1); row i <-> k1 = i - N, col j <-> k2 = j >= 0.
    # Real fields satisfy c[-k1, 0] = conj(c[k1, 0]) in the k2 = 0 column.
    def zero_coeffs(self) -> np.ndarray:
        N = self.resolution
        return np.zeros((2 * N + 1, N + 1), dtype=complex)

    def eigenvalues(self) -> np.ndarray:
        N = self.resolution
        k1 = np.arange(-N, N + 1)[:, None].astype(float)
        k2 = np.arange(0, N + 1)[None, :].astype(float)
        return k1 * k1 + k2 * k2

    def _mode_arrays(self):
        N = self.resolution
        k1 = np.arange(-N, N + 1)[:, None]
        k2 = np.arange(0, N + 1)[None, :]
        return k1, k2

    def analyze_values(self, values: np.ndarray, refine: int = 1) -> np.ndarray:
        n = self.n_points(refine)
        if values.shape != (n, n):
            raise ValueError("grid/resolution mismatch")
        N = self.resolution
        spec = np.fft.rfft2(values) / (n * n)
        out = self.zero_coeffs()
        for i, k1 in enumerate(range(-N, N + 1)):
            out[i, :] = spec[k1 % n, : N + 1]
        return out

    def synthesize_coeffs(self, coeffs: np.ndarray, refine: int = 1) -> np.ndarray:
        n = self.n_points(refine)
        N = self.resolution
        spec = np.zeros((n, n // 2 + 1), dtype=complex)
        for i, k1 in enumerate(range(-N, N + 1)):
            spec[k1 % n, : N + 1] = coeffs[i, :] * (n * n)
        return np.fft.irfft2(spec, s=(n, n))

    def gradient_values(self, coeffs: np.ndarray, refine: int = 1):
        k1, k2 = self._mode_arrays()
        gx = self.synthesize_coeffs(1j * k1 * coeffs, refine)
        gy = self.synthesize_coeffs(1j * k2 * coeffs, refine)
        return (gx, gy)

    def hessian_sq_values(self, coeffs: np.ndarray, refine: int = 1) -> np.ndarray:
        k1, k2 = self._mode_arrays()
        uxx = self.synthesize_coeffs(-(k1 * k1) * coeffs, refine)
        uyy = self.synthesize_coeffs(-(k2 * k2) * coeffs, refine)
        uxy = self.synthesize_coeffs(-(k1 * k2) * coeffs, refine)
        return uxx * uxx + 2.0 * uxy * uxy + uyy * uyy

    def ricci_quadratic_values(self, grads) -> np.ndarray:
        return np.zeros_like(grads[0])


# -- field-level operations ---------------------------------------------------

def analyze(g: GridField) -> SpectralField:
    """Forward transform; exact for fields band-limited to the cutoff."""
    coeffs = g.manifold.analyze_values(g.values, g.refine)
    return SpectralField(g.manifold, coeffs)


def synthesize(f: SpectralField, refine: int = 1) -> GridField:
    """Backward transform onto the (possibly refined) collocation grid."""
    vals = f.manifold.synthesize_coeffs(f.coeffs, refine)
    return GridField(f.manifold, vals, refine)


def laplacian(f: SpectralField) -> SpectralField:
    """Laplace-Beltrami operator: mode k is scaled by -lambda_k."""
    return SpectralField(f.manifold, -f.manifold.eigenvalues() * f.coeffs)


def gradient(f: SpectralField, refine: int = 1):
    """Gradient components in an orthonormal frame, as GridFields."""
    comps = f.manifold.gradient_values(f.coeffs, refine)
    return tuple(GridField(f.manifold, c, refine) for c in comps)


def hessian_sq_norm(f: SpectralField, refine: int = 1) -> GridField:
    """|Hess u|^2 pointwise (covariant Hessian on the sphere, plain on flat bases)."""
    return GridField(f.manifold, f.manifold.hessian_sq_values(f.coeffs, refine), refine)


def ricci_quadratic(grads) -> GridField:
    """Ric(X, X) for a gradient tuple X; zero on flat bases, |X|^2 on the unit sphere."""
    if len(grads) == 0:
        raise ValueError("empty gradient tuple")
    man = grads[0].manifold
    vals = man.ricci_quadratic_values(tuple(g.values for g in grads))
    return GridField(man, vals, grads[0].refine)


def _as_coeffs(x) -> SpectralField:
    if isinstance(x, SpectralField):
        return x
    return analyze(x)


def pointwise_product(a: GridField, b: GridField, dealias: int = 2) -> GridField:
    """Product of two band-limited fields on a refined grid, re-truncated.

    Exact (to rounding) whenever the bands of `a` and `b` together stay
    within `dealias` times the cutoff and their sum within the cutoff.
    """
    fa, fb = _as_coeffs(a), _as_coeffs(b)
    man = fa.manifold
    va = man.synthesize_coeffs(fa.coeffs, dealias)
    vb = man.synthesize_coeffs(fb.coeffs, dealias)
    coeffs = man.analyze_values(va * vb, dealias)
    return GridField(man, man.synthesize_coeffs(coeffs, 1), 1)


def pointwise_map(func, f, dealias: int = 4) -> GridField:
    """Compose a scalar function with a field on a refined grid, re-truncated.

    Used for general nonlinearities; the truncation error is the spectral
    tail of func(u) beyond the cutoff and is reported by the verifiers.
    """
    ff = _as_coeffs(f)
    man = ff.manifold
    v = man.synthesize_coeffs(ff.coeffs, dealias)
    coeffs = man.analyze_values(func(v), dealias)
    return GridField(man, man.synthesize_coeffs(coeffs, 1), 1)


def integrate(g: GridField) -> float:
    """Volume integral via the grid quadrature weights."""
    return float(np.sum(g.manifold.weights(g.refine) * g.values))


def l2_norm(g: GridField) -> float:
    return float(np.sqrt(np.sum(g.manifold.weights(g.refine) * g.values**2)))


def sup_norm(g: GridField) -> float:
    return float(np.max(np.abs(g.values)))


def spectral_inner(f: SpectralField, g: SpectralField, weight=None) -> float:
    """L^2(M) inner product from coefficients, optionally mode-weighted.

    `weight`, if given, is an array aligned with the coefficient layout
    (e.g. lambda^sigma for homogeneous Sobolev pairings).
    """
    man = f.manifold
    w = 1.0 if weight is None else weight
    if man.kind == "circle":
        prod = w * f.coeffs * np.conj(g.coeffs)
        return float(2.0 * np.pi * (prod[0].real + 2.0 * np.sum(prod[1:].real)))
    if man.kind == "torus":
        prod = w * f.coeffs * np.conj(g.coeffs)
        total = np.sum(prod[:, 0].real) + 2.0 * np.sum(prod[:, 1:].real)
        return float((2.0 * np.pi) ** 2 * total)
    if man.kind == "sphere":
        return float(np.sum(w * f.coeffs * g.coeffs))
    raise ValueError(f"unsupported manifold kind {man.kind}")


def constant_field(man, value: float) -> SpectralField:
    coeffs = man.zero_coeffs()
    if man.kind == "circle":
        coeffs[0] = value
    elif man.kind == "torus":
        coeffs[man.resolution, 0] = value
    else:  # sphere: Y_00 = 1/sqrt(4 pi)
        coeffs[0, man.resolution] = value * np.sqrt(4.0 * np.pi)
    return SpectralField(man, coeffs)


def random_band_limited(man, rng, band: int | None = None, zero_mean: bool = False) -> SpectralField:
    """Random real field supported on modes up to `band` (default: cutoff/4)."""
    band = band if band is not None else max(1, man.resolution // 4)
    vals = np.zeros(man.grid_shape(1))
    x = man.nodes(1)
    if man.kind == "circle":
        for k in range(0 if not zero_mean else 1, band + 1):
            a, b = rng.standard_normal(2)
            vals += a * np.cos(k * x)
            if k > 0:
                vals += b * np.sin(k * x)
    elif man.kind == "torus":
        X, Y = x
        for k1 in range(0, band + 1):
            for k2 in range(0, band + 1):
                if zero_mean and k1 == 0 and k2 == 0:
                    continue
                a, b = rng.standard_normal(2)
                vals += a * np.cos(k1 * X + k2 * Y) + b * np.sin(k1 * X - k2 * Y)
    else:  # sphere: fill coefficients directly
        coeffs = man.zero_coeffs()
        L = man.resolution
        for l in range(0 if not zero_mean else 1, band + 1):
            for m in range(-l, l + 1):
                coeffs[l, m + L] = rng.standard_normal()
        return SpectralField(man, coeffs)
    return analyze(GridField(man, vals, 1))

"""Unit sphere with real spherical-harmonic transforms.

Grid: Gauss-Legendre nodes in cos(theta) times a uniform phi grid, so the
poles are never sampled and the quadrature is exact for band-limited
integrands.  Basis: orthonormal real harmonics

    Y_{l,0}  = Pbar_l^0(cos th),
    Y_{l,m}  = sqrt(2) Pbar_l^m(cos th) cos(m phi),   m > 0,
    Y_{l,-m} = sqrt(2) Pbar_l^m(cos th) sin(m phi),   m > 0,

with Pbar the fully normalized associated Legendre functions (no
Condon-Shortley phase), int Pbar_l^m(x)^2 dx = 1/(2 pi).  Transforms use
an FFT in phi and weighted Legendre sums in theta; derivative tables give
pointwise gradients and covariant Hessians (Gamma^th_{ph ph} = -sin cos,
Gamma^ph_{th ph} = cot).  Degree cutoffs up to L ~ 64 are the intended
desk scale.
"""

from __future__ import annotations

import numpy as np
from scipy.special import roots_legendre

__all__ = ["Sphere", "legendre_tables"]


def legendre_tables(lmax: int, x: np.ndarray):
    """Normalized associated Legendre values and theta-derivatives at nodes x.

    Returns (P, dP) with shape (lmax+1, lmax+1, len(x)); entry [l, m] is
    Pbar_l^m, zero for m > l.  dP is d/dtheta at theta = arccos x.
    """
    nx = len(x)
    sin_t = np.sqrt(1.0 - x * x)
    P = np.zeros((lmax + 1, lmax + 1, nx))
    P[0, 0] = np.sqrt(1.0 / (4.0 * np.pi))
    for m in range(1, lmax + 1):
        P[m, m] = np.sqrt((2.0 * m + 1.0) / (2.0 * m)) * sin_t * P[m - 1, m - 1]
    for m in range(0, lmax):
        P[m + 1, m] = np.sqrt(2.0 * m + 3.0) * x * P[m, m]
    for m in range(0, lmax + 1):
        for l in range(m + 2, lmax + 1):
            a_l = np.sqrt((4.0 * l * l - 1.0) / (l * l - m * m))
            a_lm1 = np.sqrt((4.0 * (l - 1.0) ** 2 - 1.0) / ((l - 1.0) ** 2 - m * m))
            P[l, m] = a_l * (x * P[l - 1, m] - P[l - 2, m] / a_lm1)
    dP = np.zeros_like(P)
    for m in range(0, lmax + 1):
        for l in range(m, lmax + 1):
            if l == 0:
                continue
            c = np.sqrt((2.0 * l + 1.0) * (l * l - m * m) / (2.0 * l - 1.0))
            prev = P[l - 1, m] if l - 1 >= m else 0.0
            dP[l, m] = (l * x * P[l, m] - c * prev) / sin_t
    return P, dP


class Sphere:
    """Unit sphere; modes Y_l^m, l <= resolution, lambda_l = l (l+1)."""

    kind = "sphere"
    dim = 2

    def __init__(self, resolution: int):
        if resolution < 4:
            raise ValueError("resolution L >= 4 required")
        self.resolution = int(resolution)
        self.volume = 4.0 * np.pi
        self._cache: dict[int, dict] = {}

    # -- grids ---------------------------------------------------------------
    def _grid(self, refine: int = 1) -> dict:
        if refine not in self._cache:
            Lg = refine * self.resolution
            x, w = roots_legendre(Lg + 1)
            theta = np.arccos(x)
            nphi = 2 * (Lg + 1)
            phi = (2.0 * np.pi / nphi) * np.arange(nphi)
            P, dP = legendre_tables(self.resolution, x)
            self._cache[refine] = {
                "x": x, "w": w, "theta": theta, "sin": np.sqrt(1.0 - x * x),
                "phi": phi, "nphi": nphi, "P": P, "dP": dP,
            }
        return self._cache[refine]

    def grid_shape(self, refine: int = 1):
        g = self._grid(refine)
        return (len(g["x"]), g["nphi"])

    def nodes(self, refine: int = 1):
        g = self._grid(refine)
        return np.meshgrid(g["theta"], g["phi"], indexing="ij")

    def weights(self, refine: int = 1) -> np.ndarray:
        g = self._grid(refine)
        return np.outer(g["w"], np.full(g["nphi"], 2.0 * np.pi / g["nphi"]))

    # -- spectral layout: real coeffs a[l, m + L], |m| <= l --------------------
    def zero_coeffs(self) -> np.ndarray:
        L = self.resolution
        return np.zeros((L + 1, 2 * L + 1))

    def eigenvalues(self) -> np.ndarray:
        L = self.resolution
        l = np.arange(L + 1, dtype=float)[:, None]
        return np.broadcast_to(l * (l + 1.0), (L + 1, 2 * L + 1)).copy()

    def mode_index(self, l: int, m: int):
        return (l, m + self.resolution)

    def analyze_values(self, values: np.ndarray, refine: int = 1) -> np.ndarray:
        g = self._grid(refine)
        if values.shape != (len(g["x"]), g["nphi"]):
            raise ValueError("grid/resolution mismatch")
        L = self.resolution
        F = np.fft.rfft(values, axis=1) / g["nphi"]
        Pw = g["P"] * g["w"][None, None, :]
        out = self.zero_coeffs()
        fc0 = F[:, 0].real
        out[:, L] = 2.0 * np.pi * np.einsum("li,i->l", Pw[:, 0, :], fc0)
        for m in range(1, L + 1):
            fcm = 2.0 * F[:, m].real
            fsm = -2.0 * F[:, m].imag
            col = np.sqrt(2.0) * np.pi * np.einsum("li,i->l", Pw[:, m, :], fcm)
            out[:, L + m] = col
            out[:, L - m] = np.sqrt(2.0) * np.pi * np.einsum("li,i->l", Pw[:, m, :], fsm)
        # zero the unused |m| > l entries produced by rounding
        for l in range(L + 1):
            out[l, : L - l] = 0.0
            out[l, L + l + 1:] = 0.0
        return out

    def _synth(self, coeffs: np.ndarray, refine: int, table: str, mfactor=None) -> np.ndarray:
        g = self._grid(refine)
        L = self.resolution
        T = g[table]
        nphi = g["nphi"]
        F = np.zeros((len(g["x"]), nphi // 2 + 1), dtype=complex)
        gc0 = np.einsum("l,li->i", coeffs[:, L], T[:, 0, :])
        F[:, 0] = gc0
        for m in range(1, L + 1):
            gcm = np.sqrt(2.0) * np.einsum("l,li->i", coeffs[:, L + m], T[:, m, :])
            gsm = np.sqrt(2.0) * np.einsum("l,li->i", coeffs[:, L - m], T[:, m, :])
            F[:, m] = 0.5 * (gcm - 1j * gsm)
        if mfactor is not None:
            m_all = np.arange(nphi // 2 + 1)
            F = F * mfactor(m_all)[None, :]
        return np.fft.irfft(F * nphi, n=nphi, axis=1)

    def synthesize_coeffs(self, coeffs: np.ndarray, refine: int = 1) -> np.ndarray:
        return self._synth(coeffs, refine, "P")

    def _partials(self, coeffs: np.ndarray, refine: int = 1):
        """u_theta and u_phi on the grid."""
        u_t = self._synth(coeffs, refine, "dP")
        u_p = self._synth(coeffs, refine, "P", mfactor=lambda m: 1j * m)
        return u_t, u_p

    def gradient_values(self, coeffs: np.ndarray, refine: int = 1):
        g = self._grid(refine)
        u_t, u_p = self._partials(coeffs, refine)
        return (u_t, u_p / g["sin"][:, None])

    def hessian_sq_values(self, coeffs: np.ndarray, refine: int = 1) -> np.ndarray:
        g = self._grid(refine)
        sin_t = g["sin"][:, None]
        cot_t = (g["x"] / g["sin"])[:, None]
        lam = self.eigenvalues()
        u_t, u_p = self._partials(coeffs, refine)
        u_pp = self._synth(coeffs, refine, "P", mfactor=lambda m: -(m.astype(float) ** 2))
        u_tp = self._synth(coeffs, refine, "dP", mfactor=lambda m: 1j * m)
        # u_theta_theta from the spherical-harmonic ODE, avoiding a second
        # derivative table:  P'' = -cot P' - (l(l+1) - m^2/sin^2) P
        m_sq = np.zeros_like(coeffs)
        L = self.resolution
        for m in range(-L, L + 1):
            m_sq[:, m + L] = float(m * m)
        term_lam = self._synth(lam * coeffs, refine, "P")
        term_msq = self._synth(m_sq * coeffs, refine, "P")
        u_tt = -cot_t * u_t - term_lam + term_msq / (sin_t * sin_t)
        # covariant components in the orthonormal frame
        h_tt = u_tt
        h_tp = (u_tp - cot_t * u_p) / sin_t
        h_pp = u_pp / (sin_t * sin_t) + cot_t * u_t
        return h_tt * h_tt + 2.0 * h_tp * h_tp + h_pp * h_pp

    def ricci_quadratic_values(self, grads) -> np.ndarray:
        # unit sphere: Ric = g, so Ric(X, X) = |X|^2
        acc = np.zeros_like(grads[0])
        for c in grads:
            acc += c * c
        return acc

"""Level sets of the extension over the circle and the weak Kato remainder.

The strip M x (0, z_max) is meshed with uniform x-cells and a geometric
z-grading toward z = 0 (the weight z^{1-2s} is integrable but unbounded for
s > 1/2).  U is evaluated exactly per level through the extension
multipliers, never interpolated in z across slices; {U = t} is extracted by
marching squares with a bilinear sign rule, saddle cells resolved by an
exact center evaluation.  Contour integrals evaluate |grad U| and
Phi = P_z phi exactly at segment midpoints by mode sums.

The weak left-hand side int (Lambda^s|u| - sgn(u) Lambda^s u) phi never
forms Lambda^s |u| pointwise: self-adjointness turns it into
int |u| Lambda^s phi - int sgn(u) (Lambda^s u) phi, and both integrals are
evaluated by splitting at the zeros of u and integrating the band-limited
integrand with its spectral antiderivative; sgn(0) = 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as _dc_field

import numpy as np
from scipy.optimize import brentq

from .manifolds import SpectralField
from .operators import extension_multipliers, frac_laplacian
from .special import FracParams, poisson_multiplier, poisson_multiplier_deriv
from .verifiers import IdentityReport

__all__ = [
    "StripMesh",
    "ZeroContour",
    "build_strip_mesh",
    "extract_zero_contour",
    "weighted_contour_integral",
    "f_functional",
    "kato_lhs_weak",
    "kato_u_zero_term",
    "kato_g_component",
    "verify_kato",
]


@dataclass
class StripMesh:
    """Graded (x, z) mesh over the circle strip."""

    n_x: int
    z_levels: np.ndarray
    z_min: float
    z_max: float
    ratio: float

    def refined(self) -> "StripMesh":
        """Halve the cell scale: doubled x-resolution, sqrt of the grading ratio."""
        return build_strip_mesh_raw(self.n_x * 2, self.z_min / 2.0, self.z_max,
                                    math.sqrt(self.ratio))


def build_strip_mesh_raw(n_x: int, z_min: float, z_max: float, ratio: float) -> StripMesh:
    levels = [z_min]
    while levels[-1] < z_max:
        levels.append(levels[-1] * ratio)
    return StripMesh(n_x=n_x, z_levels=np.array(levels), z_min=z_min,
                     z_max=levels[-1], ratio=ratio)


def build_strip_mesh(man, p: FracParams, n_x: int | None = None, z_min: float = 1e-4,
                     ratio: float = 1.15, z_max: float | None = None) -> StripMesh:
    if man.kind != "circle":
        raise ValueError("Kato verification is circle-only")
    if n_x is None:
        n_x = max(256, 4 * man.n_points(1))
    if z_max is None:
        lam = man.eigenvalues()
        lam1 = float(np.min(lam[lam > 0]))
        z_max = 18.0 / math.sqrt(lam1)
    return build_strip_mesh_raw(n_x, z_min, z_max, ratio)


# -- exact point evaluation of the extension over the circle ---------------------

def _eval_extension(u: SpectralField, p: FracParams, xs, zs):
    """(U, U_x, U_z) at arbitrary strip points, by mode sums."""
    man = u.manifold
    N = man.resolution
    c = u.coeffs
    xs = np.atleast_1d(np.asarray(xs, dtype=float))
    zs = np.atleast_1d(np.asarray(zs, dtype=float))
    k = np.arange(1, N + 1)
    r = zs[:, None] * k[None, :]
    theta = poisson_multiplier(p, r.ravel()).reshape(r.shape)
    dtheta = poisson_multiplier_deriv(p, r.ravel()).reshape(r.shape)
    phase = np.exp(1j * np.outer(xs, k))
    base = 2.0 * phase * c[None, 1:]
    U = c[0].real + np.sum((base * theta).real, axis=1)
    Ux = np.sum((base * 1j * k[None, :] * theta).real, axis=1)
    Uz = np.sum((base * k[None, :] * dtheta).real, axis=1)
    return U, Ux, Uz


def _slice_values(u: SpectralField, p: FracParams, z: float, n_x: int) -> np.ndarray:
    """U(., z) on a uniform n_x grid via FFT synthesis."""
    man = u.manifold
    theta, _ = extension_multipliers(man, p, z)
    spec = np.zeros(n_x // 2 + 1, dtype=complex)
    spec[: man.resolution + 1] = theta * u.coeffs * n_x
    return np.fft.irfft(spec, n=n_x)


# -- marching squares --------------------------------------------------------------

@dataclass
class ZeroContour:
    """Polyline approximation of {U = level} with per-segment quadrature data."""

    level: float
    segments: np.ndarray          # (n_seg, 2, 2) endpoint (x, z) pairs
    lengths: np.ndarray
    mid_x: np.ndarray
    mid_z: np.ndarray
    grad_norm: np.ndarray         # |grad~ U| at segment midpoints (exact)
    polylines: list = _dc_field(default_factory=list)
    grad_sup_zmin: float = 0.0    # sup_x |grad~ U|(., z_min), for the sliver bound
    z_min: float = 0.0

    def count(self) -> int:
        return len(self.polylines)


def _chain_polylines(segments: np.ndarray) -> list:
    """Join segments sharing endpoints into polylines (for topology counts)."""
    if len(segments) == 0:
        return []
    key = lambda pt: (round(pt[0], 9), round(pt[1], 12))
    adj: dict = {}
    for i, seg in enumerate(segments):
        for end in (0, 1):
            adj.setdefault(key(seg[end]), []).append((i, end))
    seen = set()
    chains = []
    for i in range(len(segments)):
        if i in seen:
            continue
        chain = [segments[i][0], segments[i][1]]
        seen.add(i)
        # extend forward then backward
        for end_pt_idx in (1, 0):
            while True:
                k = key(chain[-1] if end_pt_idx == 1 else chain[0])
                nxt = [(j, e) for (j, e) in adj.get(k, []) if j not in seen]
                if not nxt:
                    break
                j, e = nxt[0]
                seen.add(j)
                new_pt = segments[j][1 - e]
                if end_pt_idx == 1:
                    chain.append(new_pt)
                else:
                    chain.insert(0, new_pt)
        chains.append(np.array(chain))
    return chains


def extract_zero_contour(u: SpectralField, p: FracParams, mesh: StripMesh,
                         level: float = 0.0) -> ZeroContour:
    """Marching-squares extraction of {U = level} in the strip."""
    man = u.manifold
    if man.kind != "circle":
        raise ValueError("contour extraction is circle-only")
    if float(np.max(np.abs(u.coeffs))) == 0.0:
        raise ValueError("u must not be identically zero")
    n_x = mesh.n_x
    xs = (2.0 * np.pi / n_x) * np.arange(n_x)
    zl = mesh.z_levels
    vals = np.empty((len(zl), n_x))
    for j, z in enumerate(zl):
        vals[j] = _slice_values(u, p, float(z), n_x) - level

    segs = []
    centers_todo = []

    def crossing(p1, v1, p2, v2):
        t = v1 / (v1 - v2)
        return (p1[0] + t * (p2[0] - p1[0]), p1[1] + t * (p2[1] - p1[1]))

    for j in range(len(zl) - 1):
        z0, z1 = zl[j], zl[j + 1]
        row0, row1 = vals[j], vals[j + 1]
        for i in range(n_x):
            i2 = (i + 1) % n_x
            x0 = xs[i]
            x1 = xs[i] + 2.0 * np.pi / n_x
            v00, v10 = row0[i], row0[i2]
            v01, v11 = row1[i], row1[i2]
            code = (v00 > 0) | ((v10 > 0) << 1) | ((v11 > 0) << 2) | ((v01 > 0) << 3)
            if code in (0, 15):
                continue
            pb = lambda: crossing((x0, z0), v00, (x1, z0), v10)   # bottom
            pr = lambda: crossing((x1, z0), v10, (x1, z1), v11)   # right
            pt = lambda: crossing((x0, z1), v01, (x1, z1), v11)   # top
            pl = lambda: crossing((x0, z0), v00, (x0, z1), v01)   # left
            pairs = {
                1: [(pb, pl)], 14: [(pb, pl)],
                2: [(pb, pr)], 13: [(pb, pr)],
                4: [(pr, pt)], 11: [(pr, pt)],
                8: [(pt, pl)], 7: [(pt, pl)],
                3: [(pl, pr)], 12: [(pl, pr)],
                6: [(pb, pt)], 9: [(pb, pt)],
            }
            if code in pairs:
                for e1, e2 in pairs[code]:
                    segs.append((e1(), e2()))
            else:
                # saddle: resolve by the sign of the exact center value
                xc, zc = 0.5 * (x0 + x1), 0.5 * (z0 + z1)
                Uc = _eval_extension(u, p, [xc], [zc])[0][0] - level
                pos_diag_00 = code == 5      # v00, v11 positive
                if (Uc > 0) == pos_diag_00:
                    segs.append((pb(), pl()))
                    segs.append((pt(), pr()))
                else:
                    segs.append((pb(), pr()))
                    segs.append((pt(), pl()))

    if not segs:
        g0 = _eval_extension(u, p, xs, np.full(n_x, mesh.z_min))
        return ZeroContour(level=level, segments=np.zeros((0, 2, 2)),
                           lengths=np.zeros(0), mid_x=np.zeros(0), mid_z=np.zeros(0),
                           grad_norm=np.zeros(0), polylines=[],
                           grad_sup_zmin=float(np.max(np.hypot(g0[1], g0[2]))),
                           z_min=mesh.z_min)
    segments = np.array(segs)
    mids = 0.5 * (segments[:, 0, :] + segments[:, 1, :])
    lengths = np.hypot(segments[:, 1, 0] - segments[:, 0, 0],
                       segments[:, 1, 1] - segments[:, 0, 1])
    _, Ux, Uz = _eval_extension(u, p, mids[:, 0], mids[:, 1])
    g0 = _eval_extension(u, p, xs, np.full(n_x, mesh.z_min))
    return ZeroContour(
        level=level, segments=segments, lengths=lengths,
        mid_x=mids[:, 0], mid_z=mids[:, 1], grad_norm=np.hypot(Ux, Uz),
        polylines=_chain_polylines(segments),
        grad_sup_zmin=float(np.max(np.hypot(g0[1], g0[2]))), z_min=mesh.z_min,
    )


def _phi_at(phi: SpectralField, p: FracParams, xs, zs) -> np.ndarray:
    """Phi = P_z phi at arbitrary strip points."""
    man = phi.manifold
    N = man.resolution
    k = np.arange(1, N + 1)
    xs = np.atleast_1d(xs)
    zs = np.atleast_1d(zs)
    if len(xs) == 0:
        return np.zeros(0)
    r = np.asarray(zs)[:, None] * k[None, :]
    theta = poisson_multiplier(p, r.ravel()).reshape(r.shape)
    phase = np.exp(1j * np.outer(xs, k))
    return phi.coeffs[0].real + np.sum((2.0 * phase * phi.coeffs[None, 1:] * theta).real, axis=1)


def weighted_contour_integral(contour: ZeroContour, p: FracParams,
                              phi: SpectralField) -> float:
    """2 beta_s sum over segments of |grad~ U| Phi z^{1-2s} (arc length)."""
    if len(contour.lengths) == 0:
        return 0.0
    Phi = _phi_at(phi, p, contour.mid_x, contour.mid_z)
    w = contour.mid_z ** (1.0 - 2.0 * p.s)
    return float(2.0 * p.beta * np.sum(contour.grad_norm * Phi * w * contour.lengths))


def f_functional(u: SpectralField, phi: SpectralField, p: FracParams,
                 mesh: StripMesh, t_grid) -> np.ndarray:
    """F_phi(t): level-t contour integrals (beta_s, without the factor 2).

    Levels outside the range of U give 0 (flagged by an empty contour).
    """
    out = []
    for t in np.atleast_1d(t_grid):
        contour = extract_zero_contour(u, p, mesh, level=float(t))
        out.append(0.5 * weighted_contour_integral(contour, p, phi))
    return np.array(out)


# -- weak form over the base --------------------------------------------------------

def _full_spectrum(c: np.ndarray) -> np.ndarray:
    """Compact circle coefficients -> full array over modes -N..N."""
    N = len(c) - 1
    full = np.zeros(2 * N + 1, dtype=complex)
    full[N:] = c
    full[:N] = np.conj(c[1:])[::-1]
    return full


def _convolve_modes(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Exact product spectrum of two circle fields (full layout, band sum)."""
    return np.convolve(a, b)


def _segment_integral(full: np.ndarray, a: float, b: float) -> float:
    """int_a^b of the field with full spectrum `full` (modes -M..M)."""
    M = (len(full) - 1) // 2
    k = np.arange(-M, M + 1)
    total = full[M].real * (b - a)
    nz = k != 0
    kk = k[nz]
    ck = full[nz]
    total += float(np.sum((ck * (np.exp(1j * kk * b) - np.exp(1j * kk * a)) / (1j * kk)).real))
    return total


def _circle_roots(u: SpectralField, shift: float = 0.0) -> np.ndarray:
    """Zeros of u - shift on [0, 2pi) by sign-scan plus Brent refinement."""
    man = u.manifold
    n = man.n_points(8)
    xs = (2.0 * np.pi / n) * np.arange(n + 1)
    base = man.synthesize_coeffs(u.coeffs, 8)
    vals = np.concatenate([base, [base[0]]]) - shift
    full = _full_spectrum(u.coeffs)
    M = (len(full) - 1) // 2
    k = np.arange(-M, M + 1)

    def f(x):
        return float(np.sum((full * np.exp(1j * k * x)).real)) - shift

    roots = []
    for i in range(n):
        v0, v1 = vals[i], vals[i + 1]
        if v0 == 0.0:
            roots.append(xs[i])
        elif v0 * v1 < 0.0:
            roots.append(brentq(f, xs[i], xs[i + 1], xtol=1e-14))
    return np.array(sorted(roots))


def kato_lhs_weak(u: SpectralField, phi: SpectralField, p: FracParams,
                  zero_tol: float | None = None) -> float:
    """int (Lambda^s|u| - sgn(u) Lambda^s u) phi, in the weak (self-adjoint) form."""
    man = u.manifold
    if man.kind != "circle":
        raise ValueError("circle-only")
    if zero_tol is None:
        zero_tol = 1e-10 * float(np.max(np.abs(man.synthesize_coeffs(u.coeffs, 1))))
    h1 = _convolve_modes(_full_spectrum(u.coeffs),
                         _full_spectrum(frac_laplacian(phi, p.s).coeffs))
    h2 = _convolve_modes(_full_spectrum(frac_laplacian(u, p.s).coeffs),
                         _full_spectrum(phi.coeffs))
    roots = _circle_roots(u)
    if len(roots) == 0:
        cuts = np.array([0.0, 2.0 * np.pi])
    else:
        cuts = np.concatenate([roots, [roots[0] + 2.0 * np.pi]])
    full_u = _full_spectrum(u.coeffs)
    M = (len(full_u) - 1) // 2
    k = np.arange(-M, M + 1)
    total = 0.0
    for a, b in zip(cuts[:-1], cuts[1:]):
        xm = 0.5 * (a + b)
        um = float(np.sum((full_u * np.exp(1j * k * xm)).real))
        sgn = 0.0 if abs(um) <= zero_tol else math.copysign(1.0, um)
        if sgn == 0.0:
            continue
        total += sgn * (_segment_integral(h1, a, b) - _segment_integral(h2, a, b))
    return total


def kato_g_component(u: SpectralField, phi: SpectralField, p: FracParams, t: float) -> float:
    """G(t) = -int_{u > t} (Lambda^s u) phi dmu."""
    h2 = _convolve_modes(_full_spectrum(frac_laplacian(u, p.s).coeffs),
                         _full_spectrum(phi.coeffs))
    roots = _circle_roots(u, shift=t)
    if len(roots) == 0:
        cuts = np.array([0.0, 2.0 * np.pi])
    else:
        cuts = np.concatenate([roots, [roots[0] + 2.0 * np.pi]])
    full_u = _full_spectrum(u.coeffs)
    M = (len(full_u) - 1) // 2
    k = np.arange(-M, M + 1)
    total = 0.0
    for a, b in zip(cuts[:-1], cuts[1:]):
        xm = 0.5 * (a + b)
        um = float(np.sum((full_u * np.exp(1j * k * xm)).real))
        if um > t:
            total -= _segment_integral(h2, a, b)
    return total


def kato_u_zero_term(u: SpectralField, phi: SpectralField, p: FracParams,
                     thresholds=None, refine: int = 16):
    """int_{u=0} |Lambda^s u| phi dmu with threshold refinement.

    Cells are flagged by interval bounds (endpoint values plus the curvature
    bound M2 h^2/8), so genuinely flat zero arcs stay included while
    transversal crossings extrapolate away linearly in the threshold.  The
    default threshold ladder stays above the certified-bound floor, below
    which cell inclusion is resolution-limited rather than geometric.
    Returns (value, info); info['sensitivity'] > 0.1 flags an ambiguous
    zero-set measure.
    """
    man = u.manifold
    n = man.n_points(refine)
    h = 2.0 * np.pi / n
    vals = man.synthesize_coeffs(u.coeffs, refine)
    vals_next = np.roll(vals, -1)
    k = np.arange(man.resolution + 1)
    m2 = 2.0 * float(np.sum(k * k * np.abs(u.coeffs)))
    floor = m2 * h * h / 8.0
    cell_bound = np.maximum(np.abs(vals), np.abs(vals_next)) + floor
    lam_u = man.synthesize_coeffs(frac_laplacian(u, p.s).coeffs, refine)
    phi_v = man.synthesize_coeffs(phi.coeffs, refine)
    cell_mass = np.abs(0.5 * (lam_u + np.roll(lam_u, -1))) * 0.5 * (phi_v + np.roll(phi_v, -1)) * h

    umax = float(np.max(np.abs(vals)))
    if thresholds is None:
        top = 1e-2 * umax
        bottom = max(4.0 * floor, 1e-8 * umax)
        levels = max(3, min(7, int(math.log2(max(top / bottom, 2.0)))))
        thresholds = top * 0.5 ** np.arange(levels)
    thresholds = np.asarray(thresholds, dtype=float)
    masses = np.array([float(np.sum(cell_mass[cell_bound <= t])) for t in thresholds])
    # linear-in-threshold extrapolation on the smallest levels
    ts = thresholds[-3:]
    ms = masses[-3:]
    A = np.vstack([np.ones_like(ts), ts]).T
    coef, *_ = np.linalg.lstsq(A, ms, rcond=None)
    value = float(max(coef[0], 0.0))
    scale = max(abs(value), 1e-3 * float(np.max(cell_mass)) * n, 1e-30)
    sensitivity = abs(masses[-1] - value) / scale
    info = {
        "thresholds": thresholds,
        "masses": masses,
        "sensitivity": float(sensitivity),
        "ambiguous": bool(sensitivity > 0.1),
    }
    return value, info


def verify_kato(u: SpectralField, phi: SpectralField, p: FracParams,
                mesh: StripMesh | None = None, rel_tol: float = 1e-3,
                refinements: int = 2) -> IdentityReport:
    """Weak Kato identity: LHS vs contour term + u-zero term, with mesh-convergence evidence."""
    man = u.manifold
    mesh = mesh or build_strip_mesh(man, p)
    lhs = kato_lhs_weak(u, phi, p)
    uz_val, uz_info = kato_u_zero_term(u, phi, p)

    meshes = [mesh]
    for _ in range(refinements):
        meshes.append(meshes[-1].refined())
    contour_terms = []
    residuals = []
    sliver = []
    for msh in meshes:
        contour = extract_zero_contour(u, p, msh)
        cterm = weighted_contour_integral(contour, p, phi)
        phimax = float(np.max(np.abs(man.synthesize_coeffs(phi.coeffs, 2))))
        sliver.append(2.0 * p.beta * contour.grad_sup_zmin * phimax
                      * msh.z_min ** (2.0 - 2.0 * p.s) / (2.0 - 2.0 * p.s))
        contour_terms.append(cterm)
        residuals.append(abs(lhs - (cterm + uz_val)))
    rhs = contour_terms[-1] + uz_val
    scale = max(abs(lhs), abs(rhs), 1e-8)
    res = residuals[-1]
    if residuals[-1] > 1e-14 * scale and residuals[0] > residuals[-1]:
        order = math.log2(residuals[0] / residuals[-1]) / max(refinements, 1)
    else:
        order = float("inf")
    md = {
        "contour_terms": contour_terms,
        "u_zero_term": uz_val,
        "u_zero_info": uz_info,
        "residual_per_level": residuals,
        "convergence_order": order,
        "sliver_bound": sliver[-1],
        "mesh_nx": [m.n_x for m in meshes],
    }
    return IdentityReport(
        identity="kato", manifold=man.kind, s=p.s, resolution=man.resolution,
        z_nodes=len(meshes[-1].z_levels), lhs=lhs, rhs=rhs,
        residual_sup=res, residual_l2=res, tolerance=rel_tol * scale,
        passed=res <= rel_tol * scale, metadata=md,
    )

"""Named field presets and coefficient-list parsing for configs and demos.

Functions are specified either by a preset name or by a coefficient list:
circle  [[k, a_cos, a_sin], ...],  torus [[k1, k2, a_cos, a_sin], ...],
sphere  [[l, m, amp], ...].  No expression parser: the presets cover every
verification case and custom band-limited fields come in as coefficients.
"""

from __future__ import annotations

import numpy as np

from .manifolds import Circle, GridField, SpectralField, Torus, analyze, constant_field
from .sphere import Sphere
from .verifiers import Nonlinearity, nonlin_cosh, nonlin_quartic, nonlin_square

__all__ = ["make_manifold", "make_field", "make_nonlinearity", "bump_values"]


def make_manifold(kind: str, resolution: int):
    kinds = {"circle": Circle, "torus": Torus, "sphere": Sphere}
    if kind not in kinds:
        raise ValueError(f"unknown manifold kind {kind!r}")
    return kinds[kind](resolution)


def bump_values(x, center: float = np.pi, width: float = 1.8) -> np.ndarray:
    """Smooth compactly supported bump on the circle, vanishing off an arc."""
    r = (x - center) / width
    inside = np.abs(r) < 1.0
    out = np.zeros_like(x)
    out[inside] = np.exp(-1.0 / (1.0 - r[inside] ** 2))
    return out


_CIRCLE_PRESETS = {
    "1": lambda x: np.ones_like(x),
    "cos": np.cos,
    "cos2": lambda x: np.cos(2 * x),
    "sin2": lambda x: np.sin(2 * x),
    "cos+0.4cos3": lambda x: np.cos(x) + 0.4 * np.cos(3 * x),
    "cos+0.2cos2": lambda x: np.cos(x) + 0.2 * np.cos(2 * x),
    "positive-shift": lambda x: 2.0 + np.cos(x),
    "2+sinx": lambda x: 2.0 + np.sin(x),
    "bump": bump_values,
}

_TORUS_PRESETS = {
    "1": lambda X, Y: np.ones_like(X),
    "cosx": lambda X, Y: np.cos(X),
    "cosxcosy": lambda X, Y: np.cos(X) * np.cos(Y),
    "cosx+cos2y": lambda X, Y: np.cos(X) + np.cos(2 * Y),
}


def _sphere_from_list(man, entries) -> SpectralField:
    coeffs = man.zero_coeffs()
    for l, m, amp in entries:
        l, m = int(l), int(m)
        if abs(m) > l or l > man.resolution:
            raise ValueError(f"mode (l={l}, m={m}) outside the cutoff")
        coeffs[man.mode_index(l, m)] = float(amp)
    return SpectralField(man, coeffs)


_SPHERE_PRESETS = {
    "1": [[0, 0, np.sqrt(4.0 * np.pi)]],
    "y10": [[1, 0, 1.0]],
    "y21": [[2, 1, 1.0]],
    "y10+0.5y21": [[1, 0, 1.0], [2, 1, 0.5]],
}


def make_field(man, spec) -> SpectralField:
    """Build a band-limited field from a preset name or coefficient list."""
    if isinstance(spec, (int, float)):
        return constant_field(man, float(spec))
    if man.kind == "sphere":
        if isinstance(spec, str):
            if spec not in _SPHERE_PRESETS:
                raise ValueError(f"unknown sphere preset {spec!r}")
            spec = _SPHERE_PRESETS[spec]
        return _sphere_from_list(man, spec)
    if isinstance(spec, str):
        presets = _CIRCLE_PRESETS if man.kind == "circle" else _TORUS_PRESETS
        if spec not in presets:
            raise ValueError(f"unknown {man.kind} preset {spec!r}")
        if man.kind == "circle":
            vals = presets[spec](man.nodes(1))
        else:
            vals = presets[spec](*man.nodes(1))
        return analyze(GridField(man, vals, 1))
    # coefficient list
    if man.kind == "circle":
        x = man.nodes(1)
        vals = np.zeros_like(x)
        for k, ac, asin in spec:
            vals += float(ac) * np.cos(int(k) * x) + float(asin) * np.sin(int(k) * x)
        return analyze(GridField(man, vals, 1))
    X, Y = man.nodes(1)
    vals = np.zeros_like(X)
    for k1, k2, ac, asin in spec:
        ph = int(k1) * X + int(k2) * Y
        vals += float(ac) * np.cos(ph) + float(asin) * np.sin(ph)
    return analyze(GridField(man, vals, 1))


def make_nonlinearity(name: str) -> Nonlinearity:
    table = {"square": nonlin_square, "quartic": nonlin_quartic, "cosh": nonlin_cosh}
    if name not in table:
        raise ValueError(f"unknown nonlinearity {name!r} (square, quartic, cosh)")
    return table[name]()

"""Smooth compactly supported modulating potentials and their derivatives.

Three families, closed under the config tree:

    bump       rho(x) = A exp(1 - 1/(1 - u^2)),  u = (x - center)/halfwidth
    poly_bump  rho(x) = A q(u) exp(1 - 1/(1 - u^2)),  q from poly_coeffs
    sum        rho(x) = A * sum of children

extended by exactly 0 outside |u| < 1.  Derivatives of the bump factor come
from the closed recurrence for phi(u) = exp(1 - 1/(1-u^2)):

    phi^(k)(u) = P_k(u) phi(u) / (1-u^2)^(2k),
    P_0 = 1,   P_{k+1} = (1-u^2)^2 P_k' + (4k u (1-u^2) - 2u) P_k,

with integer-coefficient polynomials P_k, so every derivative order is exact
up to floating point.  poly_bump derivatives follow by the Leibniz rule on
q(u) * phi(u).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.polynomial import polynomial as P

from .quadrature import Axis, IntegralResult, QuadratureSpec, integrate_1d

MAX_DERIVATIVE_ORDER = 24

_FAMILIES = ("bump", "poly_bump", "sum")


class ConfigError(ValueError):
    """A potential/run configuration that violates the documented schema."""


@dataclass(frozen=True)
class Potential:
    family: str
    center: float = 0.0
    halfwidth: float = 1.0
    amplitude: float = 1.0
    poly_coeffs: tuple[float, ...] = ()
    children: tuple["Potential", ...] = ()

    def __post_init__(self):
        if self.family not in _FAMILIES:
            raise ConfigError(f"family must be one of {_FAMILIES}, got {self.family!r}")
        if not (math.isfinite(self.halfwidth) and self.halfwidth > 0):
            raise ConfigError(f"halfwidth must be positive, got {self.halfwidth!r}")
        if not math.isfinite(self.amplitude):
            raise ConfigError(f"amplitude must be finite, got {self.amplitude!r}")
        if self.family == "poly_bump" and len(self.poly_coeffs) == 0:
            raise ConfigError("poly_bump requires nonempty poly_coeffs")
        if self.family != "poly_bump" and self.poly_coeffs:
            raise ConfigError("poly_coeffs only applies to the poly_bump family")
        if self.family == "sum":
            if len(self.children) == 0:
                raise ConfigError("sum requires nonempty children")
        elif self.children:
            raise ConfigError("children only applies to the sum family")
        object.__setattr__(self, "poly_coeffs",
                           tuple(float(c) for c in self.poly_coeffs))

    def __call__(self, x):
        return eval(self, x, 0)


def bump(center: float = 0.0, halfwidth: float = 1.0, amplitude: float = 1.0) -> Potential:
    return Potential("bump", center, halfwidth, amplitude)


def poly_bump(center: float = 0.0, halfwidth: float = 1.0, amplitude: float = 1.0,
              poly_coeffs=(1.0,)) -> Potential:
    return Potential("poly_bump", center, halfwidth, amplitude,
                     poly_coeffs=tuple(poly_coeffs))


def sum_of(children, amplitude: float = 1.0) -> Potential:
    return Potential("sum", amplitude=amplitude, children=tuple(children))


# --- bump-factor derivative tables -----------------------------------------

_P_TABLE: list[tuple[int, ...]] = [(1,)]


def _p_poly(k: int) -> tuple[int, ...]:
    """Integer coefficients (ascending) of P_k in the phi-derivative recurrence."""
    while len(_P_TABLE) <= k:
        j = len(_P_TABLE) - 1
        pk = _P_TABLE[j]
        s2 = (1, 0, -2, 0, 1)                        # (1-u^2)^2
        lin = (0, 4 * j, 0, -4 * j)                  # 4j u (1-u^2)
        nxt = P.polyadd(P.polymul(s2, P.polyder(pk)),
                        P.polymul(P.polyadd(lin, (0, -2)), pk))
        _P_TABLE.append(tuple(int(round(c)) for c in nxt))
    return _P_TABLE[k]


def _phi_derivative(u: np.ndarray, k: int) -> np.ndarray:
    """phi^(k)(u) for |u| < 1, overflow-safe via the log of the prefactor."""
    s = 1.0 - u * u
    expo = 1.0 - 1.0 / s - 2.0 * k * np.log(s) if k else 1.0 - 1.0 / s
    return P.polyval(u, _p_poly(k)) * np.exp(expo)


def eval(p: Potential, x, order: int = 0):
    """rho^(order)(x); exactly 0 outside the support. x may be scalar or ndarray."""
    if not isinstance(order, int) or order < 0:
        raise ValueError(f"derivative order must be a nonnegative integer, got {order!r}")
    if order > MAX_DERIVATIVE_ORDER:
        raise ValueError(f"derivative order {order} exceeds the supported "
                         f"maximum {MAX_DERIVATIVE_ORDER}")
    scalar = np.ndim(x) == 0
    xv = np.atleast_1d(np.asarray(x, dtype=float))
    out = np.zeros_like(xv)

    if p.family == "sum":
        for child in p.children:
            out += eval(child, xv, order)
        out *= p.amplitude
        return float(out[0]) if scalar else out

    u = (xv - p.center) / p.halfwidth
    m = np.abs(u) < 1.0
    if np.any(m):
        um = u[m]
        if p.family == "bump":
            val = _phi_derivative(um, order)
        else:
            q = p.poly_coeffs
            val = np.zeros_like(um)
            for j in range(order + 1):
                if j >= len(q):
                    break                            # q^(j) vanishes identically
                qj = q if j == 0 else P.polyder(q, j)
                val += math.comb(order, j) * P.polyval(um, qj) \
                    * _phi_derivative(um, order - j)
        out[m] = p.amplitude * val / p.halfwidth ** order
    return float(out[0]) if scalar else out


def support(p: Potential) -> tuple[float, float]:
    """Smallest closed interval outside which every derivative vanishes."""
    if p.family == "sum":
        lows, highs = zip(*(support(c) for c in p.children))
        return (min(lows), max(highs))
    return (p.center - p.halfwidth, p.center + p.halfwidth)


def max_abs(p: Potential, samples: int = 4097) -> float:
    """max |rho| — exact for a plain bump, dense-grid estimate otherwise."""
    if p.family == "bump":
        return abs(p.amplitude)
    lo, hi = support(p)
    return float(np.max(np.abs(eval(p, np.linspace(lo, hi, samples), 0))))


def integrate_power(p: Potential, power: int, spec: QuadratureSpec | None = None) -> IntegralResult:
    """int rho(x)^power dx over the support, by adaptive quadrature."""
    if not isinstance(power, int) or power < 1:
        raise ValueError(f"power must be a positive integer, got {power!r}")
    lo, hi = support(p)
    knots = ()
    if p.family == "sum":                            # children edges are kinks
        knots = tuple(sorted({b for c in p.children for b in support(c)
                              if lo < b < hi}))
    return integrate_1d(lambda x: eval(p, x, 0) ** power,
                        Axis.finite(lo, hi, knots=knots), spec)


def fd_derivative(p: Potential, x: float, order: int, h: float) -> float:
    """Central finite-difference estimate of rho^(order)(x) from order-0 evals.

    The symmetric stencil  h^{-k} sum_j (-1)^j C(k,j) f(x + (k/2 - j) h)
    is O(h^2)-accurate for every order k; order 0 reduces to eval exactly.
    """
    if order == 0:
        return eval(p, x, 0)
    if h <= 0:
        raise ValueError("h must be positive")
    acc = 0.0
    for j in range(order + 1):
        acc += (-1) ** j * math.comb(order, j) * eval(p, x + (0.5 * order - j) * h, 0)
    return acc / h ** order


def scaled(p: Potential, c: float) -> Potential:
    """The potential c * rho, for homogeneity checks."""
    return Potential(p.family, p.center, p.halfwidth, c * p.amplitude,
                     p.poly_coeffs, p.children)


def shifted(p: Potential, dx: float) -> Potential:
    """The potential rho(x - dx), for translation-invariance checks."""
    if p.family == "sum":
        return Potential("sum", amplitude=p.amplitude,
                         children=tuple(shifted(c, dx) for c in p.children))
    return Potential(p.family, p.center + dx, p.halfwidth, p.amplitude,
                     p.poly_coeffs)


# --- config-tree (de)serialization ------------------------------------------

def to_dict(p: Potential) -> dict:
    d: dict = {"family": p.family}
    if p.family == "sum":
        d["amplitude"] = p.amplitude
        d["children"] = [to_dict(c) for c in p.children]
        return d
    d.update(center=p.center, halfwidth=p.halfwidth, amplitude=p.amplitude)
    if p.family == "poly_bump":
        d["poly_coeffs"] = list(p.poly_coeffs)
    return d


_KNOWN_KEYS = {"family", "center", "halfwidth", "amplitude", "poly_coeffs", "children"}


def from_dict(d: dict) -> Potential:
    if not isinstance(d, dict):
        raise ConfigError(f"potential config must be an object, got {type(d).__name__}")
    unknown = set(d) - _KNOWN_KEYS
    if unknown:
        raise ConfigError(f"unknown potential key(s): {sorted(unknown)}")
    if "family" not in d:
        raise ConfigError("potential config missing required key 'family'")
    kwargs: dict = {}
    for key in ("center", "halfwidth", "amplitude"):
        if key in d:
            try:
                kwargs[key] = float(d[key])
            except (TypeError, ValueError):
                raise ConfigError(f"potential key {key!r} must be a number, "
                                  f"got {d[key]!r}") from None
    if "poly_coeffs" in d:
        if not isinstance(d["poly_coeffs"], (list, tuple)):
            raise ConfigError("potential key 'poly_coeffs' must be an array")
        kwargs["poly_coeffs"] = tuple(float(c) for c in d["poly_coeffs"])
    if "children" in d:
        if not isinstance(d["children"], (list, tuple)):
            raise ConfigError("potential key 'children' must be an array")
        kwargs["children"] = tuple(from_dict(c) for c in d["children"])
    return Potential(d["family"], **kwargs)

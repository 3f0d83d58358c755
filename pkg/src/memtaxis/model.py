"""Kinetics, steady state, Jacobian and Taylor coefficients of the
Holling-Tanner predator-prey system with transport parameters for the
memory/taxis fluxes.

The built-in kinetics are

    f(u, v) = u (1 - beta u) - m u v / (1 + u)
    g(u, v) = s v (1 - v / u)

with all Taylor data evaluated at the unique positive constant steady state.
A generic numerically-differentiated path is provided for other kinetics.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import NonFiniteDerivative

__all__ = [
    "KineticParams",
    "TransportParams",
    "SteadyState",
    "Linearization",
    "KineticTaylor",
    "steady_state",
    "linearize",
    "kinetic_taylor",
    "generic_taylor",
    "kinetics_functions",
    "condition_c0",
]


@dataclass(frozen=True)
class KineticParams:
    """Kinetic constants: intraspecific competition, capture rate,
    predator intrinsic rate."""

    beta: float
    m: float
    s: float

    def __post_init__(self):
        if not (self.beta > 0 and self.m > 0 and self.s > 0):
            raise ValueError("kinetic parameters must be positive")


@dataclass(frozen=True)
class TransportParams:
    """Transport constants: random diffusion (d11, d22), memory-based
    cross-diffusion (d21), predator-taxis rate (xi) and the domain scale
    ell; the domain is (0, ell*pi)."""

    d11: float
    d22: float
    d21: float
    xi: float
    ell: float

    def __post_init__(self):
        if min(self.d11, self.d22, self.d21, self.xi) < 0:
            raise ValueError("diffusion/taxis coefficients must be nonnegative")
        if not self.ell > 0:
            raise ValueError("domain scale ell must be positive")


@dataclass(frozen=True)
class SteadyState:
    u_star: float
    v_star: float

    def __post_init__(self):
        if not (self.u_star > 0 and self.v_star > 0):
            raise ValueError("steady state must be positive")


@dataclass(frozen=True)
class Linearization:
    """Jacobian entries at the steady state and the transport matrices of
    the linearized system: D1 multiplies the instantaneous Laplacian, D2 the
    delayed one, A the zero-order term."""

    a11: float
    a12: float
    a21: float
    a22: float
    D1: np.ndarray
    D2: np.ndarray
    A: np.ndarray

    @property
    def trace_A(self) -> float:
        return self.a11 + self.a22

    @property
    def det_A(self) -> float:
        return self.a11 * self.a22 - self.a12 * self.a21

    @property
    def xi_u_star(self) -> float:
        """Taxis coupling xi*u_star (row 1, column 2 of D1)."""
        return float(self.D1[0, 1])

    @property
    def d21_v_star(self) -> float:
        """Memory coupling d21*v_star (negated row 2, column 1 of D2)."""
        return float(-self.D2[1, 0])


@dataclass(frozen=True)
class KineticTaylor:
    """Second and third order kinetic Taylor coefficients, each a 2-vector
    (one entry per equation), scaled by the critical delay tau_c.

    The (j, k) coefficient is tau_c times the raw partial derivative
    d^(j+k)(f, g)/du^j dv^k at the steady state.
    """

    f20: np.ndarray
    f11: np.ndarray
    f02: np.ndarray
    f30: np.ndarray
    f21: np.ndarray
    f12: np.ndarray
    f03: np.ndarray


def steady_state(kin: KineticParams) -> SteadyState:
    """Positive constant steady state of the Holling-Tanner kinetics.

    Solves beta*u^2 + R*u - 1 = 0 with R = beta + m - 1 in closed form;
    the predator equation forces v = u.
    """
    R = kin.beta + kin.m - 1.0
    u = (np.sqrt(R * R + 4.0 * kin.beta) - R) / (2.0 * kin.beta)
    return SteadyState(u_star=float(u), v_star=float(u))


def linearize(kin: KineticParams, tr: TransportParams, ss: SteadyState) -> Linearization:
    """Jacobian of the kinetics at the steady state plus the transport
    matrices of the linearized equation."""
    u, v = ss.u_star, ss.v_star
    a11 = 1.0 - 2.0 * kin.beta * u - kin.m * u / (1.0 + u) ** 2
    a12 = -kin.m * u / (1.0 + u)
    a21 = kin.s
    a22 = -kin.s
    D1 = np.array([[tr.d11, tr.xi * u], [0.0, tr.d22]])
    D2 = np.array([[0.0, 0.0], [-tr.d21 * v, 0.0]])
    A = np.array([[a11, a12], [a21, a22]])
    return Linearization(a11=a11, a12=a12, a21=a21, a22=a22, D1=D1, D2=D2, A=A)


def condition_c0(lin: Linearization) -> bool:
    """Kinetic self-damping condition: the prey diagonal entry is negative."""
    return lin.a11 < 0.0


def kinetic_taylor(kin: KineticParams, ss: SteadyState, tau_c: float) -> KineticTaylor:
    """Closed-form Taylor coefficients of the Holling-Tanner kinetics up to
    third order, scaled by tau_c."""
    if not tau_c > 0:
        raise ValueError("tau_c must be positive")
    u, v = ss.u_star, ss.v_star
    beta, m, s = kin.beta, kin.m, kin.s
    t = tau_c
    f20 = t * np.array([-2.0 * beta + 2.0 * m * v / (1.0 + u) ** 3,
                        -2.0 * s * v * v / u ** 3])
    f11 = t * np.array([-m / (1.0 + u) ** 2, 2.0 * s * v / u ** 2])
    f02 = t * np.array([0.0, -2.0 * s / u])
    f30 = t * np.array([-6.0 * m * v / (1.0 + u) ** 4,
                        6.0 * s * v * v / u ** 4])
    f21 = t * np.array([2.0 * m / (1.0 + u) ** 3, -4.0 * s * v / u ** 3])
    f12 = t * np.array([0.0, 2.0 * s / u ** 2])
    f03 = t * np.array([0.0, 0.0])
    return KineticTaylor(f20=f20, f11=f11, f02=f02, f30=f30, f21=f21,
                         f12=f12, f03=f03)


def kinetics_functions(kin: KineticParams) -> tuple[Callable, Callable]:
    """The two kinetic scalar fields as plain callables of (u, v)."""

    def f(u, v):
        return u * (1.0 - kin.beta * u) - kin.m * u * v / (1.0 + u)

    def g(u, v):
        return kin.s * v * (1.0 - v / u)

    return f, g


def _second_partials(fn, u0: float, v0: float, h: float) -> tuple[float, float, float]:
    """Central differences for fn_uu, fn_uv, fn_vv at (u0, v0)."""
    fuu = (fn(u0 + h, v0) - 2.0 * fn(u0, v0) + fn(u0 - h, v0)) / h ** 2
    fvv = (fn(u0, v0 + h) - 2.0 * fn(u0, v0) + fn(u0, v0 - h)) / h ** 2
    fuv = (fn(u0 + h, v0 + h) - fn(u0 + h, v0 - h)
           - fn(u0 - h, v0 + h) + fn(u0 - h, v0 - h)) / (4.0 * h ** 2)
    return fuu, fuv, fvv


def _third_partials(fn, u0: float, v0: float, h: float) -> tuple[float, float, float, float]:
    """Central differences for fn_uuu, fn_uuv, fn_uvv, fn_vvv at (u0, v0)."""
    fuuu = (fn(u0 + 2 * h, v0) - 2.0 * fn(u0 + h, v0)
            + 2.0 * fn(u0 - h, v0) - fn(u0 - 2 * h, v0)) / (2.0 * h ** 3)
    fvvv = (fn(u0, v0 + 2 * h) - 2.0 * fn(u0, v0 + h)
            + 2.0 * fn(u0, v0 - h) - fn(u0, v0 - 2 * h)) / (2.0 * h ** 3)
    # d/dv of the second u-derivative, and symmetrically for uvv
    fuuv = (fn(u0 + h, v0 + h) - 2.0 * fn(u0, v0 + h) + fn(u0 - h, v0 + h)
            - fn(u0 + h, v0 - h) + 2.0 * fn(u0, v0 - h) - fn(u0 - h, v0 - h)) / (2.0 * h ** 3)
    fuvv = (fn(u0 + h, v0 + h) - 2.0 * fn(u0 + h, v0) + fn(u0 + h, v0 - h)
            - fn(u0 - h, v0 + h) + 2.0 * fn(u0 - h, v0) - fn(u0 - h, v0 - h)) / (2.0 * h ** 3)
    return fuuu, fuuv, fuvv, fvvv


def generic_taylor(kinetics: tuple[Callable, Callable], ss: SteadyState,
                   tau_c: float, step: float | None = None) -> KineticTaylor:
    """Numerically differentiated Taylor coefficients for arbitrary kinetics.

    Parameters
    ----------
    kinetics : (f, g)
        Two scalar fields of (u, v), smooth near the steady state.
    ss : SteadyState
        Expansion point.
    tau_c : float
        Delay scale multiplying every coefficient.
    step : float, optional
        Override for the finite-difference step. By default the second-order
        stencils use eps^(1/3)*max(1, |u*|) and the third-order ones
        eps^(1/4)*max(1, |u*|).

    Raises
    ------
    NonFiniteDerivative
        If any stencil evaluation is NaN or infinite.
    """
    if not tau_c > 0:
        raise ValueError("tau_c must be positive")
    f, g = kinetics
    u0, v0 = ss.u_star, ss.v_star
    eps = np.finfo(float).eps
    scale = max(1.0, abs(u0), abs(v0))
    h2 = step if step is not None else eps ** (1.0 / 3.0) * scale
    h3 = step if step is not None else eps ** 0.25 * scale

    rows2 = [_second_partials(fn, u0, v0, h2) for fn in (f, g)]
    rows3 = [_third_partials(fn, u0, v0, h3) for fn in (f, g)]
    coeffs = {
        "f20": np.array([rows2[0][0], rows2[1][0]]),
        "f11": np.array([rows2[0][1], rows2[1][1]]),
        "f02": np.array([rows2[0][2], rows2[1][2]]),
        "f30": np.array([rows3[0][0], rows3[1][0]]),
        "f21": np.array([rows3[0][1], rows3[1][1]]),
        "f12": np.array([rows3[0][2], rows3[1][2]]),
        "f03": np.array([rows3[0][3], rows3[1][3]]),
    }
    for name, arr in coeffs.items():
        if not np.all(np.isfinite(arr)):
            raise NonFiniteDerivative(f"non-finite stencil value in {name}")
    return KineticTaylor(**{k: tau_c * a for k, a in coeffs.items()})

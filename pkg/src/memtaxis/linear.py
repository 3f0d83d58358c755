"""Per-wave-number linear stability analysis.

For each cosine mode n on (0, ell*pi) the characteristic function is

    Gamma_n(lambda) = lambda^2 - T_n lambda + Jt_n(lambda, tau)

where Jt_n carries the exp(-lambda*tau) terms of the delayed cross-diffusion.
Purely imaginary roots exist only inside a window of wave numbers; there the
frequency solves a quartic and the critical delays form an arithmetic ladder.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    ArccosDomain,
    C0Violation,
    NotOneRootCase,
    SinSignViolation,
    ZeroDenominator,
)
from .model import Linearization, SteadyState, TransportParams, condition_c0

__all__ = [
    "ModeAnalysis",
    "ModeWindow",
    "HopfPoint",
    "StabilityReport",
    "ConditionRecord",
    "mode_coefficients",
    "mode_window",
    "hopf_frequency",
    "critical_delays",
    "characteristic_residual",
    "transversality",
    "classify",
    "REGIME_STABLE_ALL_TAU",
    "REGIME_DELAY_HOPF",
    "REGIME_TWO_ROOT",
    "REGIME_INDETERMINATE",
]

REGIME_STABLE_ALL_TAU = "StableAllTau"
REGIME_DELAY_HOPF = "DelayHopf"
REGIME_TWO_ROOT = "TwoRootCase"
REGIME_INDETERMINATE = "Indeterminate"

# arccos arguments within this distance past +-1 are clamped; beyond it the
# formula inputs are considered inconsistent and an error is raised.
_ARCCOS_SLACK = 1e-12

# tau ladder entries of different modes closer than this are reported as a
# tie (double crossing), which the single-mode theory does not cover.
_TIE_TOL = 1e-9


def _mode_square(n: int | float, ell: float) -> float:
    """The spectral multiplier n^2/ell^2, computed here for every consumer."""
    return (float(n) / ell) ** 2


@dataclass(frozen=True)
class ModeAnalysis:
    """Characteristic-equation coefficients of one wave number.

    delay_gain is the magnitude factor of the exp(-lambda*tau) terms,
    so gamma_n0 = j_n + delay_gain and q_tilde_n = j_n - delay_gain.
    """

    n: int
    t_n: float
    j_n: float
    p_n: float
    q_n: float
    q_tilde_n: float
    gamma_n0: float
    delay_gain: float
    omega_n: float | None = None
    tau_ladder: tuple[float, ...] = ()


@dataclass(frozen=True)
class ModeWindow:
    """Real wave-number interval (n1, n2) on which the frequency quartic has
    a unique positive root, plus the integer modes strictly inside it."""

    a1_tilde: float
    a2_tilde: float
    a3_tilde: float
    x1_tilde: float | None = None
    x2_tilde: float | None = None
    n1: float | None = None
    n2: float | None = None
    integer_modes: tuple[int, ...] = ()
    failure: str | None = None

    @property
    def exists(self) -> bool:
        return self.n1 is not None


@dataclass(frozen=True)
class HopfPoint:
    """A critical point: mode n_c crosses the imaginary axis at tau_c with
    frequency omega_nc; omega_c is the frequency in delay-rescaled time."""

    n_c: int
    tau_c: float
    omega_nc: float

    @property
    def omega_c(self) -> float:
        return self.tau_c * self.omega_nc


@dataclass(frozen=True)
class ConditionRecord:
    """Truth values of the stability conditions and the sign premise of the
    windowed case (positive determinant of the net diffusion part)."""

    c0: bool
    c1_all_modes: bool
    c2: bool
    diffusion_det: float
    det_a: float


@dataclass(frozen=True)
class StabilityReport:
    regime: str
    conditions: ConditionRecord
    window: ModeWindow
    modes: tuple[ModeAnalysis, ...] = ()
    hopf_points: tuple[HopfPoint, ...] = ()
    tau_star: float | None = None
    two_root_modes: tuple[int, ...] = ()
    degenerate_modes: tuple[int, ...] = ()
    # one-root modes outside a valid window (premise of the windowed
    # analysis fails, e.g. negative net diffusion determinant)
    unclassified_modes: tuple[int, ...] = ()

    @property
    def critical(self) -> HopfPoint | None:
        """The first crossing (smallest tau), when one exists."""
        return self.hopf_points[0] if self.hopf_points else None


def mode_coefficients(lin: Linearization, tr: TransportParams, n: int) -> ModeAnalysis:
    """Characteristic coefficients T_n, J_n, P_n, Q_n and the factorization
    Q_n = gamma_n0 * q_tilde_n for wave number n (ladder not populated)."""
    if n < 0:
        raise ValueError("wave number must be nonnegative")
    x = _mode_square(n, tr.ell)
    xi_u = lin.xi_u_star
    d21_v = lin.d21_v_star
    t_n = lin.trace_A - (tr.d11 + tr.d22) * x
    j_n = tr.d11 * tr.d22 * x * x \
        - (tr.d11 * lin.a22 + tr.d22 * lin.a11 - lin.a21 * xi_u) * x \
        + lin.det_A
    gain = d21_v * (xi_u * x * x - lin.a12 * x)
    p_n = t_n * t_n - 2.0 * j_n
    gamma_n0 = j_n + gain
    q_tilde_n = j_n - gain
    q_n = gamma_n0 * q_tilde_n
    return ModeAnalysis(n=n, t_n=t_n, j_n=j_n, p_n=p_n, q_n=q_n,
                        q_tilde_n=q_tilde_n, gamma_n0=gamma_n0, delay_gain=gain)


def mode_window(lin: Linearization, tr: TransportParams,
                ss: SteadyState) -> ModeWindow:
    """Wave-number window where q_tilde changes sign.

    Requires a positive net diffusion determinant, a positive kinetic
    determinant and a positive discriminant; a failed premise is recorded in
    the returned window instead of raising.
    """
    xi_u = lin.xi_u_star
    d21_v = lin.d21_v_star
    a1 = tr.d11 * lin.a22 + tr.d22 * lin.a11 - lin.a21 * xi_u - d21_v * lin.a12
    a2 = tr.d11 * tr.d22 - d21_v * xi_u  # d11 d22 - d21 xi u* v*
    a3 = a1 * a1 - 4.0 * a2 * lin.det_A

    base = dict(a1_tilde=a1, a2_tilde=a2, a3_tilde=a3)
    if not a2 > 0:
        return ModeWindow(failure="net diffusion determinant not positive", **base)
    if not lin.det_A > 0:
        return ModeWindow(failure="kinetic determinant not positive", **base)
    if not a1 > 0:
        return ModeWindow(failure="window midpoint coefficient not positive", **base)
    if not a3 > 0:
        return ModeWindow(failure="window discriminant not positive", **base)

    sq = math.sqrt(a3)
    x1 = (a1 - sq) / (2.0 * a2)
    x2 = (a1 + sq) / (2.0 * a2)
    n1 = tr.ell * math.sqrt(x1)
    n2 = tr.ell * math.sqrt(x2)
    lo = math.floor(n1) + 1
    hi = math.ceil(n2) - 1
    modes = tuple(n for n in range(max(lo, 1), hi + 1) if n1 < n < n2)
    return ModeWindow(x1_tilde=x1, x2_tilde=x2, n1=n1, n2=n2,
                      integer_modes=modes, **base)


def hopf_frequency(ma: ModeAnalysis) -> float:
    """Unique positive root of omega^4 + P_n omega^2 + Q_n = 0.

    Raises NotOneRootCase unless Q_n < 0.
    """
    if ma.q_n >= 0:
        raise NotOneRootCase(f"mode {ma.n}: Q_n={ma.q_n:.6g} is not negative")
    disc = ma.p_n * ma.p_n - 4.0 * ma.q_n
    return math.sqrt((-ma.p_n + math.sqrt(disc)) / 2.0)


def critical_delays(ma: ModeAnalysis, lin: Linearization, tr: TransportParams,
                    ss: SteadyState, j_max: int) -> tuple[float, ...]:
    """Delay ladder tau_{n,j} = (arccos(...) + 2 pi j)/omega_n, j = 0..j_max.

    Valid in the one-positive-root case with a11 < 0, which pins the crossing
    angle to the branch with positive sine.
    """
    omega = hopf_frequency(ma)
    gain = ma.delay_gain
    if abs(gain) < 1e-14:
        raise ZeroDenominator("delay coupling vanishes; no delay-induced crossing")
    cos_arg = (omega * omega - ma.j_n) / gain
    if abs(cos_arg) > 1.0 + _ARCCOS_SLACK:
        raise ArccosDomain(f"mode {ma.n}: arccos argument {cos_arg!r} out of range")
    cos_arg = min(1.0, max(-1.0, cos_arg))
    sin_val = -ma.t_n * omega / gain
    if sin_val <= 0:
        raise SinSignViolation(
            f"mode {ma.n}: crossing sine {sin_val:.6g} is not positive")
    base = math.acos(cos_arg)
    return tuple((base + 2.0 * math.pi * j) / omega for j in range(j_max + 1))


def characteristic_residual(lam: complex, tau: float, n: int,
                            lin: Linearization, tr: TransportParams) -> complex:
    """Evaluate Gamma_n(lambda) = lambda^2 - T_n lambda + Jt_n(lambda, tau).

    This is the direct oracle for every root claim: a purely imaginary root
    emitted by the analysis must drive this residual to zero.
    """
    x = _mode_square(n, tr.ell)
    xi_u = lin.xi_u_star
    d21_v = lin.d21_v_star
    t_n = lin.trace_A - (tr.d11 + tr.d22) * x
    ex = np.exp(-lam * tau)
    jt = (tr.d11 * tr.d22 + d21_v * xi_u * ex) * x * x \
        - (tr.d11 * lin.a22 + tr.d22 * lin.a11 - lin.a21 * xi_u
           + d21_v * lin.a12 * ex) * x \
        + lin.det_A
    return lam * lam - t_n * lam + jt


def transversality(ma: ModeAnalysis, lin: Linearization, tr: TransportParams,
                   ss: SteadyState, tau: float) -> float:
    """Closed-form Re(d lambda/d tau)^(-1) at a ladder crossing.

    Positive whenever the one-root case holds, so every crossing moves roots
    rightward. The value is the same for every ladder entry.
    """
    if ma.q_n >= 0:
        raise NotOneRootCase(f"mode {ma.n}: Q_n={ma.q_n:.6g} is not negative")
    denom = ma.delay_gain
    if abs(denom) < 1e-14:
        raise ZeroDenominator("delay coupling denominator below 1e-14")
    return math.sqrt(ma.p_n * ma.p_n - 4.0 * ma.q_n) / (denom * denom)


def _no_positive_root(ma: ModeAnalysis) -> bool:
    """Per-mode condition under which the frequency quartic has no positive
    root: either both coefficients positive or negative discriminant."""
    disc = ma.p_n * ma.p_n - 4.0 * ma.q_n
    return (ma.p_n > 0 and ma.q_n > 0) or disc < 0


def classify(lin: Linearization, tr: TransportParams, ss: SteadyState,
             n_max: int | None = None, j_max: int = 3) -> StabilityReport:
    """Full stability classification over the scanned wave numbers.

    Scans n = 0..n_max (default: the window upper edge plus margin, at least
    8), computes the delay ladder for every integer mode inside the window
    and reports the first crossing tau_star with its mode.

    Raises C0Violation when a11 >= 0, where the analysis premises fail.
    """
    if not condition_c0(lin):
        raise C0Violation(f"a11={lin.a11:.6g} is not negative")

    window = mode_window(lin, tr, ss)
    scan_top = 8
    if window.exists:
        scan_top = max(math.ceil(window.n2) + 2, 8)
    if n_max is not None:
        scan_top = max(scan_top, n_max)

    in_window = set(window.integer_modes)
    modes = []
    hopf_points = []
    two_root = []
    degenerate = []
    unclassified = []
    c1_all = True
    q_scale = max(lin.det_A ** 2, 1.0)
    for n in range(scan_top + 1):
        ma = mode_coefficients(lin, tr, n)
        if n >= 1 and abs(ma.q_n) <= 1e-12 * q_scale:
            # integer mode sitting on the window edge: zero root, no theory
            degenerate.append(n)
            modes.append(ma)
            c1_all = False
            continue
        if ma.q_n < 0:
            c1_all = False
            if n in in_window:
                ladder = critical_delays(ma, lin, tr, ss, j_max)
                omega = hopf_frequency(ma)
                ma = ModeAnalysis(
                    n=n, t_n=ma.t_n, j_n=ma.j_n, p_n=ma.p_n, q_n=ma.q_n,
                    q_tilde_n=ma.q_tilde_n, gamma_n0=ma.gamma_n0,
                    delay_gain=ma.delay_gain, omega_n=omega, tau_ladder=ladder)
                hopf_points.append(HopfPoint(n_c=n, tau_c=ladder[0], omega_nc=omega))
            elif n >= 1:
                unclassified.append(n)
        elif ma.q_n > 0 and ma.p_n < 0 and ma.p_n ** 2 - 4.0 * ma.q_n > 0:
            c1_all = False
            two_root.append(n)
        modes.append(ma)

    a2 = window.a2_tilde
    c2 = (lin.det_A > 0 and window.a1_tilde > 0 and window.a3_tilde > 0)
    conditions = ConditionRecord(
        c0=True, c1_all_modes=c1_all, c2=c2,
        diffusion_det=a2, det_a=lin.det_A)

    hopf_points.sort(key=lambda hp: hp.tau_c)
    if two_root:
        regime = REGIME_TWO_ROOT
        tau_star = None
    elif unclassified:
        regime = REGIME_INDETERMINATE
        tau_star = None
    elif hopf_points:
        tau_star = hopf_points[0].tau_c
        tied = [hp for hp in hopf_points if abs(hp.tau_c - tau_star) < _TIE_TOL]
        regime = REGIME_INDETERMINATE if len(tied) > 1 else REGIME_DELAY_HOPF
    elif degenerate:
        regime = REGIME_INDETERMINATE
        tau_star = None
    else:
        regime = REGIME_STABLE_ALL_TAU
        tau_star = None

    return StabilityReport(
        regime=regime, conditions=conditions, window=window,
        modes=tuple(modes), hopf_points=tuple(hopf_points),
        tau_star=tau_star, two_root_modes=tuple(two_root),
        degenerate_modes=tuple(degenerate),
        unclassified_modes=tuple(unclassified))

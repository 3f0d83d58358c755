"""Third-order Hopf normal form at a critical point.

On the center manifold the reduced polar dynamics are

    rho' = K1 mu rho + K2 rho^3,    mu = tau - tau_c,

with K1 = Re(B1)/2 and K2 = Re(B2)/6. B1 captures the linear response to the
delay perturbation; B2 = B21 + (3/2)(B22 + B23) collects the cubic kinetic
term, the quadratic-quadratic interaction through the center-manifold
correction, and the same interaction through the taxis/memory fluxes.

Everything is evaluated in delay-rescaled time (t -> t/tau), where the
critical frequency is omega_c = tau_c * omega_nc; classification only uses
signs, which the rescaling preserves.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import SingularEigenvector, SingularResolvent
from .linear import HopfPoint, _mode_square
from .model import KineticTaylor, Linearization, SteadyState, TransportParams

__all__ = [
    "EigenData",
    "TensorSet",
    "ThetaProfile",
    "CenterManifoldH",
    "NormalForm",
    "eigenvectors",
    "tensors",
    "center_manifold",
    "b1",
    "b21",
    "b22",
    "b23",
    "normal_form",
    "amplitude_prediction",
    "characteristic_matrix",
    "eigen_residual",
    "normalization_residual",
    "DIRECTION_SUPERCRITICAL",
    "DIRECTION_SUBCRITICAL",
    "STABILITY_STABLE",
    "STABILITY_UNSTABLE",
    "DEGENERATE",
]

DIRECTION_SUPERCRITICAL = "Supercritical"
DIRECTION_SUBCRITICAL = "Subcritical"
STABILITY_STABLE = "Stable"
STABILITY_UNSTABLE = "Unstable"
DEGENERATE = "Degenerate"

_SINGULAR_TOL = 1e-12
_DEGENERATE_K2 = 1e-10


@dataclass(frozen=True)
class EigenData:
    """Right/left eigenvector pair of the critical mode with the adjoint
    normalization, plus the geometry needed downstream.

    phi has first component 1; psi = eta * psi_hat absorbs the normalization
    so that the adjoint pairing of (psi, phi) equals one. Histories are
    exponential: phi(theta) = phi * exp(i omega_c theta) on [-1, 0].
    """

    phi: np.ndarray
    psi: np.ndarray
    eta: complex
    n_c: int
    tau_c: float
    omega_nc: float
    ell: float

    @property
    def omega_c(self) -> float:
        return self.tau_c * self.omega_nc

    @property
    def x_c(self) -> float:
        return _mode_square(self.n_c, self.ell)

    def phi_at(self, theta: float) -> np.ndarray:
        return self.phi * np.exp(1j * self.omega_c * theta)

    def phibar_at(self, theta: float) -> np.ndarray:
        return np.conj(self.phi) * np.exp(-1j * self.omega_c * theta)

    def psi_at(self, s: float) -> np.ndarray:
        return self.psi * np.exp(-1j * self.omega_c * s)


@dataclass(frozen=True)
class TensorSet:
    """Directional kinetic tensors A_{q1 q2} along the critical eigenvector,
    the taxis/memory counterparts A^d, and the combined tilde tensors that
    force the doubled-mode center-manifold corrections."""

    a20: np.ndarray
    a02: np.ndarray
    a11: np.ndarray
    a30: np.ndarray
    a03: np.ndarray
    a21: np.ndarray
    a12: np.ndarray
    a20_d: np.ndarray
    a02_d: np.ndarray
    a11_d: np.ndarray
    a20_tilde: np.ndarray
    a11_tilde: np.ndarray


@dataclass(frozen=True)
class ThetaProfile:
    """A coefficient with exponential theta-dependence value0*exp(i*freq*theta).

    Only theta in {0, -1} is ever evaluated downstream.
    """

    value0: np.ndarray
    freq: float

    def at(self, theta: float) -> np.ndarray:
        if self.freq == 0.0:
            return self.value0
        return self.value0 * np.exp(1j * self.freq * theta)


@dataclass(frozen=True)
class CenterManifoldH:
    """Quadratic center-manifold corrections for the mean mode (0) and the
    doubled critical mode (2 n_c); the _20 entries rotate at 2 omega_c and
    the _11 entries are constant in theta."""

    h0_20: ThetaProfile
    h0_11: ThetaProfile
    h2nc_20: ThetaProfile
    h2nc_11: ThetaProfile


@dataclass(frozen=True)
class NormalForm:
    b1: complex
    b21: complex
    b22: complex
    b23: complex
    b2: complex
    k1: float
    k2: float
    direction: str
    orbit_stability: str


def characteristic_matrix(n: int | float, lam: complex, hp: HopfPoint,
                          lin: Linearization, tr: TransportParams) -> np.ndarray:
    """Delay-rescaled characteristic matrix of mode n at eigenvalue lam:
    lam*I + tau_c x D1 + tau_c x exp(-lam) D2 - tau_c A with x = n^2/ell^2."""
    x = _mode_square(n, tr.ell)
    t = hp.tau_c
    return (lam * np.eye(2, dtype=complex)
            + t * x * lin.D1.astype(complex)
            + t * x * np.exp(-lam) * lin.D2.astype(complex)
            - t * lin.A.astype(complex))


def _solve2(mat: np.ndarray, rhs: np.ndarray, which: str) -> np.ndarray:
    """Closed-form adjugate solve of a 2x2 complex system."""
    a, b = mat[0, 0], mat[0, 1]
    c, d = mat[1, 0], mat[1, 1]
    det = a * d - b * c
    scale = np.sum(np.abs(mat) ** 2)
    if abs(det) < _SINGULAR_TOL * max(scale, 1.0):
        raise SingularResolvent(which, det)
    return np.array([(d * rhs[0] - b * rhs[1]) / det,
                     (-c * rhs[0] + a * rhs[1]) / det])


def eigenvectors(hp: HopfPoint, lin: Linearization, tr: TransportParams,
                 ss: SteadyState) -> EigenData:
    """Critical eigenvector pair with the adjoint normalization.

    phi spans the kernel of the characteristic matrix at i*omega_c, psi its
    left counterpart, and eta scales psi so the delay-aware pairing

        psi.phi - tau_c x_c exp(-i omega_c) psi^T D2 phi = 1

    holds exactly. The closed form for eta follows from that identity; it is
    re-verified here against the assembled vectors.
    """
    x = _mode_square(hp.n_c, tr.ell)
    omega = hp.omega_nc
    wc = hp.omega_c
    xi_u = lin.xi_u_star
    d21_v = lin.d21_v_star

    den_phi = xi_u * x - lin.a12
    den_psi = 1j * omega + tr.d22 * x - lin.a22
    if abs(den_phi) < _SINGULAR_TOL or abs(den_psi) < _SINGULAR_TOL:
        raise SingularEigenvector(
            f"eigenvector denominators {den_phi:.3e}, {den_psi:.3e}")

    phi = np.array([1.0 + 0.0j,
                    (lin.a11 - 1j * omega - tr.d11 * x) / den_phi])
    psi_hat = np.array([1.0 + 0.0j, (lin.a12 - xi_u * x) / den_psi])

    # normalization denominator: psi_hat.phi - tau x e^{-i wc} psi_hat^T D2 phi
    pairing = (psi_hat @ phi
               + hp.tau_c * x * np.exp(-1j * wc) * d21_v * psi_hat[1] * phi[0])
    if abs(pairing) < _SINGULAR_TOL:
        raise SingularEigenvector(f"degenerate adjoint pairing {pairing:.3e}")
    eta = 1.0 / pairing
    psi = eta * psi_hat
    return EigenData(phi=phi, psi=psi, eta=eta, n_c=hp.n_c, tau_c=hp.tau_c,
                     omega_nc=omega, ell=tr.ell)


def eigen_residual(ed: EigenData, hp: HopfPoint, lin: Linearization,
                   tr: TransportParams) -> tuple[float, float]:
    """Norms of M phi and psi^T M at the critical eigenvalue; both should
    vanish for a valid eigenpair."""
    mat = characteristic_matrix(ed.n_c, 1j * ed.omega_c, hp, lin, tr)
    return (float(np.linalg.norm(mat @ ed.phi)),
            float(np.linalg.norm(ed.psi @ mat)))


def normalization_residual(ed: EigenData, lin: Linearization) -> complex:
    """Deviation of the adjoint pairing of (psi, phi) from one."""
    d2 = lin.D2.astype(complex)
    pairing = (ed.psi @ ed.phi
               - ed.tau_c * ed.x_c * np.exp(-1j * ed.omega_c)
               * (ed.psi @ (d2 @ ed.phi)))
    return pairing - 1.0


def tensors(ed: EigenData, kt: KineticTaylor, hp: HopfPoint,
            tr: TransportParams) -> TensorSet:
    """Directional quadratic/cubic tensors along the critical eigenvector."""
    p1, p2 = ed.phi
    c1, c2 = np.conj(p1), np.conj(p2)
    f20, f11, f02 = kt.f20, kt.f11, kt.f02
    f30, f21, f12, f03 = kt.f30, kt.f21, kt.f12, kt.f03

    a20 = f20 * p1 ** 2 + f02 * p2 ** 2 + 2.0 * f11 * p1 * p2
    a02 = np.conj(a20)
    a11 = (2.0 * f20 * p1 * c1 + 2.0 * f02 * p2 * c2
           + 2.0 * f11 * (p1 * c2 + c1 * p2))
    a30 = (f30 * p1 ** 3 + f03 * p2 ** 3
           + 3.0 * f21 * p1 ** 2 * p2 + 3.0 * f12 * p1 * p2 ** 2)
    a03 = np.conj(a30)
    a21 = (3.0 * f30 * p1 ** 2 * c1 + 3.0 * f03 * p2 ** 2 * c2
           + 3.0 * f21 * (p1 ** 2 * c2 + 2.0 * p1 * c1 * p2)
           + 3.0 * f12 * (2.0 * p1 * p2 * c2 + c1 * p2 ** 2))
    a12 = np.conj(a21)

    tau = ed.tau_c
    phi1_m1 = ed.phi_at(-1.0)[0]
    a20_d = np.array([2.0 * tr.xi * tau * p1 * p2,
                      -2.0 * tr.d21 * tau * phi1_m1 * p2])
    a02_d = np.conj(a20_d)
    a11_d = np.array([4.0 * tr.xi * tau * np.real(p1 * c2),
                      -4.0 * tr.d21 * tau * np.real(phi1_m1 * c2)],
                     dtype=complex)
    x = ed.x_c
    a20_tilde = a20 - 2.0 * x * a20_d
    a11_tilde = a11 - 2.0 * x * a11_d
    return TensorSet(a20=a20, a02=a02, a11=a11, a30=a30, a03=a03, a21=a21,
                     a12=a12, a20_d=a20_d, a02_d=a02_d, a11_d=a11_d,
                     a20_tilde=a20_tilde, a11_tilde=a11_tilde)


def center_manifold(ts: TensorSet, hp: HopfPoint, lin: Linearization,
                    tr: TransportParams, omega_c: float | None = None) -> CenterManifoldH:
    """Quadratic center-manifold corrections from the four 2x2 resolvent
    solves; omega_c can be overridden for conjugate-branch checks."""
    wc = hp.omega_c if omega_c is None else omega_c
    lp = tr.ell * np.pi
    s0 = 1.0 / np.sqrt(lp)
    s2 = 1.0 / np.sqrt(2.0 * lp)
    n2 = 2 * hp.n_c

    m0_2w = characteristic_matrix(0, 2j * wc, hp, lin, tr)
    m0_0 = characteristic_matrix(0, 0.0 + 0j, hp, lin, tr)
    m2_2w = characteristic_matrix(n2, 2j * wc, hp, lin, tr)
    m2_0 = characteristic_matrix(n2, 0.0 + 0j, hp, lin, tr)

    h0_20 = _solve2(m0_2w, s0 * ts.a20, "mean mode at doubled frequency")
    h0_11 = _solve2(m0_0, s0 * ts.a11, "mean mode at zero frequency")
    h2_20 = _solve2(m2_2w, s2 * ts.a20_tilde, "doubled mode at doubled frequency")
    h2_11 = _solve2(m2_0, s2 * ts.a11_tilde, "doubled mode at zero frequency")

    return CenterManifoldH(
        h0_20=ThetaProfile(h0_20, 2.0 * wc),
        h0_11=ThetaProfile(h0_11, 0.0),
        h2nc_20=ThetaProfile(h2_20, 2.0 * wc),
        h2nc_11=ThetaProfile(h2_11, 0.0),
    )


def b1(ed: EigenData, hp: HopfPoint, lin: Linearization,
       tr: TransportParams) -> complex:
    """Linear-in-mu normal form coefficient."""
    x = ed.x_c
    phi0 = ed.phi_at(0.0)
    phim1 = ed.phi_at(-1.0)
    vec = (lin.A.astype(complex) @ phi0
           - x * (lin.D1.astype(complex) @ phi0 + lin.D2.astype(complex) @ phim1))
    return complex(2.0 * ed.psi @ vec)


def b21(ed: EigenData, ts: TensorSet, hp: HopfPoint) -> complex:
    """Cubic kinetic contribution."""
    lp = ed.ell * np.pi
    return complex(3.0 / (2.0 * lp) * (ed.psi @ ts.a21))


def _s2_kinetic(kt: KineticTaylor, a0: np.ndarray, y0: np.ndarray) -> np.ndarray:
    """Quadratic kinetic pairing of the eigendirection (values at theta=0)
    with a center-manifold coefficient (value at theta=0)."""
    return (2.0 * kt.f20 * a0[0] * y0[0] + 2.0 * kt.f02 * a0[1] * y0[1]
            + 2.0 * kt.f11 * (a0[0] * y0[1] + a0[1] * y0[0]))


def b22(ed: EigenData, cm: CenterManifoldH, kt: KineticTaylor,
        hp: HopfPoint) -> complex:
    """Quadratic-quadratic kinetic interaction through the center manifold."""
    lp = ed.ell * np.pi
    phi0 = ed.phi_at(0.0)
    phb0 = ed.phibar_at(0.0)
    part0 = (_s2_kinetic(kt, phi0, cm.h0_11.at(0.0))
             + _s2_kinetic(kt, phb0, cm.h0_20.at(0.0)))
    part2 = (_s2_kinetic(kt, phi0, cm.h2nc_11.at(0.0))
             + _s2_kinetic(kt, phb0, cm.h2nc_20.at(0.0)))
    return complex(ed.psi @ part0 / np.sqrt(lp) + ed.psi @ part2 / np.sqrt(2.0 * lp))


def _s2_flux(tr: TransportParams, tau: float, j: int, a0: np.ndarray,
             a1_m1: complex, y0: np.ndarray, ym1: np.ndarray) -> np.ndarray:
    """Taxis/memory quadratic kernels. The three variants pair the
    eigendirection with the correction value, its gradient and its Laplacian
    respectively; delayed slots use the theta=-1 evaluations."""
    if j == 1:
        return 2.0 * np.array([tr.xi * tau * a0[1] * y0[0],
                               -tr.d21 * tau * a1_m1 * y0[1]])
    if j == 2:
        return 2.0 * np.array([
            tr.xi * tau * (a0[1] * y0[0] + a0[0] * y0[1]),
            -tr.d21 * tau * (a0[1] * ym1[0] + a1_m1 * y0[1])])
    if j == 3:
        return 2.0 * np.array([tr.xi * tau * a0[0] * y0[1],
                               -tr.d21 * tau * a0[1] * ym1[0]])
    raise ValueError("kernel index must be 1, 2 or 3")


def b23(ed: EigenData, cm: CenterManifoldH, hp: HopfPoint,
        tr: TransportParams) -> complex:
    """Quadratic-quadratic taxis/memory interaction through the center
    manifold: the mean mode enters through the value kernel only, the doubled
    mode through all three kernels with spectral weights -x_c, 2 x_c, -4 x_c.
    """
    lp = ed.ell * np.pi
    x = ed.x_c
    tau = ed.tau_c
    phi0 = ed.phi_at(0.0)
    phb0 = ed.phibar_at(0.0)
    phi1_m1 = ed.phi_at(-1.0)[0]
    phb1_m1 = ed.phibar_at(-1.0)[0]

    def pair(j: int, prof: ThetaProfile, conjugated: bool) -> np.ndarray:
        a0 = phb0 if conjugated else phi0
        a1 = phb1_m1 if conjugated else phi1_m1
        return _s2_flux(tr, tau, j, a0, a1, prof.at(0.0), prof.at(-1.0))

    term0 = pair(1, cm.h0_11, False) + pair(1, cm.h0_20, True)
    weights = {1: -x, 2: 2.0 * x, 3: -4.0 * x}
    term2 = np.zeros(2, dtype=complex)
    for j, w in weights.items():
        term2 = term2 + w * (pair(j, cm.h2nc_11, False) + pair(j, cm.h2nc_20, True))
    return complex(-(x / np.sqrt(lp)) * (ed.psi @ term0)
                   + (ed.psi @ term2) / np.sqrt(2.0 * lp))


def _classify(k1: float, k2: float) -> tuple[str, str]:
    if abs(k2) < _DEGENERATE_K2:
        return DEGENERATE, DEGENERATE
    direction = DIRECTION_SUPERCRITICAL if k1 * k2 < 0 else DIRECTION_SUBCRITICAL
    stability = STABILITY_STABLE if k2 < 0 else STABILITY_UNSTABLE
    return direction, stability


def normal_form(hp: HopfPoint, lin: Linearization, tr: TransportParams,
                ss: SteadyState, kt: KineticTaylor) -> NormalForm:
    """Full third-order normal form at a critical point.

    Chains eigenvectors -> tensors -> center manifold -> coefficients and
    classifies direction and orbit stability from the signs of K1*K2 and K2.
    """
    ed = eigenvectors(hp, lin, tr, ss)
    ts = tensors(ed, kt, hp, tr)
    cm = center_manifold(ts, hp, lin, tr)
    c_b1 = b1(ed, hp, lin, tr)
    c_b21 = b21(ed, ts, hp)
    c_b22 = b22(ed, cm, kt, hp)
    c_b23 = b23(ed, cm, hp, tr)
    c_b2 = c_b21 + 1.5 * (c_b22 + c_b23)
    k1 = 0.5 * c_b1.real
    k2 = c_b2.real / 6.0
    direction, stability = _classify(k1, k2)
    return NormalForm(b1=c_b1, b21=c_b21, b22=c_b22, b23=c_b23, b2=c_b2,
                      k1=k1, k2=k2, direction=direction,
                      orbit_stability=stability)


def amplitude_prediction(nf: NormalForm, mu: float) -> float | None:
    """Stationary amplitude sqrt(-K1 mu / K2) of the truncated polar normal
    form, or None when no nontrivial balance exists. This is a scaling-level
    prediction, not an exact PDE amplitude."""
    if nf.k2 == 0.0:
        return None
    ratio = nf.k1 * mu / nf.k2
    if ratio > 0.0:
        return None
    return float(np.sqrt(-ratio))

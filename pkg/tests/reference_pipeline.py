"""Straight-line reference computation of the cubic normal-form coefficients.

Deliberately unfactored and independent of the package internals (full-matrix
numpy solves, no shared helpers); used to cross-check the structured
implementation value by value.
"""

import numpy as np


def reference_normal_form(beta, m, s, d11, d22, d21, xi, ell, nc):
    R = beta + m - 1.0
    us = (np.sqrt(R * R + 4.0 * beta) - R) / (2.0 * beta)
    vs = us

    a11 = 1.0 - 2.0 * beta * us - m * us / (1.0 + us) ** 2
    a12 = -m * us / (1.0 + us)
    a21, a22 = s, -s
    det_a = a11 * a22 - a12 * a21
    A = np.array([[a11, a12], [a21, a22]], dtype=complex)
    D1 = np.array([[d11, xi * us], [0.0, d22]], dtype=complex)
    D2 = np.array([[0.0, 0.0], [-d21 * vs, 0.0]], dtype=complex)

    x = nc ** 2 / ell ** 2
    t_n = (a11 + a22) - (d11 + d22) * x
    j_n = d11 * d22 * x * x - (d11 * a22 + d22 * a11 - a21 * xi * us) * x + det_a
    gain = d21 * xi * us * vs * x * x - d21 * vs * a12 * x
    p_n = t_n * t_n - 2.0 * j_n
    q_n = j_n * j_n - gain * gain
    w = np.sqrt((-p_n + np.sqrt(p_n * p_n - 4.0 * q_n)) / 2.0)
    tau = np.arccos((w * w - j_n) / gain) / w
    wc = tau * w

    phi = np.array([1.0, (a11 - 1j * w - d11 * x) / (xi * us * x - a12)],
                   dtype=complex)
    psi_hat = np.array([1.0, (a12 - xi * us * x) / (1j * w + d22 * x - a22)],
                       dtype=complex)
    denom = psi_hat @ phi - tau * x * np.exp(-1j * wc) * (psi_hat @ (D2 @ phi))
    eta = 1.0 / denom
    psi = eta * psi_hat

    f20 = tau * np.array([-2.0 * beta + 2.0 * m * vs / (1.0 + us) ** 3,
                          -2.0 * s * vs ** 2 / us ** 3])
    f11 = tau * np.array([-m / (1.0 + us) ** 2, 2.0 * s * vs / us ** 2])
    f02 = tau * np.array([0.0, -2.0 * s / us])
    f30 = tau * np.array([-6.0 * m * vs / (1.0 + us) ** 4,
                          6.0 * s * vs ** 2 / us ** 4])
    f21 = tau * np.array([2.0 * m / (1.0 + us) ** 3, -4.0 * s * vs / us ** 3])
    f12 = tau * np.array([0.0, 2.0 * s / us ** 2])
    f03 = np.array([0.0, 0.0])

    p1, p2 = phi
    c1, c2 = np.conj(p1), np.conj(p2)
    a20 = f20 * p1 ** 2 + f02 * p2 ** 2 + 2.0 * f11 * p1 * p2
    a11v = 2.0 * f20 * p1 * c1 + 2.0 * f02 * p2 * c2 + 2.0 * f11 * (p1 * c2 + c1 * p2)
    a21v = (3.0 * f30 * p1 ** 2 * c1 + 3.0 * f03 * p2 ** 2 * c2
            + 3.0 * f21 * (p1 ** 2 * c2 + 2.0 * p1 * c1 * p2)
            + 3.0 * f12 * (2.0 * p1 * p2 * c2 + c1 * p2 ** 2))
    phi1_m1 = p1 * np.exp(-1j * wc)
    a20d = np.array([2.0 * xi * tau * p1 * p2,
                     -2.0 * d21 * tau * phi1_m1 * p2])
    a11d = np.array([4.0 * xi * tau * np.real(p1 * c2),
                     -4.0 * d21 * tau * np.real(phi1_m1 * c2)], dtype=complex)
    a20t = a20 - 2.0 * x * a20d
    a11t = a11v - 2.0 * x * a11d

    def mt(n, lam):
        xx = n ** 2 / ell ** 2
        return (lam * np.eye(2) + tau * xx * D1
                + tau * xx * np.exp(-lam) * D2 - tau * A)

    lp = ell * np.pi
    h020 = np.linalg.solve(mt(0, 2j * wc), a20) / np.sqrt(lp)
    h011 = np.linalg.solve(mt(0, 0.0), a11v) / np.sqrt(lp)
    h220 = np.linalg.solve(mt(2 * nc, 2j * wc), a20t) / np.sqrt(2.0 * lp)
    h211 = np.linalg.solve(mt(2 * nc, 0.0), a11t) / np.sqrt(2.0 * lp)

    B1 = 2.0 * psi @ (A @ phi - x * (D1 @ phi + D2 @ (phi * np.exp(-1j * wc))))
    B21 = 3.0 / (2.0 * lp) * (psi @ a21v)

    def s2(a, y0):
        return (2.0 * f20 * a[0] * y0[0] + 2.0 * f02 * a[1] * y0[1]
                + 2.0 * f11 * (a[0] * y0[1] + a[1] * y0[0]))

    phb = np.conj(phi)
    B22 = ((psi @ (s2(phi, h011) + s2(phb, h020))) / np.sqrt(lp)
           + (psi @ (s2(phi, h211) + s2(phb, h220))) / np.sqrt(2.0 * lp))

    def s2d(j, a0, a1m1, y0, ym1):
        if j == 1:
            return 2.0 * np.array([xi * tau * a0[1] * y0[0],
                                   -d21 * tau * a1m1 * y0[1]])
        if j == 2:
            return 2.0 * np.array([
                xi * tau * (a0[1] * y0[0] + a0[0] * y0[1]),
                -d21 * tau * (a0[1] * ym1[0] + a1m1 * y0[1])])
        return 2.0 * np.array([xi * tau * a0[0] * y0[1],
                               -d21 * tau * a0[1] * ym1[0]])

    e2 = np.exp(-2j * wc)
    phb1_m1 = c1 * np.exp(1j * wc)
    term0 = (s2d(1, phi, phi1_m1, h011, h011)
             + s2d(1, phb, phb1_m1, h020, h020 * e2))
    term2 = np.zeros(2, dtype=complex)
    for j, wgt in ((1, -x), (2, 2.0 * x), (3, -4.0 * x)):
        term2 = term2 + wgt * (s2d(j, phi, phi1_m1, h211, h211)
                               + s2d(j, phb, phb1_m1, h220, h220 * e2))
    B23 = -(x / np.sqrt(lp)) * (psi @ term0) + (psi @ term2) / np.sqrt(2.0 * lp)

    B2 = B21 + 1.5 * (B22 + B23)
    return {
        "u_star": us, "omega": w, "tau": tau, "omega_c": wc,
        "phi": phi, "psi": psi,
        "h0_20": h020, "h0_11": h011, "h2nc_20": h220, "h2nc_11": h211,
        "B1": B1, "B21": B21, "B22": B22, "B23": B23, "B2": B2,
        "K1": 0.5 * np.real(B1), "K2": np.real(B2) / 6.0,
    }

"""Independent fixture oracle.

Circuit by dense diagonalization at a larger basis, Floquet quantities by
direct time-domain integration of the 2x2 Schrodinger equation (no Floquet
matrix), rates with mpmath. Prints values frozen into the C++ tests.
"""
import mpmath as mp
import numpy as np
from scipy.integrate import solve_ivp

mp.mp.dps = 40
TP = 2 * np.pi
EC, EL, EJ = TP * 1000, TP * 790, TP * 4430
HBAR, KB = 1.054571817e-34, 1.380649e-23


def circuit(phi_ext, dim):
    a = np.diag(np.sqrt(np.arange(1, dim)), 1)
    pz = (2 * EC / EL) ** 0.25
    nz = (EL / (32 * EC)) ** 0.25
    ph = pz * (a + a.T)
    n = 1j * nz * (a.T - a)
    w, v = np.linalg.eigh(ph)
    cos_ph = (v * np.cos(w)) @ v.T
    h = 4 * EC * (n @ n).real + 0.5 * EL * (ph + phi_ext * np.eye(dim)) @ (ph + phi_ext * np.eye(dim)) - EJ * cos_ph
    e, vec = np.linalg.eigh(h)
    return e[1] - e[0], abs(vec[:, 0] @ ph @ vec[:, 1]), e


def noise(pge):
    af = mp.mpf(TP) * mp.mpf("1.8e-6") * mp.mpf(EL) * pge
    ad = mp.pi ** 2 * mp.mpf("1.1e-6") * pge ** 2 / mp.mpf(EC)
    wt = mp.mpf(KB) * mp.mpf("0.015") / mp.mpf(HBAR) / 10 ** 6
    return af, ad, wt


def spectral(w, af, ad, wt):
    w = mp.mpf(w)
    wir, wuv = mp.mpf(TP) * mp.mpf("1e-6"), mp.mpf(TP) * 3000
    if abs(w) < wir:
        w = wir if w >= 0 else -wir
    if abs(w) > wuv:
        return mp.mpf(0)
    kappa = abs(mp.coth(w / (2 * wt)) + 1) / 2
    return af ** 2 * abs(2 * mp.pi / w) + kappa * ad * (w / (2 * mp.pi)) ** 2


def floquet_time_domain(delta, a, b, p, wd, nt=512):
    T = TP / wd
    sx = np.array([[0, 1], [1, 0]], complex)
    sz = np.diag([1.0 + 0j, -1.0])

    def P(t):
        v = p[0].real
        for k in range(1, len(p)):
            v += 2 * (p[k] * np.exp(1j * k * wd * t)).real
        return v

    def rhs(t, y):
        u = y.reshape(2, 2)
        h = 0.5 * delta * sx + (0.5 * b + a * P(t)) * sz
        return (-1j * h @ u).ravel()

    ts = np.arange(nt) * T / nt
    sol = solve_ivp(rhs, (0, T), np.eye(2, dtype=complex).ravel(), method="DOP853",
                    rtol=1e-13, atol=1e-14, t_eval=np.append(ts, T))
    us = [sol.y[:, j].reshape(2, 2) for j in range(nt + 1)]
    lam, vec = np.linalg.eig(us[-1])
    eps = np.angle(lam) * -1 / T  # in (-wd/2, wd/2]
    order = np.argsort(eps)[::-1]
    ep, em = eps[order[0]], eps[order[1]]
    vp, vm = vec[:, order[0]], vec[:, order[1]]
    wp = np.array([np.exp(1j * ep * t) * us[j] @ vp for j, t in enumerate(ts)])
    wm = np.array([np.exp(1j * em * t) * us[j] @ vm for j, t in enumerate(ts)])
    gz_t = 0.5 * (np.einsum("ti,ij,tj->t", wp.conj(), sz, wp) - np.einsum("ti,ij,tj->t", wm.conj(), sz, wm))
    gp_t = np.einsum("ti,ij,tj->t", wp.conj(), sz, wm)
    gm_t = np.einsum("ti,ij,tj->t", wm.conj(), sz, wp)
    # g(t) = sum_k g^k e^{-i k wd t}
    def coeff(g, k):
        return np.mean(g * np.exp(1j * k * wd * ts))
    return ep - em, coeff, gz_t, gp_t, gm_t


def rates(gap, wd, coeff, gz, gp, gm, pge, kmax=40):
    af, ad, wt = noise(pge)
    gamma_z = mp.mpf(0.5) * abs(coeff(gz, 0)) * af * mp.sqrt(2) * 4
    gamma_1 = mp.mpf(0)
    for k in range(-kmax, kmax + 1):
        gamma_1 += abs(coeff(gp, k)) ** 2 * spectral(k * wd - gap, af, ad, wt)
        gamma_1 += abs(coeff(gm, k)) ** 2 * spectral(k * wd + gap, af, ad, wt)
        if k != 0:
            gamma_z += mp.mpf(0.25) * abs(coeff(gz, k)) ** 2 * spectral(k * wd, af, ad, wt)
    return 1 / gamma_1, 1 / gamma_z


if __name__ == "__main__":
    d130, p130, _ = circuit(np.pi, 130)
    d150, p150, _ = circuit(np.pi, 150)
    print(f"delta {d150!r} (130: {d130!r})")
    print(f"phi_ge {p150!r} (130: {p130!r})")
    pge = mp.mpf(p150)
    af, ad, wt = noise(pge)
    print("a_f", mp.nstr(af, 17), "a_d", mp.nstr(ad, 17), "omega_T", mp.nstr(wt, 17))
    print("S(+delta)", mp.nstr(spectral(d150, af, ad, wt), 17))
    print("S(-delta)", mp.nstr(spectral(-d150, af, ad, wt), 17))
    print("static T1", mp.nstr(1 / (spectral(d150, af, ad, wt) + spectral(-d150, af, ad, wt)), 17))
    b = 2 * EL * 0.03 * np.pi * p150
    om = np.hypot(d150, b)
    print("off-sweet-spot T1", mp.nstr(1 / ((d150 / om) ** 2 * (spectral(om, af, ad, wt) + spectral(-om, af, ad, wt))), 17),
          "Tphi", mp.nstr(1 / (mp.mpf(0.5) * (b / om) * af * mp.sqrt(2) * 4), 17))

    a = EL * 0.004 * np.pi * p150
    genomes = {
        "dss1": (0.23, [-0.55 + 0.21j, 0.96 - 0.95j, -0.58 + 0.31j, 0.14 - 0.85j], 1.01),
        "dss2": (0.69, [0.73 - 0.99j, 0.97 - 0.88j, 0.28 + 0.84j, -0.16 + 0.58j], 1.13),
        "dss3": (0.37, [-0.99 - 1j, 0.01 - 0.87j, -0.99 + 0.99j, 0.99 + 1j], 0.99),
    }
    for name, (p0, ps, frac) in genomes.items():
        wd = frac * d150
        gap, coeff, gz, gp, gm = floquet_time_domain(d150, a, 0.0, [p0] + ps, wd)
        t1, tphi = rates(gap, wd, coeff, gz, gp, gm, pge)
        print(name, "gap", repr(gap), "gz0", repr(abs(coeff(gz, 0))), "T1", mp.nstr(t1, 12), "Tphi", mp.nstr(tphi, 12))

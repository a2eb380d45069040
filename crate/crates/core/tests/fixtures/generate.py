#!/usr/bin/env python3
"""Reference values for the integration tests.

Each value is computed by a route that shares no code with the Rust crate:
closed forms and 40-digit arithmetic where they exist, and LAPACK eigensolvers
plus a Hermite recurrence where the quantity is defined by a fixed quadrature.

    python3 generate.py      # rewrites the *.json files next to this script
"""

import json
import math
from pathlib import Path

import mpmath as mp
import numpy as np

mp.mp.dps = 40
HERE = Path(__file__).resolve().parent


def dump(name, payload):
    (HERE / name).write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")


# Outcome distribution of |beta> (x) |alpha>: in the modes (c0 +- c1)/sqrt2 the state
# is a product of coherent states, so P(l) is a Skellam law.
def skellam(l, mu1, mu2):
    return mp.exp(-(mu1 + mu2)) * (mu1 / mu2) ** (mp.mpf(l) / 2) * mp.besseli(abs(l), 2 * mp.sqrt(mu1 * mu2))


def gauss_density(x, alpha, beta):
    centre = 2 * (mp.conj(alpha) * beta).real / abs(alpha)
    return mp.exp(-((x - centre) ** 2) / 2) / mp.sqrt(2 * mp.pi)


def distribution_fixture():
    points = []
    for beta in [0.0, 0.5]:
        for mag in [2.0, 4.0, 8.0]:
            a, b = mp.mpf(mag), mp.mpf(beta)
            mu1, mu2 = abs(a + b) ** 2 / 2, abs(a - b) ** 2 / 2
            sup = max(
                abs(a * skellam(l, mu1, mu2) - gauss_density(mp.mpf(l) / a, a, b))
                for l in range(-int(12 * mag) - 20, int(12 * mag) + 21)
            )
            points.append({"alpha_mag": mag, "beta": beta, "sup_abs_err": float(sup)})
    dump("distribution.json", {"points": points})


# Kernel |a| <m,a| Pi^l |n,a>: write |n>|a> with u0 = (v+ + v-)/sqrt2, u1 = (v+ - v-)/sqrt2
# and keep the monomials v+^p v-^q with p - q = l.
def kernel_entry_vectors(alpha, l, dim, qmax):
    s2 = mp.sqrt(2)
    g = alpha / s2
    pre = mp.exp(-abs(alpha) ** 2 / 2)
    rows = []
    for n in range(dim):
        col = []
        for q in range(max(0, -l), qmax):
            p = q + l
            acc = mp.mpc(0)
            for j in range(n + 1):
                i, k = p - j, q - (n - j)
                if i < 0 or k < 0:
                    continue
                acc += mp.binomial(n, j) * g**i / mp.factorial(i) * (-g) ** k / mp.factorial(k)
            col.append(acc * pre * mp.sqrt(mp.factorial(p) * mp.factorial(q)) / (s2**n * mp.sqrt(mp.factorial(n))))
        rows.append(col)
    return rows


def limit_vector(theta, x, dim):
    # e^{-x^2/4} e^{x e^{i theta} u - e^{2 i theta} u^2 / 2}
    he = [mp.mpf(1), mp.mpf(x)]
    while len(he) < dim:
        n = len(he) - 1
        he.append(x * he[n] - n * he[n - 1])
    return [mp.expjpi(n * theta / mp.pi) * mp.exp(-mp.mpf(x) ** 2 / 4) * he[n] / mp.sqrt(mp.factorial(n)) for n in range(dim)]


def kernel_fixture():
    dim = 6
    points = []
    for theta in [0.0, math.pi / 4]:
        for x in [0.0, 0.5, 1.0]:
            mag = 8.0
            l = int(round(x * mag))
            alpha = mp.mpf(mag) * mp.expjpi(mp.mpf(theta) / mp.pi)
            qmax = 260
            cols = kernel_entry_vectors(alpha, l, dim, qmax)
            lim = limit_vector(mp.mpf(theta), mp.mpf(l) / mag, dim)
            frob = mp.mpf(0)
            for m in range(dim):
                for n in range(dim):
                    k = mag * mp.fsum(mp.conj(u) * v for u, v in zip(cols[m], cols[n]))
                    k -= lim[m] * mp.conj(lim[n]) / mp.sqrt(2 * mp.pi)
                    frob += abs(k) ** 2
            points.append({"alpha_mag": mag, "theta": theta, "x": x, "l": l, "frobenius": float(mp.sqrt(frob))})
    dump("kernel.json", {"dim": dim, "points": points})


# Collapse distance for |0> (x) |a>, a real, truncated at total photon number T, with the
# interval projector built by the trapezoid rule at 256 nodes per unit length.
def hermite_functions(r, dim):
    h = np.zeros(dim)
    h[0] = math.exp(-r * r / 4)
    if dim > 1:
        h[1] = r * h[0]
    for n in range(1, dim - 1):
        h[n + 1] = (r * h[n] - math.sqrt(n) * h[n - 1]) / math.sqrt(n + 1)
    return h


def coherent_amps(alpha, dim):
    return np.array([float(mp.exp(-alpha * alpha / 2 + n * mp.log(alpha) - mp.loggamma(n + 1) / 2)) if alpha else float(n == 0) for n in range(dim)])


def collapse_fixture():
    total, a, b = 170, -1.0, 1.0
    dim = total + 1
    nodes = math.ceil((b - a) * 256) + 1
    rs = np.linspace(a, b, nodes)
    w = np.full(nodes, (b - a) / (nodes - 1))
    w[0] = w[-1] = w[0] / 2
    herm = np.array([hermite_functions(r, dim) for r in rs])
    proj = (herm.T * w) @ herm / math.sqrt(2 * math.pi)
    vac = np.zeros(dim)
    vac[0] = 1.0
    pvac = proj @ vac
    points = []
    for mag in [2.0, 4.0, 8.0]:
        lo = coherent_amps(mag, dim)
        outcomes = range(math.floor(a * mag) + 1, math.floor(b * mag) + 1)
        dist = 0.0
        for n_tot in range(total + 1):
            idx = np.arange(n_tot + 1)
            psi = vac[idx] * lo[n_tot - idx]
            approx = pvac[idx] * lo[n_tot - idx]
            xi = np.zeros((n_tot + 1, n_tot + 1))
            for i in range(n_tot):
                xi[i, i + 1] = xi[i + 1, i] = math.sqrt((i + 1) * (n_tot - i))
            vals, vecs = np.linalg.eigh(xi)
            keep = [k for k, v in enumerate(vals) if int(round(v)) in outcomes]
            v = vecs[:, keep]
            collapsed = v @ (v.T @ psi)
            dist += float(np.sum((collapsed - approx) ** 2))
        points.append({"alpha_mag": mag, "distance": dist})
    dump("collapse.json", {"a": a, "b": b, "beta": 0.0, "total_cutoff": total, "points": points})


# Ideal teleport of |beta> at outcome (0, 0): the output is |q beta> up to weight, so
# the fidelity to |beta> is exp(-|beta|^2 (1 - q)^2).
def teleport_fixture():
    beta = mp.mpf("0.3")
    fid = {q: mp.exp(-beta**2 * (1 - mp.mpf(q)) ** 2) for q in ["0.8", "0.9", "0.95", "0.99"]}
    dump(
        "teleport.json",
        {
            "beta": 0.3,
            "fidelity": {q: float(v) for q, v in fid.items()},
            "margin_over_q08": float(fid["0.99"] - fid["0.8"]),
        },
    )


# e^{il phi/2} <alpha|phi,l> at u-bar = u, summed to 2000 terms in 40-digit arithmetic,
# against the factored large-|alpha| form.
def mainprop_fixture():
    u, phi, theta, x = mp.mpf("0.5"), mp.mpf(0), mp.mpf(0), 1.0
    points = []
    for mag in [6.0, 12.0]:
        a = mp.mpf(mag)
        l = int(round(x * mag))
        abar = a * mp.expjpi(-theta / mp.pi)
        lin = abar + u if l >= 0 else abar - u
        w = abar**2 - u**2
        e = mp.expjpi(phi / mp.pi)
        series = mp.fsum(
            e**j * mp.sqrt(mp.factorial(j) / (2 ** abs(l) * mp.factorial(abs(l) + j))) * w**j / (2**j * mp.factorial(j))
            for j in range(2000)
        )
        value = mp.exp(-(a**2) / 2) * lin ** abs(l) * series * mp.expjpi(l * phi / (2 * mp.pi))
        xe = mp.mpf(l) / a
        d = phi - 2 * theta
        target = mp.exp(
            mp.expjpi(theta / mp.pi) * u * xe - e * u**2 / 2 - xe**2 / 4 + (mp.cos(d) - 1) * a**2 / 2 + 1j * mp.sin(d) * a**2 / 2
        )
        points.append(
            {
                "alpha_mag": mag,
                "abs_error": float(abs(value - target)),
                "value_re": float(value.real),
                "value_im": float(value.imag),
            }
        )
    dump("mainprop.json", {"u": 0.5, "phi": 0.0, "theta": 0.0, "x": x, "points": points})


if __name__ == "__main__":
    mainprop_fixture()
    distribution_fixture()
    kernel_fixture()
    collapse_fixture()
    teleport_fixture()

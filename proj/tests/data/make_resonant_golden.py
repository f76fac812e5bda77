"""Reference <sigma_z(t)> for the resonant spin-boson case, by dense
matrix exponentiation of the Liouvillian in numpy/scipy.

Writes resonant_sigma_z.csv (t, sigma_z) next to this script.
"""
import pathlib

import numpy as np
from scipy.linalg import expm

two_pi = 2 * np.pi
omega_m = two_pi * 100e3
delta = omega_m
lam = two_pi * 100e3
kappa = two_pi * 1.25e3
nbar = 0.025
n_max = 15

d = n_max + 1
a = np.diag(np.sqrt(np.arange(1, d)), 1)
sz = np.diag([1.0, -1.0])
sx = np.array([[0.0, 1.0], [1.0, 0.0]])
i2, im = np.eye(2), np.eye(d)

A = np.kron(i2, a)
H = (-delta / 2) * np.kron(sx, im) - (lam / 2) * np.kron(sz, a + a.T) + omega_m * np.kron(i2, a.T @ a)


def lindblad_rhs(rho):
    out = -1j * (H @ rho - rho @ H)
    for c, rate in ((A, 2 * kappa * (nbar + 1)), (A.conj().T, 2 * kappa * nbar)):
        cd = c.conj().T
        out += rate * (c @ rho @ cd - 0.5 * (cd @ c @ rho + rho @ cd @ c))
    return out


n = 2 * d
# Liouvillian by applying the right-hand side to each matrix unit (row-major basis).
L = np.zeros((n * n, n * n), dtype=complex)
for k in range(n * n):
    e = np.zeros(n * n, dtype=complex)
    e[k] = 1.0
    L[:, k] = lindblad_rhs(e.reshape(n, n)).reshape(-1)

p = (nbar / (nbar + 1)) ** np.arange(d)
p /= p.sum()
rho0 = np.kron(np.diag([1.0, 0.0]), np.diag(p)).astype(complex)

t_end = 20 / delta
steps = 200
dt = t_end / steps
step = expm(L * dt)
v = rho0.reshape(-1)
obs = np.kron(sz, im)
rows = []
for i in range(steps + 1):
    rho = v.reshape(n, n)
    rows.append((i * dt, np.real(np.trace(obs @ rho))))
    v = step @ v

out = pathlib.Path(__file__).with_name("resonant_sigma_z.csv")
with out.open("w") as f:
    f.write("t,sigma_z\n")
    for t, s in rows:
        f.write(f"{t:.17g},{s:.17g}\n")

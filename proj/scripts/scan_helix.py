# Copyright 2026 The oqsonic Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Scan boundary-driven XXZ chains for pure spin-helix steady states.

Builds the Liouvillian independently of the C++ code (numpy, dense), takes
its null vector as the steady state, and ranks parameter sets by purity.
Only uniform helices are kept: every site-to-site phase step of <sigma+>
must equal phi / (N - 1). Used to pick scenarios/xxz_helix.yaml.

    python3 scripts/scan_helix.py --sites 4 --top 20
"""

import argparse
import itertools

import numpy as np

SX = np.array([[0, 1], [1, 0]], complex)
SY = np.array([[0, -1j], [1j, 0]])
SZ = np.diag([1.0, -1.0]).astype(complex)
SP = np.array([[0, 1], [0, 0]], complex)  # basis (up, down)
SM = SP.T.copy()


def site(op, j, n):
    m = np.eye(1)
    for k in range(n):
        m = np.kron(m, op if k == j else np.eye(2))
    return m


def model(n, J, delta, alpha, beta, r, phi):
    d = 2**n
    eye = np.eye(d)
    h = np.zeros((d, d), complex)
    for j in range(n - 1):
        h += J * (site(SX, j, n) @ site(SX, j + 1, n) + site(SY, j, n) @ site(SY, j + 1, n)
                  + delta * (site(SZ, j, n) @ site(SZ, j + 1, n) - eye))

    def drive(j, p1, p2):
        sm, sp = site(SM, j, n), site(SP, j, n)
        return (alpha * (r * p1 * sm @ sp)
                - beta * ((site(SZ, j, n) - eye) / 2 - r * p2 * sm))

    return h, [drive(0, 1.0, 1.0), drive(n - 1, np.exp(-1j * phi), np.exp(1j * phi))]


def liouvillian(h, jumps):
    d = h.shape[0]
    eye = np.eye(d)
    # row-major vec: vec(A X B) = kron(A, B^T) vec(X)
    m = -1j * (np.kron(h, eye) - np.kron(eye, h.T))
    for l in jumps:
        ldl = l.conj().T @ l
        m += np.kron(l, l.conj()) - 0.5 * np.kron(ldl, eye) - 0.5 * np.kron(eye, ldl.T)
    return m


def steady_state(h, jumps):
    m = liouvillian(h, jumps)
    w, v = np.linalg.eig(m)
    i = np.argmin(abs(w))
    d = h.shape[0]
    rho = v[:, i].reshape(d, d)
    rho /= np.trace(rho)
    rho = (rho + rho.conj().T) / 2
    gap = sorted(abs(w.real))[1]
    return rho, gap


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sites", type=int, default=4)
    ap.add_argument("--top", type=int, default=20)
    ap.add_argument("--step-tol", type=float, default=0.05, help="rad")
    args = ap.parse_args()
    n = args.sites

    rows = []
    for phi, eta, r, beta in itertools.product(
            [np.pi / 2, np.pi / 3, 2 * np.pi / 3, np.pi], np.linspace(0, np.pi, 13),
            [0.5, 1.0, 2.0], [1.0, 2.0, 4.0, 8.0]):
        h, jumps = model(n, 1.0, np.cos(eta), 0.0, beta, r, phi)
        rho, gap = steady_state(h, jumps)
        purity = np.trace(rho @ rho).real
        splus = [np.trace(rho @ site(SP, j, n)) for j in range(n)]
        inc = np.angle(np.exp(1j * np.diff(np.angle(splus))))
        if np.max(abs(inc - phi / (n - 1))) > args.step_tol:
            continue
        rows.append((purity, phi, eta, r, beta, gap, inc))

    rows.sort(key=lambda t: -t[0])
    print("purity   phi     eta     r    beta  gap      phase increments")
    for pur, phi, eta, r, beta, gap, inc in rows[:args.top]:
        print(f"{pur:.4f}  {phi:.4f}  {eta:.4f}  {r:<4} {beta:<5} {gap:.4f}  "
              + " ".join(f"{x:+.4f}" for x in inc))


if __name__ == "__main__":
    main()

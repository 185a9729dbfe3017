"""Fit the Lipschitz constant of F_lam = (V_lam - 1) phi for several lam.

    python3 scripts/lipschitz_fit.py --samples 100000 --lam 1 0.1 0.01

Samples are random elements over ten decades of scale plus near-nodal
(rank one) elements.  Prints the largest observed ratio |F(a) - F(b)| / |a - b| divided by
(1 + 1/lam), for close pairs (relative offsets 1e-2 and 1e-6) and far pairs.
"""
import argparse

import numpy as np

from cl3dirac import algebra as al
from cl3dirac.matrix import from_matrix
from cl3dirac.spinor import reg_source


def frob(c):
    return np.sqrt(2 * np.sum(np.abs(c) ** 2, axis=0))


def fit(lam, phis, rng):
    F = reg_source(al.Paravector(phis), lam).coeffs
    best = 0.0
    for rel in (1e-2, 1e-6, None):
        d = rng.normal(size=phis.shape) + 1j * rng.normal(size=phis.shape)
        other = phis + d * (rel * frob(phis) / frob(d)) if rel else d
        num = frob(F - reg_source(al.Paravector(other), lam).coeffs)
        den = frob(phis - other)
        ok = den > 0
        best = max(best, float(np.max(num[ok] / den[ok])))
    return best / (1 + 1 / lam)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--samples", type=int, default=100_000)
    ap.add_argument("--lam", type=float, nargs="+", default=[1.0, 0.1, 0.01])
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    rng = np.random.default_rng(args.seed)
    half = args.samples // 2
    phis = al.random_paravector(rng, (half,)).coeffs
    phis = phis * 10.0 ** rng.uniform(-8, 2, size=half)
    # near-nodal: rank one matrices plus small noise, where the bound is tight
    u = rng.normal(size=(args.samples - half, 2)) + 1j * rng.normal(size=(args.samples - half, 2))
    w = rng.normal(size=u.shape) + 1j * rng.normal(size=u.shape)
    mats = np.einsum("ni,nj->nij", u, np.conj(w)) + 1e-6 * rng.normal(size=(len(u), 2, 2))
    phis = np.concatenate([phis, from_matrix(mats).coeffs], axis=1)
    for lam in args.lam:
        print(f"lam={lam:g} C={fit(lam, phis, rng):.4f}")


if __name__ == "__main__":
    main()

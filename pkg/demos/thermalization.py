"""Particle occupation relaxing toward the Bose value, bare and dressed.

Prints a table of n0(t) for both pictures with the fig1 and fig2 preset parameters
(omega_bar=1, g=0.1, beta=2, n0=1) and the thermal reference.
"""
import numpy as np

from oscbath.bare import occupation_bare_continuum
from oscbath.dressed import occupation_dressed_continuum
from oscbath.model import bose_occupation, validate_params


def main():
    p = validate_params(1.0, 0.1, 2.0, 1.0)
    times = np.geomspace(1.0, 100.0, 12)
    bare = occupation_bare_continuum(p, times)
    dressed = occupation_dressed_continuum(p, times)
    print(f"{'t':>8} {'bare':>10} {'dressed':>10}")
    for t, b, d in zip(times, bare, dressed):
        print(f"{t:8.2f} {b:10.5f} {d:10.5f}")
    print(f"Bose value at omega_bar: {bose_occupation(p.omega_bar, p.beta):.5f}")

    # memory of the initial state is lost: start from n0 = 0 and n0 = 5
    for n0 in (0.0, 5.0):
        q = p.with_(n0_initial=n0)
        print(f"n0={n0:g}: bare {occupation_bare_continuum(q, 100.0):.6f}, "
              f"dressed {occupation_dressed_continuum(q, 100.0):.6f}")


if __name__ == "__main__":
    main()

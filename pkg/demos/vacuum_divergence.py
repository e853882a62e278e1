"""The bare vacuum term grows like ln(Lambda); the dressed vacuum stays empty."""
import numpy as np

from oscbath.bare import vacuum_divergence_probe, vacuum_slope
from oscbath.dressed import occupation_dressed_continuum
from oscbath.model import validate_params


def main():
    p = validate_params(1.0, 0.1, 2.0, 0.0)
    t = 1.0
    lams = np.array([1e2, 1e3, 1e4])
    vals = np.array([vacuum_divergence_probe(p, t, L) for L in lams])
    a, b = np.polyfit(np.log(lams), vals, 1)
    for L, v in zip(lams, vals):
        print(f"Lambda={L:8.0f}  bare vacuum term {v:.5f}")
    print(f"fitted slope {a:.5f}, predicted {vacuum_slope(p, t):.5f}")

    # at n0 = 0 the dressed occupation only carries the bath temperature,
    # which falls like beta^-3
    for beta in (50.0, 100.0, 200.0):
        q = p.with_(beta=beta)
        print(f"beta={beta:5.0f}  dressed n0(t=10) = {occupation_dressed_continuum(q, 10.0):.3e}")


if __name__ == "__main__":
    main()

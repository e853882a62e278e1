"""A finite cavity tracks free space until reflections return at t ~ 2R."""
import numpy as np

from oscbath.bare import occupation_bare_continuum, occupation_bare_finite
from oscbath.cavity import solve_spectrum, transform_matrix
from oscbath.dressed import occupation_dressed_continuum, occupation_dressed_finite
from oscbath.model import CavitySpec, validate_params


def main():
    p = validate_params(1.0, 0.1, 2.0, 1.0)
    cav = CavitySpec(20.0, 128)
    spec = solve_spectrum(p, cav)
    T = transform_matrix(p, spec)
    print(f"R={cav.R:g}, N={cav.N}: largest root residual {spec.residuals.max():.1e}")
    times = np.array([1.0, 5.0, 10.0, 20.0, 30.0, 38.0, 40.0, 42.0, 45.0, 50.0])
    fb = occupation_bare_finite(spec, T, p, times, include_vacuum=False)
    fd = occupation_dressed_finite(spec, T, p, times)
    cb = occupation_bare_continuum(p, times)
    cd = occupation_dressed_continuum(p, times)
    print(f"{'t':>6} {'bare R':>9} {'bare inf':>9} {'dressed R':>10} {'dressed inf':>11}")
    for row in zip(times, fb, cb, fd, cd):
        print("{:6.1f} {:9.5f} {:9.5f} {:10.5f} {:11.5f}".format(*row))
    print(f"echo expected near t = 2R = {2 * cav.R:g}")


if __name__ == "__main__":
    main()

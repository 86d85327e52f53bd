"""Green's functions on the three surfaces.

Prints the sphere Green's function against geodesic distance and checks
that the two torus routes (Ewald split and theta function) agree. The
projective-plane kernel is compared with a sum over both lifts of the source.

Run with ``python demos/green_functions.py``.
"""

import numpy as np

from vortexeq.surface import FlatTorus, ProjectivePlane, UnitSphere


def main() -> None:
    sphere = UnitSphere()
    north = np.array([0.0, 0.0, 1.0])
    print("sphere: G(x, north) against geodesic distance")
    for angle in (0.1, 0.5, 1.0, 2.0, 3.0):
        x = np.array([np.sin(angle), 0.0, np.cos(angle)])
        print(f"  d = {angle:4.1f}   G = {float(sphere.green(x, north)): .6f}")

    ewald = FlatTorus(tau=0.3 + 1.1j)
    theta = FlatTorus(tau=0.3 + 1.1j, method="theta")
    rng = np.random.default_rng(0)
    x, p = ewald.sample(rng, 1000), ewald.sample(rng, 1000)
    gap = np.max(np.abs(ewald.green(x, p) - theta.green(x, p)))
    print(f"torus: Ewald vs theta over 1000 random pairs, max difference {gap:.1e}")

    rp2 = ProjectivePlane()
    x, p = rp2.sample(rng, 3), rp2.sample(rng, 3)
    lifts = sphere.green(x, p) + sphere.green(x, -p)
    print("projective plane: kernel vs sum over both lifts")
    for k in range(3):
        print(f"  {float(rp2.green(x[k], p[k])): .6f}  {float(lifts[k]): .6f}")


if __name__ == "__main__":
    main()

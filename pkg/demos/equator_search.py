"""Critical points of one vortex between two equal sinks at the poles.

Every start of the multi-start search lands on the equator, which is a
circle of maxima of the reduced energy: one null direction along the
circle and one negative direction across it.

Run with ``python demos/equator_search.py``.
"""

from vortexeq.energy import SourceSet, VortexProblem
from vortexeq.equilibrium import find_critical_points
from vortexeq.surface import UnitSphere


def main() -> None:
    poles = SourceSet([[0.0, 0.0, 1.0], [0.0, 0.0, -1.0]], [1.0, 1.0])
    problem = VortexProblem(UnitSphere(), [1.0], poles)
    result = find_critical_points(problem, M=50.0, starts=10, seed=0)
    print(f"{result.converged}/{result.starts} starts converged, {len(result)} distinct points")
    for report in result:
        x, y, z = report.positions[0]
        print(f"  ({x: .4f}, {y: .4f}, {z: .1e})  |grad| = {report.grad_norm:.1e}  inertia = {report.inertia}")


if __name__ == "__main__":
    main()

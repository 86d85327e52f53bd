"""Planar energy along two vortices collapsing onto one anchor.

Two unit vortices on fibers of distinct angles approach an anchor of
strength alpha. The energy grows like ``c log(1/rho)`` where ``c`` is
``(2 - 2 alpha) / 2 pi`` for this pair; it stays bounded above exactly
when ``alpha > 1``.

Run with ``python demos/collapse_rates.py``.
"""

from vortexeq.combinatorics import CouplingSpec
from vortexeq.fibers import collapse_slope, layout_from_coupling


def main() -> None:
    coupling = CouplingSpec.consecutive(3)
    print(" alpha   measured   predicted")
    for alpha in (0.25, 0.5, 1.0, 1.5, 3.0, 6.0):
        layout = layout_from_coupling(coupling, [1, 1, 1], [1.0] * 3, [alpha] * 3, target=1)
        measured, predicted = collapse_slope(layout)
        print(f" {alpha:5.2f}  {measured: .5f}  {predicted: .5f}")


if __name__ == "__main__":
    main()

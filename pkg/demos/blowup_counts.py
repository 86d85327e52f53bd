"""Largest total vortex count under cyclic capacity constraints.

Compares the exact integer optimum with the closed form for a few
capacity vectors, including one where the even-length closed form is too
large, then searches all couplings of three sources.

Run with ``python demos/blowup_counts.py``.
"""

from vortexeq.combinatorics import best_coupling_search, max_n_exact


def main() -> None:
    for a in [(2, 3), (1, 2, 3), (2, 1, 3, 4), (3, 3, 3, 3, 3), (1, 1, 3, 1, 1, 3)]:
        res = max_n_exact(a)
        flag = "" if res.agreement else "   <- closed form overestimates"
        print(f"a = {a}: exact {res.n_exact}, closed form {res.n_formula:g}, witness {res.witness}{flag}")

    search = best_coupling_search([1.5, 1.5, 4.0])
    print(f"alpha = (1.5, 1.5, 4.0): best over {search.n_couplings} couplings gives N = {search.best.n_exact}")
    print(f"  best coupling sets J = {[sorted(j) for j in search.best_coupling.J]}")
    print(f"  best single-cycle coupling gives N = {search.best_single_cycle.n_exact}")


if __name__ == "__main__":
    main()

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from vortexeq.combinatorics import CouplingSpec
from vortexeq.energy import (
    Background,
    SourceSet,
    VortexConfig,
    VortexProblem,
    check_compactness,
    check_theorem_conditions,
    grad_hamiltonian,
    hamiltonian_free,
    hamiltonian_reduced,
    is_admissible,
    phi,
    psi_pm,
    quantity_A,
    regular_part_sum,
)
from vortexeq.surface import SingularityError, UnitSphere

from conftest import SURFACES, spread_points

SPHERE = UnitSphere()


def random_rotation(rng):
    q, r = np.linalg.qr(rng.normal(size=(3, 3)))
    q = q * np.sign(np.diag(r))
    return q if np.linalg.det(q) > 0 else -q


def random_problem(surface, rng, n=3, ell=2, with_bg=True):
    pts = spread_points(surface, rng, n + ell, 0.25)
    gamma = rng.uniform(0.5, 2.0, n)
    alpha = rng.uniform(0.3, 3.0, ell)
    bg = None
    if with_bg and surface.dim == 3:
        coef = rng.normal(size=3)
        bg = Background(h=lambda x: (x * x) @ coef, grad_h=lambda x: 2 * x * coef)
    elif with_bg:
        bg = Background(h=lambda x: np.sin(2 * np.pi * x[..., 0]))  # finite-difference gradient
    return VortexConfig(surface, pts[:n], gamma), SourceSet(pts[n:], alpha), bg


# ---------------------------------------------------------------------------
# free Hamiltonian


def test_free_single_vortex_is_self_term(surface, rng):
    c = VortexConfig(surface, surface.sample(rng, 1), [1.7])
    assert hamiltonian_free(c) == pytest.approx(1.7**2 * surface.regular_diagonal(), abs=1e-14)


def test_free_rotation_invariance(rng):
    x = spread_points(SPHERE, rng, 2, 0.2)
    rot = random_rotation(rng)
    a = hamiltonian_free(VortexConfig(SPHERE, x, [1.0, 1.0]))
    b = hamiltonian_free(VortexConfig(SPHERE, x @ rot.T, [1.0, 1.0]))
    assert a == pytest.approx(b, abs=1e-10)


def test_free_allows_signed_strengths(surface, rng):
    x = spread_points(surface, rng, 3, 0.2)
    assert np.isfinite(hamiltonian_free(VortexConfig(surface, x, [1.0, -2.0, 0.5])))


def test_swap_of_identical_vortices_is_exact(surface, rng):
    c, src, bg = random_problem(surface, rng, n=3)
    g = np.array([1.3, 1.3, 0.7])
    c = VortexConfig(surface, c.positions, g)
    swapped = c.with_positions(c.positions[[1, 0, 2]])
    assert hamiltonian_free(c) == hamiltonian_free(swapped)
    for f in (hamiltonian_reduced, phi, regular_part_sum):
        assert f(c, src, bg) == f(swapped, src, bg)
    for sign in (1, -1):
        assert psi_pm(c, src, sign) == psi_pm(swapped, src, sign)


# ---------------------------------------------------------------------------
# reduced Hamiltonian, Phi and Psi


def test_reduced_single_vortex_without_sources_is_zero(surface, rng):
    c = VortexConfig(surface, surface.sample(rng, 1), [1.0])
    assert hamiltonian_reduced(c) == 0.0


def test_reduced_equals_skeleton_plus_regular_part(surface, rng):
    for _ in range(10):
        c, src, bg = random_problem(surface, rng)
        total = psi_pm(c, src, +1) + regular_part_sum(c, src, bg)
        assert hamiltonian_reduced(c, src, bg) == pytest.approx(total, abs=1e-10)


def test_energy_sum_and_difference_identities(surface, rng):
    c, src, bg = random_problem(surface, rng)
    s = surface
    x, g = c.positions, c.strengths
    pair = sum(g[j] * g[k] * float(s.green(x[j], x[k])) for j in range(3) for k in range(3) if j != k)
    src_sum = sum(
        a * g[j] * float(s.green(x[j], p)) for a, p in zip(src.strengths, src.positions) for j in range(3)
    )
    h_sum = float(np.sum(bg.value(s, x)))
    H, F = hamiltonian_reduced(c, src, bg), phi(c, src, bg)
    assert H + F == pytest.approx(2 * pair + 2 * h_sum, abs=1e-10)
    assert H - F == pytest.approx(-2 * src_sum, abs=1e-10)


def test_phi_single_vortex_single_source(surface, rng):
    x = spread_points(surface, rng, 2, 0.2)
    c = VortexConfig(surface, x[:1], [1.4])
    src = SourceSet(x[1:], [2.5])
    assert phi(c, src) == pytest.approx(2.5 * 1.4 * float(surface.green(x[0], x[1])), abs=1e-13)


def test_psi_minus_relation(surface, rng):
    c, src, _ = random_problem(surface, rng)
    s = surface
    logs = sum(
        a / (2 * math.pi) * gj * math.log(float(s.distance(xj, p)))
        for a, p in zip(src.strengths, src.positions)
        for gj, xj in zip(c.strengths, c.positions)
    )
    assert psi_pm(c, src, -1) == pytest.approx(psi_pm(c, src, +1) - 2 * logs, abs=1e-12)


def test_isometry_invariance_on_sphere(rng):
    c, src, _ = random_problem(SPHERE, rng, with_bg=False)
    rot = random_rotation(rng)
    c2 = c.with_positions(c.positions @ rot.T)
    src2 = SourceSet(src.positions @ rot.T, src.strengths)
    for f in (hamiltonian_reduced, phi):
        assert f(c, src) == pytest.approx(f(c2, src2), abs=1e-10)
    for sign in (1, -1):
        assert psi_pm(c, src, sign) == pytest.approx(psi_pm(c2, src2, sign), abs=1e-10)


def slope_against_minus_log(fn, distances):
    vals = [fn(d) for d in distances]
    return np.polyfit(-np.log(distances), vals, 1)[0]


def test_reduced_energy_blows_up_at_vortex_collision():
    gamma = np.array([1.5, 0.8])
    base = np.array([1.0, 0.0, 0.0])

    def energy(d):
        other = np.array([math.cos(d), math.sin(d), 0.0])
        return hamiltonian_reduced(VortexConfig(SPHERE, np.stack([base, other]), gamma))

    slope = slope_against_minus_log(energy, np.logspace(-6, -3, 12))
    # ordered pair sum: both (j, k) and (k, j) carry -log d / 2pi
    assert slope == pytest.approx(2 * gamma[0] * gamma[1] / (2 * math.pi), rel=0.05)


def test_phi_blows_up_at_source_collision():
    alpha, gamma = 2.5, 1.2
    src = SourceSet([[0.0, 0.0, 1.0]], [alpha])

    def value(d):
        x = np.array([[math.sin(d), 0.0, math.cos(d)]])
        return phi(VortexConfig(SPHERE, x, [gamma]), src)

    slope = slope_against_minus_log(value, np.logspace(-6, -3, 12))
    assert slope == pytest.approx(alpha * gamma / (2 * math.pi), rel=0.05)


def test_collision_is_reported_with_indices(rng):
    x = SPHERE.sample(rng, 2)
    c = VortexConfig(SPHERE, np.stack([x[0], x[1], x[0]]), [1.0, 1.0, 1.0])
    with pytest.raises(SingularityError, match="vortices 0 and 2"):
        hamiltonian_reduced(c)
    src = SourceSet(x[1:], [1.0])
    with pytest.raises(SingularityError, match="source 0"):
        phi(VortexConfig(SPHERE, x, [1.0, 1.0]), src)
    assert not is_admissible(c)


def test_reduced_model_rejects_negative_strengths(rng):
    c = VortexConfig(SPHERE, spread_points(SPHERE, rng, 2, 0.2), [1.0, -1.0])
    with pytest.raises(ValueError):
        hamiltonian_reduced(c)


# ---------------------------------------------------------------------------
# gradient


def fd_gradient(c, src, bg, h=1e-6):
    s = c.surface
    out = np.zeros_like(c.positions)
    for j in range(len(c)):
        frame = s.frame(c.positions[j])
        for a in range(2):
            e = frame[:, a] * h
            xp, xm = c.positions.copy(), c.positions.copy()
            xp[j] = s.retract(c.positions[j], e)
            xm[j] = s.retract(c.positions[j], -e)
            d = (hamiltonian_reduced(c.with_positions(xp), src, bg) - hamiltonian_reduced(c.with_positions(xm), src, bg)) / (2 * h)
            out[j] += d * frame[:, a]
    return out


@pytest.mark.parametrize("kind", sorted(SURFACES))
def test_gradient_matches_finite_differences(kind):
    s = SURFACES[kind]
    rng = np.random.default_rng(hash(kind) % 2**32)
    for _ in range(200):
        c, src, bg = random_problem(s, rng, n=3, ell=2)
        g = grad_hamiltonian(c, src, bg)
        fd = fd_gradient(c, src, bg)
        assert np.linalg.norm(g - fd) <= 1e-6 * max(1.0, np.linalg.norm(g))


def test_gradient_vanishes_on_equator_between_equal_sinks(rng):
    src = SourceSet([[0, 0, 1.0], [0, 0, -1.0]], [1.3, 1.3])
    for phase in rng.uniform(0, 2 * math.pi, 10):
        c = VortexConfig(SPHERE, [[math.cos(phase), math.sin(phase), 0.0]], [1.0])
        assert np.linalg.norm(grad_hamiltonian(c, src)) < 1e-8


def test_gradient_vanishes_at_antipodal_pair(rng):
    x = SPHERE.sample(rng, 1)[0]
    c = VortexConfig(SPHERE, np.stack([x, -x]), [1.0, 1.0])
    assert np.linalg.norm(grad_hamiltonian(c)) < 1e-8


def test_problem_wrapper_matches_functions(rng):
    c, src, bg = random_problem(SPHERE, rng)
    prob = VortexProblem(SPHERE, c.strengths, src, bg)
    assert prob.energy(c.positions) == hamiltonian_reduced(c, src, bg)
    assert prob.phi(c.positions) == phi(c, src, bg)
    assert np.array_equal(prob.gradient(c.positions), grad_hamiltonian(c, src, bg))


# ---------------------------------------------------------------------------
# quantity A


def three_source_example(rng):
    src = SourceSet([[0, 0, 1.0], [0, 0, -1.0], [1.0, 0, 0]], [1.5, 1.5, 4.0])
    x = spread_points(SPHERE, rng, 7, 0.3)
    x = np.array([p for p in x if np.min(SPHERE.distance(p, src.positions)) > 0.3][:4])
    return VortexConfig(SPHERE, x, np.ones(4)), src


def test_quantity_A_negative_for_three_source_example(rng):
    for _ in range(5):
        c, src = three_source_example(rng)
        assert quantity_A(c, src) < 0


def test_quantity_A_zero_when_bracket_vanishes(rng):
    # total source strength 2N - 2 with N = 2 makes the bracket zero
    pts = spread_points(SPHERE, rng, 4, 0.3)
    c = VortexConfig(SPHERE, pts[:2], [1.0, 1.0])
    src = SourceSet(pts[2:], [0.5, 1.5])
    assert quantity_A(c, src) == pytest.approx(0.0, abs=1e-12)


@given(st.floats(0.2, 10.0), st.floats(0.2, 10.0), st.integers(0, 10_000))
def test_quantity_A_sign_follows_bracket(a1, a2, seed):
    rng = np.random.default_rng(seed)
    pts = spread_points(SPHERE, rng, 5, 0.3)
    c = VortexConfig(SPHERE, pts[:3], np.ones(3))
    src = SourceSet(pts[3:], [a1, a2])
    bracket = 2 * 3 - (a1 + a2) - 2
    value = quantity_A(c, src)
    if abs(bracket) > 1e-9:
        assert np.sign(value) == np.sign(bracket)


def test_quantity_A_requires_unit_strengths(rng):
    c = VortexConfig(SPHERE, spread_points(SPHERE, rng, 2, 0.2), [1.0, 2.0])
    with pytest.raises(ValueError):
        quantity_A(c)


# ---------------------------------------------------------------------------
# hypothesis checkers


@pytest.mark.parametrize(
    "gamma, alpha, holds, witness",
    [
        ((1, 1, 1), 2.0, False, (0, 1, 2)),
        ((1, 1, 1), 1.5, True, None),
        ((1, 2), 4 / 3, False, (0, 1)),
    ],
)
def test_compactness_examples(gamma, alpha, holds, witness):
    res = check_compactness(gamma, alpha)
    assert res.holds is holds
    if witness is not None:
        assert res.witness == witness


@given(st.integers(1, 8), st.floats(0.05, 10.0))
def test_unit_compactness_reduces_to_integer_avoidance(n, alpha):
    expected = not any(abs(alpha - m) <= 1e-9 for m in range(1, n))
    assert check_compactness([1.0] * n, alpha).holds is expected


def test_compactness_rejects_oversize():
    with pytest.raises(Exception):
        check_compactness([1.0] * 25, 0.5)


def test_three_source_example_conditions():
    cpl = CouplingSpec((frozenset(), frozenset({2}), frozenset({0, 1})))
    rep = check_theorem_conditions([1.0] * 4, [1.5, 1.5, 4.0], "sphere", cpl, counts=[2, 2, 0])
    assert rep["unit_compactness"].holds
    assert rep["integer_coupling_capacity"].holds
    assert rep["integer_coupling_capacity"].detail == "slack [0, 0, 0]"
    assert rep.theorem_applies


def test_single_vortex_single_source_strength_ratio():
    rep = check_theorem_conditions([1.0], [0.7], "projective_plane")
    assert rep["strength_ratio_below_max"].holds
    assert rep["strength_ratio_below_max"].lhs == (0.0,)


@pytest.mark.parametrize("alpha_max, holds", [(0.5, False), (1.5, False), (2.5, True)])
def test_interaction_dominance_ordered_pairs(alpha_max, holds):
    rep = check_theorem_conditions([1.0] * 3, [0.3, alpha_max])
    # ordered pair sum N(N-1) = 6 against alpha_max * N
    assert rep["interaction_dominance"].lhs == (6.0,)
    assert rep["interaction_dominance"].holds is holds


def test_conditions_reject_mismatched_counts():
    cpl = CouplingSpec.consecutive(3)
    with pytest.raises(ValueError):
        check_theorem_conditions([1.0] * 4, [1.5, 1.5, 4.0], "sphere", cpl, counts=[1, 1, 1])


def test_consecutive_capacity_reported():
    cpl = CouplingSpec.consecutive(3)
    rep = check_theorem_conditions([1.0] * 3, [1.5, 2.5, 3.5], "sphere", cpl, counts=[1, 1, 1])
    assert rep["consecutive_capacity"].holds is True
    assert rep.as_dict()["conditions"]["consecutive_capacity"]["lhs"] == [2.0, 2.0, 2.0]

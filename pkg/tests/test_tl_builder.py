import cmath

import pytest
from hypothesis import given, settings, strategies as st

from tlcat.category_zoo import PHI, build_fibonacci, build_ising, su2, su2_level
from tlcat.monoidal_system import HypothesisError, StructureError
from tlcat.qnumbers import delta
from tlcat.tl_builder import (
    ChainSpec, NotProportionalError, build_family, compute_c, family_for, loop_parameter, periodic_constraint_check,
    prefactors, projection_matrix, resolve_c0, simplicity, verify_c_homogeneity, verify_projection_relations, verify_tl,
)

from conftest import with_entries

FIB = build_fibonacci()
ISING = build_ising()


def test_chain_spec_checks():
    with pytest.raises(StructureError):
        ChainSpec(FIB, ("tau", "tau", "tau"), ("1",))
    with pytest.raises(StructureError):
        ChainSpec(FIB, ("tau", "tau"), ("1", "1"))
    with pytest.raises(HypothesisError, match="empty"):
        ChainSpec(ISING, ("sigma", "psi"), ("1",))  # sigma x psi has no 1 channel
    chain = ChainSpec.homogeneous(FIB, "τ", "1", 5)
    assert chain.L == 5 and chain.n_projections == 4 and chain.n_constants == 3 and chain.is_homogeneous()
    ring = ChainSpec.homogeneous(FIB, "tau", "1", 5, periodic=True)
    assert ring.n_projections == 5 and ring.n_constants == 5
    assert ring.lam(6) == "tau" and ring.nu(0) == "1"


def test_projection_matrix_is_idempotent_and_local():
    chain = ChainSpec.homogeneous(FIB, "tau", "1", 4)
    basis = chain.basis()
    for i in (1, 2, 3):
        p = projection_matrix(chain, basis, i)
        assert (p @ p - p).norm_max() < 1e-15
        for (r, c) in p.entries():
            a, b = basis.states[r], basis.states[c]
            assert all(a[j] == b[j] for j in range(len(a)) if j != i)
            assert a[i - 1] == a[i + 1]  # trivial channel: mu_{i-1} = mu_{i+1}


def test_fibonacci_constant():
    chain = ChainSpec.homogeneous(FIB, "tau", "1", 4, c0="auto")
    assert compute_c(chain, 1) == pytest.approx(1 / PHI ** 2, abs=1e-15)
    fam = build_family(chain)
    assert fam.c0 == pytest.approx(PHI)
    assert fam.delta == pytest.approx(PHI, abs=1e-14)


@pytest.mark.parametrize("q", [1.0, 1.3, cmath.exp(0.3j)])
def test_su2_constant_is_inverse_delta_squared(q):
    chain = ChainSpec.homogeneous(su2(q, max_label=4), 1, 0, 4, start=(0,))
    d = delta(q)
    for i in (1, 2):
        assert abs(compute_c(chain, i) - 1 / d ** 2) < 1e-12


def test_ising_channels():
    for nu, c in (("1", 0.5), ("psi", 0.5)):
        chain = ChainSpec.homogeneous(ISING, "sigma", nu, 5)
        assert verify_c_homogeneity(chain).max_deviation < 1e-15
        assert compute_c(chain, 1) == pytest.approx(c, abs=1e-15)


def test_simplicity_failure_reported():
    chain = ChainSpec.homogeneous(su2(1.3, max_label=6), 1, 2, 4, start=(0,))
    info = simplicity(chain, 1)
    assert info["right"] is None and "summands" in info["right_error"]
    with pytest.raises(HypothesisError, match="simplicity"):
        compute_c(chain, 1)


@settings(max_examples=50, deadline=None)
@given(st.lists(st.complex_numbers(min_magnitude=0.1, max_magnitude=5, allow_nan=False, allow_infinity=False),
                min_size=1, max_size=8),
       st.complex_numbers(min_magnitude=0.1, max_magnitude=5, allow_nan=False, allow_infinity=False))
def test_prefactors_solve_cubic_conditions(cs, c0):
    # U_i U_{i+1} U_i = U_i for p_i p_{i+1} p_i = c_i p_i needs a_i a_{i+1} c_i = 1
    a = prefactors(cs, c0, len(cs) + 1)
    assert a[0] == c0
    for i, c in enumerate(cs):
        assert abs(a[i] * a[i + 1] * c - 1) < 1e-9


def test_resolve_c0():
    assert resolve_c0("auto", 0.25) == 2
    assert resolve_c0("-auto", 0.25) == -2
    assert resolve_c0(3, 0.25) == 3
    with pytest.raises(HypothesisError):
        prefactors([0.5], 0, 2)


CHAINS = [
    ("fibonacci", FIB, "tau", "1", None),
    ("ising-1", ISING, "sigma", "1", None),
    ("ising-psi", ISING, "sigma", "psi", None),
    ("su2-1.3", su2(1.3, max_label=8), 1, 0, (0,)),
    ("level-3", su2_level(3), 1, 0, None),
]


@pytest.mark.parametrize("name,sys,lam,nu,start", CHAINS, ids=[c[0] for c in CHAINS])
def test_tl_relations_L8(name, sys, lam, nu, start):
    fam = family_for(sys, lam, nu, 8, start=start)
    rep = verify_tl(fam, 1e-9)
    assert rep.ok, rep.residuals
    assert all(abs(d - fam.delta) < 1e-12 for d in fam.loops)
    th = verify_projection_relations(fam, 1e-10)
    assert th.ok
    assert th.c_mismatch < 1e-10


def test_wrong_c0_open_chain_breaks_loop_relation():
    fam = family_for(FIB, "tau", "1", 6, c0=2.0)
    rep = verify_tl(fam, 1e-9)
    assert not rep.ok
    assert rep.residuals["loop"] > 1e-3
    # the alternating d_i: c0 on odd sites, 1/(c c0) on even ones
    c = fam.constants[0]
    assert fam.loops[0] == pytest.approx(2.0)
    assert fam.loops[1] == pytest.approx(1 / (c * 2.0))


def test_degenerate_two_strands():
    fam = family_for(FIB, "tau", "1", 2, c0=PHI)
    rep = verify_tl(fam, 1e-10)
    assert rep.applicable == {"loop": True, "commute": False, "cubic_right": False, "cubic_left": False}
    assert rep.ok and rep.delta == pytest.approx(PHI)


def test_loop_parameter():
    fam = family_for(FIB, "tau", "1", 3)
    assert loop_parameter(fam.generators[0]) == pytest.approx(PHI)
    basis = fam.basis
    from tlcat.path_basis import SparseOperator
    ent = dict(fam.generators[0].entries())
    (r, c) = next(iter(ent))
    ent[(r, c)] *= 3
    with pytest.raises(NotProportionalError):
        loop_parameter(SparseOperator.from_entries(basis, ent) @ fam.generators[1] + fam.generators[0])


def test_periodic_odd_constraint():
    ring = ChainSpec.homogeneous(FIB, "tau", "1", 5, periodic=True, c0=1.0)
    rep = periodic_constraint_check(ring, 1e-9)
    assert rep.ok
    good = [t for t in rep.trials if t["expected_pass"]]
    bad = [t for t in rep.trials if not t["expected_pass"]]
    assert len(good) == 2 and all(t["passed"] for t in good)
    assert bad[0]["c0"] == 1 and bad[0]["cubic_residual"] > 1e-3


def test_periodic_even_free():
    ring = ChainSpec.homogeneous(FIB, "tau", "1", 6, periodic=True)
    rep = periodic_constraint_check(ring, 1e-9)
    assert rep.ok and len({t["c0"] for t in rep.trials}) == 3
    assert all(t["passed"] for t in rep.trials)


def test_perturbed_table_fails_tl():
    key = ("tau", "tau", "tau", "tau", "1", "1")
    bad = with_entries(FIB, {key: FIB.f_symbol(*key) + 0.1})
    fam = family_for(bad, "tau", "1", 6)
    rep = verify_tl(fam, 1e-9)
    assert not rep.ok
    assert max(rep.residuals["cubic_right"], rep.residuals["cubic_left"]) > 1e-3


def test_outside_window_is_hypothesis_error():
    sys = su2(1.3, max_label=3)
    chain = ChainSpec.homogeneous(sys, 1, 0, 5, start=(0,))
    with pytest.raises(HypothesisError, match="window"):
        build_family(chain)


def test_inhomogeneous_chain_reported():
    mixed = ChainSpec(ISING, ("sigma",) * 4, ("1", "psi", "1"))
    assert not mixed.is_homogeneous()
    rep = verify_c_homogeneity(mixed)
    assert rep.ok and rep.values == [pytest.approx(0.5)] * 2
    broken = ChainSpec(su2(1.3, max_label=6), (1, 1, 2, 2), (0, 1, 0), start=(0,))
    rep = verify_c_homogeneity(broken)
    assert not rep.ok and rep.values[0] is None
    assert "simplicity" in rep.failures[1]

import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from tlcat.category_zoo import PHI, build_fibonacci, su2
from tlcat.monoidal_system import (
    FusionRules, Label, MonoidalSystem, SingularBlockError, StructureError, check_inverses, check_pentagon,
    check_unit_constraints, is_multiplicity_free, validate_fusion,
)

from conftest import with_entries

FIB_N = {("1", "1", "1"): 1, ("1", "tau", "tau"): 1, ("tau", "1", "tau"): 1,
         ("tau", "tau", "1"): 1, ("tau", "tau", "tau"): 1}


def brute_assoc(n, ids):
    bad = []
    for a, b, c, d in itertools.product(ids, repeat=4):
        lhs = sum(n.get((e, c, d), 0) * n.get((a, b, e), 0) for e in ids)
        rhs = sum(n.get((a, f, d), 0) * n.get((b, c, f), 0) for f in ids)
        if lhs != rhs:
            bad.append((a, b, c, d))
    return bad


def test_fibonacci_fusion_valid():
    rep = validate_fusion(FusionRules(FIB_N), ["1", "tau"], "1")
    assert rep.ok and rep.checked > 0
    assert brute_assoc(FIB_N, ["1", "tau"]) == []


def test_missing_unit_entry_is_one_violation():
    n = dict(FIB_N)
    del n[("1", "tau", "tau")]
    rep = validate_fusion(FusionRules(n), ["1", "tau"], "1")
    unit_law = [v for v in rep.violations if "unit" in v.kind]
    assert len(unit_law) == 1
    assert unit_law[0].where == ("tau", "tau")
    assert "N^tau_{1,tau}" in unit_law[0].detail


def test_truncated_su2_rules_break_associativity():
    ids = range(4)
    n = {(a, b, c): 1 for a, b, c in itertools.product(ids, repeat=3)
         if abs(a - b) <= c <= a + b and (a + b + c) % 2 == 0}
    rep = validate_fusion(FusionRules(n), list(ids), 0)
    found = {v.where for v in rep.violations if v.kind.startswith("assoc")}
    assert found == set(brute_assoc(n, list(ids)))
    assert found and all(3 in w for w in found)
    assert any(sorted(w) == [1, 1, 3, 3] for w in found)


def test_unknown_label_is_structural_error():
    n = dict(FIB_N)
    n[("tau", "tau", "x")] = 1
    with pytest.raises(StructureError):
        validate_fusion(FusionRules(n), ["1", "tau"], "1")
    with pytest.raises(StructureError):
        validate_fusion(FusionRules(FIB_N), ["1", "tau"], "nope")
    with pytest.raises(StructureError):
        validate_fusion(FusionRules(FIB_N), [], "1")


def test_multiplicity_free_flag():
    assert is_multiplicity_free(FusionRules(FIB_N))
    assert is_multiplicity_free(su2(1.0, 3).rules)
    n = dict(FIB_N)
    n[("tau", "tau", "tau")] = 2
    rules = FusionRules(n)
    assert not is_multiplicity_free(rules)
    with pytest.raises(StructureError):
        MonoidalSystem(["1", "tau"], "1", rules, {})


def test_fibonacci_values(fib):
    assert fib.f_symbol("tau", "tau", "tau", "tau", "1", "1") == pytest.approx(1 / PHI, abs=1e-15)
    assert fib.f_symbol("tau", "1", "tau", "tau", "tau", "tau") == 1
    # inadmissible: 1 x 1 does not contain tau
    assert fib.f_symbol("1", "1", "tau", "tau", "tau", "tau") == 0
    with pytest.raises(StructureError):
        fib.f_symbol("tau", "tau", "tau", "tau", "1", "sigma")


def test_fibonacci_inverse_is_itself(fib):
    es, fs, mat = fib.block("tau", "tau", "tau", "tau")
    np.testing.assert_allclose(mat, mat.T, atol=1e-15)
    for e in es:
        for f in fs:
            assert fib.f_inverse("tau", "tau", "tau", "tau", f, e) == pytest.approx(mat[es.index(e), fs.index(f)], abs=1e-15)
    assert check_inverses(fib) < 1e-14


def test_scalar_block_inverse(fib):
    z = 0.3 - 2j
    bad = with_entries(fib, {("tau", "tau", "tau", "1", "tau", "tau"): z})
    assert bad.f_inverse("tau", "tau", "tau", "1", "tau", "tau") == pytest.approx(1 / z)


def test_singular_block_raises(fib):
    key = ("tau", "tau", "tau", "tau")
    changes = {key + (e, f): 1.0 for e in ("1", "tau") for f in ("1", "tau")}
    bad = with_entries(fib, changes)
    with pytest.raises(SingularBlockError, match="tau"):
        bad.f_inverse(*key, "1", "1")


def test_pentagon_builtins(fib, ising):
    for sys in (fib, ising):
        rep = check_pentagon(sys)
        assert rep.max_residual < 1e-12 and rep.ok
        assert rep.nontrivial > 0 and rep.equations >= rep.nontrivial
    assert check_pentagon(fib).nontrivial == 13


def test_pentagon_perturbation(fib):
    key = ("tau", "tau", "tau", "tau", "1", "1")
    bad = with_entries(fib, {key: fib.f_symbol(*key) + 0.1})
    rep = check_pentagon(bad)
    assert rep.max_residual > 1e-3 and not rep.ok
    assert rep.worst is not None


def test_unit_constraints(fib, ising, su2_small):
    for sys in (fib, ising, su2_small):
        assert check_unit_constraints(sys).ok
    key = ("tau", "1", "tau", "1", "tau", "tau")
    rep = check_unit_constraints(with_entries(fib, {key: 0.5}))
    assert len(rep.violations) == 1
    assert rep.violations[0].deviation == pytest.approx(0.5)
    rep = check_unit_constraints(with_entries(fib, drop=[key]))
    assert [v.kind for v in rep.violations] == ["unit-missing"]


def test_label_resolution(fib):
    assert fib.label("τ") == "tau"
    assert su2(1.0, 2).label("2") == 2
    with pytest.raises(StructureError):
        fib.label("phi")
    assert str(Label(3)) == "3"


def _gauge(sys, u):
    """Apply a vertex gauge ``u(a, b, c)`` (trivial on unit vertices)."""
    out = {}
    for (a, b, c, d, e, f), v in sys.f_entries():
        out[(a, b, c, d, e, f)] = v * u[(a, b, e)] * u[(e, c, d)] / (u[(b, c, f)] * u[(a, f, d)])
    return with_entries(sys, out)


@settings(max_examples=25, deadline=None)
@given(st.lists(st.complex_numbers(min_magnitude=0.3, max_magnitude=3.0, allow_nan=False, allow_infinity=False),
                min_size=8, max_size=8))
def test_pentagon_gauge_invariant(values):
    fib = build_fibonacci()
    it = iter(values)
    u = {}
    for key, _ in fib.rules.items():
        u[key] = 1.0 if fib.unit in key[:2] else next(it)
    rep = check_pentagon(_gauge(fib, u))
    assert rep.max_residual < 1e-10 * max(1.0, max(abs(v) for v in values) ** 6)
    assert check_unit_constraints(_gauge(fib, u)).ok


def test_pentagon_inverse_transpose_invariant(ising, su2_small):
    # replacing every block by its inverse transpose is another solution
    for sys in (ising, su2_small):
        table = {}
        for blk in sys.blocks():
            es, fs, mat = sys.block(*blk)
            inv_t = np.linalg.inv(mat).T
            for (i, e), (j, f) in itertools.product(enumerate(es), enumerate(fs)):
                table[blk + (e, f)] = inv_t[i, j]
        assert check_pentagon(with_entries(sys, table)).max_residual < 1e-10


def test_report_merge():
    from tlcat.monoidal_system import ValidationReport, Violation
    a = ValidationReport(3, [Violation("x", (1,), "", 0.2)])
    b = ValidationReport(2, [])
    m = a.merge(b)
    assert m.checked == 5 and not m.ok and m.max_deviation() == 0.2
    assert b.merge(a).max_deviation() == m.max_deviation()

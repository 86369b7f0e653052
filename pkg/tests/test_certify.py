"""Repeatability certification, the numerical cross-check, and POVM analysis."""

import numpy as np
import pytest

import qrepeat.opalgebra as oa
from qrepeat import (Dyad, Family, IndexSet, InvalidPovm, StructuredOperator,
                     UnsupportedForm, build_binary_example,
                     build_example_family, build_nonrepeatable_sibling,
                     build_orthogonal, certify_repeatable,
                     check_orthogonal, check_repeatability_numerical,
                     classify_povm, finite_dim_corollary_suite,
                     make_instrument)

EVENS = IndexSet.from_progression(2, 0)
ODDS = IndexSet.from_progression(2, 1)


def test_example_family_certifies_repeatable_non_orthogonal():
    rep = certify_repeatable(build_example_family(2, (0.5, 0.5)))
    assert rep.repeatable and rep.complete
    assert not rep.orthogonal
    assert rep.witnesses == ()
    for checks in rep.per_outcome.values():
        assert checks.isometric_on_range
        assert checks.range_in_support is True  # monomial, decided exactly
    for checks in rep.per_pair.values():
        assert checks.product_vanishes and checks.ranges_orthogonal


def test_degenerate_probability_recovers_orthogonality():
    # p = 1 makes the deposit block a plain dyad with unit weight and the
    # effects become projections
    rep = certify_repeatable(build_example_family(2, (1.0, 0.0)))
    assert rep.repeatable and rep.orthogonal


def test_sibling_fails_with_witnesses():
    rep = certify_repeatable(build_nonrepeatable_sibling(2, (0.5, 0.5)))
    assert not rep.repeatable
    assert rep.complete  # it is a genuine instrument, just not repeatable
    assert rep.witnesses
    assert any(not c.isometric_on_range for c in rep.per_outcome.values()) or \
        any(not c.product_vanishes for c in rep.per_pair.values())


def test_projective_partition_is_orthogonal():
    rep = certify_repeatable(build_orthogonal({"even": EVENS, "odd": ODDS}))
    assert rep.repeatable and rep.orthogonal and rep.complete


def test_incomplete_instrument_reports_completeness():
    inst = make_instrument({1: oa.projector(EVENS)}, check_completeness=False)
    rep = certify_repeatable(inst)
    assert not rep.complete
    assert not rep.repeatable
    assert any(w.condition == "completeness" for w in rep.witnesses)


def test_non_monomial_outcome_leaves_inclusion_undecided():
    c, s = np.cos(0.3), np.sin(0.3)
    rotation = StructuredOperator((Dyad(c, 0, 0), Dyad(s, 0, 1),
                                   Dyad(-s, 1, 0), Dyad(c, 1, 1),
                                   Family(1.0, 1, 2, 1, 2)))
    rep = certify_repeatable(make_instrument({1: rotation}))
    assert rep.repeatable  # a global unitary trivially repeats
    assert rep.per_outcome[1].range_in_support is None


def test_check_orthogonal_matches_effect_idempotence():
    assert check_orthogonal(build_orthogonal({0: EVENS, 1: ODDS}).povm())
    assert not check_orthogonal(build_example_family(2, (0.5, 0.5)).povm())


# -- numerical cross-check -----------------------------------------------------


def test_numerical_check_is_exact_on_the_example():
    devs = check_repeatability_numerical(build_example_family(2, (0.5, 0.5)),
                                         trials=25)
    assert max(devs.values()) == 0.0


def test_numerical_check_flags_the_sibling():
    devs = check_repeatability_numerical(build_nonrepeatable_sibling(2, (0.5, 0.5)),
                                         trials=25)
    assert max(devs.values()) > 0.05


def test_numerical_check_is_reproducible():
    inst = build_binary_example(0.3, 0.7)
    a = check_repeatability_numerical(inst, trials=10, seed=4)
    b = check_repeatability_numerical(inst, trials=10, seed=4)
    assert a == b


def test_finite_dim_suite_smoke():
    for dim in range(2, 7):
        for seed in range(3):
            assert finite_dim_corollary_suite(dim, seed)


# -- POVM classification ---------------------------------------------------------


def test_classify_example_povm():
    cls = classify_povm(build_example_family(2, (0.5, 0.5)).povm())
    assert cls.admits_repeatable_form
    assert cls.omega_set == IndexSet.from_indices([0])
    assert cls.z_sets[1] == ODDS
    assert cls.z_sets[2] == EVENS.difference(IndexSet.from_indices([0]))
    for label in (1, 2):
        assert oa.equals(cls.t[label],
                         StructuredOperator((Dyad(0.5, 0, 0),)))
        assert oa.equals(oa.add(cls.z[label], cls.t[label]),
                         build_example_family(2, (0.5, 0.5)).povm().effect(label))
    assert oa.equals(cls.z_omega, StructuredOperator((Dyad(1.0, 0, 0),)))


def test_classify_orthogonal_povm_has_empty_degenerate_part():
    cls = classify_povm(build_orthogonal({0: EVENS, 1: ODDS}).povm())
    assert cls.admits_repeatable_form
    assert cls.omega_set.is_empty
    assert all(t.is_zero() for t in cls.t.values())
    assert cls.z_sets[0] == EVENS and cls.z_sets[1] == ODDS


def test_classify_rejects_non_diagonal_povm():
    # projections onto (|0> +- |1>)/sqrt(2), with the rest of the basis
    # split between the outcomes, make a perfectly good POVM that is not
    # diagonal in the canonical basis
    plus = StructuredOperator((Dyad(0.5, 0, 0), Dyad(0.5, 0, 1),
                               Dyad(0.5, 1, 0), Dyad(0.5, 1, 1),
                               Family(1.0, 2, 2, 2, 2)))
    minus = StructuredOperator((Dyad(0.5, 0, 0), Dyad(-0.5, 0, 1),
                                Dyad(-0.5, 1, 0), Dyad(0.5, 1, 1),
                                Family(1.0, 2, 3, 2, 3)))
    pv = make_instrument({1: plus, 2: minus}).povm()
    with pytest.raises(UnsupportedForm):
        classify_povm(pv)


def test_classify_rejects_defective_weight_sums():
    inst = make_instrument(
        {1: StructuredOperator((Family(np.sqrt(0.5), 1, 0, 1, 0),)),
         2: StructuredOperator((Family(np.sqrt(0.4), 1, 0, 1, 0),))},
        check_completeness=False)
    with pytest.raises(InvalidPovm):
        classify_povm(inst.povm())


def test_classify_rejects_negative_effects():
    from qrepeat.instruments import Povm
    pv = Povm(((1, StructuredOperator((Family(1.5, 1, 0, 1, 0),))),
               (2, StructuredOperator((Family(-0.5, 1, 0, 1, 0),)))))
    with pytest.raises(InvalidPovm):
        classify_povm(pv)

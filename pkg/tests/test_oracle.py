import random

import pytest

from mrkit.mir import interpret, parse_program
from mrkit.oracle import (
    MR_IDS,
    MR_SPECS,
    MrLabelSet,
    OracleError,
    OracleParams,
    apply_mr,
    audit_labels,
    check_relation,
    label_method,
)

PINNED_C = OracleParams(min_const=1, max_const=1)


def test_mr_spec_relations():
    assert {mr: MR_SPECS[mr].relation for mr in MR_IDS} == {
        "ADD": "GEQ", "MUL": "GEQ", "PER": "EQ",
        "INC": "GEQ", "EXC": "LEQ", "INV": "LEQ",
    }


def test_apply_add_with_unit_constant():
    rng = random.Random(0)
    assert apply_mr("ADD", [1, 2, 3], rng, PINNED_C) == [2.0, 3.0, 4.0]


def test_apply_mul_scales():
    rng = random.Random(0)
    out = apply_mr("MUL", [1, 2, 3], rng, OracleParams(min_const=3, max_const=3))
    assert out == [3.0, 6.0, 9.0]


def test_apply_inv():
    rng = random.Random(0)
    assert apply_mr("INV", [2, 4], rng) == [0.5, 0.25]
    with pytest.raises(OracleError, match="zero"):
        apply_mr("INV", [0, 2], rng)


def test_apply_per_never_identity():
    rng = random.Random(1)
    for _ in range(50):
        source = [1.0, 2.0]
        out = apply_mr("PER", source, rng)
        assert sorted(out) == source and out != source
    with pytest.raises(OracleError):
        apply_mr("PER", [5], rng)


def test_apply_exc_removes_one():
    rng = random.Random(2)
    source = [5.0, 6.0, 7.0]
    out = apply_mr("EXC", source, rng)
    assert len(out) == 2
    leftover = list(source)
    for v in out:
        leftover.remove(v)
    assert len(leftover) == 1
    with pytest.raises(OracleError):
        apply_mr("EXC", [1], rng)


def test_apply_inc_appends():
    rng = random.Random(3)
    source = [1.0, 2.0]
    out = apply_mr("INC", source, rng)
    assert out[:2] == source and len(out) == 3
    assert 0 <= out[2] <= 100


def test_check_relation_cases():
    ok, cause = check_relation("ADD", 6.0, 9.0)
    assert ok and cause is None
    ok, cause = check_relation("EXC", 6.0, 7.0)
    assert not ok and "increased" in cause
    ok, _ = check_relation("PER", 1.0, 1.0 + 1e-12)
    assert ok
    ok, cause = check_relation("MUL", 1.0, float("inf"))
    assert not ok and "non-finite" in cause
    ok, cause = check_relation("PER", float("nan"), 1.0)
    assert not ok


def test_label_known_rows(corpus_functions):
    assert label_method(corpus_functions["sum"]).labels.as_bits() == (1, 1, 1, 1, 1, 1)
    assert label_method(corpus_functions["average"]).labels.as_bits() == (1, 1, 1, 0, 0, 1)
    assert label_method(corpus_functions["find_max"]).labels.as_bits() == (1, 1, 1, 1, 1, 1)


def test_negative_labels_carry_replayable_witness(corpus_functions):
    report = label_method(corpus_functions["average"])
    for mr in ("INC", "EXC"):
        outcome = report.outcomes[mr]
        assert not outcome.label
        w = outcome.witness
        assert w is not None and w.cause
        out_src = interpret(corpus_functions["average"], list(w.source))
        out_fu = interpret(corpus_functions["average"], list(w.follow_up))
        assert out_src == w.out_source and out_fu == w.out_follow_up
        ok, _ = check_relation(mr, out_src, out_fu)
        assert not ok


def test_positive_labels_report_full_trial_count(corpus_functions):
    report = label_method(corpus_functions["sum"])
    for mr in MR_IDS:
        assert report.outcomes[mr].label
        assert report.outcomes[mr].trials_run == 200


def test_label_deterministic(corpus_functions):
    fn = corpus_functions["variance"]
    a = label_method(fn)
    b = label_method(fn)
    assert a.labels.as_bits() == b.labels.as_bits()
    for mr in MR_IDS:
        wa, wb = a.outcomes[mr].witness, b.outcomes[mr].witness
        assert (wa is None) == (wb is None)
        if wa is not None:
            assert wa.source == wb.source and wa.follow_up == wb.follow_up


def test_trapping_method_labels_all_false():
    src = "fn boom(a) {\n  x = a[0]\n  y = 0\n  return x / y\n}\n"
    fn = parse_program(src).functions[0]
    report = label_method(fn, OracleParams(trials=5))
    assert report.labels.as_bits() == (0, 0, 0, 0, 0, 0)
    for mr in MR_IDS:
        assert "trap" in report.outcomes[mr].witness.cause


def test_audit_empty_on_matching_trio(corpus_functions, dataset):
    dynamic = {name: label_method(corpus_functions[name])
               for name in ("sum", "average", "find_max")}
    reference = {name: dataset.entry(name).labels
                 for name in ("sum", "average", "find_max")}
    audit = audit_labels(dynamic, reference)
    assert audit.discrepancies == ()
    assert audit.unmatched == ()


def test_audit_flipped_bit_and_categories(corpus_functions, dataset):
    dynamic = {"average": label_method(corpus_functions["average"])}
    bits = list(dataset.entry("average").labels.as_bits())
    bits[0] ^= 1  # claim ADD does not apply
    audit = audit_labels(dynamic, {"average": MrLabelSet.from_bits(bits)})
    assert len(audit.discrepancies) == 1
    d = audit.discrepancies[0]
    assert d.mr == "ADD" and d.category == "unconfirmed-negative"
    assert d.witness is None

    bits = list(dataset.entry("average").labels.as_bits())
    bits[3] ^= 1  # claim INC applies; the oracle has a witness against it
    audit = audit_labels(dynamic, {"average": MrLabelSet.from_bits(bits)})
    assert len(audit.discrepancies) == 1
    d = audit.discrepancies[0]
    assert d.mr == "INC" and d.category == "violation" and d.witness is not None


def test_audit_unmatched_names(corpus_functions, dataset):
    dynamic = {"sum": label_method(corpus_functions["sum"])}
    audit = audit_labels(dynamic, {"nosuch": dataset.entry("sum").labels})
    assert set(audit.unmatched) == {"sum", "nosuch"}


def test_monotone_sum_holds_on_every_trial(corpus_functions):
    """For sum over non-negative inputs every relation holds on every
    sampled trial, checked directly rather than via the aggregate."""
    fn = corpus_functions["sum"]
    params = OracleParams(trials=50)
    rng = random.Random(99)
    for mr in MR_IDS:
        for _ in range(params.trials):
            length = rng.randint(params.min_len, params.max_len)
            lo = 1 if mr == "INV" else 0
            source = [float(rng.randint(lo, params.max_value)) for _ in range(length)]
            follow = apply_mr(mr, source, rng, params)
            ok, cause = check_relation(mr, interpret(fn, source), interpret(fn, follow))
            assert ok, (mr, source, follow, cause)


def test_label_set_round_trip():
    bits = (1, 0, 1, 0, 1, 0)
    assert MrLabelSet.from_bits(bits).as_bits() == bits
    with pytest.raises(OracleError):
        MrLabelSet.from_bits((2, 0, 0, 0, 0, 0))
    with pytest.raises(OracleError):
        MrLabelSet({"ADD": True})

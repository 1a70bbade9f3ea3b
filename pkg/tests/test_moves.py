"""Flip and recombination step semantics: validity, lifting, application,
and inversion."""

import random

import pytest

from trirecom import (
    RecomStep,
    apply_flip,
    apply_recom,
    build_region,
    flip_valid,
    ground_state,
    in_omega,
    is_simply_connected,
    lift_flip,
    neighborhood_flip_test,
    recom_valid,
    reverse,
    untouched_of_flip,
)

from support import random_omega_state


@pytest.fixture(scope="module")
def pool5():
    region = build_region(5)
    rng = random.Random(202)
    return [random_omega_state(region, (5, 5, 5), rng) for _ in range(50)]


def test_untouched_of_flip():
    assert untouched_of_flip(1, 2) == 3
    assert untouched_of_flip(3, 1) == 2
    assert untouched_of_flip(2, 3) == 1


def test_flip_valid_matches_definition(pool5):
    for p in pool5[:15]:
        for v in p.region.vertices:
            frm = p.district(v)
            for to in (1, 2, 3):
                expected = (
                    to != frm
                    and is_simply_connected(p.region, p.district_set(frm) - {v})
                    and is_simply_connected(p.region, p.district_set(to) | {v})
                )
                assert flip_valid(p, v, to) == expected


def test_neighborhood_test_implies_flip_valid(pool5):
    positives = 0
    for p in pool5:
        for v in p.region.vertices:
            for to in (1, 2, 3):
                if neighborhood_flip_test(p, v, to):
                    positives += 1
                    assert flip_valid(p, v, to)
    assert positives > 100


def test_lift_flip_records_untouched_district(pool5):
    for p in pool5[:10]:
        for v in p.region.vertices:
            for to in (1, 2, 3):
                if not flip_valid(p, v, to):
                    continue
                step = lift_flip(p, v, to, "check")
                assert step.note == "check"
                assert step.untouched == untouched_of_flip(p.district(v), to)
                assert step.after == apply_flip(p, v, to).labels


def test_flip_steps_are_recombination_moves(pool5):
    checked = 0
    for p in pool5[:30]:
        for v in p.region.vertices:
            for to in (1, 2, 3):
                if not flip_valid(p, v, to):
                    continue
                q = apply_flip(p, v, to)
                if not in_omega(q):
                    continue
                checked += 1
                assert recom_valid(p, q) and recom_valid(q, p)
                step = lift_flip(p, v, to)
                assert apply_recom(p, step) == q
                back = reverse(step, p)
                assert apply_recom(q, back) == p
                assert back.untouched == step.untouched
    assert checked > 100


def test_recom_valid_rejects_identity_and_mismatched_instances(pool5):
    p = pool5[0]
    assert not recom_valid(p, p)
    other_targets = p.relabeled({1: 2, 2: 1, 3: 3})
    if other_targets.targets == p.targets:
        assert recom_valid(p, other_targets) == any(
            p.district_set(d) == other_targets.district_set(d) for d in (1, 2, 3)
        )


def test_apply_recom_validates_structure(pool5):
    p = pool5[0]
    with pytest.raises(ValueError):
        apply_recom(p, RecomStep(1, p.labels, ""))  # identity step
    # a step that claims district 1 untouched but changes it
    v = sorted(p.district_set(1))[0]
    to = 2 if p.district(v) != 2 else 3
    q_labels = p.with_moves([(v, to)]).labels
    with pytest.raises(ValueError):
        apply_recom(p, RecomStep(1, q_labels, ""))


def test_recom_steps_may_move_many_vertices(pool5):
    # containment is strict: swapping two whole districts is a recombination
    # move but not a flip
    region = build_region(5)
    a = ground_state(region, (5, 5, 5), (1, 2, 3))
    b = a.relabeled({1: 2, 2: 1, 3: 3})
    assert recom_valid(a, b)
    assert sum(1 for x, y in zip(a.labels, b.labels) if x != y) > 1

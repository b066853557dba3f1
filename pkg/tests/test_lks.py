"""Structure validation, successor queries, and lasso unrolling."""
import random

import pytest

from lassolab.lks import Lasso, UnknownStateError, make_lks, successors, validate_lasso, validate_lks

from genutil import random_lasso, random_model


def broken(**overrides):
    base = dict(
        states=["s0", "s1"],
        initial=[0],
        props=["p"],
        labels=[set(), {0}],
        types=["Set"],
        events=[("go", (), 0)],
        edges={(0, 1): {0}, (1, 0): {0}},
    )
    base.update(overrides)
    return make_lks(**base)


class TestValidate:
    def test_toggle_is_well_formed(self, toggle):
        assert validate_lks(toggle) == []

    def test_deadlocked_state_reported(self):
        lks = broken(edges={(0, 1): {0}})  # s1 has no successor
        kinds = [i.kind for i in validate_lks(lks)]
        assert kinds == ["deadlock"]
        assert validate_lks(lks)[0].subject == (1,)

    def test_empty_event_label_reported(self):
        lks = broken(edges={(0, 1): set(), (1, 0): {0}})
        kinds = {i.kind for i in validate_lks(lks)}
        assert "empty_label" in kinds

    def test_empty_initial_reported(self):
        lks = broken(initial=[])
        kinds = [i.kind for i in validate_lks(lks)]
        assert kinds == ["empty_initial"]

    def test_dangling_event_type_reported(self):
        lks = broken(events=[("go", (), 7)])
        kinds = [i.kind for i in validate_lks(lks)]
        assert kinds == ["bad_type"]

    def test_random_models_are_well_formed(self):
        rng = random.Random(7)
        for _ in range(50):
            assert validate_lks(random_model(rng)) == []


class TestSuccessors:
    def test_from_s0(self, toggle):
        assert successors(toggle, 0) == ((1, frozenset({0, 1})),)

    def test_from_s1(self, toggle):
        assert successors(toggle, 1) == ((0, frozenset({3})), (1, frozenset({2})))

    def test_unknown_state(self, toggle):
        with pytest.raises(UnknownStateError):
            successors(toggle, 9)

    def test_nonempty_when_well_formed(self):
        rng = random.Random(3)
        for _ in range(20):
            lks = random_model(rng)
            for s in range(lks.n_states):
                assert successors(lks, s)


class TestUnroll:
    def test_prefix_position(self, toggle_lasso):
        assert toggle_lasso.unroll(0) == (0, 0)  # (s0, setA)

    def test_loop_of_length_one(self, toggle_lasso):
        assert toggle_lasso.unroll(5) == (1, 2)  # (s1, stay)

    def test_modular_unrolling(self):
        # prefix s0, loop s1 . a . s2 . b with loopStart 1
        lasso = Lasso(
            prefix_states=(0,),
            prefix_events=(0,),
            loop_states=(1, 2),
            loop_events=(1, 2),
        )
        assert lasso.unroll(4) == (2, 2)

    def test_periodicity_property(self):
        rng = random.Random(11)
        for _ in range(50):
            lks = random_model(rng)
            lasso = random_lasso(rng, lks)
            ls, ll = lasso.loop_start, len(lasso.loop_states)
            for j in range(ls, ls + 12):
                assert lasso.unroll(j) == lasso.unroll(ls + (j - ls) % ll)

    def test_unrolled_steps_stay_in_model(self):
        rng = random.Random(13)
        for _ in range(30):
            lks = random_model(rng)
            lasso = random_lasso(rng, lks)
            assert validate_lasso(lks, lasso) == []
            for j in range(10):
                s, e = lasso.unroll(j)
                s2, _ = lasso.unroll(j + 1)
                assert e in lks.edges[(s, s2)]


class TestLassoShape:
    def test_empty_loop_rejected(self):
        with pytest.raises(ValueError):
            Lasso((), (), (), ())

    def test_misaligned_prefix_rejected(self):
        with pytest.raises(ValueError):
            Lasso((0,), (), (1,), (0,))

    def test_wrong_first_state_detected(self, toggle):
        lasso = Lasso((), (), (1, 0), (3, 0))
        problems = validate_lasso(toggle, lasso)
        assert any("initial" in p for p in problems)

"""Exploration calculus: navigation, alternatives, type switching, dry runs."""
import random

import pytest

from lassolab.checker import find_counterexample, iter_lassos
from lassolab.encode import encode_prefix
from lassolab.explorer import (
    BoundaryError,
    NoAlternative,
    PropertyHolds,
    RestrictionMap,
    alt_event,
    alt_state,
    check_session_invariants,
    enabled_types,
    init_session,
    set_event_type,
    step_backward,
    step_forward,
)
from lassolab.lks import Lasso, TypedLks, make_lks
from lassolab.seltl import FALSE, TRUE, bind, eval_lasso, parse_formula

from genutil import random_bound_formula, random_model


def session(lks, prop_text, bound=4, mode="counterexample"):
    return init_session(lks, bind(parse_formula(prop_text), lks), bound, mode)


def word_prefix(lks, lasso, i):
    return tuple(
        (lks.label_mask(lasso.unroll(j)[0]), lasso.unroll(j)[1]) for j in range(i)
    )


def counterexamples(lks, phi, bound):
    return [c for c in iter_lassos(lks, bound) if not eval_lasso(phi, c)]


class TestRestrictionMap:
    def test_default_true(self):
        assert RestrictionMap().get(7) == TRUE

    def test_point_update(self):
        m = RestrictionMap().set(2, FALSE)
        assert m.get(2) == FALSE
        assert m.get(1) == TRUE

    def test_tail_reset(self):
        m = RestrictionMap().set(1, FALSE).set(3, FALSE).set(5, FALSE)
        m = m.clear_from(3)
        assert m.support() == (1,)


class TestInit:
    def test_counterexample_session(self, toggle):
        st = session(toggle, "G !p", 4)
        assert st.pi == Lasso((0,), (0,), (1,), (2,))
        assert st.i == 0
        assert st.restrictions.support() == ()

    def test_property_holds(self, toggle):
        assert session(toggle, "F p", 6) == PropertyHolds(6)

    def test_witness_mode_returns_satisfying_trace(self, toggle):
        st = session(toggle, "F p", 6, mode="witness")
        assert isinstance(st.pi, Lasso)
        assert eval_lasso(bind(parse_formula("F p"), toggle), st.pi)

    def test_unknown_mode_rejected(self, toggle):
        with pytest.raises(ValueError):
            session(toggle, "F p", 6, mode="???")


class TestNavigation:
    def test_forward_only_moves_focus(self, toggle):
        st = session(toggle, "G !p", 4)
        st2 = step_forward(st)
        assert st2.i == 1
        assert st2.pi == st.pi and st2.restrictions == st.restrictions

    def test_backward(self, toggle):
        st = step_forward(step_forward(session(toggle, "G !p", 4)))
        assert step_backward(st).i == 1

    def test_backward_at_zero_raises(self, toggle):
        with pytest.raises(BoundaryError):
            step_backward(session(toggle, "G !p", 4))

    def test_forward_then_backward_is_identity(self, toggle):
        st = session(toggle, "G !p", 4)
        assert step_backward(step_forward(st)) == st

    def test_focus_display_wraps_into_loop(self, toggle):
        st = session(toggle, "G !p", 4)
        for _ in range(5):
            st = step_forward(st)
        assert st.i == 5
        assert st.display_index == 1  # inside the loop


class TestAltState:
    def test_single_initial_state_has_no_alternative(self, toggle):
        st = session(toggle, "G !p", 4)
        assert alt_state(st) == NoAlternative(4)

    def test_session_unchanged_after_failure(self, toggle):
        st = session(toggle, "G !p", 4)
        before = (st.pi, st.i, st.restrictions)
        alt_state(st)
        assert (st.pi, st.i, st.restrictions) == before

    def test_enumerates_initial_states(self):
        lks = make_lks(
            states=["s0", "s1", "s2"],
            initial=[0, 1],
            props=["p", "q"],
            labels=[set(), {0}, {1}],
            types=["T"],
            events=[("e", (), 0)],
            edges={(0, 2): {0}, (1, 2): {0}, (2, 2): {0}},
        )
        st = init_session(lks, bind(FALSE, lks), 4)
        st2 = alt_state(st)
        assert isinstance(st2, type(st))
        assert st2.pi.states[0] == 1
        assert alt_state(st2) == NoAlternative(4)

    def test_prefix_preserved_and_restriction_recorded(self):
        lks = make_lks(
            states=["s0", "s1", "s2"],
            initial=[0],
            props=["p", "q"],
            labels=[set(), {0}, {1}],
            types=["T"],
            events=[("e", (), 0)],
            edges={(0, 1): {0}, (0, 2): {0}, (1, 1): {0}, (2, 2): {0}},
        )
        st = init_session(lks, bind(FALSE, lks), 4)
        st = step_forward(st)  # focus 1: initial trace visits s1 first
        st2 = alt_state(st)
        assert st2.pi.states[0] == 0
        assert st2.pi.states[1] == 2
        assert st2.restrictions.support() == (1,)
        pin = bind(encode_prefix(lks, st.pi, 1), lks)
        assert eval_lasso(pin, st2.pi)


class TestAltEvent:
    def test_switches_to_other_event_of_same_type(self, toggle):
        st = session(toggle, "G !p", 4)
        st2 = alt_event(st)
        assert st2.pi.events[0] == 1  # setB
        assert st2.pi == Lasso((0,), (1,), (1,), (2,))

    def test_exhausts_type_instances(self, toggle):
        st = alt_event(session(toggle, "G !p", 4))
        assert alt_event(st) == NoAlternative(4)

    def test_type_and_state_preserved(self, toggle):
        st = session(toggle, "G !p", 4)
        st2 = alt_event(st)
        old_s, old_e = st.pi.unroll(0)
        new_s, new_e = st2.pi.unroll(0)
        assert toggle.event_type(new_e) == toggle.event_type(old_e)
        assert new_e != old_e
        assert toggle.label_mask(new_s) == toggle.label_mask(old_s)


class TestSetEventType:
    def test_switch_to_unset_at_focus_one(self, toggle):
        st = step_forward(session(toggle, "G !p", 4))
        st2 = set_event_type(st, "Unset")
        assert st2.pi.unroll(1)[1] == 3  # unset
        assert st2.pi.unroll(0) == st.pi.unroll(0)

    def test_impossible_type_at_focus_zero(self, toggle):
        st = session(toggle, "G !p", 4)
        assert set_event_type(st, "Unset") == NoAlternative(4)

    def test_current_type_always_possible(self, toggle):
        st = session(toggle, "G !p", 4)
        st2 = set_event_type(st, "Set")
        assert toggle.event_type(st2.pi.unroll(0)[1]) == 0

    def test_unknown_type_rejected(self, toggle):
        st = session(toggle, "G !p", 4)
        with pytest.raises(KeyError):
            set_event_type(st, "Nope")

    def test_tail_restrictions_cleared_focus_entry_kept(self, toggle):
        st = step_forward(session(toggle, "G !p", 6))
        st = set_event_type(st, "Stay")
        # plant entries by hand to observe the update rule
        planted = st.restrictions.set(1, FALSE).set(3, FALSE)
        st = type(st)(
            lks=st.lks, phi=st.phi, pi=st.pi, i=st.i, restrictions=planted,
            bound=st.bound, mode=st.mode, engine=st.engine,
        )
        st2 = set_event_type(st, "Stay")
        assert st2.restrictions.support() == (1,)

    def test_strict_variant_respects_focus_restrictions(self, toggle):
        st = session(toggle, "G !p", 4)
        st2 = alt_event(st)  # trims (s0, setB)'s sibling branch... records setA
        # strict re-pick of Set type must avoid the recorded (state, event)
        st3 = set_event_type(st2, "Set", strict=True)
        assert st3.pi.events[0] == 1  # still setB, setA is trimmed
        st4 = alt_event(st3)
        assert st4 == NoAlternative(4)


class TestEnabledTypes:
    def test_toggle_at_focus_zero(self, toggle):
        st = session(toggle, "G !p", 4)
        probes = enabled_types(st)
        assert {t: p.enabled for t, p in probes.items()} == {
            "Set": True, "Stay": False, "Unset": False,
        }

    def test_toggle_at_focus_one(self, toggle):
        st = step_forward(session(toggle, "G !p", 6))
        probes = enabled_types(st)
        assert {t: p.enabled for t, p in probes.items()} == {
            "Set": False, "Stay": True, "Unset": True,
        }

    def test_session_untouched(self, toggle):
        st = session(toggle, "G !p", 4)
        before = (st.pi, st.i, st.restrictions)
        enabled_types(st)
        assert (st.pi, st.i, st.restrictions) == before

    def test_current_type_always_enabled(self, toggle):
        st = session(toggle, "G !p", 4)
        for _ in range(4):
            tname = toggle.type_names[toggle.event_type(st.focus_event())]
            assert enabled_types(st)[tname].enabled
            st = step_forward(st)

    def test_parallel_matches_sequential(self, toggle):
        st = session(toggle, "G !p", 4)
        seq = {t: p.enabled for t, p in enabled_types(st).items()}
        par = {t: p.enabled for t, p in enabled_types(st, jobs=3).items()}
        assert seq == par
        assert list(enabled_types(st, jobs=3)) == list(toggle.type_names)


class TestQueryEquivalence:
    def test_constrained_search_equals_literal_query(self):
        """The op's fast path must return exactly what the literal
        disjunctive query would."""
        rng = random.Random(71)
        checked = 0
        for _ in range(60):
            lks = random_model(rng, max_states=5)
            phi = random_bound_formula(rng, lks, depth=3)
            bound = rng.randint(2, 5)
            st = init_session(lks, phi, bound)
            if isinstance(st, PropertyHolds):
                continue
            for _ in range(rng.randint(0, 3)):
                st = step_forward(st)
            op = rng.choice([alt_state, alt_event])
            st2 = op(st)
            query = st2.last_query if not isinstance(st2, NoAlternative) else None
            if query is None:
                # rebuild the query the op would have posed
                from lassolab.explorer import _query_formula
                from lassolab.encode import encode_state, event_atom
                from lassolab.seltl import And, Not, TypeAtom

                here = encode_state(lks, st.focus_state())
                if op is alt_state:
                    point = And(st.restrictions.get(st.i), Not(here))
                else:
                    ev = event_atom(lks, st.focus_event())
                    tid = lks.event_type(st.focus_event())
                    ty = TypeAtom(lks.type_names[tid], tid)
                    point = And(And(And(st.restrictions.get(st.i), here), Not(ev)), ty)
                query = _query_formula(st, point)
            reference = find_counterexample(lks, bind(query, lks), bound)
            if isinstance(st2, NoAlternative):
                assert reference.verdict == "valid"
            else:
                assert reference.is_counterexample
                assert reference.lasso == st2.pi
            checked += 1
        assert checked >= 30


class TestRandomisedSessionProperties:
    OPS = ("fwd", "back", "alt_state", "alt_event", "set_type")

    def run_random_session(self, rng, lks, phi, bound, n_ops):
        st = init_session(lks, phi, bound)
        if isinstance(st, PropertyHolds):
            return None
        for _ in range(n_ops):
            name = rng.choice(self.OPS)
            if name == "fwd":
                st = step_forward(st)
            elif name == "back":
                try:
                    st = step_backward(st)
                except BoundaryError:
                    pass
            elif name == "alt_state":
                nxt = alt_state(st)
                if not isinstance(nxt, NoAlternative):
                    st = nxt
            elif name == "alt_event":
                nxt = alt_event(st)
                if not isinstance(nxt, NoAlternative):
                    st = nxt
            else:
                tname = rng.choice(lks.type_names)
                nxt = set_event_type(st, tname)
                if not isinstance(nxt, NoAlternative):
                    st = nxt
            assert check_session_invariants(st) == []
        return st

    def test_sessions_stay_sound(self):
        rng = random.Random(73)
        ran = 0
        while ran < 40:
            lks = random_model(rng, max_states=5)
            phi = random_bound_formula(rng, lks, depth=3)
            st = self.run_random_session(rng, lks, phi, rng.randint(2, 6), 8)
            if st is not None:
                ran += 1

    def test_prefix_preserved_by_all_alternatives(self):
        rng = random.Random(79)
        checked = 0
        while checked < 60:
            lks = random_model(rng, max_states=5)
            phi = random_bound_formula(rng, lks, depth=3)
            bound = rng.randint(2, 6)
            st = init_session(lks, phi, bound)
            if isinstance(st, PropertyHolds):
                continue
            for _ in range(rng.randint(0, 3)):
                st = step_forward(st)
            old = st.pi
            for op in (alt_state, alt_event, lambda s: set_event_type(s, rng.choice(lks.type_names))):
                nxt = op(st)
                if isinstance(nxt, NoAlternative):
                    continue
                pin = bind(encode_prefix(lks, old, st.i), lks)
                assert eval_lasso(pin, nxt.pi)
                checked += 1

    def test_alt_state_enumeration_complete(self):
        """Iterating the state alternative visits exactly the position-i
        valuations that occur in some counterexample sharing the prefix."""
        rng = random.Random(83)
        checked = 0
        while checked < 25:
            lks = random_model(rng, max_states=4, max_events=3)
            phi = random_bound_formula(rng, lks, depth=2)
            bound = rng.randint(2, 5)
            st = init_session(lks, phi, bound)
            if isinstance(st, PropertyHolds):
                continue
            i = rng.randint(0, 2)
            for _ in range(i):
                st = step_forward(st)
            prefix = word_prefix(lks, st.pi, st.i)
            reached = {lks.label_mask(st.focus_state())}
            cur = st
            for _ in range(40):
                nxt = alt_state(cur)
                if isinstance(nxt, NoAlternative):
                    break
                reached.add(lks.label_mask(nxt.focus_state()))
                cur = nxt
            else:
                pytest.fail("alternative enumeration did not terminate")
            expected = {
                lks.label_mask(c.unroll(st.i)[0])
                for c in counterexamples(lks, st.phi, bound)
                if word_prefix(lks, c, st.i) == prefix
            }
            assert reached == expected
            checked += 1

    def test_enabled_types_agree_with_brute_force(self):
        rng = random.Random(89)
        checked = 0
        while checked < 25:
            lks = random_model(rng, max_states=4, max_events=3)
            phi = random_bound_formula(rng, lks, depth=2)
            bound = rng.randint(2, 5)
            st = init_session(lks, phi, bound)
            if isinstance(st, PropertyHolds):
                continue
            i = rng.randint(0, 2)
            for _ in range(i):
                st = step_forward(st)
            prefix = word_prefix(lks, st.pi, st.i)
            focus_mask = lks.label_mask(st.focus_state())
            ces = [
                c for c in counterexamples(lks, st.phi, bound)
                if word_prefix(lks, c, st.i) == prefix
                and lks.label_mask(c.unroll(st.i)[0]) == focus_mask
            ]
            expected = {lks.event_type(c.unroll(st.i)[1]) for c in ces}
            probes = enabled_types(st)
            got = {
                tid for tid, tname in enumerate(lks.type_names)
                if probes[tname].enabled
            }
            assert got == expected
            checked += 1


@pytest.fixture(scope="module")
def hotel():
    from lassolab.egs import compile_lks, parse_model
    from lassolab.models import bad_safety_property, hotel_source

    compiled = compile_lks(parse_model(hotel_source(2, [3])), add_idle=True)
    phi = bind(parse_formula(bad_safety_property(2, [3])), compiled.lks)
    return compiled, phi


class TestHotelSession:
    """Exploration on the bundled hotel model at the small scope."""

    def test_alt_event_rebinds_check_in(self, hotel):
        compiled, phi = hotel
        st = init_session(compiled.lks, phi, 10)
        assert compiled.lks.events[st.pi.events[0]].identity == "In[g0,r0,k1]"
        st2 = alt_event(st)
        assert not isinstance(st2, NoAlternative)
        ev = compiled.lks.events[st2.pi.events[0]]
        assert ev.name == "In" and ev.args[0] == "g1"

    def test_enabled_after_first_check_in(self, hotel):
        compiled, phi = hotel
        st = step_forward(init_session(compiled.lks, phi, 10))
        probes = enabled_types(st)
        flags = {t: p.enabled for t, p in probes.items()}
        assert flags == {"In": False, "Out": True, "Entry": True, "Reentry": False}

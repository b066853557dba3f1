"""Model language: parsing, grounding, and compilation to a labelled model."""
import pytest

from lassolab.egs import (
    DeadlockError,
    EmptyInitialError,
    ModelError,
    compile_lks,
    ground,
    parse_model,
)
from lassolab.lks import validate_lks
from lassolab.models import bad_safety_property, hotel_source, toggle_source


MINI = """
model mini
sort S = { x, y }
var v: bool
init { !v }
event Go(a: S) modifies v {
  guard: !v
  effect: v' := true
}
event Stop() modifies v {
  guard: v
  effect: v' := false
}
"""


class TestParse:
    def test_toggle_shape(self):
        sys = parse_model(toggle_source())
        assert len(sys.vars) == 1
        assert list(sys.vars) == ["p"]
        assert [e.name for e in sys.events] == ["Set", "Stay", "Unset"]

    def test_frame_violation(self):
        bad = MINI.replace("event Stop() modifies v {", "event Stop() {")
        with pytest.raises(ModelError, match="FrameViolation"):
            parse_model(bad)

    def test_empty_model_rejected(self):
        with pytest.raises(ModelError):
            parse_model("model nothing")

    def test_needs_event(self):
        with pytest.raises(ModelError, match="event"):
            parse_model("model m\nvar v: bool\ninit { !v }")

    def test_unknown_name_has_position(self):
        src = MINI.replace("guard: !v", "guard: !w")
        with pytest.raises(ModelError) as err:
            parse_model(src)
        assert err.value.line > 0

    def test_sort_mismatch_rejected(self):
        src = """
model m
sort A = { a }
sort B = { b }
var v[A]: bool
init { v[a] }
event E() modifies v { guard: v[b] effect: }
"""
        with pytest.raises(ModelError, match="index"):
            parse_model(src)

    def test_next_requires_ordered_sort(self):
        src = """
model m
sort S = { x, y }
var v: S
init { v = x }
event E() modifies v { guard: v = next(x) effect: v' := y }
"""
        with pytest.raises(ModelError, match="ordered"):
            parse_model(src)


class TestGround:
    def test_one_param_two_constants(self):
        sys = parse_model(MINI)
        names = [g.identity for g in ground(sys)]
        assert names == ["Go[x]", "Go[y]", "Stop[]"]

    def test_parameterless(self):
        sys = parse_model(toggle_source())
        assert "Stay[]" in [g.identity for g in ground(sys)]

    def test_product_size(self):
        src = """
model m
sort G = { g0, g1 }
sort K = { k0, k1, k2 }
var v: bool
init { !v }
event In(g: G, k: K) modifies v { guard: true effect: v' := true }
event Spin() { guard: true effect: }
"""
        sys = parse_model(src)
        ins = [g for g in ground(sys) if g.schema == "In"]
        assert len(ins) == 6
        assert ins[0].identity == "In[g0,k0]"
        assert ins[-1].identity == "In[g1,k2]"


class TestCompileToggle:
    def test_exact_shape(self, toggle):
        compiled = compile_lks(parse_model(toggle_source()))
        lks = compiled.lks
        assert lks.n_states == 2
        assert lks.initial == {0}
        assert lks.prop_names == ("p",)
        assert lks.labels == (frozenset(), frozenset({0}))
        assert sum(len(v) for v in lks.edges.values()) == 4
        assert lks.edges[(0, 1)] == {0, 1}  # Set[a], Set[b]
        assert lks.edges[(1, 1)] == {2}  # Stay[]
        assert lks.edges[(1, 0)] == {3}  # Unset[]
        assert [e.identity for e in lks.events] == ["Set[a]", "Set[b]", "Stay[]", "Unset[]"]
        assert lks.type_names == ("Set", "Stay", "Unset")
        assert validate_lks(lks) == []

    def test_state_props_rendering(self):
        compiled = compile_lks(parse_model(toggle_source()))
        assert compiled.state_props(0) == {"p": False}
        assert compiled.state_props(1) == {"p": True}

    def test_unsatisfiable_init(self):
        src = MINI.replace("init { !v }", "init { v && !v }")
        with pytest.raises(EmptyInitialError):
            compile_lks(parse_model(src))


class TestDeadlocks:
    DEAD = """
model dead
var v: bool
init { !v }
event Once() modifies v {
  guard: !v
  effect: v' := true
}
"""

    def test_deadlock_error_without_idle(self):
        with pytest.raises(DeadlockError):
            compile_lks(parse_model(self.DEAD))

    def test_idle_self_loop_added(self):
        compiled = compile_lks(parse_model(self.DEAD), add_idle=True)
        lks = compiled.lks
        assert validate_lks(lks) == []
        assert lks.type_names[-1] == "Idle"
        idle = len(lks.events) - 1
        assert lks.edges[(1, 1)] == {idle}


class TestCompileHotel:
    def test_small_scope_compiles_clean(self):
        compiled = compile_lks(parse_model(hotel_source(2, [3])), add_idle=True)
        lks = compiled.lks
        assert validate_lks(lks) == []
        assert lks.n_states <= 2 ** 12
        assert set(lks.type_names) <= {"In", "Out", "Entry", "Reentry", "Idle"}
        # one unique initial valuation
        assert len(lks.initial) == 1

    def test_transition_witness_frame(self):
        compiled = compile_lks(parse_model(hotel_source(2, [3])), add_idle=True)
        sys = compiled.system
        lks = compiled.lks
        modset = {s.name: set(s.modifies) for s in sys.events}
        for (src, dst), eids in lks.edges.items():
            for eid in eids:
                ev = lks.events[eid]
                if ev.name == "idle":
                    assert src == dst
                    continue
                before = compiled.state_props(src)
                after = compiled.state_props(dst)
                changed = {k for k in before if before[k] != after[k]}
                allowed = modset[ev.name]
                for name in changed:
                    root = name.split("[")[0]
                    assert root in allowed, f"{ev.identity} changed {name}"

    def test_labels_injective(self):
        compiled = compile_lks(parse_model(hotel_source(2, [3])), add_idle=True)
        labels = compiled.lks.labels
        assert len(set(labels)) == len(labels)

    def test_property_binds(self):
        from lassolab.seltl import bind, parse_formula

        compiled = compile_lks(parse_model(hotel_source(2, [3])), add_idle=True)
        prop = bad_safety_property(2, [3])
        bind(parse_formula(prop), compiled.lks)  # should not raise


class TestBundledFiles:
    """The files under models/ stay in sync with the generators."""

    def test_toggle_file_matches_generator(self):
        from pathlib import Path

        root = Path(__file__).resolve().parent.parent / "models"
        assert (root / "toggle.egs").read_text() == toggle_source()

    def test_hotel_files_match_generator(self):
        from pathlib import Path

        root = Path(__file__).resolve().parent.parent / "models"
        assert (root / "hotel_2g_1r_3k.egs").read_text() == hotel_source(2, [3])
        assert (root / "hotel_2g_1r_3k.prop").read_text() == bad_safety_property(2, [3]) + "\n"
        assert (root / "hotel_3g_2r_4k.egs").read_text() == hotel_source(3, [1, 3])
        assert (root / "hotel_3g_2r_4k.prop").read_text() == bad_safety_property(3, [1, 3]) + "\n"

    def test_bad_scope_rejected(self):
        import pytest as _pytest

        with _pytest.raises(ValueError):
            hotel_source(0, [2])
        with _pytest.raises(ValueError):
            hotel_source(2, [])

import pytest

from lassolab.lks import Lasso, make_lks


@pytest.fixture
def toggle():
    """Two-state flip/flop model used throughout the suite.

    s0 has no propositions, s1 carries p.  Two Set-typed events lead from
    s0 to s1; Stay loops on s1 and Unset returns to s0.
    """
    return make_lks(
        states=["s0", "s1"],
        initial=[0],
        props=["p"],
        labels=[set(), {0}],
        types=["Set", "Stay", "Unset"],
        events=[
            ("setA", (), 0),
            ("setB", (), 0),
            ("stay", (), 1),
            ("unset", (), 2),
        ],
        edges={(0, 1): {0, 1}, (1, 1): {2}, (1, 0): {3}},
    )


SET_A, SET_B, STAY, UNSET = 0, 1, 2, 3


@pytest.fixture
def toggle_lasso():
    """s0 . setA . (s1 . stay)^w"""
    return Lasso(
        prefix_states=(0,),
        prefix_events=(SET_A,),
        loop_states=(1,),
        loop_events=(STAY,),
    )

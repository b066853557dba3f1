"""Bundled model sources: the toggle example and the hotel key-card protocol.

The hotel model is parameterised by the number of guests and by a list of
key counts, one entry per room; every room owns a contiguous, disjoint block
of the ordered key sort.  Check-in hands out the next key of the room's
block, entering with a fresh key recodes the lock, and re-entry with the
current key changes nothing, which is what makes the stale-key violation of
the occupancy property possible.
"""
from __future__ import annotations

import itertools

TOGGLE = """\
model toggle

sort Choice = { a, b }

var p: bool

init { !p }

event Set(c: Choice) modifies p {
  guard: !p
  effect:
    p' := true
}

event Stay() {
  guard: p
  effect:
}

event Unset() modifies p {
  guard: p
  effect:
    p' := false
}
"""


def toggle_source() -> str:
    return TOGGLE


def _key_blocks(keys_per_room: list[int]) -> list[list[str]]:
    blocks: list[list[str]] = []
    base = 0
    for count in keys_per_room:
        blocks.append([f"k{base + i}" for i in range(count)])
        base += count
    return blocks


def _owns(room: str, block: list[str]) -> str:
    keys = " || ".join(f"k = {k}" for k in block)
    return f"(r = {room} && ({keys}))"


def hotel_source(guests: int, keys_per_room: list[int]) -> str:
    """DSL text of the hotel protocol at the given scope."""
    if guests < 1 or not keys_per_room or any(c < 1 for c in keys_per_room):
        raise ValueError("need at least one guest and one key per room")
    guest_names = [f"g{i}" for i in range(guests)]
    room_names = [f"r{i}" for i in range(len(keys_per_room))]
    blocks = _key_blocks(keys_per_room)
    key_names = [k for block in blocks for k in block]

    owns = " || ".join(_owns(r, b) for r, b in zip(room_names, blocks))
    init_current = " && ".join(
        f"current[{r}] = {b[0]} && lastKey[{r}] = {b[0]}" for r, b in zip(room_names, blocks)
    )

    return f"""\
model hotel

sort Guest = {{ {', '.join(guest_names)} }}
sort Room = {{ {', '.join(room_names)} }}
sort Key = {{ {', '.join(key_names)} }} ordered

var gkeys[Guest, Key]: bool
var occupant[Room, Guest]: bool
var current[Room]: Key
var lastKey[Room]: Key

init {{
  (forall g: Guest | forall k: Key | !gkeys[g, k])
  && (forall r: Room | forall g: Guest | !occupant[r, g])
  && {init_current}
}}

event In(g: Guest, r: Room, k: Key) modifies gkeys, occupant, lastKey {{
  guard: (forall g2: Guest | !occupant[r, g2])
         && k = next(lastKey[r])
         && ({owns})
  effect:
    gkeys[g, k]' := true
    occupant[r, g]' := true
    lastKey[r]' := k
}}

event Out(g: Guest, r: Room) modifies occupant {{
  guard: occupant[r, g]
  effect:
    occupant[r, g]' := false
}}

event Entry(g: Guest, r: Room, k: Key) modifies current {{
  guard: gkeys[g, k]
         && k = next(current[r])
         && ({owns})
  effect:
    current[r]' := k
}}

event Reentry(g: Guest, r: Room, k: Key) {{
  guard: gkeys[g, k] && k = current[r]
  effect:
}}
"""


def bad_safety_property(guests: int, keys_per_room: list[int]) -> str:
    """Occupancy property: whoever enters an occupied room must be registered.

    Quantifiers are grounded here, one clause per (guest, room, key) triple.
    """
    guest_names = [f"g{i}" for i in range(guests)]
    room_names = [f"r{i}" for i in range(len(keys_per_room))]
    key_names = [k for block in _key_blocks(keys_per_room) for k in block]
    clauses = []
    for r, g, k in itertools.product(room_names, guest_names, key_names):
        entering = f"@Entry[{g},{r},{k}] || @Reentry[{g},{r},{k}]"
        occupied = " || ".join(f"occupant[{r},{g2}]" for g2 in guest_names)
        clauses.append(f"((({entering}) && ({occupied})) -> occupant[{r},{g}])")
    body = "\n  && ".join(clauses)
    return f"G ({body})"

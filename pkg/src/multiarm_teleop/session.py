"""Resources manager: robot selection, group lifecycle, owner transfer,
modality and freeze toggles.

The button grammar (two joysticks, one per hand):

* hold S + click RB(k): toggle robot k in the hand's working selection;
  releasing S commits the selection as the hand's active group.
* click S alone: toggle the active group's modality between independent
  and coordinated control.
* click RB(k) without S: transfer the whole group containing robot k to
  the clicking hand, merging with that hand's active group if present.
* click F: freeze the active group / unfreeze the most recently frozen.
* trigger: toggle the grippers of the active group's members.

All mutation happens through :meth:`SessionState.apply_event`, which is a
deterministic function of the event sequence.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

from .modalities import Hand


class Modality(str, Enum):
    IC = "ic"
    CC = "cc"


class Button(str, Enum):
    S = "s"
    F = "f"
    TRIGGER = "trigger"
    RB = "rb"


class Edge(str, Enum):
    PRESS = "press"
    RELEASE = "release"


@dataclass(frozen=True)
class ButtonEvent:
    hand: Hand
    button: Button
    edge: Edge
    robot: int | None = None  # RB only

    def __post_init__(self):
        if self.button is Button.RB and self.robot is None:
            raise ValueError("RB event needs a robot id")


@dataclass
class ControlGroup:
    members: list[int]
    owner: Hand
    modality: Modality
    frozen: bool = False
    gid: int = 0  # creation counter, used for frozen-group recency

    def __post_init__(self):
        if not self.members:
            raise ValueError("group cannot be empty")
        if self.modality is Modality.CC and len(self.members) < 2:
            raise ValueError("coordinated control needs >= 2 members")


@dataclass(frozen=True)
class Effect:
    """Side effect for the control loop: rebind a group, freeze/unfreeze,
    toggle grippers, or surface a warning."""

    kind: str  # rebind | freeze | unfreeze | gripper_toggle | warn
    gid: int | None = None
    robots: tuple[int, ...] = ()
    message: str = ""


@dataclass
class _Selection:
    pending: list[int]
    touched: bool = False  # any RB click during the S hold


@dataclass
class GuiEntry:
    robot: int
    modality: str
    frozen: bool


@dataclass
class GuiModel:
    left: list[GuiEntry]
    right: list[GuiEntry]

    def panel(self, hand: Hand) -> list[GuiEntry]:
        return self.left if hand is Hand.LEFT else self.right

    def to_dict(self) -> dict:
        return {
            h: [{"robot": e.robot, "modality": e.modality, "frozen": e.frozen}
                for e in panel]
            for h, panel in (("left", self.left), ("right", self.right))
        }


class SessionState:
    """Authoritative group/ownership state for one operator session."""

    def __init__(self, robot_ids):
        self.robot_ids: tuple[int, ...] = tuple(int(r) for r in robot_ids)
        if len(set(self.robot_ids)) != len(self.robot_ids):
            raise ValueError("duplicate robot ids")
        self.groups: dict[int, ControlGroup] = {}
        self._next_gid = 1
        self._selection: dict[Hand, _Selection | None] = {Hand.LEFT: None, Hand.RIGHT: None}

    # -- queries -----------------------------------------------------------

    def group_of(self, robot: int) -> ControlGroup | None:
        for g in self.groups.values():
            if robot in g.members:
                return g
        return None

    def active_group(self, hand: Hand) -> ControlGroup | None:
        for g in self.groups.values():
            if g.owner is hand and not g.frozen:
                return g
        return None

    def frozen_groups(self, hand: Hand) -> list[ControlGroup]:
        return [g for g in self.groups.values() if g.owner is hand and g.frozen]

    def gui_projection(self) -> GuiModel:
        panels = {Hand.LEFT: [], Hand.RIGHT: []}
        for g in sorted(self.groups.values(), key=lambda g: (g.frozen, g.gid)):
            for rid in g.members:
                panels[g.owner].append(GuiEntry(rid, g.modality.value, g.frozen))
        return GuiModel(left=panels[Hand.LEFT], right=panels[Hand.RIGHT])

    # -- event handling ----------------------------------------------------

    def apply_event(self, ev: ButtonEvent) -> list[Effect]:
        if ev.button is Button.S:
            return self._on_s(ev)
        if ev.button is Button.RB:
            return self._on_rb(ev)
        if ev.edge is not Edge.PRESS:
            return []
        if ev.button is Button.F:
            return self._on_f(ev.hand)
        if ev.button is Button.TRIGGER:
            return self._on_trigger(ev.hand)
        return []

    # selection ------------------------------------------------------------

    def _on_s(self, ev: ButtonEvent) -> list[Effect]:
        hand = ev.hand
        if ev.edge is Edge.PRESS:
            active = self.active_group(hand)
            self._selection[hand] = _Selection(
                pending=list(active.members) if active else [])
            return []
        sel = self._selection[hand]
        if sel is None:
            return []
        self._selection[hand] = None
        if sel.touched:
            return self._commit_selection(hand, sel.pending)
        return self._toggle_modality(hand)

    def _on_rb(self, ev: ButtonEvent) -> list[Effect]:
        if ev.edge is not Edge.PRESS:
            return []
        hand, robot = ev.hand, ev.robot
        if robot not in self.robot_ids:
            return [Effect("warn", message=f"unknown robot {robot}")]
        sel = self._selection[hand]
        if sel is not None:
            sel.touched = True
            other = Hand.RIGHT if hand is Hand.LEFT else Hand.LEFT
            other_sel = self._selection[other]
            if other_sel is not None and robot in other_sel.pending:
                return [Effect("warn", message=f"robot {robot} mid-selection by other hand")]
            if robot in sel.pending:
                sel.pending.remove(robot)
            else:
                sel.pending.append(robot)
            return []
        return self._transfer(hand, robot)

    def _commit_selection(self, hand: Hand, pending: list[int]) -> list[Effect]:
        effects: list[Effect] = []
        prior = self.active_group(hand)
        prior_modality = prior.modality if prior else Modality.IC
        # dissolve the hand's active group; robots not re-selected hold in place
        if prior is not None:
            del self.groups[prior.gid]
        # pull selected robots out of any other group
        for rid in pending:
            effects += self._remove_from_group(rid)
        if pending:
            modality = prior_modality if len(pending) >= 2 else Modality.IC
            gid = self._new_group(pending, hand, modality)
            effects.append(Effect("rebind", gid=gid))
        return effects

    def _toggle_modality(self, hand: Hand) -> list[Effect]:
        g = self.active_group(hand)
        if g is None:
            return [Effect("warn", message="modality toggle with no active group")]
        if len(g.members) < 2:
            return [Effect("warn", message="single-robot group stays in independent control")]
        g.modality = Modality.CC if g.modality is Modality.IC else Modality.IC
        return [Effect("rebind", gid=g.gid)]

    # ownership ------------------------------------------------------------

    def _transfer(self, hand: Hand, robot: int) -> list[Effect]:
        g = self.group_of(robot)
        if g is None:
            return [Effect("warn", message=f"robot {robot} is not in a group")]
        if g.owner is hand and (g.frozen or self.active_group(hand) is g):
            return []  # already owned by this hand
        if g.frozen:
            # frozen groups change owner without merging or waking up
            g.owner = hand
            return []
        receiver = self.active_group(hand)
        if receiver is None or receiver is g:
            g.owner = hand
            return [Effect("rebind", gid=g.gid)]
        merged = receiver.members + [r for r in g.members if r not in receiver.members]
        modality = receiver.modality if len(merged) >= 2 else Modality.IC
        del self.groups[g.gid]
        del self.groups[receiver.gid]
        gid = self._new_group(merged, hand, modality)
        return [Effect("rebind", gid=gid)]

    # freeze / gripper -----------------------------------------------------

    def _on_f(self, hand: Hand) -> list[Effect]:
        g = self.active_group(hand)
        if g is not None:
            g.frozen = True
            return [Effect("freeze", gid=g.gid)]
        frozen = self.frozen_groups(hand)
        if not frozen:
            return [Effect("warn", message="freeze toggle with no owned robots")]
        g = max(frozen, key=lambda x: x.gid)
        g.frozen = False
        return [Effect("unfreeze", gid=g.gid), Effect("rebind", gid=g.gid)]

    def _on_trigger(self, hand: Hand) -> list[Effect]:
        g = self.active_group(hand)
        if g is None:
            return [Effect("warn", message="gripper toggle with no active group")]
        return [Effect("gripper_toggle", gid=g.gid, robots=tuple(g.members))]

    # helpers --------------------------------------------------------------

    def _new_group(self, members: list[int], owner: Hand, modality: Modality) -> int:
        gid = self._next_gid
        self._next_gid += 1
        self.groups[gid] = ControlGroup(
            members=list(members), owner=owner, modality=modality, gid=gid)
        return gid

    def _remove_from_group(self, robot: int) -> list[Effect]:
        g = self.group_of(robot)
        if g is None:
            return []
        g.members.remove(robot)
        if not g.members:
            del self.groups[g.gid]
            return []
        if len(g.members) < 2 and g.modality is Modality.CC:
            g.modality = Modality.IC
        return [Effect("rebind", gid=g.gid)]

    # -- invariants (checked by tests and the fuzz suite) ------------------

    def check_invariants(self):
        seen: set[int] = set()
        for g in self.groups.values():
            assert g.members, "empty group"
            assert not (g.modality is Modality.CC and len(g.members) < 2), \
                "CC group of size 1"
            for rid in g.members:
                assert rid in self.robot_ids, f"unknown robot {rid}"
                assert rid not in seen, f"robot {rid} in two groups"
                seen.add(rid)
        for hand in (Hand.LEFT, Hand.RIGHT):
            active = [g for g in self.groups.values()
                      if g.owner is hand and not g.frozen]
            assert len(active) <= 1, "hand with two active groups"

    def fingerprint(self) -> str:
        """Deterministic serialization of the full state, for replay checks."""
        parts = []
        for gid in sorted(self.groups):
            g = self.groups[gid]
            parts.append(f"{gid}:{','.join(map(str, g.members))}"
                         f":{g.owner.value}:{g.modality.value}:{int(g.frozen)}")
        return "|".join(parts)

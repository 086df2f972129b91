"""UML sequence-diagram subset: lifelines, messages, break combined fragments.

Only what break-fragment extraction needs is modeled. A message may carry
the object state transitions it realizes (one or several, for joint
firings). A break combined fragment marks a contiguous block of messages
as an exceptional flow that aborts the enclosing interaction, classified
by its initiator: External, Internal, or Timeout.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

from .errors import (
    NoContextError,
    ParseError,
    StructureError,
    UnknownBcfError,
    UnsupportedElementError,
)
from .olc import INITIATORS, Effect, dumps, effect_from_dict, effect_to_dict, loads


@dataclass(frozen=True)
class Message:
    id: str
    name: str
    source: str
    target: str
    effects: tuple[Effect, ...] = ()
    self_message: bool = False


@dataclass(frozen=True)
class BreakCombinedFragment:
    id: str
    initiator: str
    message_ids: tuple[str, ...]
    guard: str | None = None


@dataclass(frozen=True)
class SequenceDiagram:
    id: str
    lifelines: tuple[str, ...]
    messages: tuple[Message, ...]
    fragments: tuple[BreakCombinedFragment, ...]

    def message(self, message_id: str) -> Message:
        for m in self.messages:
            if m.id == message_id:
                return m
        raise StructureError(f"unknown message: {message_id}")

    def index_of(self, message_id: str) -> int:
        for i, m in enumerate(self.messages):
            if m.id == message_id:
                return i
        raise StructureError(f"unknown message: {message_id}")


def sd_from_dict(data: Mapping) -> SequenceDiagram:
    lifelines = tuple(str(l) for l in data.get("lifelines", []))
    if len(set(lifelines)) != len(lifelines):
        raise StructureError("duplicate lifeline names")

    messages: list[Message] = []
    seen_ids: set[str] = set()
    for raw in data.get("messages", []):
        if not isinstance(raw, Mapping) or "id" not in raw:
            raise ParseError("message needs an 'id'")
        mid = str(raw["id"])
        if mid in seen_ids:
            raise StructureError(f"duplicate message id: {mid}")
        seen_ids.add(mid)
        source = str(raw.get("from", ""))
        target = str(raw.get("to", ""))
        for lifeline in (source, target):
            if lifeline not in lifelines:
                raise StructureError(f"message {mid}: unknown lifeline {lifeline!r}")
        self_message = bool(raw.get("self", False))
        if source == target and not self_message:
            raise StructureError(
                f"message {mid}: sender equals receiver but is not flagged self"
            )
        raw_effect = raw.get("effect")
        if raw_effect is None:
            effects: tuple[Effect, ...] = ()
        elif isinstance(raw_effect, (list, tuple)):
            effects = tuple(
                effect_from_dict(e, f"effect of message {mid}") for e in raw_effect
            )
        else:
            effects = (effect_from_dict(raw_effect, f"effect of message {mid}"),)
        messages.append(
            Message(
                id=mid,
                name=str(raw.get("name", mid)),
                source=source,
                target=target,
                effects=effects,
                self_message=self_message,
            )
        )

    index = {m.id: i for i, m in enumerate(messages)}
    fragments: list[BreakCombinedFragment] = []
    claimed: dict[int, str] = {}
    for raw in data.get("fragments", []):
        if not isinstance(raw, Mapping) or "id" not in raw:
            raise ParseError("fragment needs an 'id'")
        fid = str(raw["id"])
        kind = str(raw.get("kind", "break"))
        if kind != "break":
            raise UnsupportedElementError(kind, f"fragment {fid}")
        initiator = raw.get("initiator")
        if initiator not in INITIATORS:
            raise ParseError(
                f"fragment {fid}: initiator must be one of {', '.join(INITIATORS)}"
            )
        raw_ids = [str(m) for m in raw.get("messages", [])]
        if not raw_ids:
            raise StructureError(f"fragment {fid} contains no messages")
        for mid in raw_ids:
            if mid not in index:
                raise StructureError(f"fragment {fid} references missing message {mid!r}")
        positions = sorted(index[mid] for mid in raw_ids)
        if positions != list(range(positions[0], positions[-1] + 1)):
            raise StructureError(
                f"fragment {fid}: messages do not form a contiguous block"
            )
        for pos in positions:
            if pos in claimed:
                raise StructureError(
                    f"fragments {claimed[pos]} and {fid} overlap on message "
                    f"{messages[pos].id}"
                )
            claimed[pos] = fid
        ordered = tuple(sorted(raw_ids, key=index.__getitem__))
        guard = raw.get("guard")
        fragments.append(
            BreakCombinedFragment(
                id=fid,
                initiator=str(initiator),
                message_ids=ordered,
                guard=None if guard is None else str(guard),
            )
        )
    fragments.sort(key=lambda f: index[f.message_ids[0]])

    return SequenceDiagram(
        id=str(data.get("id", "sd")),
        lifelines=lifelines,
        messages=tuple(messages),
        fragments=tuple(fragments),
    )


def sd_to_dict(sd: SequenceDiagram) -> dict:
    messages = []
    for m in sd.messages:
        entry: dict = {"id": m.id, "name": m.name, "from": m.source, "to": m.target}
        if m.self_message:
            entry["self"] = True
        if len(m.effects) == 1:
            entry["effect"] = effect_to_dict(m.effects[0])
        elif m.effects:
            entry["effect"] = [effect_to_dict(e) for e in m.effects]
        messages.append(entry)
    fragments = []
    for f in sd.fragments:
        entry = {
            "id": f.id,
            "kind": "break",
            "initiator": f.initiator,
            "messages": list(f.message_ids),
        }
        if f.guard is not None:
            entry["guard"] = f.guard
        fragments.append(entry)
    return {
        "id": sd.id,
        "lifelines": list(sd.lifelines),
        "messages": messages,
        "fragments": fragments,
    }


def parse_sd(text: str) -> SequenceDiagram:
    return sd_from_dict(loads(text, "sequence diagram"))


def serialize_sd(sd: SequenceDiagram) -> str:
    return dumps(sd_to_dict(sd))


def extract_bcfs(sd: SequenceDiagram) -> tuple[BreakCombinedFragment, ...]:
    """All break fragments in diagram order (already normalized at parse)."""
    return sd.fragments


def context_of(
    sd: SequenceDiagram, bcf: BreakCombinedFragment
) -> tuple[tuple[Effect, ...] | None, tuple[Effect, ...] | None]:
    """Effects of the nearest effect-bearing messages around the fragment.

    Messages inside any fragment block never count as context; effect-less
    messages (pure acknowledgments) are skipped. Either side may be absent
    at the diagram boundary; if both are, :class:`NoContextError` is raised.
    """
    if bcf not in sd.fragments:
        raise UnknownBcfError(f"fragment {bcf.id} is not part of diagram {sd.id}")
    in_fragment = {
        sd.index_of(mid) for f in sd.fragments for mid in f.message_ids
    }
    block = [sd.index_of(mid) for mid in bcf.message_ids]
    first, last = min(block), max(block)

    before: tuple[Effect, ...] | None = None
    for i in range(first - 1, -1, -1):
        if i not in in_fragment and sd.messages[i].effects:
            before = sd.messages[i].effects
            break
    after: tuple[Effect, ...] | None = None
    for i in range(last + 1, len(sd.messages)):
        if i not in in_fragment and sd.messages[i].effects:
            after = sd.messages[i].effects
            break
    if before is None and after is None:
        raise NoContextError(
            f"fragment {bcf.id}: no effect-bearing message before or after the block"
        )
    return before, after

"""BPMN 2.0 XML interchange for the supported subset.

Supported elements: ``process``, ``startEvent``, ``endEvent``, ``task``,
``exclusiveGateway``, ``parallelGateway``, ``sequenceFlow``, and
``boundaryEvent`` with a ``message``/``error``/``timerEventDefinition``
child. Task effects and variant provenance have no standard BPMN home, so
they travel in ``extensionElements`` under a dedicated namespace.

Anything else raises :class:`~olcvar.errors.UnsupportedElementError`.
"""

from __future__ import annotations

import xml.etree.ElementTree as ET
from typing import Mapping

from .errors import ParseError, UnsupportedElementError
from .olc import Effect
from .process_model import (
    Node,
    NodeKind,
    ProcessModel,
    Provenance,
    SequenceFlow,
    Trigger,
)

BPMN_NS = "http://www.omg.org/spec/BPMN/20100524/MODEL"
EXT_NS = "urn:olcvar:schema:1"

_GATEWAY_DIRECTIONS = {"split": "Diverging", "join": "Converging"}
_DIRECTIONS_BY_GATEWAY = {v: k for k, v in _GATEWAY_DIRECTIONS.items()}

_NODE_TAGS = {
    NodeKind.START: "startEvent",
    NodeKind.END: "endEvent",
    NodeKind.TASK: "task",
    NodeKind.XOR: "exclusiveGateway",
    NodeKind.PARALLEL: "parallelGateway",
    NodeKind.BOUNDARY: "boundaryEvent",
}
_KINDS_BY_TAG = {v: k for k, v in _NODE_TAGS.items()}

_EVENT_DEFINITIONS = {
    Trigger.MESSAGE: "messageEventDefinition",
    Trigger.ERROR: "errorEventDefinition",
    Trigger.TIMER: "timerEventDefinition",
}
_TRIGGERS_BY_DEFINITION = {v: k for k, v in _EVENT_DEFINITIONS.items()}


def _local(tag: str) -> str:
    return tag.rsplit("}", 1)[-1]


def _ns_of(tag: str) -> str:
    return tag[1:].split("}", 1)[0] if tag.startswith("{") else ""


def model_to_xml(pm: ProcessModel) -> str:
    ET.register_namespace("", BPMN_NS)
    ET.register_namespace("olc", EXT_NS)
    definitions = ET.Element(
        f"{{{BPMN_NS}}}definitions",
        {"id": f"defs_{pm.id}", "targetNamespace": "urn:olcvar:models"},
    )
    process = ET.SubElement(
        definitions, f"{{{BPMN_NS}}}process", {"id": pm.id, "isExecutable": "false"}
    )

    if pm.provenance is not None:
        ext = ET.SubElement(process, f"{{{BPMN_NS}}}extensionElements")
        prov = ET.SubElement(
            ext,
            f"{{{EXT_NS}}}provenance",
            {"baseModel": pm.provenance.base_model_id, "aolc": pm.provenance.aolc_id},
        )
        for bcf_id, kind in zip(pm.provenance.bcf_ids, pm.provenance.pattern_kinds):
            ET.SubElement(prov, f"{{{EXT_NS}}}appliedBcf", {"id": bcf_id, "pattern": kind})
        for node_id in pm.provenance.added_nodes:
            ET.SubElement(prov, f"{{{EXT_NS}}}addedNode", {"id": node_id})

    for n in pm.nodes:  # already sorted by id
        attrs = {"id": n.id}
        if n.label:
            attrs["name"] = n.label
        if n.kind in (NodeKind.XOR, NodeKind.PARALLEL):
            attrs["gatewayDirection"] = _GATEWAY_DIRECTIONS[n.direction or "split"]
        if n.kind is NodeKind.BOUNDARY:
            attrs["attachedToRef"] = n.host or ""
            attrs["cancelActivity"] = "true"
        element = ET.SubElement(process, f"{{{BPMN_NS}}}{_NODE_TAGS[n.kind]}", attrs)
        if n.kind is NodeKind.TASK and n.effects:
            ext = ET.SubElement(element, f"{{{BPMN_NS}}}extensionElements")
            effects = ET.SubElement(ext, f"{{{EXT_NS}}}effects")
            for e in n.effects:
                effect_attrs = {"object": e.object_id, "from": e.source, "to": e.target}
                if e.self_loop:
                    effect_attrs["selfLoop"] = "true"
                ET.SubElement(effects, f"{{{EXT_NS}}}effect", effect_attrs)
        if n.kind is NodeKind.BOUNDARY and n.trigger is not None:
            ET.SubElement(element, f"{{{BPMN_NS}}}{_EVENT_DEFINITIONS[n.trigger]}")

    for e in pm.edges:  # already sorted by (source, target)
        attrs = {
            "id": f"flow_{e.source}__{e.target}",
            "sourceRef": e.source,
            "targetRef": e.target,
        }
        if e.guard is not None:
            attrs["name"] = e.guard
        ET.SubElement(process, f"{{{BPMN_NS}}}sequenceFlow", attrs)

    ET.indent(definitions)
    return ET.tostring(definitions, encoding="unicode", xml_declaration=True) + "\n"


def _parse_effects(task_element: ET.Element, task_id: str) -> tuple[Effect, ...]:
    effects = []
    for ext in task_element:
        if _local(ext.tag) != "extensionElements":
            continue
        for block in ext:
            if _local(block.tag) == "provenance":
                continue
            if _local(block.tag) != "effects":
                raise UnsupportedElementError(_local(block.tag), f"extension of {task_id}")
            for raw in block:
                if _local(raw.tag) != "effect":
                    raise UnsupportedElementError(_local(raw.tag), f"effects of {task_id}")
                try:
                    effects.append(
                        Effect(
                            object_id=raw.attrib["object"],
                            source=raw.attrib["from"],
                            target=raw.attrib["to"],
                            self_loop=raw.attrib.get("selfLoop") == "true",
                        )
                    )
                except KeyError as exc:
                    raise ParseError(
                        f"effect of task {task_id}: missing attribute {exc}"
                    ) from exc
    return tuple(effects)


def _parse_provenance(process: ET.Element) -> Provenance | None:
    for ext in process:
        if _local(ext.tag) != "extensionElements":
            continue
        for block in ext:
            if _local(block.tag) != "provenance":
                raise UnsupportedElementError(_local(block.tag), "process extension")
            bcf_ids, kinds, added = [], [], []
            for child in block:
                if _local(child.tag) == "appliedBcf":
                    bcf_ids.append(child.attrib.get("id", ""))
                    kinds.append(child.attrib.get("pattern", ""))
                elif _local(child.tag) == "addedNode":
                    added.append(child.attrib.get("id", ""))
                else:
                    raise UnsupportedElementError(_local(child.tag), "provenance")
            return Provenance(
                base_model_id=block.attrib.get("baseModel", ""),
                aolc_id=block.attrib.get("aolc", ""),
                bcf_ids=tuple(bcf_ids),
                pattern_kinds=tuple(kinds),
                added_nodes=tuple(added),
            )
    return None


def model_from_xml(text: str) -> ProcessModel:
    try:
        root = ET.fromstring(text)
    except ET.ParseError as exc:
        raise ParseError(f"process model: invalid XML ({exc})") from exc

    if _local(root.tag) == "definitions":
        processes = [child for child in root if _local(child.tag) == "process"]
        if len(processes) != 1:
            raise ParseError("definitions must contain exactly one process")
        process = processes[0]
    elif _local(root.tag) == "process":
        process = root
    else:
        raise UnsupportedElementError(_local(root.tag), "expected definitions or process")

    model_id = process.attrib.get("id", "process")
    nodes: list[Node] = []
    edges: list[SequenceFlow] = []
    for element in process:
        tag = _local(element.tag)
        if tag == "extensionElements":
            continue
        if tag == "sequenceFlow":
            try:
                source = element.attrib["sourceRef"]
                target = element.attrib["targetRef"]
            except KeyError as exc:
                raise ParseError(f"sequenceFlow: missing attribute {exc}") from exc
            edges.append(SequenceFlow(source, target, element.attrib.get("name")))
            continue
        if tag not in _KINDS_BY_TAG:
            raise UnsupportedElementError(tag, "process element")
        kind = _KINDS_BY_TAG[tag]
        node_id = element.attrib.get("id")
        if not node_id:
            raise ParseError(f"{tag}: missing attribute 'id'")
        direction = None
        if kind in (NodeKind.XOR, NodeKind.PARALLEL):
            raw_direction = element.attrib.get("gatewayDirection", "Diverging")
            if raw_direction not in _DIRECTIONS_BY_GATEWAY:
                raise ParseError(
                    f"gateway {node_id}: unsupported gatewayDirection {raw_direction!r}"
                )
            direction = _DIRECTIONS_BY_GATEWAY[raw_direction]
        trigger = None
        interrupting = None
        host = None
        if kind is NodeKind.BOUNDARY:
            host = element.attrib.get("attachedToRef")
            interrupting = element.attrib.get("cancelActivity", "true") == "true"
            for child in element:
                child_tag = _local(child.tag)
                if child_tag == "extensionElements":
                    continue
                if child_tag not in _TRIGGERS_BY_DEFINITION:
                    raise UnsupportedElementError(child_tag, f"boundary event {node_id}")
                trigger = _TRIGGERS_BY_DEFINITION[child_tag]
        elif kind is not NodeKind.TASK:
            for child in element:
                if _local(child.tag) != "extensionElements":
                    raise UnsupportedElementError(_local(child.tag), f"child of {node_id}")
        nodes.append(
            Node(
                id=node_id,
                kind=kind,
                label=element.attrib.get("name", ""),
                effects=_parse_effects(element, node_id) if kind is NodeKind.TASK else (),
                direction=direction,
                trigger=trigger,
                interrupting=interrupting,
                host=host,
            )
        )

    return ProcessModel(
        id=model_id,
        nodes=tuple(nodes),
        edges=tuple(edges),
        provenance=_parse_provenance(process),
    )

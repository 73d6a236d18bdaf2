"""Parser and canonical serializer for ``.arc`` evaluation documents.

A document is a sequence of brace blocks::

    # comments run to end of line
    scenario "luna-7" {
      seq: 7
      quality: privacy
      priority: high
      source: "Tax professional submitting sensitive data"
      stimulus: "..."
      environment: "..."
      artefacts: [prompt-optimiser, generator]
      response: "..."
      measures: [ratio(sensitive_filtered) >= 0.99]
      assessment "users-understand" {
        pass: true
        note: "workshop survey"
      }
    }

Block kinds are ``scenario``, ``architecture`` (with nested ``component`` and
``approach`` blocks), ``governance``, ``priorities`` and ``general``. Fields
are ``name: value`` pairs, one per line. Values are double-quoted strings,
numbers, lowercase labels, bracketed lists, or (inside ``measures``) measure
expressions.
"""

from __future__ import annotations

import re
from bisect import bisect_right
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from arceval.errors import MeasureError, ParseError, SourceSpan, ValidationError, VocabularyError
from arceval.measures import METRICS, MeasureSpec, format_measure, format_number, parse_measure
from arceval.model import (
    ArchApproach,
    ArchitectureModel,
    Component,
    ContextScenario,
    ExternalAssessment,
    Finding,
    GeneralScenario,
    GovernanceTag,
    PriorityInput,
)
from arceval.vocab import artefact_covers, parse_quality

BLOCK_KINDS = ("scenario", "architecture", "governance", "priorities", "general")

_NAME_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_-]*")
_NUMBER_RE = re.compile(r"-?\d+(?:\.\d+)?(?:[eE][+-]?\d+)?")
_BARE_RE = re.compile(r"[a-z][a-z0-9_]*(?:-[a-z0-9_]+)*\Z")


@dataclass
class Document:
    scenarios: list[ContextScenario] = field(default_factory=list)
    architectures: list[ArchitectureModel] = field(default_factory=list)
    governance: list[GovernanceTag] = field(default_factory=list)
    priorities: list[PriorityInput] = field(default_factory=list)
    generals: list[GeneralScenario] = field(default_factory=list)

    def __iter__(self):
        # unpacks as (scenarios, architectures, governance, priorities)
        return iter((self.scenarios, self.architectures, self.governance, self.priorities))

    def extend(self, other: "Document") -> None:
        self.scenarios.extend(other.scenarios)
        self.architectures.extend(other.architectures)
        self.governance.extend(other.governance)
        self.priorities.extend(other.priorities)
        self.generals.extend(other.generals)


# -- syntax tree -------------------------------------------------------------


@dataclass
class _Value:
    kind: str  # string | label | number | list | measure
    data: object
    span: SourceSpan


@dataclass
class _Field:
    key: str
    value: _Value
    span: SourceSpan


@dataclass
class _Block:
    kind: str
    name: str
    span: SourceSpan
    fields: list[_Field] = field(default_factory=list)
    children: list["_Block"] = field(default_factory=list)


_ESCAPES = {'"': '"', "\\": "\\", "n": "\n", "t": "\t", "r": "\r"}


class _Reader:
    def __init__(self, text: str, filename: str):
        self.text = text
        self.file = filename
        self.pos = 0
        self.line_starts = [0] + [m.end() for m in re.finditer("\n", text)]

    def span(self, pos: int | None = None) -> SourceSpan:
        pos = self.pos if pos is None else pos
        pos = min(pos, len(self.text))
        line = bisect_right(self.line_starts, pos)
        return SourceSpan(self.file, line, pos - self.line_starts[line - 1] + 1)

    def error(self, message: str, pos: int | None = None) -> ParseError:
        return ParseError(message, self.span(pos))

    def peek(self) -> str:
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def skip_inline(self) -> None:
        text = self.text
        while self.pos < len(text):
            ch = text[self.pos]
            if ch in " \t\r":
                self.pos += 1
            elif ch == "#":
                while self.pos < len(text) and text[self.pos] != "\n":
                    self.pos += 1
            else:
                break

    def skip_all(self) -> None:
        while True:
            self.skip_inline()
            if self.peek() == "\n":
                self.pos += 1
            else:
                break

    def expect(self, ch: str) -> None:
        if self.peek() != ch:
            found = repr(self.peek()) if self.peek() else "end of input"
            raise self.error(f"expected {ch!r}, found {found}")
        self.pos += 1

    def name(self) -> str:
        m = _NAME_RE.match(self.text, self.pos)
        if m is None:
            found = repr(self.peek()) if self.peek() else "end of input"
            raise self.error(f"expected a name, found {found}")
        self.pos = m.end()
        return m.group()

    def string(self) -> str:
        start = self.pos
        self.expect('"')
        out: list[str] = []
        text = self.text
        while True:
            if self.pos >= len(text):
                raise self.error("unterminated string", start)
            ch = text[self.pos]
            if ch == '"':
                self.pos += 1
                return "".join(out)
            if ch == "\n":
                raise self.error("newline in string (use \\n)", self.pos)
            if ch == "\\":
                esc = text[self.pos + 1 : self.pos + 2]
                if esc in _ESCAPES:
                    out.append(_ESCAPES[esc])
                    self.pos += 2
                elif esc == "u" and re.fullmatch(r"[0-9a-fA-F]{4}", text[self.pos + 2 : self.pos + 6]):
                    out.append(chr(int(text[self.pos + 2 : self.pos + 6], 16)))
                    self.pos += 6
                else:
                    raise self.error(f"invalid escape \\{esc}", self.pos)
                continue
            out.append(ch)
            self.pos += 1

    def value(self, in_list: bool = False) -> _Value:
        start = self.pos
        span = self.span()
        ch = self.peek()
        if ch == '"':
            return _Value("string", self.string(), span)
        if ch == "[":
            if in_list:
                raise self.error("nested lists are not allowed")
            return self._list()
        m = _NUMBER_RE.match(self.text, self.pos)
        if m is not None and (ch.isdigit() or ch == "-"):
            self.pos = m.end()
            tok = m.group()
            return _Value("number", int(tok) if re.fullmatch(r"-?\d+", tok) else float(tok), span)
        m = _NAME_RE.match(self.text, self.pos)
        if m is not None:
            after = m.end()
            while after < len(self.text) and self.text[after] in " \t":
                after += 1
            if after < len(self.text) and self.text[after] == "(":
                return self._measure(start)
            self.pos = m.end()
            return _Value("label", m.group(), span)
        found = repr(ch) if ch else "end of input"
        raise self.error(f"expected a value, found {found}")

    def _list(self) -> _Value:
        span = self.span()
        self.expect("[")
        items: list[_Value] = []
        self.skip_all()
        if self.peek() == "]":
            self.pos += 1
            return _Value("list", items, span)
        while True:
            items.append(self.value(in_list=True))
            self.skip_all()
            if self.peek() == ",":
                self.pos += 1
                self.skip_all()
                if self.peek() == "]":
                    raise self.error("trailing comma in list")
                continue
            if self.peek() == "]":
                self.pos += 1
                return _Value("list", items, span)
            found = repr(self.peek()) if self.peek() else "end of input"
            raise self.error(f"expected ',' or ']', found {found}")

    def _measure(self, start: int) -> _Value:
        depth = 0
        pos = start
        text = self.text
        while pos < len(text):
            ch = text[pos]
            if ch == "(":
                depth += 1
            elif ch == ")":
                depth -= 1
            elif depth == 0 and ch in ",]\n#}":
                break
            elif ch == "\n":
                break
            pos += 1
        raw = text[start:pos].rstrip()
        try:
            spec = parse_measure(raw)
        except MeasureError as exc:
            offset = exc.span.column - 1 if exc.span else 0
            raise MeasureError(exc.message, self.span(start + offset)) from None
        self.pos = start + len(raw)
        return _Value("measure", spec, self.span(start))

    def block(self, nested: bool = False) -> _Block:
        span = self.span()
        kind = self.name()
        if not nested and kind not in BLOCK_KINDS:
            raise ParseError(f"unknown block kind {kind!r}", span)
        self.skip_inline()
        if self.peek() != '"':
            raise self.error(f"expected quoted name after {kind}")
        name = self.string()
        if not name:
            raise self.error(f"{kind} name must be non-empty")
        self.skip_inline()
        self.expect("{")
        blk = _Block(kind, name, span)
        while True:
            self.skip_all()
            if self.peek() == "}":
                self.pos += 1
                return blk
            if not self.peek():
                raise self.error(f"unterminated {kind} block (missing '}}')")
            key_span = self.span()
            key_pos = self.pos
            key = self.string() if self.peek() == '"' else self.name()
            self.skip_inline()
            if self.peek() == ":":
                self.pos += 1
                self.skip_inline()
                val = self.value()
                self.skip_inline()
                if self.peek() not in ("\n", "}", ""):
                    raise self.error("expected end of line after field value")
                blk.fields.append(_Field(key, val, key_span))
            elif self.peek() == '"' and self.text[key_pos] != '"':
                self.pos = key_pos
                blk.children.append(self.block(nested=True))
            else:
                found = repr(self.peek()) if self.peek() else "end of input"
                raise self.error(f"expected ':' after field {key!r}, found {found}")

    def document(self) -> list[_Block]:
        blocks = []
        while True:
            self.skip_all()
            if self.pos >= len(self.text):
                return blocks
            blocks.append(self.block())


# -- interpretation ----------------------------------------------------------

_SCENARIO_FIELDS = ("seq", "quality", "priority", "source", "stimulus", "environment",
                    "artefacts", "response", "measures")
_SCENARIO_REQUIRED = ("quality", "source", "stimulus", "environment", "artefacts", "response")
_GENERAL_FIELDS = ("source", "stimulus", "environment", "artefacts", "response", "measures", "metrics")
_GENERAL_REQUIRED = ("source", "stimulus", "environment", "artefacts", "response")


def _fields(blk: _Block, allowed: Sequence[str], required: Sequence[str]) -> dict[str, _Field]:
    seen: dict[str, _Field] = {}
    for f in blk.fields:
        if f.key not in allowed:
            raise ParseError(f"unknown field {f.key} in {blk.kind} block", f.span)
        if f.key in seen:
            raise ParseError(f"duplicate field {f.key}", f.span)
        seen[f.key] = f
    for name in required:
        if name not in seen:
            raise ParseError(f"missing field {name}", blk.span)
    return seen


def _no_children(blk: _Block, allowed: Sequence[str] = ()) -> None:
    for child in blk.children:
        if child.kind not in allowed:
            raise ParseError(f"unknown nested block {child.kind!r} in {blk.kind}", child.span)


def _text(f: _Field) -> str:
    if f.value.kind not in ("string", "label"):
        raise ParseError(f"{f.key} must be text", f.value.span)
    return f.value.data


def _label(f: _Field) -> str:
    if f.value.kind != "label":
        raise ParseError(f"{f.key} must be a label", f.value.span)
    return f.value.data


def _items(f: _Field, kinds: Sequence[str] = ("string", "label")) -> list[_Value]:
    if f.value.kind != "list":
        raise ParseError(f"{f.key} must be a list", f.value.span)
    for item in f.value.data:
        if item.kind not in kinds:
            raise ParseError(f"unexpected {item.kind} in {f.key}", item.span)
    return f.value.data


def _text_list(f: _Field | None) -> tuple[str, ...]:
    return tuple(i.data for i in _items(f)) if f else ()


def _vocab(fn, value: _Value):
    try:
        return fn(value.data)
    except VocabularyError as exc:
        raise ParseError(str(exc), value.span) from None


def _build(span: SourceSpan, ctor, **kwargs):
    try:
        return ctor(span=span, **kwargs)
    except (ValidationError, VocabularyError) as exc:
        raise ParseError(str(exc), span) from None


def _artefacts(f: _Field) -> tuple[str, ...]:
    from arceval.vocab import parse_artefact

    return tuple(_vocab(parse_artefact, i) for i in _items(f))


def _scenario(blk: _Block) -> ContextScenario:
    from arceval.vocab import parse_priority

    fs = _fields(blk, _SCENARIO_FIELDS, _SCENARIO_REQUIRED)
    _no_children(blk, ("assessment",))
    seq = None
    if "seq" in fs:
        v = fs["seq"].value
        if v.kind != "number" or not isinstance(v.data, int) or v.data < 1:
            raise ParseError("seq must be a positive integer", v.span)
        seq = v.data
    measures: tuple[MeasureSpec, ...] = ()
    if "measures" in fs:
        measures = tuple(i.data for i in _items(fs["measures"], ("measure",)))
    assessments = []
    names = set()
    for child in blk.children:
        cf = _fields(child, ("pass", "note"), ("pass",))
        _no_children(child)
        flag = cf["pass"].value
        if flag.kind != "label" or flag.data not in ("true", "false"):
            raise ParseError("pass must be true or false", flag.span)
        if child.name in names:
            raise ParseError(f"duplicate assessment {child.name!r}", child.span)
        names.add(child.name)
        note = _text(cf["note"]) if "note" in cf else ""
        assessments.append(ExternalAssessment(child.name, flag.data == "true", note, span=child.span))
    if not _items(fs["artefacts"]):
        raise ParseError("artefacts must be non-empty", fs["artefacts"].value.span)
    return _build(
        blk.span,
        ContextScenario,
        id=blk.name,
        seq=seq,
        quality=_vocab(parse_quality, fs["quality"].value),
        priority=_vocab(parse_priority, fs["priority"].value) if "priority" in fs else "unset",
        source=_text(fs["source"]),
        stimulus=_text(fs["stimulus"]),
        environment=_text(fs["environment"]),
        artefacts=_artefacts(fs["artefacts"]),
        response=_text(fs["response"]),
        measures=measures,
        external_assessments=tuple(assessments),
    )


def _general(blk: _Block) -> GeneralScenario:
    fs = _fields(blk, _GENERAL_FIELDS, _GENERAL_REQUIRED)
    _no_children(blk)
    quality = _vocab(parse_quality, _Value("label", blk.name, blk.span))
    metrics = _text_list(fs.get("metrics"))
    for item in _items(fs["metrics"]) if "metrics" in fs else ():
        if item.data not in METRICS:
            raise ParseError(f"unknown metric kind {item.data!r}", item.span)
    return _build(
        blk.span,
        GeneralScenario,
        quality=quality,
        source=_text(fs["source"]),
        stimulus=_text(fs["stimulus"]),
        environment=_text(fs["environment"]),
        artefacts=_artefacts(fs["artefacts"]),
        response=_text(fs["response"]),
        measures=_text_list(fs.get("measures")),
        metrics=metrics,
    )


def _governance(blk: _Block) -> GovernanceTag:
    fs = _fields(blk, ("text", "qualities"), ("text",))
    _no_children(blk)
    qualities = tuple(_vocab(parse_quality, i) for i in _items(fs["qualities"])) if "qualities" in fs else ()
    return _build(blk.span, GovernanceTag, id=blk.name, text=_text(fs["text"]), qualities=qualities)


def _architecture(blk: _Block) -> ArchitectureModel:
    fs = _fields(blk, ("version",), ())
    _no_children(blk, ("component", "approach"))
    components, approaches = [], []
    seen: set[tuple[str, str]] = set()
    for child in blk.children:
        if (child.kind, child.name) in seen:
            raise ParseError(f"duplicate {child.kind} id {child.name!r}", child.span)
        seen.add((child.kind, child.name))
        _no_children(child)
        if child.kind == "component":
            cf = _fields(child, ("artefact", "description"), ("artefact",))
            from arceval.vocab import parse_artefact

            components.append(
                _build(
                    child.span,
                    Component,
                    id=child.name,
                    artefact=_vocab(parse_artefact, cf["artefact"].value),
                    description=_text(cf["description"]) if "description" in cf else "",
                )
            )
        else:
            af = _fields(child, ("kind", "components", "supports", "coverage", "description"), ("kind",))
            approaches.append(
                _build(
                    child.span,
                    ArchApproach,
                    id=child.name,
                    kind=_label(af["kind"]),
                    components=_text_list(af.get("components")),
                    supports=_text_list(af.get("supports")),
                    coverage=_label(af["coverage"]) if "coverage" in af else "full",
                    description=_text(af["description"]) if "description" in af else "",
                )
            )
    return _build(
        blk.span,
        ArchitectureModel,
        name=blk.name,
        version=_text(fs["version"]) if "version" in fs else "",
        components=tuple(components),
        approaches=tuple(approaches),
    )


def _priorities(blk: _Block) -> list[PriorityInput]:
    _no_children(blk)
    out = []
    seen = set()
    for f in blk.fields:
        if f.key in seen:
            raise ParseError(f"duplicate priority entry for {f.key}", f.span)
        seen.add(f.key)
        items = _items(f, ("number",))
        if len(items) != 3:
            raise ParseError("priority entry needs [impact, risk, relevance]", f.value.span)
        out.append(
            _build(
                f.span,
                PriorityInput,
                scenario=f.key,
                impact=items[0].data,
                risk=items[1].data,
                relevance=items[2].data,
                stakeholder=blk.name,
            )
        )
    return out


def parse_document(text: str, filename: str = "<string>") -> Document:
    """Parse document text; raises ParseError (with a span) on the first problem."""
    blocks = _Reader(text, filename).document()
    doc = Document()
    ids: dict[str, set[str]] = {k: set() for k in BLOCK_KINDS}
    for blk in blocks:
        if blk.name in ids[blk.kind]:
            raise ParseError(f"duplicate {blk.kind} id {blk.name!r}", blk.span)
        ids[blk.kind].add(blk.name)
        if blk.kind == "scenario":
            doc.scenarios.append(_scenario(blk))
        elif blk.kind == "architecture":
            doc.architectures.append(_architecture(blk))
        elif blk.kind == "governance":
            doc.governance.append(_governance(blk))
        elif blk.kind == "priorities":
            doc.priorities.extend(_priorities(blk))
        else:
            doc.generals.append(_general(blk))
    return doc


def parse_file(path) -> Document:
    with open(path, encoding="utf-8") as fh:
        return parse_document(fh.read(), str(path))


# -- serialization -----------------------------------------------------------


def quote(text: str) -> str:
    out = ['"']
    for ch in text:
        if ch == '"':
            out.append('\\"')
        elif ch == "\\":
            out.append("\\\\")
        elif ch == "\n":
            out.append("\\n")
        elif ch == "\t":
            out.append("\\t")
        elif ch == "\r":
            out.append("\\r")
        elif ord(ch) < 0x20 or ord(ch) == 0x7F or 0xD800 <= ord(ch) <= 0xDFFF:
            out.append(f"\\u{ord(ch):04x}")
        else:
            out.append(ch)
    out.append('"')
    return "".join(out)


def _item(text: str) -> str:
    return text if _BARE_RE.match(text) and text not in ("true", "false") else quote(text)


def _key(text: str) -> str:
    return text if _NAME_RE.fullmatch(text) else quote(text)


def _list(items: Iterable[str]) -> str:
    return "[" + ", ".join(_item(i) for i in items) + "]"


def _quoted_list(items: Iterable[str]) -> str:
    return "[" + ", ".join(quote(i) for i in items) + "]"


def _scenario_lines(s: ContextScenario) -> list[str]:
    lines = [f"scenario {quote(s.id)} {{"]
    if s.seq is not None:
        lines.append(f"  seq: {s.seq}")
    lines += [
        f"  quality: {s.quality}",
        f"  priority: {s.priority}",
        f"  source: {quote(s.source)}",
        f"  stimulus: {quote(s.stimulus)}",
        f"  environment: {quote(s.environment)}",
        f"  artefacts: {_list(s.artefacts)}",
        f"  response: {quote(s.response)}",
    ]
    if s.measures:
        lines.append("  measures: [" + ", ".join(format_measure(m) for m in s.measures) + "]")
    for a in s.external_assessments:
        lines.append(f"  assessment {quote(a.name)} {{")
        lines.append(f"    pass: {'true' if a.passed else 'false'}")
        if a.note:
            lines.append(f"    note: {quote(a.note)}")
        lines.append("  }")
    lines.append("}")
    return lines


def _general_lines(g: GeneralScenario) -> list[str]:
    lines = [
        f"general {quote(g.quality)} {{",
        f"  source: {quote(g.source)}",
        f"  stimulus: {quote(g.stimulus)}",
        f"  environment: {quote(g.environment)}",
        f"  artefacts: {_list(g.artefacts)}",
        f"  response: {quote(g.response)}",
    ]
    if g.measures:
        lines.append(f"  measures: {_quoted_list(g.measures)}")
    if g.metrics:
        lines.append(f"  metrics: {_list(g.metrics)}")
    lines.append("}")
    return lines


def _governance_lines(t: GovernanceTag) -> list[str]:
    lines = [f"governance {quote(t.id)} {{", f"  text: {quote(t.text)}"]
    if t.qualities:
        lines.append(f"  qualities: {_list(t.qualities)}")
    lines.append("}")
    return lines


def _architecture_lines(m: ArchitectureModel) -> list[str]:
    lines = [f"architecture {quote(m.name)} {{"]
    if m.version:
        lines.append(f"  version: {quote(m.version)}")
    for c in m.components:
        lines.append(f"  component {quote(c.id)} {{")
        lines.append(f"    artefact: {c.artefact}")
        if c.description:
            lines.append(f"    description: {quote(c.description)}")
        lines.append("  }")
    for a in m.approaches:
        lines.append(f"  approach {quote(a.id)} {{")
        lines.append(f"    kind: {a.kind}")
        if a.components:
            lines.append(f"    components: {_list(a.components)}")
        if a.supports:
            lines.append(f"    supports: {_list(a.supports)}")
        lines.append(f"    coverage: {a.coverage}")
        if a.description:
            lines.append(f"    description: {quote(a.description)}")
        lines.append("  }")
    lines.append("}")
    return lines


def _priority_lines(inputs: Sequence[PriorityInput]) -> list[str]:
    groups: dict[str, list[PriorityInput]] = {}
    for p in inputs:
        groups.setdefault(p.stakeholder, []).append(p)
    lines: list[str] = []
    for stakeholder, items in groups.items():
        if lines:
            lines.append("")
        lines.append(f"priorities {quote(stakeholder)} {{")
        for p in items:
            lines.append(f"  {_key(p.scenario)}: [{p.impact}, {p.risk}, {p.relevance}]")
        lines.append("}")
    return lines


def serialize(objects) -> str:
    """Canonical text for a Document or an iterable of records.

    Blocks are grouped by kind (general, governance, scenario, architecture,
    priorities), keep their relative order, and are separated by one blank
    line. Equal inputs always give identical bytes.
    """
    if isinstance(objects, Document):
        doc = objects
    else:
        doc = Document()
        for obj in objects:
            if isinstance(obj, ContextScenario):
                doc.scenarios.append(obj)
            elif isinstance(obj, ArchitectureModel):
                doc.architectures.append(obj)
            elif isinstance(obj, GovernanceTag):
                doc.governance.append(obj)
            elif isinstance(obj, PriorityInput):
                doc.priorities.append(obj)
            elif isinstance(obj, GeneralScenario):
                doc.generals.append(obj)
            else:
                raise TypeError(f"cannot serialize {type(obj).__name__}")
    chunks: list[list[str]] = []
    chunks += [_general_lines(g) for g in doc.generals]
    chunks += [_governance_lines(t) for t in doc.governance]
    chunks += [_scenario_lines(s) for s in doc.scenarios]
    chunks += [_architecture_lines(m) for m in doc.architectures]
    if doc.priorities:
        chunks.append(_priority_lines(doc.priorities))
    return "\n".join("\n".join(c) + "\n" for c in chunks)


# -- validation --------------------------------------------------------------


def validate(scenario: ContextScenario, catalogue: Mapping[str, GeneralScenario] | Iterable[GeneralScenario]) -> list[Finding]:
    """Advisory findings for a scenario; never raises."""
    if not isinstance(catalogue, Mapping):
        catalogue = {g.quality: g for g in catalogue}
    findings: list[Finding] = []
    if not scenario.measures:
        findings.append(Finding("warning", "no-measures", scenario.id, "scenario has no response measures"))
    general = catalogue.get(scenario.quality)
    if general is not None:
        for a in scenario.artefacts:
            if not any(artefact_covers(g, a) for g in general.artefacts):
                findings.append(
                    Finding("info", "artefact-outside-general", scenario.id,
                            f"artefact {a} is not named by the {scenario.quality} general scenario")
                )
    recorded = {a.name for a in scenario.external_assessments}
    for m in scenario.measures:
        if not m.machine and m.args[0] not in recorded:
            findings.append(
                Finding("warning", "judged-needs-assessment", scenario.id,
                        f"human-judged measure {format_measure(m)} requires an external assessment record")
            )
    return findings


def format_value(value) -> str:
    """Render a scalar the way the serializer would (used by the CLI)."""
    if isinstance(value, str):
        return quote(value)
    return format_number(value)

"""Small XML helpers shared by the document readers and writers.

Readers go through :func:`parse` so that elements keep the line they were
declared on (used in error messages) and mixed content is preserved exactly.
"""

from __future__ import annotations

import xml.etree.ElementTree as ET
from xml.parsers import expat

DECLARATION = '<?xml version="1.0"?>\n'


class XMLFormatError(ValueError):
    """Raised for malformed or out-of-vocabulary documents."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class Document:
    """Parsed tree plus the source line of each element."""

    def __init__(self, root: ET.Element, lines: dict[int, int]):
        self.root = root
        self._lines = lines

    def line(self, elem: ET.Element) -> int | None:
        return self._lines.get(id(elem))

    def error(self, elem: ET.Element, message: str) -> XMLFormatError:
        return XMLFormatError(message, self.line(elem))


def parse(data: str | bytes) -> Document:
    parser = expat.ParserCreate("utf-8")
    stack: list[ET.Element] = []
    lines: dict[int, int] = {}
    holder: list[ET.Element] = []
    pending: list[str] = []

    def flush() -> None:
        if not pending or not stack:
            pending.clear()
            return
        text = "".join(pending)
        pending.clear()
        parent = stack[-1]
        if len(parent):
            last = parent[-1]
            last.tail = (last.tail or "") + text
        else:
            parent.text = (parent.text or "") + text

    def start(tag, attrs):
        flush()
        elem = ET.Element(tag, attrs)
        lines[id(elem)] = parser.CurrentLineNumber
        if stack:
            stack[-1].append(elem)
        else:
            holder.append(elem)
        stack.append(elem)

    def end(tag):
        flush()
        stack.pop()

    parser.StartElementHandler = start
    parser.EndElementHandler = end
    parser.CharacterDataHandler = pending.append
    parser.ordered_attributes = False
    parser.buffer_text = True
    try:
        if isinstance(data, str):
            data = data.encode("utf-8")
        parser.Parse(data, True)
    except expat.ExpatError as exc:
        raise XMLFormatError(f"malformed document: {expat.errors.messages[exc.code]}", exc.lineno) from None
    if not holder:
        raise XMLFormatError("empty document")
    return Document(holder[0], lines)


def tostring(root: ET.Element, indent: str | None = "  ") -> str:
    if indent is not None:
        ET.indent(root, space=indent)
    return DECLARATION + ET.tostring(root, encoding="unicode") + "\n"

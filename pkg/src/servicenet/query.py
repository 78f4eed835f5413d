"""Path-pattern-and-constraint queries over XML documents or lines of text.

Two modes share one constraint grammar:

    MATCH /a/*/c WHERE @attr = "v" AND CONTAINS(., "word")
    LINES WHERE CONTAINS(., "word") OR . = "exact"

A path step is a tag name or `*` (matches exactly one step).  `.` is the
element text (or the whole line), `@x` an attribute.  The ordering
comparisons <, <=, >, >= are numeric only and raise on non-numeric
operands; = and != compare numerically when both sides parse as decimals
and as exact text otherwise.  CONTAINS is case-insensitive substring.
Everything here is pure; parsed queries are immutable.
"""

from __future__ import annotations

import re
import xml.etree.ElementTree as ET
from dataclasses import dataclass, field

from .errors import MalformedXml, SyntaxError_, TypeMismatch

_TOKEN = re.compile(
    r"""\s*(?:
        (?P<string>"[^"]*")
      | (?P<number>-?\d+(?:\.\d+)?)
      | (?P<attr>@[A-Za-z_][\w.-]*)
      | (?P<name>[A-Za-z_][\w.-]*)
      | (?P<op><=|>=|!=|=|<|>)
      | (?P<punct>[/()*,.])
    )""",
    re.VERBOSE,
)

KEYWORDS = {"MATCH", "LINES", "WHERE", "AND", "OR", "NOT", "CONTAINS"}


@dataclass(frozen=True)
class Tok:
    kind: str
    text: str
    pos: int


def _tokenize(source):
    out = []
    pos = 0
    while pos < len(source):
        m = _TOKEN.match(source, pos)
        if m is None:
            if source[pos:].strip() == "":
                break
            raise SyntaxError_("bad character %r" % source[pos:].lstrip()[0], pos)
        pos = m.end()
        for kind in ("string", "number", "attr", "name", "op", "punct"):
            text = m.group(kind)
            if text is not None:
                start = m.start(kind)
                if kind == "name" and text in KEYWORDS:
                    kind = "keyword"
                out.append(Tok(kind, text, start))
                break
    out.append(Tok("eof", "", len(source)))
    return out


# -- constraint expression tree --------------------------------------------

@dataclass(frozen=True)
class Content:
    def render(self):
        return "."


@dataclass(frozen=True)
class Attr:
    name: str

    def render(self):
        return "@" + self.name


@dataclass(frozen=True)
class Text:
    value: str

    def render(self):
        return '"%s"' % self.value


@dataclass(frozen=True)
class Number:
    value: float

    def render(self):
        return ("%d" % self.value) if self.value == int(self.value) else repr(self.value)


@dataclass(frozen=True)
class Cmp:
    op: str
    left: object
    right: object

    def render(self):
        return "%s %s %s" % (self.left.render(), self.op, self.right.render())


@dataclass(frozen=True)
class Contains:
    operand: object
    needle: str

    def render(self):
        return 'CONTAINS(%s, "%s")' % (self.operand.render(), self.needle)


@dataclass(frozen=True)
class Not:
    inner: object

    def render(self):
        return "NOT %s" % _wrap(self.inner)


@dataclass(frozen=True)
class And:
    left: object
    right: object

    def render(self):
        # the right side keeps parentheses so left-associative reparsing
        # reconstructs the same tree
        return "%s AND %s" % (_wrap(self.left, Or), _wrap(self.right, Or, And))


@dataclass(frozen=True)
class Or:
    left: object
    right: object

    def render(self):
        return "%s OR %s" % (self.left.render(), _wrap(self.right, Or))


def _wrap(node, *loose):
    text = node.render()
    if isinstance(node, loose or (Or, And)):
        return "(%s)" % text
    return text


@dataclass(frozen=True)
class Query:
    mode: str                      # "xml" | "text"
    pattern: tuple = ()            # path steps, xml mode only
    constraint: object = None      # expression tree or None (match all)

    def render(self):
        if self.mode == "xml":
            head = "MATCH /" + "/".join(self.pattern)
        else:
            head = "LINES"
        if self.constraint is None:
            return head
        return "%s WHERE %s" % (head, self.constraint.render())


@dataclass(frozen=True)
class MatchResult:
    matches: tuple = ()  # (location, content) pairs in document order

    @property
    def contents(self):
        return [content for _, content in self.matches]


class _Parser:
    def __init__(self, tokens):
        self.tokens = tokens
        self.i = 0

    @property
    def tok(self):
        return self.tokens[self.i]

    def advance(self):
        tok = self.tok
        self.i += 1
        return tok

    def expect(self, kind, text=None):
        tok = self.tok
        if tok.kind != kind or (text is not None and tok.text != text):
            raise SyntaxError_("expected %s, got %r" % (text or kind, tok.text), tok.pos)
        return self.advance()

    def parse(self):
        head = self.expect("keyword")
        if head.text == "MATCH":
            pattern = self.parse_pattern()
            constraint = self.parse_where()
            query = Query("xml", pattern, constraint)
        elif head.text == "LINES":
            constraint = self.parse_where(optional_keyword=True)
            query = Query("text", (), constraint)
        else:
            raise SyntaxError_("query must start with MATCH or LINES", head.pos)
        self.expect("eof")
        return query

    def parse_pattern(self):
        steps = []
        self.expect("punct", "/")
        while True:
            tok = self.tok
            if tok.kind == "name" or (tok.kind == "punct" and tok.text == "*"):
                steps.append(self.advance().text)
            else:
                raise SyntaxError_("expected a path step", tok.pos)
            if self.tok.kind == "punct" and self.tok.text == "/":
                self.advance()
            else:
                break
        return tuple(steps)

    def parse_where(self, optional_keyword=False):
        if self.tok.kind == "keyword" and self.tok.text == "WHERE":
            self.advance()
            return self.parse_or()
        if optional_keyword and self.tok.kind != "eof":
            return self.parse_or()
        return None

    def parse_or(self):
        node = self.parse_and()
        while self.tok.kind == "keyword" and self.tok.text == "OR":
            self.advance()
            node = Or(node, self.parse_and())
        return node

    def parse_and(self):
        node = self.parse_not()
        while self.tok.kind == "keyword" and self.tok.text == "AND":
            self.advance()
            node = And(node, self.parse_not())
        return node

    def parse_not(self):
        if self.tok.kind == "keyword" and self.tok.text == "NOT":
            self.advance()
            return Not(self.parse_not())
        return self.parse_primary()

    def parse_primary(self):
        tok = self.tok
        if tok.kind == "punct" and tok.text == "(":
            self.advance()
            node = self.parse_or()
            self.expect("punct", ")")
            return node
        if tok.kind == "keyword" and tok.text == "CONTAINS":
            return self.parse_contains()
        left = self.parse_operand()
        op = self.expect("op").text
        right = self.parse_operand()
        return Cmp(op, left, right)

    def parse_contains(self):
        self.expect("keyword", "CONTAINS")
        if self.tok.kind == "string":  # sugar: CONTAINS "word" means CONTAINS(., "word")
            return Contains(Content(), self.advance().text[1:-1])
        self.expect("punct", "(")
        operand = self.parse_operand()
        self.expect("punct", ",")
        needle = self.expect("string").text[1:-1]
        self.expect("punct", ")")
        return Contains(operand, needle)

    def parse_operand(self):
        tok = self.tok
        if tok.kind == "punct" and tok.text == ".":
            self.advance()
            return Content()
        if tok.kind == "attr":
            return Attr(self.advance().text[1:])
        if tok.kind == "string":
            return Text(self.advance().text[1:-1])
        if tok.kind == "number":
            return Number(float(self.advance().text))
        raise SyntaxError_("expected ., @attr, string or number", tok.pos)


def parse_query(source):
    """Parse a query string; raises SyntaxError_ with the failing position."""
    return _Parser(_tokenize(source)).parse()


# -- evaluation -------------------------------------------------------------

def _as_number(text):
    try:
        return float(text)
    except (TypeError, ValueError):
        return None


def _operand_value(operand, content, attrs):
    if isinstance(operand, Content):
        return content
    if isinstance(operand, Attr):
        return attrs.get(operand.name)
    if isinstance(operand, Text):
        return operand.value
    if isinstance(operand, Number):
        return operand.value
    raise TypeError("not an operand: %r" % (operand,))


def eval_constraint(node, content, attrs):
    """Evaluate an expression tree against one element or line."""
    if node is None:
        return True
    if isinstance(node, And):
        return eval_constraint(node.left, content, attrs) \
            and eval_constraint(node.right, content, attrs)
    if isinstance(node, Or):
        return eval_constraint(node.left, content, attrs) \
            or eval_constraint(node.right, content, attrs)
    if isinstance(node, Not):
        return not eval_constraint(node.inner, content, attrs)
    if isinstance(node, Contains):
        value = _operand_value(node.operand, content, attrs)
        return value is not None and node.needle.lower() in str(value).lower()
    if isinstance(node, Cmp):
        left = _operand_value(node.left, content, attrs)
        right = _operand_value(node.right, content, attrs)
        if node.op in ("<", "<=", ">", ">="):
            ln = left if isinstance(left, float) else _as_number(left)
            rn = right if isinstance(right, float) else _as_number(right)
            if ln is None or rn is None:
                raise TypeMismatch("%s needs numeric operands, got %r and %r"
                                   % (node.op, left, right))
            return {"<": ln < rn, "<=": ln <= rn,
                    ">": ln > rn, ">=": ln >= rn}[node.op]
        if left is None or right is None:  # missing attribute equals nothing
            return node.op == "!="
        ln = left if isinstance(left, float) else _as_number(left)
        rn = right if isinstance(right, float) else _as_number(right)
        if ln is not None and rn is not None:
            equal = ln == rn
        else:
            equal = str(left) == str(right)
        return equal if node.op == "=" else not equal
    raise TypeError("not a constraint node: %r" % (node,))


def _element_content(elem):
    return "".join(elem.itertext())


def _pattern_matches(pattern, path):
    return len(pattern) == len(path) and all(
        step == "*" or step == tag for step, tag in zip(pattern, path)
    )


def eval_xml(q, document):
    """All elements whose root path matches the pattern and pass the constraint."""
    if q.mode != "xml":
        raise TypeMismatch("not an xml-mode query")
    try:
        root = ET.fromstring(document)
    except ET.ParseError as exc:
        raise MalformedXml(str(exc)) from None
    matches = []

    def walk(elem, tags, location):
        if _pattern_matches(q.pattern, tags):
            if eval_constraint(q.constraint, _element_content(elem), elem.attrib):
                matches.append((location, _element_content(elem)))
        counters = {}
        for child in elem:
            counters[child.tag] = counters.get(child.tag, 0) + 1
            walk(child, tags + (child.tag,),
                 "%s/%s[%d]" % (location, child.tag, counters[child.tag]))

    walk(root, (root.tag,), "/%s[1]" % root.tag)
    return MatchResult(tuple(matches))


def eval_text(q, lines):
    """All (1-based line number, line) pairs passing the constraint."""
    if q.mode != "text":
        raise TypeMismatch("not a text-mode query")
    matches = [
        (number, line)
        for number, line in enumerate(lines, start=1)
        if eval_constraint(q.constraint, line, {})
    ]
    return MatchResult(tuple(matches))

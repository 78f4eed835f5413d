"""Query language: grammar, evaluation, and oracle equivalence.

The oracle is an independent enumerate-all-paths-then-filter
implementation: it walks the tree collecting (tag path, element) pairs,
matches patterns positionally, and evaluates constraints with its own
recursion, sharing no code with the module under test.
"""

import xml.etree.ElementTree as ET

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from servicenet import query as Q
from servicenet.errors import SyntaxError_, TypeMismatch


# -- independent oracle ------------------------------------------------------

def oracle_enumerate(document):
    root = ET.fromstring(document)
    found = []

    def walk(elem, tags):
        found.append((tags, elem))
        for child in elem:
            walk(child, tags + (child.tag,))

    walk(root, (root.tag,))
    return found


def oracle_constraint(node, elem):
    content = "".join(elem.itertext())

    def value_of(operand):
        if isinstance(operand, Q.Content):
            return content
        if isinstance(operand, Q.Attr):
            return elem.attrib.get(operand.name)
        if isinstance(operand, Q.Text):
            return operand.value
        return operand.value  # Number

    def number(v):
        if isinstance(v, float):
            return v
        try:
            return float(v)
        except (TypeError, ValueError):
            return None

    if node is None:
        return True
    if isinstance(node, Q.And):
        return oracle_constraint(node.left, elem) and oracle_constraint(node.right, elem)
    if isinstance(node, Q.Or):
        return oracle_constraint(node.left, elem) or oracle_constraint(node.right, elem)
    if isinstance(node, Q.Not):
        return not oracle_constraint(node.inner, elem)
    if isinstance(node, Q.Contains):
        v = value_of(node.operand)
        return v is not None and node.needle.lower() in str(v).lower()
    left, right = value_of(node.left), value_of(node.right)
    if node.op in ("<", "<=", ">", ">="):
        ln, rn = number(left), number(right)
        if ln is None or rn is None:
            raise TypeMismatch("oracle: non-numeric ordering operand")
        return eval("ln %s rn" % node.op)
    if left is None or right is None:
        return node.op == "!="
    ln, rn = number(left), number(right)
    equal = (ln == rn) if (ln is not None and rn is not None) else (str(left) == str(right))
    return equal if node.op == "=" else not equal


def oracle_eval_xml(q, document):
    out = []
    for tags, elem in oracle_enumerate(document):
        if len(tags) != len(q.pattern):
            continue
        if all(s == "*" or s == t for s, t in zip(q.pattern, tags)):
            if oracle_constraint(q.constraint, elem):
                out.append("".join(elem.itertext()))
    return out


# -- generators --------------------------------------------------------------

tag_names = st.sampled_from(["a", "b", "c", "item"])
words = st.sampled_from(["cat", "dog", "Fish", "5", "12", "3.5", ""])


@st.composite
def documents(draw, max_children=3, depth=3):
    def build(level):
        elem = ET.Element(draw(tag_names))
        if draw(st.booleans()):
            elem.set("x", draw(words))
        elem.text = draw(words)
        if level < depth:
            for _ in range(draw(st.integers(0, max_children))):
                elem.append(build(level + 1))
        return elem

    return ET.tostring(build(0), encoding="unicode")


@st.composite
def constraints(draw, depth=0):
    kind = draw(st.sampled_from(
        ["cmp", "contains"] if depth >= 2 else ["cmp", "contains", "and", "or", "not"]))
    if kind == "and":
        return Q.And(draw(constraints(depth + 1)), draw(constraints(depth + 1)))
    if kind == "or":
        return Q.Or(draw(constraints(depth + 1)), draw(constraints(depth + 1)))
    if kind == "not":
        return Q.Not(draw(constraints(depth + 1)))
    operand = draw(st.sampled_from([Q.Content(), Q.Attr("x")]))
    if kind == "contains":
        return Q.Contains(operand, draw(st.sampled_from(["cat", "5", "i"])))
    op = draw(st.sampled_from(["=", "!=", "<", "<=", ">", ">="]))
    other = draw(st.sampled_from(
        [Q.Text("cat"), Q.Text("5"), Q.Number(3.0), Q.Number(12.0)]))
    return Q.Cmp(op, operand, other)


@st.composite
def xml_queries(draw):
    pattern = tuple(draw(st.lists(st.sampled_from(["a", "b", "c", "item", "*"]),
                                  min_size=1, max_size=4)))
    constraint = draw(st.one_of(st.none(), constraints()))
    return Q.Query("xml", pattern, constraint)


# -- parser ------------------------------------------------------------------

class TestParser:
    def test_xml_query_shape(self):
        q = Q.parse_query("MATCH /doc/item WHERE . > 3")
        assert q.mode == "xml"
        assert q.pattern == ("doc", "item")
        assert isinstance(q.constraint, Q.Cmp)

    def test_text_query(self):
        q = Q.parse_query('LINES WHERE CONTAINS(., "cat")')
        assert q.mode == "text" and q.pattern == ()

    def test_contains_sugar(self):
        assert Q.parse_query('LINES CONTAINS "cat"') == \
            Q.parse_query('LINES WHERE CONTAINS(., "cat")')

    def test_syntax_error_has_position(self):
        with pytest.raises(SyntaxError_) as err:
            Q.parse_query("MATCH WHERE")
        assert err.value.position >= 0

    def test_trailing_garbage(self):
        with pytest.raises(SyntaxError_):
            Q.parse_query("LINES WHERE . = \"x\" bogus")

    @given(xml_queries())
    @settings(max_examples=150)
    def test_render_reparse_round_trip(self, q):
        assert Q.parse_query(q.render()) == q

    def test_precedence(self):
        q = Q.parse_query('LINES WHERE . = "a" OR . = "b" AND . = "c"')
        assert isinstance(q.constraint, Q.Or)
        assert isinstance(q.constraint.right, Q.And)


class TestEvalXml:
    DOC = "<doc><item>1</item><item>2</item><a><b>x</b></a></doc>"

    def test_plain_pattern(self):
        q = Q.parse_query("MATCH /doc/item")
        assert Q.eval_xml(q, self.DOC).contents == ["1", "2"]

    def test_constraint_filters(self):
        q = Q.parse_query("MATCH /doc/item WHERE . > 1")
        result = Q.eval_xml(q, self.DOC)
        assert result.contents == oracle_eval_xml(q, self.DOC) == ["2"]

    def test_wildcard_is_single_step(self):
        q = Q.parse_query("MATCH /doc/*")
        assert Q.eval_xml(q, self.DOC).contents == ["1", "2", "x"]
        deep = Q.parse_query("MATCH /doc/*/b")
        assert Q.eval_xml(deep, self.DOC).contents == ["x"]

    def test_attribute_constraint(self):
        doc = '<doc><item x="1">a</item><item x="2">b</item></doc>'
        q = Q.parse_query('MATCH /doc/item WHERE @x = "2"')
        assert Q.eval_xml(q, doc).contents == ["b"]

    def test_locations_in_document_order(self):
        q = Q.parse_query("MATCH /doc/item")
        locations = [loc for loc, _ in Q.eval_xml(q, self.DOC).matches]
        assert locations == ["/doc[1]/item[1]", "/doc[1]/item[2]"]

    def test_type_mismatch_raises(self):
        q = Q.parse_query("MATCH /doc/item WHERE . > 3")
        with pytest.raises(TypeMismatch):
            Q.eval_xml(q, "<doc><item>five</item></doc>")

    def test_malformed_document(self):
        from servicenet.errors import MalformedXml
        with pytest.raises(MalformedXml):
            Q.eval_xml(Q.parse_query("MATCH /a"), "<a>")

    @given(documents(), xml_queries())
    @settings(max_examples=300, deadline=None)
    def test_oracle_equivalence(self, doc, q):
        try:
            expected = oracle_eval_xml(q, doc)
        except TypeMismatch:
            with pytest.raises(TypeMismatch):
                Q.eval_xml(q, doc)
            return
        assert Q.eval_xml(q, doc).contents == expected

    @given(documents(), xml_queries(), constraints())
    @settings(max_examples=150, deadline=None)
    def test_and_narrows_or_widens(self, doc, q, extra):
        if q.constraint is None:
            return
        try:
            base = set(Q.eval_xml(q, doc).contents)
            narrowed = Q.eval_xml(
                Q.Query("xml", q.pattern, Q.And(q.constraint, extra)), doc)
            widened = Q.eval_xml(
                Q.Query("xml", q.pattern, Q.Or(q.constraint, extra)), doc)
        except TypeMismatch:
            return
        assert set(narrowed.contents) <= base <= set(widened.contents)


class TestEvalText:
    def test_contains_case_insensitive(self):
        q = Q.parse_query('LINES WHERE CONTAINS(., "cat")')
        result = Q.eval_text(q, ["a cat", "dog", "CATS"])
        assert [n for n, _ in result.matches] == [1, 3]

    def test_exact_equality(self):
        q = Q.parse_query('LINES WHERE . = "dog"')
        assert Q.eval_text(q, ["a cat", "dog", "CATS"]).matches == ((2, "dog"),)

    def test_empty_input(self):
        q = Q.parse_query('LINES CONTAINS "x"')
        assert Q.eval_text(q, []).matches == ()

    def test_no_constraint_matches_all(self):
        assert len(Q.eval_text(Q.parse_query("LINES"), ["a", "b"]).matches) == 2

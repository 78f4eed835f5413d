"""The single communication codec: values, method calls, responses, REST fallback.

Values travel as plain Python data -- bool, int, float, str, bytes, list,
dict (str keys) and None.  The XML grammar is fixed and canonical: map
entries are emitted in lexicographic key order and reals use shortest
round-trip decimal form, so identical inputs always give byte-identical
output.

Everything here is pure and thread-safe.
"""

from __future__ import annotations

import base64
import xml.etree.ElementTree as ET
from dataclasses import dataclass, field
from urllib.parse import parse_qsl, unquote
from xml.sax.saxutils import escape as _escape, quoteattr


def escape(text):
    # \r must be character-referenced or XML parsers normalize it away
    return _escape(text, {"\r": "&#13;"})

from .errors import (
    ArgGap,
    BadArgLiteral,
    BadLiteral,
    BadPath,
    MalformedXml,
    Unparseable,
    UnknownType,
)

MAX_DEPTH = 64  # decoder guard against stack abuse

FAULT_UNPARSEABLE = 400
FAULT_BAD_PASSWORD = 401
FAULT_FORBIDDEN_PATH = 403
FAULT_NO_SUCH_SERVICE = 404
FAULT_NO_SUCH_METHOD = 405
FAULT_BAD_ARGUMENTS = 422
FAULT_SERVICE_ERROR = 500


@dataclass(frozen=True)
class MethodCall:
    """A fully typed remote invocation."""

    service_path: tuple
    method: str
    password: str = ""
    args: tuple = ()

    def __post_init__(self):
        if not self.service_path:
            raise BadPath("empty service path")
        for seg in self.service_path:
            if not seg or "/" in seg:
                raise BadPath(f"bad path segment {seg!r}")
        if not self.method:
            raise BadPath("empty method name")
        object.__setattr__(self, "service_path", tuple(self.service_path))
        object.__setattr__(self, "args", tuple(self.args))

    @property
    def path_text(self):
        return "/".join(self.service_path)


@dataclass(frozen=True)
class WireResponse:
    """Either ok(value) or fault(code, message)."""

    ok: bool
    value: object = None
    code: int = 0
    message: str = ""

    @classmethod
    def success(cls, value):
        return cls(ok=True, value=value)

    @classmethod
    def fault(cls, code, message):
        return cls(ok=False, code=code, message=message)


def same_value(a, b):
    """Type-strict value equality (True != 1, 1 != 1.0)."""
    if type(a) is not type(b):
        return False
    if isinstance(a, list):
        return len(a) == len(b) and all(same_value(x, y) for x, y in zip(a, b))
    if isinstance(a, dict):
        return a.keys() == b.keys() and all(same_value(a[k], b[k]) for k in a)
    return a == b


# -- value encoding --------------------------------------------------------

def encode_value(v):
    """Encode one value as an XML fragment (canonical form)."""
    if v is None:
        return "<null/>"
    if isinstance(v, bool):
        return "<bool>%s</bool>" % ("true" if v else "false")
    if isinstance(v, int):
        return "<int>%d</int>" % v
    if isinstance(v, float):
        return "<real>%s</real>" % repr(v)
    if isinstance(v, str):
        return "<str>%s</str>" % escape(v)
    if isinstance(v, (bytes, bytearray)):
        return "<bin>%s</bin>" % base64.b64encode(bytes(v)).decode("ascii")
    if isinstance(v, (list, tuple)):
        return "<list>%s</list>" % "".join(encode_value(x) for x in v)
    if isinstance(v, dict):
        parts = []
        for key in sorted(v):
            if not isinstance(key, str):
                raise TypeError("map keys must be text, got %r" % (key,))
            parts.append("<entry key=%s>%s</entry>" % (quoteattr(key), encode_value(v[key])))
        return "<map>%s</map>" % "".join(parts)
    raise TypeError("not a wire value: %r" % (v,))


def _parse_fragment(text):
    try:
        return ET.fromstring(text)
    except ET.ParseError as exc:
        raise MalformedXml(str(exc)) from None


def _decode_element(elem, depth=0):
    if depth > MAX_DEPTH:
        raise MalformedXml("nesting deeper than %d" % MAX_DEPTH)
    tag = elem.tag
    if tag == "null":
        return None
    if tag == "bool":
        body = (elem.text or "").strip()
        if body == "true":
            return True
        if body == "false":
            return False
        raise BadLiteral("bad bool literal %r" % body)
    if tag == "int":
        body = (elem.text or "").strip()
        try:
            return int(body)
        except ValueError:
            raise BadLiteral("bad int literal %r" % body) from None
    if tag == "real":
        body = (elem.text or "").strip()
        try:
            return float(body)
        except ValueError:
            raise BadLiteral("bad real literal %r" % body) from None
    if tag == "str":
        return elem.text or ""
    if tag == "bin":
        body = (elem.text or "").strip()
        try:
            return base64.b64decode(body, validate=True)
        except Exception:
            raise BadLiteral("bad base64 body") from None
    if tag == "list":
        return [_decode_element(child, depth + 1) for child in elem]
    if tag == "map":
        out = {}
        for child in elem:
            if child.tag != "entry" or "key" not in child.attrib:
                raise MalformedXml("map children must be <entry key=...>")
            key = child.attrib["key"]
            if key in out:
                raise MalformedXml("duplicate map key %r" % key)
            kids = list(child)
            if len(kids) != 1:
                raise MalformedXml("entry must hold exactly one value")
            out[key] = _decode_element(kids[0], depth + 1)
        return out
    raise UnknownType("unknown value tag <%s>" % tag)


def decode_value(fragment):
    """Inverse of encode_value on its image; rejects unknown tags."""
    return _decode_element(_parse_fragment(fragment))


# -- call envelope ----------------------------------------------------------

def encode_call(call):
    """Encode a MethodCall as a UTF-8 XML document."""
    params = "".join("<param>%s</param>" % encode_value(a) for a in call.args)
    doc = (
        "<method>"
        "<password>%s</password>"
        "<service>%s</service>"
        "<name>%s</name>"
        "<params>%s</params>"
        "</method>"
    ) % (escape(call.password), escape(call.path_text), escape(call.method), params)
    return doc.encode("utf-8")


def _decode_call_xml(body):
    if isinstance(body, (bytes, bytearray)):
        try:
            body = bytes(body).decode("utf-8")
        except UnicodeDecodeError as exc:
            raise MalformedXml(str(exc)) from None
    root = _parse_fragment(body)
    if root.tag != "method":
        raise MalformedXml("expected <method> document, got <%s>" % root.tag)
    fields = {child.tag: child for child in root}
    for required in ("service", "name", "params"):
        if required not in fields:
            raise MalformedXml("missing <%s>" % required)
    password = fields["password"].text or "" if "password" in fields else ""
    service = fields["service"].text or ""
    method = fields["name"].text or ""
    args = []
    for param in fields["params"]:
        if param.tag != "param":
            raise MalformedXml("params children must be <param>")
        kids = list(param)
        if len(kids) != 1:
            raise MalformedXml("param must hold exactly one value")
        args.append(_decode_element(kids[0], 1))
    segments = tuple(service.split("/")) if service else ()
    return MethodCall(segments, method, password, tuple(args))


# -- REST fallback ----------------------------------------------------------

_LITERAL_PREFIXES = ("i:", "f:", "t:", "s:", "b64:")


def parse_literal(text):
    """Parse one type-prefixed REST literal (i: f: t: s: b64:)."""
    if text.startswith("i:"):
        try:
            return int(text[2:])
        except ValueError:
            raise BadLiteral("bad integer %r" % text) from None
    if text.startswith("f:"):
        try:
            return float(text[2:])
        except ValueError:
            raise BadLiteral("bad real %r" % text) from None
    if text.startswith("t:"):
        body = text[2:]
        if body == "true":
            return True
        if body == "false":
            return False
        raise BadLiteral("bad boolean %r" % text)
    if text.startswith("s:"):
        return text[2:]
    if text.startswith("b64:"):
        try:
            return base64.b64decode(text[4:], validate=True)
        except Exception:
            raise BadLiteral("bad base64 %r" % text) from None
    raise BadLiteral("missing type prefix in %r" % text)


def format_literal(v):
    """Inverse of parse_literal, reused by the CLI."""
    if isinstance(v, bool):
        return "t:true" if v else "t:false"
    if isinstance(v, int):
        return "i:%d" % v
    if isinstance(v, float):
        return "f:%s" % repr(v)
    if isinstance(v, str):
        return "s:" + v
    if isinstance(v, (bytes, bytearray)):
        return "b64:" + base64.b64encode(bytes(v)).decode("ascii")
    raise TypeError("no REST literal form for %r" % (v,))


def parse_rest(path, query):
    """Parse `/service/<path...>/<method>?password=..&arg0=..` into a call."""
    if not path.startswith("/service/"):
        raise BadPath("REST path must start with /service/")
    segments = [unquote(s) for s in path[len("/service/"):].split("/") if s != ""]
    if len(segments) < 2:
        raise BadPath("need at least a service id and a method")
    *service_path, method = segments
    password = ""
    args_by_index = {}
    for key, raw in parse_qsl(query or "", keep_blank_values=True):
        if key == "password":
            password = raw
        elif key.startswith("arg"):
            try:
                index = int(key[3:])
            except ValueError:
                raise BadPath("bad argument name %r" % key) from None
            try:
                args_by_index[index] = parse_literal(raw)
            except BadLiteral as exc:
                raise BadArgLiteral(index, str(exc)) from None
        # unknown query keys are ignored
    args = []
    for i in range(len(args_by_index)):
        if i not in args_by_index:
            raise ArgGap("arg%d missing but later arguments present" % i)
        args.append(args_by_index[i])
    return MethodCall(tuple(service_path), method, password, tuple(args))


def decode_call(body, request_path="", query_string=""):
    """Two-stage parse: XML envelope first, REST fallback second."""
    try:
        return _decode_call_xml(body)
    except Unparseable as xml_cause:
        try:
            return parse_rest(request_path, query_string)
        except Unparseable as rest_cause:
            raise Unparseable(
                "not an XML call (%s) nor a REST call (%s)" % (xml_cause, rest_cause)
            ) from None


# -- responses --------------------------------------------------------------

def encode_response(r):
    """Encode a WireResponse as a UTF-8 XML document."""
    if r.ok:
        doc = "<response><value>%s</value></response>" % encode_value(r.value)
    else:
        doc = "<fault><code>%d</code><message>%s</message></fault>" % (
            r.code,
            escape(r.message),
        )
    return doc.encode("utf-8")


def decode_response(body):
    if isinstance(body, (bytes, bytearray)):
        try:
            body = bytes(body).decode("utf-8")
        except UnicodeDecodeError as exc:
            raise MalformedXml(str(exc)) from None
    root = _parse_fragment(body)
    if root.tag == "response":
        kids = list(root)
        if len(kids) != 1 or kids[0].tag != "value":
            raise MalformedXml("response must hold one <value>")
        vals = list(kids[0])
        if len(vals) != 1:
            raise MalformedXml("value must hold exactly one element")
        return WireResponse.success(_decode_element(vals[0]))
    if root.tag == "fault":
        fields = {child.tag: child for child in root}
        if "code" not in fields or "message" not in fields:
            raise MalformedXml("fault needs <code> and <message>")
        try:
            code = int((fields["code"].text or "").strip())
        except ValueError:
            raise BadLiteral("bad fault code") from None
        return WireResponse.fault(code, fields["message"].text or "")
    raise MalformedXml("expected <response> or <fault>, got <%s>" % root.tag)

"""Configuration persistence and the service factory.

A running network saves to one canonical XML document (plus a separate
factory file for registered service kinds), and loads back through the
factory.  Unknown kinds never disappear silently: they load as inert
placeholder records flagged in the population report.  New kinds are
added declaratively through module manifests; arbitrary code loading is
deliberately not supported.
"""

from __future__ import annotations

import os
import xml.etree.ElementTree as ET
from dataclasses import dataclass, field
from xml.sax.saxutils import quoteattr

from . import links as links_mod
from . import resources as resources_mod
from .errors import BadManifest, DuplicateKind, IoError, SchemaError, UnknownKind
from .links import LinkDynamicsConfig
from .registry import BehaviourSpec, Registry, ServiceRecord, wrap
from .wire import escape

NETWORK_FILE = "network.xml"
FACTORY_FILE = "factory.xml"

TOP_ELEMENT = "serviceNetwork"
SCHEMA_VERSION = "1"


# -- canonical XML helpers ---------------------------------------------------

def _canonical(elem):
    """Re-emit an element in canonical form: sorted attributes, no whitespace."""
    attrs = "".join(" %s=%s" % (k, quoteattr(elem.attrib[k]))
                    for k in sorted(elem.attrib))
    children = "".join(_canonical(c) for c in elem)
    text = escape(elem.text) if elem.text and elem.text.strip() else ""
    if not children and not text:
        return "<%s%s/>" % (elem.tag, attrs)
    return "<%s%s>%s%s</%s>" % (elem.tag, attrs, text, children, elem.tag)


# -- service factory ---------------------------------------------------------

@dataclass
class ServiceType:
    kind: str
    constructor: object          # (declaration: Element) -> build dict
    default_meta: dict = field(default_factory=dict)


class ServiceFactory:
    """Registry of instantiable service kinds."""

    def __init__(self):
        self.types = {}
        self._manifests = []  # canonical manifest text, for persistence
        register_builtin_types(self)

    def register_type(self, service_type):
        if service_type.kind in self.types:
            raise DuplicateKind("kind %r already registered" % service_type.kind)
        self.types[service_type.kind] = service_type

    def kinds(self):
        return sorted(self.types)

    def instantiate(self, declaration):
        """Build a ServiceRecord from a `<service>` declaration element."""
        kind = declaration.attrib.get("kind", "service")
        service_type = self.types.get(kind)
        if service_type is None:
            raise UnknownKind("no service kind %r" % kind)
        build = service_type.constructor(declaration) or {}
        metadata = dict(service_type.default_meta)
        for meta in declaration.findall("meta"):
            metadata[meta.attrib["key"]] = meta.text or ""
        record = ServiceRecord(
            declaration.attrib["id"], kind,
            password=declaration.attrib.get("password", ""),
            metadata=metadata,
            handler=wrap(build.get("handler", {})),
            behaviour=build.get("behaviour") or _behaviour_from(declaration),
        )
        if "digest" in declaration.attrib:
            record.password_digest = declaration.attrib["digest"]
        record.extra_config = [_canonical(c) for c in declaration
                               if c.tag not in ("meta", "behaviour", "service")]
        return record

    def placeholder(self, declaration):
        """Inert stand-in for an unknown kind: viewable, not invocable."""
        record = ServiceRecord(
            declaration.attrib["id"], declaration.attrib.get("kind", "unknown"),
            metadata={m.attrib["key"]: m.text or ""
                      for m in declaration.findall("meta")},
            behaviour=_behaviour_from(declaration),
        )
        if "digest" in declaration.attrib:
            record.password_digest = declaration.attrib["digest"]
        record.placeholder = True
        record.extra_config = [_canonical(c) for c in declaration
                               if c.tag not in ("meta", "behaviour", "service")]
        return record

    # -- declarative module loading -----------------------------------------

    def load_module(self, module_path):
        """Register the service kinds a module manifest declares."""
        try:
            with open(module_path, encoding="utf-8") as fh:
                text = fh.read()
        except OSError as exc:
            raise BadManifest(str(exc)) from exc
        return self.load_manifest(text)

    def load_manifest(self, text):
        try:
            root = ET.fromstring(text)
        except ET.ParseError as exc:
            raise BadManifest("bad manifest: %s" % exc) from None
        if root.tag != "moduleManifest":
            raise BadManifest("top element must be <moduleManifest>")
        registered = []
        for decl in root:
            if decl.tag != "serviceType":
                raise BadManifest("unknown element <%s>" % decl.tag)
            kind = decl.attrib.get("kind")
            base = decl.attrib.get("base", "service")
            if not kind:
                raise BadManifest("serviceType needs a kind")
            base_type = self.types.get(base)
            if base_type is None:
                raise BadManifest("unknown base kind %r" % base)
            default_meta = dict(base_type.default_meta)
            template = []
            for child in decl:
                if child.tag == "defaultMeta":
                    default_meta[child.attrib["key"]] = child.text or ""
                else:
                    template.append(child)

            def constructor(declaration, base_type=base_type, template=template):
                merged = ET.Element("service", declaration.attrib)
                for child in template:
                    merged.append(child)
                for child in declaration:
                    merged.append(child)
                return base_type.constructor(merged)

            self.register_type(ServiceType(kind, constructor, default_meta))
            registered.append(kind)
        self._manifests.append(_canonical(root))
        return registered

    def save(self, path):
        body = "".join(self._manifests)
        doc = "<factoryConfig>%s</factoryConfig>" % body
        try:
            with open(path, "w", encoding="utf-8") as fh:
                fh.write(doc)
        except OSError as exc:
            raise IoError(str(exc)) from exc

    def load(self, path):
        try:
            with open(path, encoding="utf-8") as fh:
                root = ET.fromstring(fh.read())
        except OSError as exc:
            raise IoError(str(exc)) from exc
        except ET.ParseError as exc:
            raise BadManifest(str(exc)) from None
        loaded = []
        for manifest in root:
            loaded += self.load_manifest(_canonical(manifest))
        return loaded


def _behaviour_from(declaration):
    node = declaration.find("behaviour")
    if node is None:
        return None
    return BehaviourSpec(
        period_ms=int(node.attrib.get("periodMs", "1000")),
        enabled=node.attrib.get("enabled", "true") == "true",
    )


def register_builtin_types(factory):
    def plain(declaration):
        return {}

    def echo(declaration):
        return {"handler": {"echo": lambda x: x}}

    def counter(declaration):
        state = {"n": 0}

        def behaviour():
            state["n"] += 1
            return state["n"]

        spec = _behaviour_from(declaration) or BehaviourSpec()
        return {"handler": {"behaviour": behaviour}, "behaviour": spec}

    def info(declaration):
        container_node = declaration.find("container")
        resources = [
            _resource_from(node)
            for node in (container_node if container_node is not None else declaration)
            if node.tag == "resource"
        ]
        kind = (container_node.attrib.get("kind", "id")
                if container_node is not None else "id")
        if kind == "random":
            seed = int(container_node.attrib.get("seed", "0"))
            container = resources_mod.RandomContainer(resources, seed)
        elif kind == "query":
            container = resources_mod.QueryContainer(
                resources, container_node.attrib["query"])
        else:
            container = resources_mod.IdContainer(resources)
        return {"handler": resources_mod.information_service(container)}

    def files(declaration):
        from .server import FileRoot
        roots = [FileRoot(node.attrib["alias"], node.attrib["dir"])
                 for node in declaration.findall("root")]
        return {"handler": resources_mod.file_service(roots)}

    factory.register_type(ServiceType("service", plain))
    factory.register_type(ServiceType("echo", echo))
    factory.register_type(ServiceType("counter", counter))
    factory.register_type(ServiceType("info", info))
    factory.register_type(ServiceType("file", files))


def _resource_from(node):
    kind = node.attrib.get("kind", "text")
    if kind == "url":
        return resources_mod.Resource(node.attrib["id"], "url",
                                      address=node.attrib["address"])
    payload = node.text or ""
    if kind == "number":
        payload = float(payload) if "." in payload else int(payload)
    elif kind == "binary":
        import base64
        payload = base64.b64decode(payload)
    return resources_mod.Resource(node.attrib["id"], kind, payload=payload)


# -- save --------------------------------------------------------------------

def save_config(registry, file_roots=()):
    """Snapshot the registry as one canonical XML document."""

    def emit_service(record):
        parts = ["<service"]
        if record.password_digest:
            parts.append(" digest=%s" % quoteattr(record.password_digest))
        parts.append(" id=%s kind=%s>" % (quoteattr(record.id), quoteattr(record.kind)))
        for key in sorted(record.metadata):
            parts.append("<meta key=%s>%s</meta>"
                         % (quoteattr(key), escape(record.metadata[key])))
        if record.behaviour_spec is not None:
            parts.append('<behaviour enabled="%s" periodMs="%d"/>'
                         % ("true" if record.behaviour_spec.enabled else "false",
                            record.behaviour_spec.period_ms))
        for snippet in getattr(record, "extra_config", []):
            parts.append(snippet)
        for cid in sorted(record.children):
            parts.append(emit_service(record.children[cid]))
        parts.append("</service>")
        return "".join(parts)

    cfg = registry.links.config
    known = set(registry.all_paths())
    with registry._lock:
        services = "".join(emit_service(r) for r in registry.top_level())
        link_parts = "".join(
            '<link from=%s kind=%s to=%s weight="%s"/>'
            % (quoteattr(l.source), quoteattr(l.kind), quoteattr(l.target),
               repr(l.weight))
            for l in registry.links.all_links()
            if l.source in known and l.target in known  # closure invariant
        )
        peers = "".join("<peer url=%s/>" % quoteattr(u)
                        for u in sorted(registry.peers))
    roots = "".join("<root alias=%s dir=%s/>" % (quoteattr(r.alias),
                                                 quoteattr(r.directory))
                    for r in file_roots)
    return (
        '<%s version="%s">'
        '<dynamics createThreshold="%s" decayFactor="%s" existThreshold="%s" '
        'reinforce="%s" weightCap="%s"/>'
        "<fileRoots>%s</fileRoots>"
        "<services>%s</services>"
        "<links>%s</links>"
        "<peers>%s</peers>"
        "</%s>"
    ) % (TOP_ELEMENT, SCHEMA_VERSION,
         repr(cfg.create_threshold), repr(cfg.decay_factor),
         repr(cfg.exist_threshold), repr(cfg.reinforce), repr(cfg.weight_cap),
         roots, services, link_parts, peers, TOP_ELEMENT)


def save_to_dir(registry, out_dir, file_roots=(), factory=None):
    os.makedirs(out_dir, exist_ok=True)
    doc = save_config(registry, file_roots)
    try:
        with open(os.path.join(out_dir, NETWORK_FILE), "w", encoding="utf-8") as fh:
            fh.write(doc)
    except OSError as exc:
        raise IoError(str(exc)) from exc
    if factory is not None:
        factory.save(os.path.join(out_dir, FACTORY_FILE))
    return doc


# -- load --------------------------------------------------------------------

@dataclass
class LoadReport:
    services: list = field(default_factory=list)
    placeholders: list = field(default_factory=list)
    failures: list = field(default_factory=list)


def load_config(doc, factory=None, registry=None):
    """Populate a registry from a saved document; returns (registry, report).

    Unknown kinds become flagged placeholders; partial failures are
    reported, not fatal.
    """
    factory = factory or ServiceFactory()
    try:
        root = ET.fromstring(doc)
    except ET.ParseError as exc:
        raise SchemaError("bad config document: %s" % exc) from None
    if root.tag != TOP_ELEMENT:
        raise SchemaError("top element must be <%s>" % TOP_ELEMENT)

    dynamics = root.find("dynamics")
    link_config = None
    if dynamics is not None:
        link_config = LinkDynamicsConfig(
            reinforce=float(dynamics.attrib.get("reinforce", "1.0")),
            decay_factor=float(dynamics.attrib.get("decayFactor", "0.9")),
            create_threshold=float(dynamics.attrib.get("createThreshold", "3.0")),
            exist_threshold=float(dynamics.attrib.get("existThreshold", "1.0")),
            weight_cap=float(dynamics.attrib.get("weightCap", "100.0")),
        )
    if registry is None:
        registry = Registry(link_config=link_config)
    elif link_config is not None:
        registry.links.config = link_config

    report = LoadReport()
    services = root.find("services")
    declared = set()

    def check_unique(path):
        if path in declared:
            raise SchemaError("duplicate service id %r" % path)
        declared.add(path)

    def build(declaration, parent_path=None):
        sid = declaration.attrib.get("id")
        if not sid:
            raise SchemaError("service declaration without id")
        path = sid if parent_path is None else "%s/%s" % (parent_path, sid)
        check_unique(path)
        try:
            record = factory.instantiate(declaration)
        except UnknownKind:
            record = factory.placeholder(declaration)
            report.placeholders.append(path)
        except SchemaError:
            raise
        except Exception as exc:
            report.failures.append((path, str(exc)))
            return
        if parent_path is None:
            registry.add_record(record)
        else:
            registry.nest_service(parent_path, record)
        report.services.append(path)
        for child in declaration.findall("service"):
            build(child, path)

    if services is not None:
        ids = [d.attrib.get("id") for d in services.findall("service")]
        if len(ids) != len(set(ids)):
            raise SchemaError("duplicate top-level service ids")
        for declaration in services.findall("service"):
            build(declaration)

    links_section = root.find("links")
    if links_section is not None:
        for node in links_section.findall("link"):
            kind = node.attrib["kind"]
            source, target = node.attrib["from"], node.attrib["to"]
            try:
                if kind == links_mod.DYNAMIC:
                    registry.links.restore_dynamic(
                        source, target, float(node.attrib.get("weight", "1.0")))
                else:
                    registry.links.add_link(kind, source, target)
            except Exception as exc:
                report.failures.append(("%s->%s" % (source, target), str(exc)))

    peers_section = root.find("peers")
    if peers_section is not None:
        for node in peers_section.findall("peer"):
            try:
                registry.register_peer(node.attrib["url"])
            except Exception as exc:
                report.failures.append((node.attrib.get("url", "?"), str(exc)))

    return registry, report


def load_from_dir(in_dir, factory=None, registry=None):
    factory = factory or ServiceFactory()
    factory_path = os.path.join(in_dir, FACTORY_FILE)
    if os.path.exists(factory_path):
        factory.load(factory_path)
    try:
        with open(os.path.join(in_dir, NETWORK_FILE), encoding="utf-8") as fh:
            doc = fh.read()
    except OSError as exc:
        raise IoError(str(exc)) from exc
    return load_config(doc, factory, registry)


def admin_service(registry, factory, file_roots=()):
    """Management operations exposed as an ordinary hosted service.

    The CLI and the web console drive peers, persistence and the factory
    through these methods rather than through special endpoints.
    """

    def load(doc):
        # replace the running network, keeping the live management service
        try:
            root = ET.fromstring(doc)
        except ET.ParseError as exc:
            raise SchemaError("bad config document: %s" % exc) from None
        keep = {r.id for r in registry.top_level() if r.kind == "admin"}
        for rid in [r.id for r in registry.top_level() if r.id not in keep]:
            registry.remove_service(rid)
        services = root.find("services")
        if services is not None:
            for node in [n for n in services.findall("service")
                         if n.attrib.get("id") in keep]:
                services.remove(node)
        _, report = load_config(ET.tostring(root, encoding="unicode"),
                                factory, registry)
        return {
            "services": list(report.services),
            "placeholders": list(report.placeholders),
            "failures": [f"{what}: {why}" for what, why in report.failures],
        }

    def instantiate(declaration_xml):
        try:
            declaration = ET.fromstring(declaration_xml)
        except ET.ParseError as exc:
            raise SchemaError("bad declaration: %s" % exc) from None
        record = factory.instantiate(declaration)
        return registry.add_record(record)

    def register_peer(url):
        registry.register_peer(url)
        return url

    def refresh_peer(url):
        peer = registry.refresh_peer(url)
        return peer.meta

    def peer_meta(url):
        peer = registry.peers.get(url.rstrip("/"))
        return peer.meta if peer else ""

    return {
        "listPeers": lambda: sorted(registry.peers),
        "registerPeer": register_peer,
        "refreshPeer": refresh_peer,
        "peerMeta": peer_meta,
        "listKinds": lambda: factory.kinds(),
        "saveConfig": lambda: save_config(registry, file_roots),
        "loadConfig": load,
        "instantiateService": instantiate,
        "decayEpoch": lambda: registry.links.decay_epoch(),
    }


def file_roots_from(doc):
    """Extract the saved file roots (for the server) from a config document."""
    from .server import FileRoot
    root = ET.fromstring(doc)
    section = root.find("fileRoots")
    if section is None:
        return []
    return [FileRoot(n.attrib["alias"], n.attrib["dir"])
            for n in section.findall("root")]

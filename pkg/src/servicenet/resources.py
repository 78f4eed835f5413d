"""Lightweight information holders and the three container kinds.

A resource is cheaper than a service: an id, a kind and either an inline
payload or a remote address fetched on demand.  Containers retrieve by
id, uniformly at random (seeded, reproducible) or by query match.  The
`information_service` / `file_service` helpers turn these into hostable
handler tables.
"""

from __future__ import annotations

import random
import threading
import urllib.error
import urllib.request
import xml.etree.ElementTree as ET
from dataclasses import dataclass, field

from . import query as query_mod
from .errors import (
    EmptyContainer,
    FetchFailed,
    MalformedContent,
    NoSuchId,
    NotFound,
    ServiceError,
)
from .server import resolve_under_root

FETCH_TIMEOUT = 10.0

INLINE_KINDS = ("number", "text", "xml", "html", "binary")
KINDS = INLINE_KINDS + ("url",)


@dataclass(frozen=True)
class Resource:
    id: str
    kind: str
    payload: object = None
    address: str = ""

    def __post_init__(self):
        if self.kind not in KINDS:
            raise MalformedContent("unknown resource kind %r" % self.kind)
        if self.kind == "url":
            if not self.address:
                raise MalformedContent("url resource needs an address")
        elif self.payload is None:
            raise MalformedContent("%s resource needs an inline payload" % self.kind)
        if self.kind == "xml":
            try:
                ET.fromstring(self.payload)
            except ET.ParseError as exc:
                raise MalformedContent("bad xml payload: %s" % exc) from None


def get_info(resource):
    """The resource's content: inline payload, or a remote GET for url kind."""
    if resource.kind != "url":
        return resource.payload
    try:
        with urllib.request.urlopen(resource.address, timeout=FETCH_TIMEOUT) as resp:
            body = resp.read()
            ctype = resp.headers.get("Content-Type", "")
    except (urllib.error.URLError, OSError, ValueError) as exc:
        raise FetchFailed("cannot fetch %r: %s" % (resource.address, exc)) from exc
    if ctype.startswith(("text/", "application/xml")):
        return body.decode("utf-8", errors="replace")
    return body


class ResourceContainer:
    """Base container: unique ids, immutable after construction."""

    kind = None

    def __init__(self, resources):
        self.resources = list(resources)
        seen = set()
        for r in self.resources:
            if r.id in seen:
                raise NoSuchId("duplicate resource id %r" % r.id)
            seen.add(r.id)

    def ids(self):
        return [r.id for r in self.resources]


class IdContainer(ResourceContainer):
    kind = "id"

    def get_by_id(self, id):
        for r in self.resources:
            if r.id == id:
                return get_info(r)
        raise NoSuchId("no resource %r" % id)


class RandomContainer(ResourceContainer):
    kind = "random"

    def __init__(self, resources, seed=0):
        super().__init__(resources)
        self.seed = seed
        self._rng = random.Random(seed)
        self._lock = threading.Lock()

    def get_random(self):
        if not self.resources:
            raise EmptyContainer("container is empty")
        with self._lock:  # generator state advances atomically
            choice = self._rng.randrange(len(self.resources))
        return get_info(self.resources[choice])


class QueryContainer(ResourceContainer):
    kind = "query"

    def __init__(self, resources, query):
        super().__init__(resources)
        if isinstance(query, str):
            query = query_mod.parse_query(query)
        self.query = query
        self.skipped = []  # (id, reason) from the last get_matching

    def _matches(self, content):
        if self.query.mode == "xml":
            return bool(query_mod.eval_xml(self.query, content).matches)
        lines = str(content).splitlines() or [str(content)]
        return bool(query_mod.eval_text(self.query, lines).matches)

    def get_matching(self):
        """Contents of resources matching the query; failures skip, not abort."""
        out = []
        skipped = []
        for r in self.resources:
            try:
                content = get_info(r)
                if self._matches(content):
                    out.append(content)
            except Exception as exc:
                skipped.append((r.id, str(exc)))
        self.skipped = skipped
        return out


def information_service(container):
    """Wrap a container as a registrable handler table."""
    table = {"listResources": lambda: container.ids()}
    if isinstance(container, IdContainer):
        table["getById"] = lambda id: container.get_by_id(id)
    if isinstance(container, RandomContainer):
        table["getRandom"] = lambda: container.get_random()
    if isinstance(container, QueryContainer):
        table["getMatching"] = lambda: container.get_matching()
        table["getText"] = lambda: "\n".join(str(c) for c in container.get_matching())
    else:
        def all_text():
            return "\n".join(str(get_info(r)) for r in container.resources
                             if r.kind in ("text", "html", "xml", "number"))
        table["getText"] = all_text
    return table


def file_service(roots):
    """Peer-to-peer file access confined to the whitelisted roots.

    Paths are `<alias>/<relative>`; the confinement rule is the same one
    the HTTP file endpoint uses.
    """
    import os

    def split(path):
        alias, _, rel = path.partition("/")
        if not alias or not rel:
            raise ServiceError("path must be alias/relative")
        return alias, rel

    def list_dir(path):
        alias, rel = split(path) if "/" in path else (path, ".")
        target = resolve_under_root(roots, alias, rel)
        if not os.path.isdir(target):
            raise NotFound("no directory %r" % path)
        return sorted(os.listdir(target))

    def fetch(path):
        alias, rel = split(path)
        target = resolve_under_root(roots, alias, rel)
        if not os.path.isfile(target):
            raise NotFound("no file %r" % path)
        with open(target, "rb") as fh:
            return fh.read()

    return {"list": list_dir, "fetch": fetch}

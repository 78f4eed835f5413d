"""Service hosting: records, nesting, wrapping, dispatch, metadata view, peers.

The registry is one guarded state: every structural mutation and read is
serialized on a single re-entrant lock, but service handlers run outside
the guard so a slow service cannot block registration.  Every record gets
an autonomic manager on registration, empty slots and all, including
wrapped legacy handlers.
"""

from __future__ import annotations

import hashlib
import hmac
import inspect
import os
import threading
import time
import urllib.error
import urllib.request
from dataclasses import dataclass, field
from xml.sax.saxutils import quoteattr

from . import wire
from .autonomic import EVENT_BEHAVIOUR, EVENT_FAULT, AutonomicManager, Event
from .errors import (
    AlreadyDecided,
    BadArguments,
    BadUrl,
    DuplicateId,
    DuplicateMethodName,
    DuplicatePeer,
    Fault,
    NoSuchContract,
    NoSuchMethod,
    NoSuchService,
    NotAutoService,
    PeerUnreachable,
    ServiceError,
)
from .links import LinkTable
from .wire import MethodCall, WireResponse, escape

BUILTIN_METHODS = ("ping", "getMeta", "listMethods")

HTTP_TIMEOUT = 10.0


# -- password digests -------------------------------------------------------

def make_digest(password, salt=None):
    """Salted SHA-256 digest, 'salt:hex'. Empty password means open service."""
    if password == "":
        return ""
    if salt is None:
        salt = os.urandom(8).hex()
    digest = hashlib.sha256((salt + password).encode("utf-8")).hexdigest()
    return "%s:%s" % (salt, digest)


def check_digest(stored, password):
    """Constant-time comparison against a stored salted digest."""
    if stored == "":
        return True  # open service accepts anything
    salt, _, digest = stored.partition(":")
    candidate = hashlib.sha256((salt + password).encode("utf-8")).hexdigest()
    return hmac.compare_digest(candidate, digest)


@dataclass
class BehaviourSpec:
    period_ms: int = 1000
    enabled: bool = True

    def __post_init__(self):
        if self.period_ms < 10:
            raise ValueError("periodMs must be >= 10")


@dataclass
class Contract:
    id: str
    proposer: str
    terms: dict
    state: str = "proposed"


@dataclass
class PeerServer:
    url: str
    last_seen: float = 0.0
    meta: str = ""


class ServiceRecord:
    """One hosted service: identity, operations, children, autonomic manager."""

    def __init__(self, id, kind="service", password="", metadata=None, handler=None,
                 behaviour=None):
        self.id = id
        self.kind = kind
        self.password_digest = make_digest(password)
        self.metadata = dict(metadata or {})
        self.metadata.setdefault("id", id)
        self.metadata.setdefault("kind", kind)
        self.handler = dict(handler or {})
        self.children = {}
        self.manager = None  # attached by the registry
        self.invocation_count = 0
        self.behaviour_spec = behaviour
        self.placeholder = False
        self._cycle_lock = threading.Lock()

    @property
    def is_auto(self):
        return self.behaviour_spec is not None and "behaviour" in self.handler

    def check_password(self, password):
        # the record itself answers, mirroring the ask-the-service gate
        return check_digest(self.password_digest, password)


def wrap(handler_table):
    """Turn a dict of named operations or a plain object into a handler table.

    Any object exposing public callables becomes hostable without deriving
    from framework types.
    """
    if isinstance(handler_table, dict):
        table = dict(handler_table)
    else:
        table = {
            name: fn
            for name, fn in inspect.getmembers(handler_table, callable)
            if not name.startswith("_")
        }
    for name in table:
        if name in BUILTIN_METHODS:
            raise DuplicateMethodName("%r collides with a built-in method" % name)
    return table


def _required_arity(fn):
    """(min, max) positional argument counts; max None means unbounded."""
    try:
        sig = inspect.signature(fn)
    except (TypeError, ValueError):
        return 0, None
    lo = hi = 0
    for p in sig.parameters.values():
        if p.kind in (p.POSITIONAL_ONLY, p.POSITIONAL_OR_KEYWORD):
            hi += 1
            if p.default is p.empty:
                lo += 1
        elif p.kind == p.VAR_POSITIONAL:
            return lo, None
    return lo, hi


class Registry:
    """The guarded service tree plus links, contracts, peers and faults."""

    def __init__(self, link_config=None):
        self._lock = threading.RLock()
        self._top = {}
        self.links = LinkTable(resolver=self._resolves, config=link_config,
                               lock=self._lock)
        self.contracts = {}
        self._contract_seq = 0
        self.peers = {}
        self.fault_ledger = []
        self.contract_policy = self._default_contract_policy
        self._behaviour_threads = {}
        self._stop = threading.Event()

    # -- resolution --------------------------------------------------------

    @staticmethod
    def _segments(path):
        if isinstance(path, str):
            return tuple(s for s in path.split("/") if s)
        return tuple(path)

    def _resolve(self, path):
        segments = self._segments(path)
        if not segments:
            raise NoSuchService("empty path")
        with self._lock:
            table = self._top
            record = None
            for seg in segments:
                if seg not in table:
                    raise NoSuchService("no service at %r" % "/".join(segments))
                record = table[seg]
                table = record.children
        return record

    def _resolves(self, path):
        try:
            self._resolve(path)
            return True
        except NoSuchService:
            return False

    def resolve(self, path):
        return self._resolve(path)

    # -- registration ------------------------------------------------------

    def _attach_manager(self, record, path):
        def sink(event):
            self.fault_ledger.append(event)
            on_fault = record.handler.get("onFault")
            if on_fault is not None:
                try:
                    on_fault(event.payload)
                except Exception:
                    pass  # logged, never raised
        context = {
            "set_metadata": lambda k, v: record.metadata.__setitem__(k, v),
            "disable_behaviour": lambda: setattr(record.behaviour_spec, "enabled", False)
            if record.behaviour_spec else None,
            "emit_fault": lambda msg: record.manager.report_fault(
                Event(path, EVENT_FAULT, msg)),
        }
        record.manager = AutonomicManager(owner_path=path, fault_sink=sink,
                                          context=context)

    def add_service(self, id, kind="service", password="", metadata=None,
                    handler=None, behaviour=None):
        record = ServiceRecord(id, kind, password, metadata,
                               wrap(handler) if handler else {}, behaviour)
        return self.add_record(record)

    def add_record(self, record):
        with self._lock:
            if record.id in self._top:
                raise DuplicateId("top-level id %r in use" % record.id)
            self._top[record.id] = record
        self._attach_manager(record, record.id)
        return record.id

    def nest_service(self, parent_path, record):
        with self._lock:
            parent = self._resolve(parent_path)
            if record.id in parent.children:
                raise DuplicateId("child id %r in use under %r" % (record.id, parent_path))
            parent.children[record.id] = record
        path = "%s/%s" % ("/".join(self._segments(parent_path)), record.id)
        self._attach_manager(record, path)
        return path

    def remove_service(self, path):
        segments = self._segments(path)
        with self._lock:
            record = self._resolve(segments)
            for child_id in list(record.children):
                self.remove_service(segments + (child_id,))
            if len(segments) == 1:
                del self._top[segments[0]]
            else:
                parent = self._resolve(segments[:-1])
                del parent.children[segments[-1]]
            self.links.drop_service("/".join(segments))

    def top_level(self):
        with self._lock:
            return [self._top[i] for i in sorted(self._top)]

    def all_paths(self):
        out = []

        def walk(record, prefix):
            path = prefix + record.id if not prefix else prefix + "/" + record.id
            out.append(path)
            for cid in sorted(record.children):
                walk(record.children[cid], path)

        with self._lock:
            for rid in sorted(self._top):
                walk(self._top[rid], "")
        return out

    # -- invocation --------------------------------------------------------

    def authorize(self, call, record):
        return record.check_password(call.password)

    def dispatch(self, call):
        """Resolve and invoke; the password gate is the caller's duty."""
        record = self._resolve(call.service_path)
        method = call.method
        args = list(call.args)
        if method == "ping":
            fn, args = (lambda: "pong"), []
        elif method == "getMeta":
            fn, args = (lambda: dict(record.metadata)), []
        elif method == "listMethods":
            fn, args = (lambda: sorted(set(record.handler) | set(BUILTIN_METHODS))), []
        elif method in record.handler and not record.placeholder:
            fn = record.handler[method]
            lo, hi = _required_arity(fn)
            if len(args) < lo or (hi is not None and len(args) > hi):
                raise BadArguments("%s takes %d..%s args, got %d"
                                   % (method, lo, hi if hi is not None else "*", len(args)))
        else:
            raise NoSuchMethod("no method %r on %r" % (method, call.path_text))
        with self._lock:
            record.invocation_count += 1
        try:
            return fn(*args)
        except Fault:
            raise
        except TypeError as exc:
            raise BadArguments(str(exc)) from exc
        except Exception as exc:
            raise ServiceError("%s.%s failed: %s" % (call.path_text, method, exc)) from exc

    def invoke(self, path, method, *args, password=""):
        """Convenience local call through the full gate + dispatch path."""
        call = MethodCall(self._segments(path), method, password, tuple(args))
        record = self._resolve(call.service_path)
        if not self.authorize(call, record):
            from .errors import BadPassword
            raise BadPassword("password rejected by %r" % call.path_text)
        return self.dispatch(call)

    # -- behaviours --------------------------------------------------------

    def run_behaviour_cycle(self, path):
        record = self._resolve(path)
        if not record.is_auto:
            raise NotAutoService("%r has no behaviour loop" % path)
        with record._cycle_lock:  # cycles for one service never overlap
            try:
                result = record.handler["behaviour"]()
            except Exception as exc:
                raise ServiceError("behaviour of %r failed: %s" % (path, exc)) from exc
            record.manager.submit_event(
                Event("/".join(self._segments(path)), EVENT_BEHAVIOUR, result))
            return result

    def start_behaviours(self):
        """Spawn one fixed-period loop per auto service (no catch-up on missed ticks)."""
        self._stop.clear()
        for path in self.all_paths():
            record = self._resolve(path)
            if not record.is_auto or path in self._behaviour_threads:
                continue

            def loop(path=path, record=record):
                period = record.behaviour_spec.period_ms / 1000.0
                while not self._stop.wait(period):
                    if not record.behaviour_spec.enabled:
                        continue
                    try:
                        self.run_behaviour_cycle(path)
                    except Exception:
                        pass  # a failing behaviour never kills its loop

            t = threading.Thread(target=loop, daemon=True, name="behaviour-" + path)
            self._behaviour_threads[path] = t
            t.start()

    def stop_behaviours(self):
        self._stop.set()
        for t in self._behaviour_threads.values():
            t.join(timeout=2.0)
        self._behaviour_threads.clear()

    # -- metadata view -----------------------------------------------------

    def network_view(self):
        """Canonical XML description of services, nesting, links and peers."""

        def emit(record):
            parts = ["<service id=%s kind=%s>" % (quoteattr(record.id),
                                                  quoteattr(record.kind))]
            for key in sorted(record.metadata):
                parts.append("<meta key=%s>%s</meta>"
                             % (quoteattr(key), escape(record.metadata[key])))
            for cid in sorted(record.children):
                parts.append(emit(record.children[cid]))
            parts.append("</service>")
            return "".join(parts)

        with self._lock:
            services = "".join(emit(r) for r in self.top_level())
            links = "".join(
                '<link kind=%s from=%s to=%s weight="%s"/>'
                % (quoteattr(l.kind), quoteattr(l.source), quoteattr(l.target),
                   repr(l.weight))
                for l in self.links.all_links()
            )
            peers = "".join("<peer url=%s/>" % quoteattr(u)
                            for u in sorted(self.peers))
        return ("<network><services>%s</services><links>%s</links>"
                "<peers>%s</peers></network>") % (services, links, peers)

    # -- contracts ---------------------------------------------------------

    @staticmethod
    def _default_contract_policy(record, terms):
        cost = terms.get("cost")
        if isinstance(cost, bool) or not isinstance(cost, int):
            return False
        try:
            max_cost = int(record.metadata.get("maxCost", ""))
        except ValueError:
            return False
        return cost <= max_cost

    def propose_contract(self, target_path, terms):
        record = self._resolve(target_path)  # must exist
        with self._lock:
            self._contract_seq += 1
            contract = Contract("c%d" % self._contract_seq,
                                "/".join(self._segments(target_path)), dict(terms))
            self.contracts[contract.id] = contract
        return contract

    def decide_contract(self, contract_id, decision=None):
        """Settle a contract; decision None applies the registry's policy."""
        with self._lock:
            contract = self.contracts.get(contract_id)
            if contract is None:
                raise NoSuchContract("no contract %r" % contract_id)
            if contract.state != "proposed":
                raise AlreadyDecided("contract %r is %s" % (contract_id, contract.state))
            if decision is None:
                record = self._resolve(contract.proposer)
                decision = "accept" if self.contract_policy(record, contract.terms) \
                    else "reject"
            if decision not in ("accept", "reject"):
                raise ValueError("decision must be accept or reject")
            contract.state = "accepted" if decision == "accept" else "rejected"
        return contract

    # -- peers -------------------------------------------------------------

    def register_peer(self, url):
        if not (url.startswith("http://") or url.startswith("https://")) \
                or len(url.split("://", 1)[1]) == 0:
            raise BadUrl("bad peer url %r" % url)
        url = url.rstrip("/")
        with self._lock:
            if url in self.peers:
                raise DuplicatePeer("peer %r already registered" % url)
            peer = PeerServer(url)
            self.peers[url] = peer
        return peer

    def refresh_peer(self, url):
        url = url.rstrip("/")
        with self._lock:
            peer = self.peers.get(url)
        if peer is None:
            raise NoSuchService("peer %r not registered" % url)
        try:
            with urllib.request.urlopen(url + "/meta", timeout=HTTP_TIMEOUT) as resp:
                body = resp.read().decode("utf-8")
        except (urllib.error.URLError, OSError) as exc:
            raise PeerUnreachable("cannot reach %r: %s" % (url, exc)) from exc
        with self._lock:
            peer.meta = body
            peer.last_seen = time.time()
        return peer

    def call_remote(self, peer_url, call):
        """The hybrid P2P hop: encode, POST to the remote server, decode."""
        return call_remote(peer_url, call)


def call_remote(peer_url, call):
    body = wire.encode_call(call)
    request = urllib.request.Request(
        peer_url.rstrip("/") + "/service", data=body,
        headers={"Content-Type": "application/xml"}, method="POST")
    try:
        with urllib.request.urlopen(request, timeout=HTTP_TIMEOUT) as resp:
            payload = resp.read()
    except urllib.error.HTTPError as exc:
        payload = exc.read()
    except (urllib.error.URLError, OSError) as exc:
        raise PeerUnreachable("cannot reach %r: %s" % (peer_url, exc)) from exc
    response = wire.decode_response(payload)
    if response.ok:
        return response.value
    raise fault_from_code(response.code, response.message)


def fault_from_code(code, message):
    from . import errors
    table = {
        400: errors.Unparseable,
        401: errors.BadPassword,
        403: errors.ForbiddenPath,
        404: errors.NoSuchService,
        405: errors.NoSuchMethod,
        422: errors.BadArguments,
        500: errors.ServiceError,
    }
    return table.get(code, errors.ServiceError)(message)

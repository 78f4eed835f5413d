"""Typed links between services and the reinforcement/decay dynamics.

Three kinds exist: permanent (structural), association (ad hoc) and
dynamic.  Dynamic links are never added directly -- they appear when the
usage accumulator for a (source, target) pair crosses the creation
threshold, and decay epochs remove them once their weight falls below the
existence threshold.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass

from .errors import DuplicateLink, NoSuchService, WrongKind

PERMANENT = "permanent"
DYNAMIC = "dynamic"
ASSOCIATION = "association"
KINDS = (PERMANENT, DYNAMIC, ASSOCIATION)


@dataclass(frozen=True)
class Link:
    kind: str
    source: str
    target: str
    weight: float = 1.0


@dataclass
class LinkDynamicsConfig:
    reinforce: float = 1.0
    decay_factor: float = 0.9
    create_threshold: float = 3.0
    exist_threshold: float = 1.0
    weight_cap: float = 100.0

    def __post_init__(self):
        if not (self.reinforce > 0):
            raise ValueError("reinforce must be positive")
        if not (0 < self.decay_factor < 1):
            raise ValueError("decayFactor must be in (0,1)")
        if not (self.exist_threshold <= self.create_threshold <= self.weight_cap):
            raise ValueError("need existThreshold <= createThreshold <= weightCap")


def _is_external(path):
    return "://" in path


class LinkTable:
    """All links plus the dynamic-link accumulators.

    `resolver` is a predicate telling whether a service path currently
    exists; URL-qualified identifiers (remote endpoints recorded by the
    solver) are always accepted.
    """

    def __init__(self, resolver=None, config=None, lock=None):
        self._resolver = resolver or (lambda path: True)
        self.config = config or LinkDynamicsConfig()
        self._lock = lock or threading.RLock()
        self._fixed = {}        # (kind, source, target) -> Link
        self._accumulators = {}  # (source, target) -> weight
        self._dynamic = set()    # (source, target) pairs with a live link

    def _check(self, path):
        if not _is_external(path) and not self._resolver(path):
            raise NoSuchService("no service at %r" % path)

    def add_link(self, kind, source, target):
        if kind == DYNAMIC:
            raise WrongKind("dynamic links arise only from recorded use")
        if kind not in (PERMANENT, ASSOCIATION):
            raise WrongKind("unknown link kind %r" % kind)
        with self._lock:
            self._check(source)
            self._check(target)
            key = (kind, source, target)
            if key in self._fixed:
                raise DuplicateLink("%s link %s -> %s exists" % key)
            link = Link(kind, source, target, 1.0)
            self._fixed[key] = link
            return link

    def record_use(self, source, target):
        """Reinforce the (source, target) accumulator; returns current weight."""
        cfg = self.config
        with self._lock:
            self._check(source)
            self._check(target)
            key = (source, target)
            weight = min(self._accumulators.get(key, 0.0) + cfg.reinforce, cfg.weight_cap)
            self._accumulators[key] = weight
            if weight >= cfg.create_threshold:
                self._dynamic.add(key)
            return weight

    def decay_epoch(self):
        """Multiply every accumulator by the decay factor; returns removals."""
        cfg = self.config
        removed = 0
        with self._lock:
            for key in list(self._accumulators):
                weight = self._accumulators[key] * cfg.decay_factor
                self._accumulators[key] = weight
                if key in self._dynamic and weight < cfg.exist_threshold:
                    self._dynamic.discard(key)
                    removed += 1
        return removed

    def links_of(self, path, kind_filter=None):
        with self._lock:
            self._check(path)
            out = [
                link
                for link in self.all_links()
                if path in (link.source, link.target)
                and (kind_filter is None or link.kind == kind_filter)
            ]
        return out

    def all_links(self):
        """Every live link, deterministically ordered."""
        with self._lock:
            fixed = list(self._fixed.values())
            dynamic = [
                Link(DYNAMIC, s, t, self._accumulators[(s, t)])
                for (s, t) in self._dynamic
            ]
        return sorted(fixed + dynamic, key=lambda l: (l.kind, l.source, l.target))

    def dynamic_weight(self, source, target):
        """Live dynamic-link weight, or None if no link exists."""
        with self._lock:
            key = (source, target)
            return self._accumulators[key] if key in self._dynamic else None

    def restore_dynamic(self, source, target, weight):
        """Reinstate a saved dynamic link with its exact weight."""
        with self._lock:
            self._check(source)
            self._check(target)
            key = (source, target)
            self._accumulators[key] = min(weight, self.config.weight_cap)
            if self._accumulators[key] >= self.config.exist_threshold:
                self._dynamic.add(key)

    def drop_service(self, path):
        """Remove every link and accumulator incident to a removed service."""
        with self._lock:
            for key in [k for k in self._fixed if path in (k[1], k[2])]:
                del self._fixed[key]
            for key in [k for k in self._accumulators if path in k]:
                del self._accumulators[key]
                self._dynamic.discard(key)

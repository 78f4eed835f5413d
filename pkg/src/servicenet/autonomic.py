"""Per-service autonomic manager: four pluggable slots fed by a message interface.

Every registered service owns one manager.  The slots (monitor, analyze,
plan, execute) start empty; an empty slot forwards its datum unchanged
and the whole pipeline is a no-op until a plan or execute slot is
installed.  A throwing slot is isolated: the failure is logged as a fault
event and the pipeline aborts without touching the service.

Events are processed synchronously under a per-manager lock, which gives
the serial-per-manager ordering guarantee while keeping tests
deterministic.
"""

from __future__ import annotations

import threading
import time
from collections import deque
from dataclasses import dataclass, field

from .errors import BadStage

STAGES = ("monitor", "analyze", "plan", "execute")

EVENT_BEHAVIOUR = "behaviourResult"
EVENT_FAULT = "fault"
EVENT_CUSTOM = "custom"

# actions the built-in executor may apply
ACTION_WHITELIST = ("adjust-metadata", "disable-behaviour", "emit-fault")


@dataclass(frozen=True)
class Event:
    source: str
    kind: str
    payload: object
    timestamp: float = 0.0


@dataclass(frozen=True)
class ChangeRequest:
    action: str
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.action:
            raise ValueError("empty action")


@dataclass
class PipelineOutcome:
    acted: bool = False
    applied: list = field(default_factory=list)
    error: tuple = None  # (stage, message) when a slot failed

    @property
    def no_action(self):
        return not self.acted and self.error is None


class AutonomicManager:
    """Monitor -> Analyze -> Plan -> Execute over a bounded event log."""

    def __init__(self, owner_path="", log_capacity=1024, fault_sink=None, context=None):
        self.owner_path = owner_path
        self.event_log = deque(maxlen=log_capacity)
        self.slots = {stage: None for stage in STAGES}
        self.fault_sink = fault_sink          # callable(Event) -> None, double delivery
        self.context = context or {}          # callbacks for the built-in executor
        self._lock = threading.Lock()
        self._last_ts = 0.0

    def _stamp(self, event):
        now = max(time.time(), self._last_ts)
        self._last_ts = now
        if event.timestamp:
            return event
        return Event(event.source, event.kind, event.payload, now)

    def install_slot(self, stage, handler):
        if stage not in STAGES:
            raise BadStage("no stage named %r" % stage)
        with self._lock:
            self.slots[stage] = handler

    def clear_slot(self, stage):
        if stage not in STAGES:
            raise BadStage("no stage named %r" % stage)
        with self._lock:
            self.slots[stage] = None

    def submit_event(self, event):
        """Log the event, then run it through whichever slots are present."""
        with self._lock:
            event = self._stamp(event)
            self.event_log.append(event)
            outcome = PipelineOutcome()
            if self.slots["plan"] is None and self.slots["execute"] is None:
                return outcome  # nothing downstream could ever act
            datum = event
            for stage in STAGES:
                handler = self.slots[stage]
                if handler is None:
                    continue  # empty slot forwards unchanged
                try:
                    datum = handler(datum)
                except Exception as exc:
                    outcome.error = (stage, str(exc))
                    self.event_log.append(
                        self._stamp(Event(self.owner_path, EVENT_FAULT,
                                          "slot %s failed: %s" % (stage, exc)))
                    )
                    return outcome
                if datum is None:
                    return outcome  # slot filtered the event out
            if self.slots["execute"] is not None and isinstance(datum, list):
                outcome.applied = datum
                outcome.acted = bool(datum)
            return outcome

    def report_fault(self, fault):
        """Deliver a fault to both the owning service and the server ledger."""
        with self._lock:
            fault = self._stamp(fault)
            self.event_log.append(fault)
        if self.fault_sink is not None:
            try:
                self.fault_sink(fault)
            except Exception:
                pass  # delivery failures are not raised


def submit_event(manager, event):
    return manager.submit_event(event)


def install_slot(manager, stage, handler):
    manager.install_slot(stage, handler)


def clear_slot(manager, stage):
    manager.clear_slot(stage)


def report_fault(manager, fault):
    manager.report_fault(fault)


# -- built-in slot implementations ------------------------------------------

def threshold_monitor(key="value", limit=10.0):
    """Emit a symptom when the (numeric) event payload exceeds the limit.

    If the payload is a map, `key` selects the field to inspect.
    Non-numeric payloads are filtered out (no symptom, no error).
    """
    limit = float(limit)

    def monitor(event):
        payload = event.payload
        if isinstance(payload, dict):
            payload = payload.get(key)
        if isinstance(payload, bool) or not isinstance(payload, (int, float)):
            return None
        if payload > limit:
            return {"symptom": "over-limit", "value": float(payload), "limit": limit}
        return None

    return monitor


def mean_drift_analyzer(window=20, tolerance=2.0):
    """Flag observations whose value drifts from the running mean."""
    seen = deque(maxlen=int(window))
    tolerance = float(tolerance)

    def analyze(observation):
        value = observation["value"] if isinstance(observation, dict) else float(observation)
        drifted = bool(seen) and abs(value - sum(seen) / len(seen)) > tolerance
        seen.append(value)
        if drifted:
            return {"symptom": "drift", "value": value}
        if isinstance(observation, dict) and observation.get("symptom"):
            return observation
        return None

    return analyze


def rule_plan(rules):
    """Map symptom names to change requests: {"over-limit": ChangeRequest(...)}."""

    def plan(symptom):
        name = symptom.get("symptom") if isinstance(symptom, dict) else symptom
        request = rules.get(name)
        return [request] if request is not None else None

    return plan


def whitelist_executor(context):
    """Apply whitelisted change requests through the service's context callbacks.

    context keys: set_metadata(key, value), disable_behaviour(), emit_fault(text).
    Unknown or non-whitelisted actions are skipped.
    """

    def execute(requests):
        applied = []
        for request in requests:
            if request.action not in ACTION_WHITELIST:
                continue
            if request.action == "adjust-metadata" and "set_metadata" in context:
                context["set_metadata"](str(request.params.get("key", "")),
                                        str(request.params.get("value", "")))
            elif request.action == "disable-behaviour" and "disable_behaviour" in context:
                context["disable_behaviour"]()
            elif request.action == "emit-fault" and "emit_fault" in context:
                context["emit_fault"](str(request.params.get("message", "fault")))
            applied.append(request.action)
        return applied

    return execute


BUILTIN_SLOTS = {
    "threshold": threshold_monitor,
    "mean-drift": mean_drift_analyzer,
    "rule": rule_plan,
    "whitelist": whitelist_executor,
}

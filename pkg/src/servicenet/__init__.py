"""Lightweight peer-to-peer service networks.

A daemon hosts dynamically registered services that message each other
over an XML-RPC style protocol with a REST/GET fallback, carry per-service
autonomic managers, self-organize through reinforced dynamic links, and
can be grouped by a genetic-algorithm problem solver.
"""

from .autonomic import AutonomicManager, ChangeRequest, Event
from .links import Link, LinkDynamicsConfig, LinkTable
from .query import parse_query, eval_text, eval_xml
from .registry import BehaviourSpec, Registry, ServiceRecord, call_remote, wrap
from .server import FileRoot, ServiceServer
from .solver import Mediator, SolverConfig, run_ga, solve_from_script
from .wire import MethodCall, WireResponse, decode_call, decode_value, encode_call, encode_value

__all__ = [
    "AutonomicManager", "BehaviourSpec", "ChangeRequest", "Event", "FileRoot",
    "Link", "LinkDynamicsConfig", "LinkTable", "Mediator", "MethodCall",
    "Registry", "ServiceRecord", "ServiceServer", "SolverConfig", "WireResponse",
    "call_remote", "decode_call", "decode_value", "encode_call", "encode_value",
    "eval_text", "eval_xml", "parse_query", "run_ga", "solve_from_script", "wrap",
]

__version__ = "0.1.0"

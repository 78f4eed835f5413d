"""Operator entry point: run the daemon and script every operation headlessly.

Exit codes: 0 success, 1 usage error, 2 runtime error.  Argument literals
reuse the REST type-prefix grammar (i: f: t: s: b64:), so the same
literal syntax works in URLs, forms and here.
"""

from __future__ import annotations

import argparse
import os
import sys

from . import admin, query, solver, wire
from .errors import Fault
from .registry import Registry, call_remote
from .server import FileRoot, ServiceServer
from .wire import MethodCall

URL_ENV = "SERVICENET_URL"
DEFAULT_URL = "http://127.0.0.1:8072"

ADMIN_SERVICE_ID = "admin"


def _default_url():
    return os.environ.get(URL_ENV, DEFAULT_URL)


def _parse_root(text):
    alias, _, directory = text.partition("=")
    if not alias or not directory:
        raise argparse.ArgumentTypeError("roots are alias=path")
    return FileRoot(alias, directory)


def build_parser():
    parser = argparse.ArgumentParser(prog="servicenet")
    sub = parser.add_subparsers(dest="command", required=True)

    serve = sub.add_parser("serve", help="run the daemon")
    serve.add_argument("--config", help="config directory to load on startup")
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--port", type=int, default=8072)
    serve.add_argument("--root", type=_parse_root, action="append", default=[],
                       help="file root alias=path (repeatable)")
    serve.add_argument("--ui", help="directory of console assets for /ui")
    serve.add_argument("--admin-password", default="")

    invoke = sub.add_parser("invoke", help="call a method on a running daemon")
    invoke.add_argument("--url", default=None)
    invoke.add_argument("--service", required=True)
    invoke.add_argument("--method", required=True)
    invoke.add_argument("--password", default="")
    invoke.add_argument("--arg", action="append", default=[],
                        help="typed literal, e.g. i:5 or s:hello (repeatable)")
    invoke.add_argument("--xml", action="store_true",
                        help="print the raw wire response document")

    qp = sub.add_parser("query", help="evaluate a query over a file")
    qp.add_argument("--mode", choices=("xml", "text"), required=True)
    qp.add_argument("--q", required=True)
    qp.add_argument("--file", required=True)

    solve = sub.add_parser("solve", help="run the problem solver from a script")
    solve.add_argument("--script", required=True)
    solve.add_argument("--url", default=None,
                       help="unused for inline scripts; reserved for remote sources")

    save = sub.add_parser("save", help="save a daemon's network to a directory")
    save.add_argument("--url", default=None)
    save.add_argument("--password", default="", help="admin service password")
    save.add_argument("--out", required=True)

    load = sub.add_parser("load", help="load a saved network into a daemon")
    load.add_argument("--url", default=None)
    load.add_argument("--password", default="", help="admin service password")
    load.add_argument("--in", dest="in_dir", required=True)

    peers = sub.add_parser("peers", help="manage a daemon's peer list")
    peers.add_argument("--url", default=None)
    peers.add_argument("--password", default="", help="admin service password")
    peers.add_argument("action", choices=("list", "register", "refresh"))
    peers.add_argument("peer", nargs="?")

    view = sub.add_parser("view", help="print a daemon's network view")
    view.add_argument("--url", default=None)

    return parser


def _admin_call(url, method, args, password):
    return call_remote(url or _default_url(),
                       MethodCall((ADMIN_SERVICE_ID,), method, password, tuple(args)))


def _print_value(value, out):
    if isinstance(value, (list, tuple)):
        for item in value:
            out.write("%s\n" % (item,))
    elif isinstance(value, dict):
        for key in sorted(value):
            out.write("%s=%s\n" % (key, value[key]))
    else:
        out.write("%s\n" % (value,))


def cmd_serve(args, out):
    factory = admin.ServiceFactory()
    registry = Registry()
    file_roots = list(args.root)
    if args.config:
        factory_path = os.path.join(args.config, admin.FACTORY_FILE)
        if os.path.exists(factory_path):
            factory.load(factory_path)
        with open(os.path.join(args.config, admin.NETWORK_FILE),
                  encoding="utf-8") as fh:
            doc = fh.read()
        admin.load_config(doc, factory, registry)
        file_roots += admin.file_roots_from(doc)
    registry.add_service(ADMIN_SERVICE_ID, "admin", password=args.admin_password,
                         handler=admin.admin_service(registry, factory, file_roots))
    server = ServiceServer(registry, args.host, args.port,
                           file_roots=file_roots, ui_dir=args.ui)
    registry.start_behaviours()
    out.write("listening on %s\n" % server.url)
    out.flush()
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        server.stop()
    return 0


def cmd_invoke(args, out):
    call_args = [wire.parse_literal(a) for a in args.arg]
    call = MethodCall(tuple(args.service.split("/")), args.method,
                      args.password, tuple(call_args))
    value = call_remote(args.url or _default_url(), call)
    if args.xml:
        out.write(wire.encode_response(wire.WireResponse.success(value))
                  .decode("utf-8") + "\n")
    else:
        _print_value(value, out)
    return 0


def cmd_query(args, out):
    q = query.parse_query(args.q)
    with open(args.file, encoding="utf-8") as fh:
        content = fh.read()
    if args.mode == "xml":
        result = query.eval_xml(q, content)
    else:
        result = query.eval_text(q, content.splitlines())
    for location, match in result.matches:
        out.write("%s\t%s\n" % (location, match))
    return 0


def cmd_solve(args, out):
    solution = solver.solve_from_script(args.script)
    for generation, best in enumerate(solution.history):
        out.write("generation %d best %s\n" % (generation, best))
    out.write("assignment %s\n" % (",".join(str(g) for g in solution.best)))
    out.write("fitness %s\n" % solution.fitness)
    return 0


def cmd_save(args, out):
    doc = _admin_call(args.url, "saveConfig", [], args.password)
    os.makedirs(args.out, exist_ok=True)
    path = os.path.join(args.out, admin.NETWORK_FILE)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(doc)
    out.write("saved %s\n" % path)
    return 0


def cmd_load(args, out):
    with open(os.path.join(args.in_dir, admin.NETWORK_FILE),
              encoding="utf-8") as fh:
        doc = fh.read()
    report = _admin_call(args.url, "loadConfig", [doc], args.password)
    _print_value(report, out)
    return 0


def cmd_peers(args, out):
    if args.action == "list":
        _print_value(_admin_call(args.url, "listPeers", [], args.password), out)
    elif args.action in ("register", "refresh"):
        if not args.peer:
            raise UsageError("peer url required")
        method = "registerPeer" if args.action == "register" else "refreshPeer"
        _admin_call(args.url, method, [args.peer], args.password)
        out.write("ok\n")
    return 0


def cmd_view(args, out):
    import urllib.request
    with urllib.request.urlopen((args.url or _default_url()) + "/meta",
                                timeout=10) as resp:
        out.write(resp.read().decode("utf-8") + "\n")
    return 0


class UsageError(Exception):
    pass


COMMANDS = {
    "serve": cmd_serve,
    "invoke": cmd_invoke,
    "query": cmd_query,
    "solve": cmd_solve,
    "save": cmd_save,
    "load": cmd_load,
    "peers": cmd_peers,
    "view": cmd_view,
}


def run(argv, out=None, err=None):
    out = out or sys.stdout
    err = err or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code == 0 else 1
    try:
        return COMMANDS[args.command](args, out)
    except UsageError as exc:
        err.write("error: %s\n" % exc)
        return 1
    except (Fault, OSError) as exc:
        err.write("error: %s\n" % exc)
        return 2


def main():
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()

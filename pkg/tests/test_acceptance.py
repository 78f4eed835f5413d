"""Acceptance suite: one test per release criterion.

Each test records a single `ACCEPTANCE <name>: PASS|FAIL` verdict, which
conftest prints in the terminal summary.  Generators are seeded; every
run checks the same corpus.
"""

import http.client
import itertools
import math
import random
import time
import urllib.parse
import xml.etree.ElementTree as ET
from contextlib import contextmanager

import pytest

from servicenet import admin, query as Q, wire
from servicenet.autonomic import EVENT_FAULT, Event
from servicenet.errors import BadPassword, Fault, ForbiddenPath, NotFound
from servicenet.links import LinkDynamicsConfig
from servicenet.registry import BehaviourSpec, Registry, ServiceRecord
from servicenet.resources import file_service
from servicenet.server import FileRoot, ServiceServer, serve_file
from servicenet.solver import (
    Dataset,
    Mediator,
    SolverConfig,
    distributed_link_pass,
    fitness,
    run_ga,
    similarity,
    tokenize,
)
from servicenet.wire import MethodCall


VERDICTS = {}


@contextmanager
def criterion(name):
    try:
        yield
    except BaseException:
        VERDICTS[name] = "FAIL"
        print("ACCEPTANCE %s: FAIL" % name)
        raise
    VERDICTS[name] = "PASS"
    print("ACCEPTANCE %s: PASS" % name)


def raw_request(server, method, path, body=None):
    conn = http.client.HTTPConnection("127.0.0.1", server.port, timeout=10)
    try:
        conn.putrequest(method, path, skip_accept_encoding=True)
        if body is not None:
            conn.putheader("Content-Length", str(len(body)))
        conn.endheaders()
        if body is not None:
            conn.send(body)
        resp = conn.getresponse()
        return resp.status, resp.read()
    finally:
        conn.close()


# -- generators shared by several criteria -----------------------------------

TEXT_ALPHABET = "abcXYZ 0123\t\n\r<>&\"'é☃"


def rand_text(rng, limit=12):
    return "".join(rng.choice(TEXT_ALPHABET) for _ in range(rng.randrange(limit)))


def rand_value(rng, depth=0):
    kinds = ["bool", "int", "real", "str", "bin", "null"]
    if depth < 4:
        kinds += ["list", "map"]
    kind = rng.choice(kinds)
    if kind == "bool":
        return rng.random() < 0.5
    if kind == "int":
        return rng.randrange(-10**12, 10**12)
    if kind == "real":
        return rng.choice([0.0, -2.5, 0.1, 3.0, rng.uniform(-1e9, 1e9)])
    if kind == "str":
        return rand_text(rng)
    if kind == "bin":
        return bytes(rng.randrange(256) for _ in range(rng.randrange(8)))
    if kind == "null":
        return None
    if kind == "list":
        return [rand_value(rng, depth + 1) for _ in range(rng.randrange(4))]
    return {rand_text(rng, 6): rand_value(rng, depth + 1)
            for _ in range(rng.randrange(4))}


def rand_call(rng):
    segments = tuple("s%d" % rng.randrange(20)
                     for _ in range(rng.randrange(1, 4)))
    args = tuple(rand_value(rng, depth=1) for _ in range(rng.randrange(4)))
    return MethodCall(segments, "m%d" % rng.randrange(50), rand_text(rng), args)


# -- the criteria -------------------------------------------------------------

class TestAcceptance:
    def test_codec_round_trip(self):
        with criterion("codec-round-trip"):
            rng = random.Random(2024)
            started = time.monotonic()
            for _ in range(5000):
                value = rand_value(rng)
                assert wire.same_value(wire.decode_value(wire.encode_value(value)),
                                       value)
            for _ in range(5000):
                call = rand_call(rng)
                decoded = wire.decode_call(wire.encode_call(call))
                assert decoded.service_path == call.service_path
                assert decoded.method == call.method
                assert decoded.password == call.password
                assert len(decoded.args) == len(call.args)
                for got, want in zip(decoded.args, call.args):
                    assert wire.same_value(got, want)
            assert time.monotonic() - started < 10.0

    def test_parser_fallback(self, live_server):
        with criterion("parser-fallback"):
            rng = random.Random(7)
            for _ in range(50):  # XML bodies
                a, b = rng.randrange(1000), rng.randrange(1000)
                body = wire.encode_call(MethodCall(("Echo",), "add", "", (a, b)))
                _, payload = raw_request(live_server, "POST", "/service", body)
                response = wire.decode_response(payload)
                assert response.success and response.value == a + b
            for _ in range(50):  # REST query strings
                word = "w%d" % rng.randrange(1000)
                _, payload = raw_request(
                    live_server, "GET", "/service/Echo/echo?arg0=s:" + word)
                assert wire.decode_response(payload).value == word
            for _ in range(50):  # plain file fetches
                status, payload = raw_request(live_server, "GET",
                                              "/files/pub/notes.txt")
                assert status == 200 and payload == b"plain text"
            malformed = [
                b"<method><name>add",
                b"<wrong/>",
                b"not xml at all",
                b"<method><params><param><int>zz</int></param></params></method>",
            ]
            for index in range(50):
                if index % 2:
                    _, payload = raw_request(live_server, "POST", "/service",
                                             malformed[index % len(malformed)])
                else:  # REST with bad literals or argument gaps
                    bad = ["arg0=i:x", "arg1=i:5", "arg0=q:5"][index % 3]
                    _, payload = raw_request(live_server, "GET",
                                             "/service/Echo/add?" + bad)
                response = wire.decode_response(payload)
                assert response.fault and response.code == 400
            # the server kept serving throughout
            _, payload = raw_request(live_server, "GET", "/service/Echo/ping")
            assert wire.decode_response(payload).value == "pong"

    def test_security_gate(self, live_server):
        with criterion("security-gate"):
            rng = random.Random(11)
            registry = live_server.registry
            registry.add_service("Vault", password="secret",
                                 handler={"peek": lambda: "contents"})
            record = registry.resolve("Vault")
            for _ in range(990):
                guess = rand_text(rng, 10)
                if guess == "secret":
                    continue
                with pytest.raises(BadPassword) as err:
                    registry.invoke("Vault", "peek", password=guess)
                assert err.value.code == 401
            for index in range(10):  # a sample over the wire as well
                _, payload = raw_request(
                    live_server, "GET",
                    "/service/Vault/peek?password=wrong%d" % index)
                assert wire.decode_response(payload).code == 401
            assert record.invocation_count == 0
            assert registry.invoke("Vault", "peek", password="secret") == "contents"
            assert record.invocation_count == 1

    def test_file_confinement(self, tmp_path):
        with criterion("file-confinement"):
            outside = tmp_path / "secret.txt"
            outside.write_bytes(b"SENTINEL-DO-NOT-SERVE")
            pub = tmp_path / "pub"
            pub.mkdir()
            (pub / "ok.txt").write_bytes(b"fine")
            roots = [FileRoot("pub", str(pub))]
            service = file_service(roots)

            rng = random.Random(13)
            pieces = ["..", "%2e%2e", "..%2f", "%2e%2e%2f", "....//",
                      "..\\", "secret.txt", "ok.txt", "etc", "passwd", ""]
            paths = []
            while len(paths) < 500:
                candidate = "/".join(rng.choice(pieces)
                                     for _ in range(rng.randrange(1, 5)))
                if rng.random() < 0.1:
                    candidate = str(outside)
                if ".." in urllib.parse.unquote(candidate) \
                        or candidate.startswith("/"):
                    paths.append(candidate)
            for path in paths:
                try:
                    payload, _ = serve_file(roots, "/files/pub/" + path)
                except (ForbiddenPath, NotFound):
                    payload = b""
                assert b"SENTINEL" not in payload
                try:
                    payload = service["fetch"]("pub/" + path)
                except (ForbiddenPath, NotFound):
                    payload = b""
                assert b"SENTINEL" not in payload

    def test_link_dynamics_exactness(self):
        with criterion("link-dynamics"):
            registry = Registry()  # defaults 1.0 / 3.0 / 0.9 / 1.0
            registry.add_service("A")
            registry.add_service("B")
            links = registry.links
            links.record_use("A", "B")
            links.record_use("A", "B")
            assert links.dynamic_weight("A", "B") is None
            links.record_use("A", "B")  # exactly the 3rd use creates
            assert links.dynamic_weight("A", "B") == 3.0
            for epoch in range(1, 11):
                links.decay_epoch()
                weight = links.dynamic_weight("A", "B")
                assert weight == pytest.approx(3.0 * 0.9 ** epoch)
            links.decay_epoch()  # epoch 11: 3.0*0.9^11 < 1.0
            assert links.dynamic_weight("A", "B") is None
            assert 3.0 * 0.9 ** 10 >= 1.0 > 3.0 * 0.9 ** 11

    def test_mape_pass_through_and_isolation(self):
        with criterion("mape-isolation"):
            cycles = [0]

            def behaviour():
                cycles[0] += 1
                return cycles[0]

            registry = Registry()
            registry.add_service("Auto", handler={"behaviour": behaviour},
                                 behaviour=BehaviourSpec(10))
            manager = registry.resolve("Auto").manager
            # empty slots never act
            outcome = manager.submit_event(Event("Auto", "custom", 5))
            assert outcome.no_action and outcome.applied == []

            def exploding(datum):
                raise RuntimeError("slot bug")

            manager.install_slot("monitor", exploding)
            manager.install_slot("execute", lambda datum: datum)
            registry.start_behaviours()
            try:
                deadline = time.monotonic() + 30
                first_fault_at = None
                while time.monotonic() < deadline:
                    faults = [e for e in list(manager.event_log)
                              if e.kind == EVENT_FAULT]
                    if faults and first_fault_at is None:
                        first_fault_at = cycles[0]
                    if first_fault_at is not None \
                            and cycles[0] >= first_fault_at + 100:
                        break
                    time.sleep(0.02)
                assert first_fault_at is not None, "no fault was logged"
                # the scheduler survived >= 100 cycles past the first failure
                assert cycles[0] >= first_fault_at + 100
            finally:
                registry.stop_behaviours()

    def test_query_oracle_equivalence(self):
        with criterion("query-oracle"):
            rng = random.Random(17)
            tags = ["a", "b", "c", "item"]
            words = ["cat", "dog", "Fish", "5", "12", "3.5", ""]

            def rand_doc():
                count = [0]

                def build(depth):
                    count[0] += 1
                    elem = ET.Element(rng.choice(tags))
                    if rng.random() < 0.5:
                        elem.set("x", rng.choice(words))
                    elem.text = rng.choice(words)
                    if depth < 3:
                        for _ in range(rng.randrange(3)):
                            if count[0] >= 30:
                                break
                            elem.append(build(depth + 1))
                    return elem

                return ET.tostring(build(0), encoding="unicode")

            def rand_constraint(depth=0):
                kinds = ["cmp", "contains"]
                if depth < 2:
                    kinds += ["and", "or", "not"]
                kind = rng.choice(kinds)
                if kind == "and":
                    return Q.And(rand_constraint(depth + 1),
                                 rand_constraint(depth + 1))
                if kind == "or":
                    return Q.Or(rand_constraint(depth + 1),
                                rand_constraint(depth + 1))
                if kind == "not":
                    return Q.Not(rand_constraint(depth + 1))
                operand = rng.choice([Q.Content(), Q.Attr("x")])
                if kind == "contains":
                    return Q.Contains(operand, rng.choice(["cat", "5", "i"]))
                return Q.Cmp(rng.choice(["=", "!=", "<", "<=", ">", ">="]),
                             operand,
                             rng.choice([Q.Text("cat"), Q.Text("5"),
                                         Q.Number(3.0), Q.Number(12.0)]))

            def rand_query():
                pattern = tuple(rng.choice(tags + ["*"])
                                for _ in range(rng.randrange(1, 5)))
                constraint = rand_constraint() if rng.random() < 0.8 else None
                return Q.Query("xml", pattern, constraint)

            # brute-force oracle: enumerate every element, filter afterwards
            def oracle(q, doc):
                found = []

                def walk(elem, path):
                    found.append((path, elem))
                    for child in elem:
                        walk(child, path + (child.tag,))

                root = ET.fromstring(doc)
                walk(root, (root.tag,))
                out = []
                for path, elem in found:
                    if len(path) != len(q.pattern):
                        continue
                    if not all(s == "*" or s == t
                               for s, t in zip(q.pattern, path)):
                        continue
                    if Q.eval_constraint(q.constraint,
                                         "".join(elem.itertext()), elem.attrib):
                        out.append("".join(elem.itertext()))
                return out

            started = time.monotonic()
            for _ in range(1000):
                doc, q = rand_doc(), rand_query()
                try:
                    expected = oracle(q, doc)
                except Fault:
                    with pytest.raises(Fault):
                        Q.eval_xml(q, doc)
                    continue
                assert Q.eval_xml(q, doc).contents == expected
            assert time.monotonic() - started < 30.0

    def test_ga_small_instance_optimality(self):
        with criterion("ga-optimality"):
            rng = random.Random(23)
            vocabulary = ["alpha", "beta", "gamma", "delta", "epsilon",
                          "zeta", "eta", "theta"]
            optimal_hits = total = 0
            for dataset_index in range(20):
                size = rng.randrange(4, 9)
                groups = rng.randrange(2, 4)
                texts = [" ".join(rng.choices(vocabulary, k=5))
                         for _ in range(size)]
                dataset = Dataset(tuple((str(i), tokenize(t))
                                        for i, t in enumerate(texts)))
                best = max(fitness(c, dataset) for c in
                           itertools.product(range(groups), repeat=size))
                for seed in range(5):
                    solution = run_ga(
                        SolverConfig(seed=1000 * dataset_index + seed,
                                     group_count=groups), dataset)
                    total += 1
                    if math.isclose(solution.fitness, best, abs_tol=1e-9):
                        optimal_hits += 1
                    assert all(x <= y for x, y in
                               zip(solution.history, solution.history[1:]))
            assert total == 100
            assert optimal_hits >= 95

    def test_two_node_p2p(self):
        with criterion("two-node-p2p"):
            texts = {"X1": "alpha beta", "X2": "alpha beta gamma", "Y": "delta"}
            remote_registry = Registry()
            for sid, text in texts.items():
                remote_registry.add_service(
                    sid, "info", handler={"getText": lambda text=text: text})
            remote = ServiceServer(remote_registry).start()

            local_registry = Registry(link_config=LinkDynamicsConfig(
                create_threshold=1.0, exist_threshold=1.0))
            local_registry.add_service(
                "L1", "info", handler={"getText": lambda: "alpha beta"})
            local = ServiceServer(local_registry).start()
            try:
                # remote invocation matches local dispatch value-for-value
                for sid in texts:
                    call = MethodCall((sid,), "getText", "")
                    assert local_registry.call_remote(remote.url, call) == \
                        remote_registry.dispatch(call)

                sources = ["L1"] + ["%s::%s" % (remote.url, sid)
                                    for sid in sorted(texts)]
                threshold = 0.5
                vectors = {"L1": tokenize("alpha beta")}
                for sid, text in texts.items():
                    vectors["%s::%s" % (remote.url, sid)] = tokenize(text)
                predicted = {
                    frozenset((a, b))
                    for a, b in itertools.combinations(sources, 2)
                    if similarity(vectors[a], vectors[b]) >= threshold
                }
                distributed_link_pass(Mediator(local_registry), sources,
                                      threshold)
                created = {
                    frozenset((link.source, link.target))
                    for link in local_registry.links.all_links()
                    if link.kind == "dynamic"
                }
                assert created == predicted and predicted
            finally:
                local.stop()
                remote.stop()

    def test_config_round_trip(self):
        with criterion("config-round-trip"):
            registry = Registry()
            registry.add_service("oracle", "echo")
            for index in range(6):
                registry.add_service("node%d" % index, "service",
                                     metadata={"slot": str(index)})
            registry.add_service("ticker", "counter",
                                 handler={"behaviour": lambda: 1},
                                 behaviour=BehaviourSpec(100))
            registry.add_service("hub", "service")
            registry.nest_service("hub", ServiceRecord("mid", "service"))
            registry.nest_service("hub/mid", ServiceRecord("leaf", "service"))
            registry.links.add_link("permanent", "hub", "oracle")
            registry.links.add_link("association", "node0", "node1")
            for _ in range(3):
                registry.links.record_use("node2", "hub/mid/leaf")
            assert len(registry.all_paths()) >= 10

            saved = admin.save_config(registry)
            assert saved.count('kind="echo"') == 1
            loaded, report = admin.load_config(
                saved.replace('kind="echo"', 'kind="mystery"'))
            assert report.placeholders == ["oracle"]
            for kind in ("permanent", "association", "dynamic"):
                assert any(link.kind == kind
                           for link in loaded.links.all_links())

            before_view = loaded.network_view()
            doc = admin.save_config(loaded)
            reloaded, _ = admin.load_config(doc)
            assert admin.save_config(reloaded) == doc  # byte-level fixpoint
            assert reloaded.network_view() == before_view

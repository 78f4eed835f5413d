"""Config persistence and the service factory."""

import xml.etree.ElementTree as ET

import pytest

from servicenet import admin
from servicenet.errors import (
    BadManifest,
    DuplicateKind,
    SchemaError,
    UnknownKind,
)
from servicenet.links import LinkDynamicsConfig
from servicenet.registry import BehaviourSpec, Registry, ServiceRecord


def sample_registry():
    registry = Registry()
    registry.add_service("alpha", "echo", password="pw")
    registry.add_service("beta", "service", metadata={"role": "hub"})
    registry.nest_service("beta", ServiceRecord("inner", "service"))
    registry.links.add_link("permanent", "alpha", "beta")
    registry.links.add_link("association", "beta", "alpha")
    for _ in range(4):
        registry.links.record_use("alpha", "beta/inner")
    registry.register_peer("http://peer.example:8072")
    return registry


class TestSaveLoad:
    def test_empty_registry_document(self):
        doc = admin.save_config(Registry())
        root = ET.fromstring(doc)
        assert root.tag == admin.TOP_ELEMENT
        assert len(root.find("services")) == 0

    def test_round_trip_view_equality(self):
        registry = sample_registry()
        loaded, report = admin.load_config(admin.save_config(registry))
        assert report.failures == []
        assert loaded.network_view() == registry.network_view()
        # passwords compare by digest
        assert loaded.resolve("alpha").password_digest == \
            registry.resolve("alpha").password_digest

    def test_save_load_save_fixpoint(self):
        doc1 = admin.save_config(sample_registry())
        loaded, _ = admin.load_config(doc1)
        doc2 = admin.save_config(loaded)
        assert doc1 == doc2

    def test_unknown_kind_placeholder(self):
        doc = admin.save_config(sample_registry()).replace(
            'kind="echo"', 'kind="exotic"')
        loaded, report = admin.load_config(doc)
        assert report.placeholders == ["alpha"]
        record = loaded.resolve("alpha")
        assert record.placeholder and record.kind == "exotic"
        # view-compatible but not invocable
        assert '<service id="alpha" kind="exotic">' in loaded.network_view()

    def test_placeholder_round_trips(self):
        doc = admin.save_config(sample_registry()).replace(
            'kind="echo"', 'kind="exotic"')
        loaded, _ = admin.load_config(doc)
        doc2 = admin.save_config(loaded)
        loaded2, _ = admin.load_config(doc2)
        assert admin.save_config(loaded2) == doc2

    def test_duplicate_ids_rejected(self):
        doc = ('<serviceNetwork version="1"><services>'
               '<service id="A" kind="service"/>'
               '<service id="A" kind="service"/>'
               "</services></serviceNetwork>")
        with pytest.raises(SchemaError):
            admin.load_config(doc)

    def test_link_closure_on_save(self):
        registry = sample_registry()
        registry.links.record_use("alpha", "http://other::X")  # external endpoint
        doc = admin.save_config(registry)
        assert "http://other" not in doc

    def test_dynamics_config_round_trips(self):
        registry = Registry(link_config=LinkDynamicsConfig(
            reinforce=2.0, decay_factor=0.5, create_threshold=4.0,
            exist_threshold=2.0, weight_cap=50.0))
        loaded, _ = admin.load_config(admin.save_config(registry))
        assert loaded.links.config == registry.links.config

    def test_dynamic_link_weight_restored(self):
        registry = sample_registry()
        weight = registry.links.dynamic_weight("alpha", "beta/inner")
        loaded, _ = admin.load_config(admin.save_config(registry))
        assert loaded.links.dynamic_weight("alpha", "beta/inner") == weight

    def test_behaviour_spec_round_trips(self):
        registry = Registry()
        registry.add_service("C", "counter", handler={"behaviour": lambda: 1},
                             behaviour=BehaviourSpec(250, False))
        loaded, _ = admin.load_config(admin.save_config(registry))
        spec = loaded.resolve("C").behaviour_spec
        assert (spec.period_ms, spec.enabled) == (250, False)

    def test_save_to_dir_and_back(self, tmp_path):
        registry = sample_registry()
        admin.save_to_dir(registry, str(tmp_path), factory=admin.ServiceFactory())
        assert (tmp_path / admin.NETWORK_FILE).exists()
        assert (tmp_path / admin.FACTORY_FILE).exists()
        loaded, _ = admin.load_from_dir(str(tmp_path))
        assert loaded.network_view() == registry.network_view()


class TestFactory:
    def test_register_and_instantiate(self):
        factory = admin.ServiceFactory()
        calls = []
        factory.register_type(admin.ServiceType(
            "probe", lambda decl: {"handler": {"hit": lambda: calls.append(1) or "ok"}},
            default_meta={"description": "test probe"}))
        record = factory.instantiate(ET.fromstring('<service id="p" kind="probe"/>'))
        registry = Registry()
        registry.add_record(record)
        assert registry.invoke("p", "hit") == "ok"
        assert record.metadata["description"] == "test probe"

    def test_duplicate_kind(self):
        factory = admin.ServiceFactory()
        with pytest.raises(DuplicateKind):
            factory.register_type(admin.ServiceType("echo", lambda d: {}))

    def test_unknown_kind(self):
        with pytest.raises(UnknownKind):
            admin.ServiceFactory().instantiate(
                ET.fromstring('<service id="x" kind="nope"/>'))

    def test_declaration_meta_overrides_default(self):
        factory = admin.ServiceFactory()
        factory.register_type(admin.ServiceType(
            "meta-test", lambda d: {}, default_meta={"a": "1", "b": "2"}))
        record = factory.instantiate(ET.fromstring(
            '<service id="m" kind="meta-test"><meta key="b">9</meta></service>'))
        assert record.metadata["a"] == "1" and record.metadata["b"] == "9"

    def test_builtin_info_kind(self):
        factory = admin.ServiceFactory()
        record = factory.instantiate(ET.fromstring(
            '<service id="i" kind="info">'
            '<container kind="id">'
            '<resource id="r1" kind="text">hello</resource>'
            "</container></service>"))
        registry = Registry()
        registry.add_record(record)
        assert registry.invoke("i", "getById", "r1") == "hello"

    def test_builtin_counter_kind(self):
        factory = admin.ServiceFactory()
        record = factory.instantiate(ET.fromstring(
            '<service id="c" kind="counter"><behaviour periodMs="50"/></service>'))
        registry = Registry()
        registry.add_record(record)
        assert registry.run_behaviour_cycle("c") == 1
        assert registry.run_behaviour_cycle("c") == 2


class TestManifests:
    MANIFEST = ('<moduleManifest><serviceType kind="news" base="info">'
                '<defaultMeta key="description">news feed</defaultMeta>'
                '<container kind="id">'
                '<resource id="n1" kind="text">headline</resource>'
                "</container></serviceType></moduleManifest>")

    def test_load_manifest_registers_kind(self):
        factory = admin.ServiceFactory()
        assert factory.load_manifest(self.MANIFEST) == ["news"]
        record = factory.instantiate(ET.fromstring('<service id="n" kind="news"/>'))
        registry = Registry()
        registry.add_record(record)
        assert registry.invoke("n", "getById", "n1") == "headline"
        assert record.metadata["description"] == "news feed"

    def test_reload_same_manifest(self):
        factory = admin.ServiceFactory()
        factory.load_manifest(self.MANIFEST)
        with pytest.raises(DuplicateKind):
            factory.load_manifest(self.MANIFEST)

    def test_bad_manifest(self):
        factory = admin.ServiceFactory()
        with pytest.raises(BadManifest):
            factory.load_manifest("<wrong/>")
        with pytest.raises(BadManifest):
            factory.load_manifest("<moduleManifest><serviceType/></moduleManifest>")

    def test_persistence_across_restart(self, tmp_path):
        factory = admin.ServiceFactory()
        factory.load_manifest(self.MANIFEST)
        path = tmp_path / admin.FACTORY_FILE
        factory.save(str(path))
        fresh = admin.ServiceFactory()
        assert fresh.load(str(path)) == ["news"]
        assert "news" in fresh.kinds()

    def test_load_module_from_file(self, tmp_path):
        path = tmp_path / "module.xml"
        path.write_text(self.MANIFEST)
        factory = admin.ServiceFactory()
        assert factory.load_module(str(path)) == ["news"]

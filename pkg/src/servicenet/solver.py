"""Centralized problem solving plus the localized linking alternative.

A mediator gathers text from local or remote services and tokenizes it
into term vectors.  The genetic algorithm evolves group-assignment
vectors scored by cosine similarity (mean intra-group minus mean
inter-group), then the winning grouping is pushed back onto the network
as dynamic-link reinforcement and a "group" metadata key.  The
distributed alternative skips the global search and reinforces pairs
whose local similarity clears a threshold.

Everything the GA does is driven by one seeded generator, so a (seed,
dataset) pair fully determines the result.
"""

from __future__ import annotations

import math
import random
import re
import xml.etree.ElementTree as ET
from dataclasses import dataclass, field, replace

from .errors import BadConfig, EmptyDataset, LengthMismatch, ScriptError
from .registry import call_remote
from .wire import MethodCall

_WORD = re.compile(r"[a-z0-9]+")

REMOTE_SEPARATOR = "::"  # sources like http://host:port::servicePath


@dataclass(frozen=True)
class SolverConfig:
    population_size: int = 40
    generations: int = 200
    crossover_rate: float = 0.8
    mutation_rate: float = 0.05
    tournament_k: int = 3
    group_count: int = 2
    seed: int = 0
    elitism: int = 1

    def __post_init__(self):
        if not (0 <= self.crossover_rate <= 1 and 0 <= self.mutation_rate <= 1):
            raise BadConfig("rates must be in [0,1]")
        if self.group_count < 2:
            raise BadConfig("groupCount must be >= 2")
        if self.population_size < 2 * max(self.elitism, 1):
            raise BadConfig("populationSize must be >= 2*elitism")
        if self.generations < 0 or self.tournament_k < 1 or self.elitism < 0:
            raise BadConfig("bad generations/tournament/elitism")


@dataclass(frozen=True)
class Dataset:
    entries: tuple  # (service path, term vector) pairs

    def __len__(self):
        return len(self.entries)

    @property
    def paths(self):
        return [path for path, _ in self.entries]

    @property
    def vectors(self):
        return [vector for _, vector in self.entries]


@dataclass(frozen=True)
class Solution:
    best: tuple           # group index per dataset entry
    fitness: float
    history: tuple        # best-ever fitness per generation
    config: SolverConfig


def tokenize(text):
    """Lowercased, punctuation-stripped term counts."""
    vector = {}
    for word in _WORD.findall(text.lower()):
        vector[word] = vector.get(word, 0) + 1
    return vector


def similarity(a, b):
    """Cosine similarity over term counts; both-empty pairs score 0."""
    if not a or not b:
        return 0.0
    dot = sum(count * b[word] for word, count in a.items() if word in b)
    if dot == 0:
        return 0.0
    norm = math.sqrt(sum(c * c for c in a.values())) \
        * math.sqrt(sum(c * c for c in b.values()))
    return dot / norm


class Mediator:
    """Fetches text content from services, locally or across peers."""

    TEXT_METHODS = ("getText", "behaviour")

    def __init__(self, registry=None, password=""):
        self.registry = registry
        self.password = password

    def fetch_text(self, source):
        if REMOTE_SEPARATOR in source:
            url, _, path = source.rpartition(REMOTE_SEPARATOR)
            invoke = lambda method: call_remote(
                url, MethodCall(tuple(path.split("/")), method, self.password))
            methods = self._remote_methods(url, path)
        else:
            if self.registry is None:
                raise EmptyDataset("no registry for local source %r" % source)
            invoke = lambda method: self.registry.invoke(
                source, method, password=self.password)
            methods = self.registry.invoke(source, "listMethods",
                                           password=self.password)
        for method in self.TEXT_METHODS:
            if method in methods:
                return str(invoke(method))
        raise EmptyDataset("%r exposes no text-yielding operation" % source)

    def _remote_methods(self, url, path):
        return call_remote(url, MethodCall(tuple(path.split("/")),
                                           "listMethods", self.password))


def gather(mediator, service_paths):
    """Build a dataset of term vectors; unreachable services are reported."""
    entries = []
    report = []
    for source in service_paths:
        try:
            entries.append((source, tokenize(mediator.fetch_text(source))))
        except Exception as exc:
            report.append((source, str(exc)))
    if not entries:
        raise EmptyDataset("no gatherable service produced text")
    return Dataset(tuple(entries)), report


def fitness(chromosome, dataset):
    """Mean intra-group similarity minus mean inter-group similarity."""
    vectors = dataset.vectors
    if len(chromosome) != len(vectors):
        raise LengthMismatch("chromosome length %d != dataset size %d"
                             % (len(chromosome), len(vectors)))
    intra_sum = intra_n = inter_sum = inter_n = 0
    for i in range(len(vectors)):
        for j in range(i + 1, len(vectors)):
            sim = similarity(vectors[i], vectors[j])
            if chromosome[i] == chromosome[j]:
                intra_sum += sim
                intra_n += 1
            else:
                inter_sum += sim
                inter_n += 1
    intra = intra_sum / intra_n if intra_n else 0.0
    inter = inter_sum / inter_n if inter_n else 0.0
    return intra - inter


def run_ga(config, dataset):
    """Tournament selection, single-point crossover, per-gene mutation, elitism.

    Fitness values are cached per chromosome, and an offspring that was
    already evaluated is re-mutated or replaced by a fresh random
    chromosome.  The grouping landscape is deceptive at small sizes, so
    spending the budget on unseen points matters more than re-scoring
    converged ones.
    """
    n = len(dataset)
    if n == 0:
        raise BadConfig("dataset is empty")
    if config.group_count > n:
        raise BadConfig("groupCount %d exceeds dataset size %d"
                        % (config.group_count, n))
    rng = random.Random(config.seed)
    groups = config.group_count

    def canonical(c):
        # relabel groups by first appearance; group ids are symmetric, and
        # without this crossover mixes incompatible labellings
        mapping = {}
        for gene in c:
            if gene not in mapping:
                mapping[gene] = len(mapping)
        return tuple(mapping[gene] for gene in c)

    def random_chromosome():
        return canonical(tuple(rng.randrange(groups) for _ in range(n)))

    def tournament(scored):
        best = None
        for _ in range(config.tournament_k):
            candidate = scored[rng.randrange(len(scored))]
            if best is None or candidate[1] > best[1]:
                best = candidate
        return best[0]

    def crossover(a, b):
        if n > 1 and rng.random() < config.crossover_rate:
            point = rng.randrange(1, n)
            return a[:point] + b[point:]
        return a

    def mutate(c):
        return tuple(
            rng.randrange(groups) if rng.random() < config.mutation_rate else gene
            for gene in c
        )

    cache = {}

    def score(c):
        if c not in cache:
            cache[c] = fitness(c, dataset)
        return cache[c]

    population = [random_chromosome() for _ in range(config.population_size)]
    best = None
    history = []

    def evaluate():
        nonlocal best
        scored = [(c, score(c)) for c in population]
        top = max(scored, key=lambda cf: cf[1])
        if best is None or top[1] > best[1]:
            best = top
        return scored

    scored = evaluate()
    history.append(best[1])
    for _ in range(config.generations):
        elite = [c for c, _ in sorted(scored, key=lambda cf: -cf[1])[:config.elitism]]
        offspring = list(elite)
        while len(offspring) < config.population_size:
            parent_a = tournament(scored)
            parent_b = tournament(scored)
            child = canonical(mutate(crossover(parent_a, parent_b)))
            attempts = 0
            while child in cache and attempts < 12:
                # a known point: perturb further, then fall back to a
                # random immigrant to keep exploring
                child = canonical(mutate(child)) if attempts < 4 \
                    else random_chromosome()
                attempts += 1
            offspring.append(child)
        population = offspring
        scored = evaluate()
        history.append(best[1])
    return Solution(best[0], best[1], tuple(history), config)


def apply_solution(solution, dataset, registry):
    """Push a grouping back onto the network as links and metadata.

    Same-group pairs get record_use in both directions; each local
    service's metadata gains a "group" key.  Missing services are skipped
    and reported, never fatal.
    """
    paths = dataset.paths
    skipped = []
    for path, group in zip(paths, solution.best):
        if REMOTE_SEPARATOR in path:
            continue  # remote metadata is not ours to write
        try:
            registry.resolve(path).metadata["group"] = str(group)
        except Exception as exc:
            skipped.append((path, str(exc)))
    bad = {path for path, _ in skipped}
    for i in range(len(paths)):
        for j in range(i + 1, len(paths)):
            if solution.best[i] != solution.best[j]:
                continue
            if paths[i] in bad or paths[j] in bad:
                continue
            try:
                registry.links.record_use(paths[i], paths[j])
                registry.links.record_use(paths[j], paths[i])
            except Exception as exc:
                skipped.append(((paths[i], paths[j]), str(exc)))
    return skipped


def distributed_link_pass(mediator, service_paths, threshold):
    """Localized alternative: reinforce pairs whose similarity clears threshold.

    Similarities are computed pairwise only; returns the number of
    record_use calls issued.
    """
    dataset, _ = gather(mediator, service_paths)
    links = mediator.registry.links
    paths, vectors = dataset.paths, dataset.vectors
    calls = 0
    for i in range(len(paths)):
        for j in range(i + 1, len(paths)):
            if similarity(vectors[i], vectors[j]) >= threshold:
                links.record_use(paths[i], paths[j])
                links.record_use(paths[j], paths[i])
                calls += 2
    return calls


# -- script front end --------------------------------------------------------

def parse_solver_script(text):
    """`<solve seed=.. groups=..><source path=../><source text=../></solve>`"""
    try:
        root = ET.fromstring(text)
    except ET.ParseError as exc:
        raise ScriptError("bad solver script: %s" % exc) from None
    if root.tag != "solve":
        raise ScriptError("top element must be <solve>, got <%s>" % root.tag)

    def attr(name, cast, default):
        raw = root.attrib.get(name)
        if raw is None:
            return default
        try:
            return cast(raw)
        except ValueError:
            raise ScriptError("bad attribute %s=%r" % (name, raw)) from None

    config = SolverConfig(
        population_size=attr("population", int, 40),
        generations=attr("generations", int, 200),
        crossover_rate=attr("crossover", float, 0.8),
        mutation_rate=attr("mutation", float, 0.05),
        tournament_k=attr("tournament", int, 3),
        group_count=attr("groups", int, 2),
        seed=attr("seed", int, 0),
        elitism=attr("elitism", int, 1),
    )
    sources = []
    for child in root:
        if child.tag != "source":
            raise ScriptError("unknown element <%s> in solver script" % child.tag)
        if "path" in child.attrib:
            sources.append(("path", child.attrib["path"]))
        elif "text" in child.attrib:
            sources.append(("text", child.attrib["text"]))
        elif child.text:
            sources.append(("text", child.text))
        else:
            raise ScriptError("<source> needs a path or text")
    if not sources:
        raise ScriptError("solver script declares no sources")
    return config, sources


def solve_from_script(script, registry=None, apply=True):
    """Run gather -> GA -> apply per a script document or file path.

    Inline `text` sources allow a fully headless run with no network.
    """
    if "\n" not in script and not script.lstrip().startswith("<"):
        try:
            with open(script, encoding="utf-8") as fh:
                script = fh.read()
        except OSError as exc:
            raise ScriptError(str(exc)) from exc
    config, sources = parse_solver_script(script)
    mediator = Mediator(registry)
    entries = []
    for index, (kind, value) in enumerate(sources):
        if kind == "text":
            entries.append(("inline:%d" % index, tokenize(value)))
        else:
            entries.append((value, tokenize(mediator.fetch_text(value))))
    dataset = Dataset(tuple(entries))
    solution = run_ga(config, dataset)
    if registry is not None and apply:
        apply_solution(solution, dataset, registry)
    return solution

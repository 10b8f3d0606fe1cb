"""Genetic algorithm over two populations: node permutations and vehicle splits.

A chromosome is a tuple holding every non-depot vertex once; the depot
delimiters are implicit. A split is a tuple of per-vehicle node counts.
Decoding hands vehicle k the next ``split[k]`` genes of the chromosome.

Each generation expands both populations to 2n individuals, evaluates the
full 2n x 2n cross product and keeps the n best of each population, ranked
by the best fitness they reach with any partner.
"""

from __future__ import annotations

import logging
import random
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .model import (
    CROSS_VEHICLE,
    DEPOT,
    PAIRING_MODES,
    SAME_VEHICLE,
    Instance,
    Solution,
    make_solution,
)

log = logging.getLogger(__name__)

Chromosome = tuple[int, ...]
VehicleSplit = tuple[int, ...]


@dataclass(frozen=True)
class GaConfig:
    population_size: int = 20
    generations: int = 50
    crossover_rate: float = 0.5
    mutation_rate: float = 0.4
    copy_rate: float = 0.1
    tardiness_penalty: float = 1000.0
    infeasibility_penalty: float = 1.0e6
    rng_seed: int = 0
    pairing: str = SAME_VEHICLE

    def __post_init__(self):
        if self.population_size < 2:
            raise ValueError("population_size must be >= 2")
        if self.generations < 1:
            raise ValueError("generations must be >= 1")
        rates = (self.crossover_rate, self.mutation_rate, self.copy_rate)
        if any(r < 0 or r > 1 for r in rates) or abs(sum(rates) - 1.0) > 1e-9:
            raise ValueError(f"operator rates must lie in [0, 1] and sum to 1, got {rates}")
        if self.tardiness_penalty < 0 or self.infeasibility_penalty < 0:
            raise ValueError("penalty weights must be >= 0")
        if self.pairing not in PAIRING_MODES:
            raise ValueError(f"unknown pairing mode {self.pairing!r}")


@dataclass
class GaResult:
    best_solution: Solution
    best_fitness: float
    history: list[float]
    evaluations: int
    best_chromosome: Chromosome = ()
    best_split: VehicleSplit = ()
    config: GaConfig = field(default_factory=GaConfig)


# ---------------------------------------------------------------------------
# Population generation


def generate_p_node(instance: Instance, n: int, rng: random.Random) -> list[Chromosome]:
    """``n`` uniform random permutations, each passed through precedence repair."""
    ids = list(instance.node_ids)
    out = []
    for _ in range(n):
        genes = ids[:]
        rng.shuffle(genes)
        out.append(correct_precedence(genes, instance))
    return out


def random_split(n_prime: int, k: int, rng: random.Random) -> VehicleSplit:
    """Uniform sample over compositions of ``n_prime`` into ``k`` nonnegative parts."""
    # stars and bars: pick k-1 bar slots among n_prime + k - 1
    bars = sorted(rng.sample(range(n_prime + k - 1), k - 1))
    counts = []
    prev = -1
    for b in bars:
        counts.append(b - prev - 1)
        prev = b
    counts.append(n_prime + k - 1 - prev - 1)
    return tuple(counts)


def generate_p_vehicle(instance: Instance, n: int, rng: random.Random) -> list[VehicleSplit]:
    k = len(instance.fleet)
    if k > max(1, instance.n_prime // 2):
        raise ValueError(f"fleet size {k} exceeds N'/2")
    return [random_split(instance.n_prime, k, rng) for _ in range(n)]


# ---------------------------------------------------------------------------
# Permutation operators


def one_point_crossover(
    parent_a: Sequence[int],
    parent_b: Sequence[int],
    point: int | None = None,
    rng: random.Random | None = None,
) -> Chromosome:
    """Keep the first ``point`` genes of ``parent_a``, then the rest in ``parent_b`` order.

    Filling from ``parent_b`` in order (rather than copying its tail) keeps
    the child a valid permutation for any pair of parents.
    """
    if sorted(parent_a) != sorted(parent_b):
        raise ValueError("parents are not permutations of the same ids")
    n = len(parent_a)
    if point is None:
        rng = rng or random.Random()
        point = rng.randint(1, n - 1) if n > 1 else n
    if not 0 <= point <= n:
        raise ValueError(f"crossover point {point} outside 0..{n}")
    head = tuple(parent_a[:point])
    taken = set(head)
    return head + tuple(g for g in parent_b if g not in taken)


def swap_mutation(c: Sequence[int], i: int, j: int) -> Chromosome:
    genes = list(c)
    genes[i], genes[j] = genes[j], genes[i]
    return tuple(genes)


def correct_precedence(c: Sequence[int], instance: Instance) -> Chromosome:
    """Move each supplier found after its customer to just before that customer."""
    genes = list(c)
    supplier_of = instance.supplier_of
    pos = 0
    while pos < len(genes):
        s = supplier_of.get(genes[pos])
        if s is not None:
            at = genes.index(s)
            if at > pos:
                del genes[at]
                genes.insert(pos, s)
                pos += 1  # the customer shifted one slot right
        pos += 1
    return tuple(genes)


def _repair_segment(seg: Sequence[int], capacity: float, instance: Instance) -> list[int]:
    q = instance.quantities
    supplier_of = instance.supplier_of
    seg = list(seg)
    load = 0.0
    pos = 0
    while pos < len(seg):
        v = seg[pos]
        if load + q[v] > capacity:
            index = {g: i for i, g in enumerate(seg)}
            best = None
            best_key = None
            for idx in range(pos + 1, len(seg)):
                c = seg[idx]
                s = supplier_of.get(c)
                if s is None or index.get(s, pos) >= pos:
                    continue
                key = (q[c], index[s])  # most negative quantity, then earliest supplier
                if best_key is None or key < best_key:
                    best, best_key = idx, key
            if best is not None:
                seg.insert(pos, seg.pop(best))
                continue
        load += q[v]
        pos += 1
    return seg


def split_bounds(split: Sequence[int]) -> list[tuple[int, int]]:
    out = []
    start = 0
    for count in split:
        out.append((start, start + count))
        start += count
    return out


def correct_capacity(c: Sequence[int], split: Sequence[int], instance: Instance) -> Chromosome:
    """Per vehicle segment, pull a pending delivery ahead of the vertex that would overload."""
    if sum(split) != len(c):
        raise ValueError(f"split {tuple(split)} does not sum to {len(c)}")
    genes: list[int] = []
    for veh, (a, b) in zip(instance.fleet, split_bounds(split)):
        genes.extend(_repair_segment(c[a:b], veh.capacity, instance))
    return tuple(genes)


def split_chromosome(c: Sequence[int], split: Sequence[int]) -> tuple[tuple[int, ...], ...]:
    if sum(split) != len(c) or any(x < 0 for x in split):
        raise ValueError(f"split {tuple(split)} is not a composition of {len(c)}")
    return tuple((DEPOT, *c[a:b], DEPOT) for a, b in split_bounds(split))


def decode(c: Sequence[int], split: Sequence[int], instance: Instance, pairing: str = SAME_VEHICLE) -> Solution:
    """Capacity-repair ``c`` under ``split`` and return the scheduled, validated solution."""
    repaired = correct_capacity(c, split, instance)
    return make_solution(split_chromosome(repaired, split), instance, pairing)


# ---------------------------------------------------------------------------
# Split operators


def _renormalize(counts: list[int], total: int, rng: random.Random) -> VehicleSplit:
    diff = sum(counts) - total
    while diff > 0:
        k = rng.choice([i for i, x in enumerate(counts) if x > 0])
        counts[k] -= 1
        diff -= 1
    while diff < 0:
        counts[rng.randrange(len(counts))] += 1
        diff += 1
    return tuple(counts)


def split_crossover(a: Sequence[int], b: Sequence[int], rng: random.Random) -> VehicleSplit:
    k = len(a)
    if k < 2:
        return tuple(a)
    p = rng.randint(1, k - 1)
    return _renormalize(list(a[:p]) + list(b[p:]), sum(a), rng)


def split_mutation(a: Sequence[int], rng: random.Random) -> VehicleSplit:
    """Move one node from a random non-empty vehicle to another vehicle."""
    k = len(a)
    donors = [i for i, x in enumerate(a) if x > 0]
    if k < 2 or not donors:
        return tuple(a)
    src = rng.choice(donors)
    dst = rng.choice([i for i in range(k) if i != src])
    counts = list(a)
    counts[src] -= 1
    counts[dst] += 1
    return tuple(counts)


# ---------------------------------------------------------------------------
# Fitness


@dataclass(frozen=True)
class _Segment:
    genes: tuple[int, ...]
    distance: float
    tardiness: float
    capacity_violations: int
    # same-vehicle precedence: customers whose supplier is not earlier on this route
    orphans: int
    departures: dict


class Evaluator:
    """Fitness of (chromosome, split) combinations with a per-segment cache.

    Segment results depend only on the genes and the vehicle's capacity and
    speed, so vehicles sharing both share cache entries.
    """

    def __init__(self, instance: Instance, config: GaConfig, max_cache: int = 500_000):
        self.instance = instance
        self.config = config
        self.max_cache = max_cache
        self._cache: dict = {}
        classes: dict[tuple[float, float], int] = {}
        self.vclass = [classes.setdefault((v.capacity, v.speed), len(classes)) for v in instance.fleet]
        self.evaluations = 0
        self._d = instance.distances
        self._track_departures = config.pairing == CROSS_VEHICLE
        self._q = instance.quantities
        self._opens = [v.window_open for v in instance.vertices]
        self._closes = [v.window_close for v in instance.vertices]
        self._services = [v.service_time for v in instance.vertices]
        self._sup = [instance.supplier_of.get(v, 0) for v in range(len(instance.vertices))]

    def segment(self, genes: tuple[int, ...], k: int) -> _Segment:
        key = (self.vclass[k], genes)
        hit = self._cache.get(key)
        if hit is None:
            if len(self._cache) >= self.max_cache:
                self._cache.clear()
            hit = self._cache[key] = self._evaluate_segment(genes, self.instance.fleet[k])
        return hit

    def _evaluate_segment(self, genes, vehicle) -> _Segment:
        q = self._q
        cap = vehicle.capacity
        load = 0.0
        for v in genes:
            load += q[v]
            if load > cap:
                genes = tuple(_repair_segment(genes, cap, self.instance))
                break
        d = self._d
        opens, closes, services, sup = self._opens, self._closes, self._services, self._sup
        speed = vehicle.speed
        t = load = dist = tard = 0.0
        viol = orphans = 0
        seen = set()
        departures = {}
        track = self._track_departures
        prev = DEPOT
        for v in genes:
            leg = d[prev][v]
            dist += leg
            arrive = t + leg / speed
            t = (arrive if arrive > opens[v] else opens[v]) + services[v]
            if arrive > closes[v]:
                tard += arrive - closes[v]
            load += q[v]
            if load < 0 or load > cap:
                viol += 1
            if sup[v] and sup[v] not in seen:
                orphans += 1
            seen.add(v)
            if track:
                departures[v] = t
            prev = v
        leg = d[prev][DEPOT]
        dist += leg
        arrive = t + leg / speed
        if arrive > closes[DEPOT]:
            tard += arrive - closes[DEPOT]
        if load < 0 or load > cap:
            viol += 1
        return _Segment(genes, dist, tard, viol, orphans, departures)

    def _segment_value(self, sg: _Segment, k: int, with_orphans: bool) -> float:
        cfg = self.config
        bad = sg.capacity_violations + (sg.orphans if with_orphans else 0)
        return (self.instance.fleet[k].cost_rate * sg.distance
                + cfg.tardiness_penalty * sg.tardiness
                + cfg.infeasibility_penalty * bad)

    def fitness(self, c: Sequence[int], split: Sequence[int]) -> float:
        c = tuple(c)
        same = self.config.pairing == SAME_VEHICLE
        total = 0.0
        segs = []
        for k, (a, b) in enumerate(split_bounds(split)):
            if b > a:
                sg = self.segment(c[a:b], k)
                segs.append(sg)
                total += self._segment_value(sg, k, same)
            else:
                total += 0.0
        if not same:
            total += self.config.infeasibility_penalty * self._cross_precedence(segs)
        self.evaluations += 1
        return total

    def _cross_precedence(self, segs: list[_Segment]) -> int:
        dep = {}
        for sg in segs:
            dep.update(sg.departures)
        return sum(1 for p in self.instance.pairs if dep[p.supplier_id] > dep[p.customer_id])

    def matrix(self, chromosomes: Sequence[Chromosome], splits: Sequence[VehicleSplit]) -> np.ndarray:
        """Fitness of every (chromosome, split) pair, rows = chromosomes."""
        n_c, n_s = len(chromosomes), len(splits)
        out = np.empty((n_c, n_s))
        if self.config.pairing != SAME_VEHICLE:
            rows: dict = {}
            for i, c in enumerate(chromosomes):
                if c not in rows:
                    rows[c] = [self.fitness(c, s) for s in splits]
                else:
                    self.evaluations += n_s
                out[i] = rows[c]
            return out
        k_count = len(self.instance.fleet)
        counts = np.asarray(splits, dtype=np.int64).reshape(n_s, k_count)
        ends = np.cumsum(counts, axis=1)
        starts = ends - counts
        needed = sorted({(k, int(a), int(b))
                         for k in range(k_count)
                         for a, b in zip(starts[:, k], ends[:, k]) if b > a})
        n1 = self.instance.n_prime + 1
        table = np.zeros((k_count, n1, n1))
        rows: dict = {}
        for i, c in enumerate(chromosomes):
            row = rows.get(c)
            if row is None:
                for k, a, b in needed:
                    table[k, a, b] = self._segment_value(self.segment(c[a:b], k), k, True)
                row = np.zeros(n_s)
                # left-to-right over vehicles, matching fitness()
                for k in range(k_count):
                    row = row + table[k, starts[:, k], ends[:, k]]
                rows[c] = row
            out[i] = row
        self.evaluations += n_c * n_s
        return out


def fitness(c: Sequence[int], split: Sequence[int], instance: Instance, config: GaConfig) -> float:
    """Cost of the decoded solution plus tardiness and violation penalties (lower is better)."""
    return Evaluator(instance, config).fitness(c, split)


# ---------------------------------------------------------------------------
# Evolution loop


def _expand_nodes(pop, size, rng, instance, config, elite):
    out = [elite] if elite is not None else []
    n_prime = instance.n_prime
    while len(out) < size:
        r = rng.random()
        if r < config.crossover_rate and n_prime > 1:
            a, b = rng.choice(pop), rng.choice(pop)
            child = one_point_crossover(a, b, rng.randint(1, n_prime - 1))
        elif r < config.crossover_rate + config.mutation_rate and n_prime > 1:
            i, j = rng.sample(range(n_prime), 2)
            child = swap_mutation(rng.choice(pop), i, j)
        else:
            child = rng.choice(pop)
        out.append(correct_precedence(child, instance))
    return out


def _expand_splits(pop, size, rng, config, elite):
    out = [elite] if elite is not None else []
    while len(out) < size:
        r = rng.random()
        if r < config.crossover_rate:
            child = split_crossover(rng.choice(pop), rng.choice(pop), rng)
        elif r < config.crossover_rate + config.mutation_rate:
            child = split_mutation(rng.choice(pop), rng)
        else:
            child = rng.choice(pop)
        out.append(tuple(child))
    return out


def _truncate(individuals, scores, n, elite):
    """Keep the n best distinct individuals, elite first; repeat the ranking if short."""
    order = np.argsort(scores, kind="stable")
    ranked = [elite]
    seen = {elite}
    for i in order:
        ind = individuals[i]
        if ind not in seen:
            seen.add(ind)
            ranked.append(ind)
    return [ranked[i % len(ranked)] for i in range(n)]


def evolve(
    instance: Instance,
    config: GaConfig = GaConfig(),
    on_generation: Callable[[int, float], None] | None = None,
) -> GaResult:
    rng = random.Random(config.rng_seed)
    n = config.population_size
    nodes = generate_p_node(instance, n, rng)
    splits = generate_p_vehicle(instance, n, rng)
    evaluator = Evaluator(instance, config)

    best_f = np.inf
    best_c: Chromosome | None = None
    best_s: VehicleSplit | None = None
    history: list[float] = []
    for gen in range(config.generations):
        inter_nodes = _expand_nodes(nodes, 2 * n, rng, instance, config, best_c)
        inter_splits = _expand_splits(splits, 2 * n, rng, config, best_s)
        f = evaluator.matrix(inter_nodes, inter_splits)
        i, j = np.unravel_index(int(np.argmin(f)), f.shape)
        if f[i, j] < best_f:
            best_f = float(f[i, j])
            best_c, best_s = inter_nodes[i], inter_splits[j]
        history.append(best_f)
        if on_generation is not None:
            on_generation(gen, best_f)
        nodes = _truncate(inter_nodes, f.min(axis=1), n, best_c)
        splits = _truncate(inter_splits, f.min(axis=0), n, best_s)
        log.debug("generation %d best %.6f", gen, best_f)

    solution = decode(best_c, best_s, instance, config.pairing)
    return GaResult(
        best_solution=solution,
        best_fitness=best_f,
        history=history,
        evaluations=evaluator.evaluations,
        best_chromosome=best_c,
        best_split=best_s,
        config=config,
    )

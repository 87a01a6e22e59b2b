"""Community-constrained genetic search over feature subsets.

Chromosomes are boolean vectors over the filtered features (graph node
order). The repair operator forces every community ``c`` to contribute
exactly ``min(omega, |c|)`` selected features.

Random streams
--------------
All randomness comes from PCG64 generators. The split uses
``default_rng(seed)``; the remaining stages use children of
``SeedSequence(seed)`` spawned in the fixed order of :data:`STREAMS`.
"""

from __future__ import annotations

import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from .community import Partition, get_detector
from .dataset import Dataset, SplitDataset
from .errors import ValidationError
from .feature_graph import FeatureGraph, build_graph
from .knn import DEFAULT_K, check_k, predict_many, vote
from .relevance import DEFAULT_FILTER_CAP, score_features

SCHEMA_VERSION = 1
EPSILON = 1e-6
STREAMS = ("community", "init", "evolve")
# Below this many original features crossover uses one cut point, otherwise two.
SINGLE_POINT_LIMIT = 20
# Per-feature distance tables are precomputed up to this many float64 entries.
DISTANCE_TABLE_LIMIT = 25_000_000


@dataclass(frozen=True)
class GaConfig:
    crossover_rate: float = 0.8
    mutation_rate: float = 0.05
    population_size: int = 100
    max_iterations: int = 100
    omega: int = 1
    k_nn: int = DEFAULT_K
    seed: int = 0
    repair_enabled: bool = True
    filter_cap: int = DEFAULT_FILTER_CAP
    detector: str = "louvain"
    check_quota: bool = False

    def __post_init__(self):
        if not 0.0 <= self.crossover_rate <= 1.0:
            raise ValidationError("crossover_rate must be in [0, 1]")
        if not 0.0 <= self.mutation_rate <= 1.0:
            raise ValidationError("mutation_rate must be in [0, 1]")
        if self.population_size < 2:
            raise ValidationError("population_size must be >= 2")
        if self.max_iterations < 1:
            raise ValidationError("max_iterations must be >= 1")
        if self.omega < 1:
            raise ValidationError("omega must be >= 1")
        if self.k_nn < 1:
            raise ValidationError("k_nn must be >= 1")
        if self.filter_cap < 2:
            raise ValidationError("filter_cap must be >= 2")
        get_detector(self.detector)


@dataclass
class RunReport:
    selected_features: list[int]
    selected_names: list[str]
    best_fitness: float
    validation_accuracy: float
    test_accuracy: float
    trace: list[dict]
    k: int
    community_sizes: list[int]
    modularity: float
    mean_raw_similarity: float
    n_original: int
    n_filtered: int
    fisher_raw: list[float]
    fisher_normalized: list[float]
    config: dict
    timings: dict = field(default_factory=dict)

    def to_dict(self, include_timings: bool = False) -> dict:
        out = {"schema_version": SCHEMA_VERSION}
        out.update(asdict(self))
        if not include_timings:
            out.pop("timings")
        return out


def spawn_streams(seed: int) -> dict[str, np.random.Generator]:
    children = np.random.SeedSequence(seed).spawn(len(STREAMS))
    return {name: np.random.Generator(np.random.PCG64(s)) for name, s in zip(STREAMS, children)}


def quotas(part: Partition, omega: int) -> list[tuple[np.ndarray, int]]:
    return [(members, min(omega, members.size)) for members in part.members()]


def init_population(part: Partition, cfg: GaConfig, rng: np.random.Generator) -> np.ndarray:
    """``population_size`` chromosomes, each meeting every community quota."""
    n = part.assignment.size
    groups = quotas(part, cfg.omega)
    pop = np.zeros((cfg.population_size, n), dtype=bool)
    for row in pop:
        for members, q in groups:
            row[rng.choice(members, size=q, replace=False)] = True
    return pop


def subset_similarity(weights: np.ndarray, positions) -> float:
    """Mean pairwise weight over ``positions``, clamped below at EPSILON."""
    positions = np.asarray(positions)
    s = positions.size
    if s < 2:
        return EPSILON
    block = weights[np.ix_(positions, positions)]
    mean = (block.sum() - np.trace(block)) / (s * (s - 1))
    return max(float(mean), EPSILON)


class FitnessEvaluator:
    """Validation-set fitness with a cache keyed on the gene vector.

    The score is KNN validation accuracy divided by the mean pairwise
    similarity of the selected features.
    """

    def __init__(self, graph: FeatureGraph, train: Dataset, validation: Dataset,
                 k_nn: int, threads: int = 1):
        self.graph = graph
        self.weights = graph.weights
        nodes = list(graph.node_ids)
        self.train_x = train.features[:, nodes]
        self.train_y = train.labels
        self.val_x = validation.features[:, nodes]
        self.val_y = validation.labels
        self.n_classes = max(train.class_count, validation.class_count)
        self.k_nn = k_nn
        check_k(k_nn, self.train_y.size)
        self.threads = max(1, threads)
        self.cache: dict[bytes, tuple[float, float]] = {}
        self.table = None
        if self.train_x.size * self.val_y.size <= DISTANCE_TABLE_LIMIT:
            # table[f, q, t]: squared difference of feature f between query q and train t
            diff = self.val_x.T[:, :, None] - self.train_x.T[:, None, :]
            self.table = diff * diff

    def accuracy(self, positions) -> float:
        cols = list(positions)
        if self.table is not None:
            dist = self.table[cols].sum(axis=0)
            pred = vote(dist, self.train_y, self.k_nn, self.n_classes)
        else:
            pred = predict_many(self.train_x[:, cols], self.train_y, self.val_x[:, cols],
                                self.k_nn, self.n_classes)
        return float(np.mean(pred == self.val_y))

    def score(self, genes) -> tuple[float, float]:
        """``(fitness, validation_accuracy)`` of one chromosome."""
        positions = np.flatnonzero(genes)
        if positions.size == 0:
            raise ValidationError("chromosome selects no features")
        acc = self.accuracy(positions)
        return acc / subset_similarity(self.weights, positions), acc

    def _score_or_zero(self, genes) -> tuple[float, float]:
        # only reachable without repair: an empty subset has no fitness
        if not genes.any():
            return 0.0, 0.0
        return self.score(genes)

    def evaluate(self, population: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        keys = [row.tobytes() for row in population]
        todo = {}
        for key, row in zip(keys, population):
            if key not in self.cache and key not in todo:
                todo[key] = row
        if todo:
            rows = list(todo.values())
            if self.threads > 1 and len(rows) > 1:
                with ThreadPoolExecutor(self.threads) as pool:
                    results = list(pool.map(self._score_or_zero, rows))
            else:
                results = [self._score_or_zero(r) for r in rows]
            self.cache.update(zip(todo, results))
        fit = np.array([self.cache[k][0] for k in keys])
        acc = np.array([self.cache[k][1] for k in keys])
        return fit, acc


def fitness(ch, g: FeatureGraph, train: Dataset, validation: Dataset, cfg: GaConfig) -> float:
    return FitnessEvaluator(g, train, validation, cfg.k_nn).score(np.asarray(ch, dtype=bool))[0]


def roulette_select(fitnesses, rng: np.random.Generator) -> int:
    """Index drawn with probability proportional to fitness (uniform if all zero)."""
    f = np.asarray(fitnesses, dtype=float)
    if f.size == 0:
        raise ValidationError("cannot select from an empty population")
    if (f < 0).any() or not np.isfinite(f).all():
        raise ValidationError("roulette selection needs finite non-negative fitnesses")
    cumulative = np.cumsum(f)
    total = cumulative[-1]
    if total <= 0:
        return int(rng.integers(f.size))
    return int(min(np.searchsorted(cumulative, rng.random() * total, side="right"), f.size - 1))


def exchange_segment(p1, p2, start: int, stop: int):
    c1 = np.array(p1, copy=True)
    c2 = np.array(p2, copy=True)
    c1[start:stop] = p2[start:stop]
    c2[start:stop] = p1[start:stop]
    return c1, c2


def crossover(p1, p2, cfg: GaConfig, n_original: int, rng: np.random.Generator):
    """One-point crossover below 20 original features, two-point otherwise."""
    p1 = np.asarray(p1)
    p2 = np.asarray(p2)
    if p1.shape != p2.shape:
        raise ValidationError("parents differ in length")
    length = p1.size
    if length < 2 or rng.random() >= cfg.crossover_rate:
        return p1.copy(), p2.copy()
    if n_original < SINGLE_POINT_LIMIT or length < 3:
        cut = int(rng.integers(1, length))
        return exchange_segment(p1, p2, cut, length)
    a, b = np.sort(rng.choice(np.arange(1, length), size=2, replace=False))
    return exchange_segment(p1, p2, int(a), int(b))


def mutate(ch, cfg: GaConfig, rng: np.random.Generator) -> np.ndarray:
    ch = np.asarray(ch)
    flips = rng.random(ch.size) < cfg.mutation_rate
    return ch ^ flips


def repair(ch, part: Partition, cfg: GaConfig, rng: np.random.Generator) -> np.ndarray:
    """Bring every community to exactly ``min(omega, |c|)`` selected genes.

    Under-quota communities gain random unselected members; over-quota
    communities keep a random subset of their selected members.
    """
    out = np.array(ch, dtype=bool, copy=True)
    if out.size != part.assignment.size:
        raise ValidationError("chromosome length does not match the partition")
    for members, q in quotas(part, cfg.omega):
        chosen = members[out[members]]
        if chosen.size < q:
            free = members[~out[members]]
            out[rng.choice(free, size=q - chosen.size, replace=False)] = True
        elif chosen.size > q:
            keep = rng.choice(chosen, size=q, replace=False)
            out[chosen] = False
            out[keep] = True
    return out


def satisfies_quota(ch, part: Partition, omega: int) -> bool:
    ch = np.asarray(ch, dtype=bool)
    return all(ch[members].sum() == q for members, q in quotas(part, omega))


def mean_raw_similarity(graph: FeatureGraph, positions) -> float:
    """Mean |Pearson| among selected nodes; 0 for fewer than two."""
    positions = np.asarray(positions)
    if positions.size < 2:
        return 0.0
    block = graph.raw_weights[np.ix_(positions, positions)]
    return float(block[np.triu_indices(positions.size, 1)].mean())


def _best_index(fit: np.ndarray, population: np.ndarray) -> int:
    nonempty = population.any(axis=1)
    if not nonempty.any():
        return int(np.argmax(fit))
    masked = np.where(nonempty, fit, -np.inf)
    return int(np.argmax(masked))


def next_generation(population, fit, part, cfg, n_original, rng) -> np.ndarray:
    """Elite copy of the best chromosome followed by bred children."""
    elite = _best_index(fit, population)
    children = [population[elite].copy()]
    while len(children) < cfg.population_size:
        a = population[roulette_select(fit, rng)]
        b = population[roulette_select(fit, rng)]
        for child in crossover(a, b, cfg, n_original, rng):
            child = mutate(child, cfg, rng)
            if cfg.repair_enabled:
                child = repair(child, part, cfg, rng)
            children.append(child)
    return np.array(children[: cfg.population_size], dtype=bool)


def threads_from_env() -> int:
    value = os.environ.get("CDGAFS_THREADS", "1")
    try:
        return max(1, int(value))
    except ValueError:
        raise ValidationError(f"CDGAFS_THREADS must be an integer, got {value!r}") from None


def run_cdgafs(cfg: GaConfig, split: SplitDataset, threads: int | None = None) -> RunReport:
    """Full pipeline on an already split dataset.

    Fisher filter, graph, communities, then ``max_iterations`` generations
    of elitist roulette GA. Fitness is measured on the validation part;
    the test part is used once, for the final accuracy.
    """
    train, validation, test = split.train, split.validation, split.test
    streams = spawn_streams(cfg.seed)
    timings = {}
    tick = time.perf_counter()

    scores = score_features(train, cfg.filter_cap)
    kept = sorted(scores.kept_indices)
    timings["relevance"] = time.perf_counter() - tick

    tick = time.perf_counter()
    graph = build_graph(train, kept)
    timings["graph"] = time.perf_counter() - tick

    tick = time.perf_counter()
    part = get_detector(cfg.detector)(graph, streams["community"])
    timings["community"] = time.perf_counter() - tick

    tick = time.perf_counter()
    n_original = train.n_features
    evaluator = FitnessEvaluator(graph, train, validation, cfg.k_nn,
                                 threads_from_env() if threads is None else threads)
    population = init_population(part, cfg, streams["init"])
    fit, acc = evaluator.evaluate(population)
    rng = streams["evolve"]
    trace = []
    for iteration in range(1, cfg.max_iterations + 1):
        population = next_generation(population, fit, part, cfg, n_original, rng)
        if cfg.check_quota and cfg.repair_enabled:
            bad = [i for i, ch in enumerate(population) if not satisfies_quota(ch, part, cfg.omega)]
            if bad:
                raise AssertionError(f"quota violated in generation {iteration}: {bad}")
        fit, acc = evaluator.evaluate(population)
        best = _best_index(fit, population)
        trace.append({
            "iteration": iteration,
            "best_fitness": float(fit[best]),
            "best_validation_accuracy": float(acc[best]),
        })
    timings["evolution"] = time.perf_counter() - tick

    tick = time.perf_counter()
    best = _best_index(fit, population)
    positions = np.flatnonzero(population[best])
    selected = [graph.node_ids[p] for p in positions]
    if selected:
        pred = predict_many(train.features[:, selected], train.labels,
                            test.features[:, selected], cfg.k_nn, evaluator.n_classes)
        test_acc = float(np.mean(pred == test.labels))
    else:
        test_acc = 0.0
    timings["test"] = time.perf_counter() - tick

    return RunReport(
        selected_features=[int(s) for s in selected],
        selected_names=[train.feature_names[s] for s in selected],
        best_fitness=float(fit[best]),
        validation_accuracy=float(acc[best]),
        test_accuracy=test_acc,
        trace=trace,
        k=part.k,
        community_sizes=part.sizes(),
        modularity=part.modularity,
        mean_raw_similarity=mean_raw_similarity(graph, positions),
        n_original=n_original,
        n_filtered=len(kept),
        fisher_raw=[float(v) for v in scores.raw],
        fisher_normalized=[float(v) for v in scores.normalized],
        config=asdict(cfg),
        timings=timings,
    )

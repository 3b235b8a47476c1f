"""Black Widow Optimization over fixed-size feature subsets.

A candidate is an ordered vector of ``n`` distinct column indices. Each
generation selects the fittest fraction of the population as parents
(p1), mates disjoint random pairs with a uniform-mask crossover, culls the
weakest offspring (cannibalism), mutates a share of p1 by swapping one
index for an unused one, then merges everything back and truncates to the
population size. The best candidate ever seen is returned.
"""

from __future__ import annotations

import itertools
import math
import zlib
from dataclasses import dataclass, field
from typing import Callable, Protocol, Sequence

import numpy as np

from diabml.classifiers import ClassifierConfig, ClassifierKind, predict_labels, train
from diabml.classifiers._cart import build_tree, presort, tree_leaf_values
from diabml.dataio import Dataset

_EPS = 1e-9


class BwoError(RuntimeError):
    pass


@dataclass(frozen=True)
class FeatureSubset:
    indices: tuple[int, ...]
    total: int

    def __post_init__(self):
        idx = tuple(int(i) for i in self.indices)
        object.__setattr__(self, "indices", idx)
        if len(set(idx)) != len(idx):
            raise ValueError(f"duplicate feature indices in {idx}")
        if any(i < 0 or i >= self.total for i in idx):
            raise ValueError(f"feature index out of range [0, {self.total}) in {idx}")

    @classmethod
    def full(cls, total: int) -> "FeatureSubset":
        return cls(tuple(range(total)), total)

    def __len__(self):
        return len(self.indices)

    def key(self) -> tuple[int, ...]:
        return tuple(sorted(self.indices))

    def one_based(self) -> list[int]:
        return [i + 1 for i in self.key()]


@dataclass(frozen=True)
class Candidate:
    subset: FeatureSubset
    fitness: float
    id: int


class FitnessFunction(Protocol):
    def __call__(self, subset: FeatureSubset) -> float: ...


@dataclass(frozen=True)
class BwoConfig:
    population_size: int = 40
    max_iterations: int = 50
    procreation_rate: float = 0.6
    cannibalism_rate: float = 0.44
    mutation_rate: float = 0.4
    subset_size: int = 9
    offspring_pairs_per_mating: int = 1
    seed: int = 0
    # stop after this many iterations without improvement; None disables
    patience: int | None = None

    def __post_init__(self):
        if self.population_size < 1:
            raise ValueError("population_size must be positive")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be positive")
        if not 0.0 < self.procreation_rate <= 1.0:
            raise ValueError("procreation_rate must be in (0, 1]")
        if not 0.0 <= self.cannibalism_rate < 1.0:
            raise ValueError("cannibalism_rate must be in [0, 1)")
        if not 0.0 <= self.mutation_rate <= 1.0:
            raise ValueError("mutation_rate must be in [0, 1]")
        if self.subset_size < 1:
            raise ValueError("subset_size must be positive")
        if self.offspring_pairs_per_mating < 1:
            raise ValueError("offspring_pairs_per_mating must be positive")
        if self.patience is not None and self.patience < 1:
            raise ValueError("patience must be positive or None")


@dataclass
class BwoTrace:
    best_fitness: list[float] = field(default_factory=list)
    best_subsets: list[FeatureSubset] = field(default_factory=list)
    # fitness assignments, one per created candidate (cache hits included)
    evaluations: int = 0
    # distinct subsets actually passed to the fitness function
    unique_evaluations: int = 0

    def to_csv(self) -> str:
        lines = ["iteration,best_fitness,best_subset"]
        for it, (fit, sub) in enumerate(zip(self.best_fitness, self.best_subsets), 1):
            lines.append(f"{it},{fit!r},{';'.join(map(str, sub.one_based()))}")
        return "\n".join(lines) + "\n"


def _ceil(x: float) -> int:
    return math.ceil(x - _EPS)


def _floor(x: float) -> int:
    return math.floor(x + _EPS)


def _rank_key(c: Candidate):
    return (-c.fitness, c.id)


class _Evaluator:
    """Assigns ids and cached fitness to new subsets."""

    def __init__(self, fitness: FitnessFunction, trace: BwoTrace):
        self.fitness = fitness
        self.trace = trace
        self.cache: dict[tuple[int, ...], float] = {}
        self.ids = itertools.count()
        self.iteration = 0

    def __call__(self, subset: FeatureSubset) -> Candidate:
        cid = next(self.ids)
        key = subset.key()
        if key not in self.cache:
            try:
                value = float(self.fitness(subset))
            except Exception as exc:
                raise BwoError(
                    f"fitness failed at iteration {self.iteration}, candidate {cid} "
                    f"(features {subset.one_based()}): {exc}"
                ) from exc
            if not 0.0 <= value <= 1.0:
                raise BwoError(
                    f"fitness {value} outside [0, 1] at iteration {self.iteration}, "
                    f"candidate {cid}"
                )
            self.cache[key] = value
            self.trace.unique_evaluations += 1
        self.trace.evaluations += 1
        return Candidate(subset, self.cache[key], cid)


def init_population(
    config: BwoConfig,
    total_features: int,
    rng: np.random.Generator,
    evaluate: Callable[[FeatureSubset], Candidate],
) -> list[Candidate]:
    n = config.subset_size
    if n > total_features:
        raise ValueError(f"subset_size {n} exceeds {total_features} features")
    return [
        evaluate(FeatureSubset(rng.choice(total_features, n, replace=False), total_features))
        for _ in range(config.population_size)
    ]


def select_p1(population: Sequence[Candidate], rate: float) -> list[Candidate]:
    ranked = sorted(population, key=_rank_key)
    return ranked[: max(1, _ceil(rate * len(ranked)))]


def repair(raw: Sequence[int], n: int, total: int, rng: np.random.Generator) -> FeatureSubset:
    """Drop repeated indices (first kept) and top up with unused ones at random."""
    if n > total:
        raise ValueError(f"subset size {n} exceeds {total} features")
    seen: list[int] = []
    for i in raw:
        i = int(i)
        if i not in seen:
            seen.append(i)
    seen = seen[:n]
    missing = n - len(seen)
    if missing:
        pool = np.setdiff1d(np.arange(total), seen)
        seen.extend(int(i) for i in rng.choice(pool, missing, replace=False))
    return FeatureSubset(tuple(seen), total)


def procreate_pair(
    a: Candidate, b: Candidate, pairs: int, rng: np.random.Generator
) -> list[FeatureSubset]:
    va = np.array(a.subset.indices)
    vb = np.array(b.subset.indices)
    n, total = va.size, a.subset.total
    children = []
    for _ in range(pairs):
        mask = rng.integers(0, 2, size=n).astype(bool)
        children.append(repair(np.where(mask, va, vb), n, total, rng))
        children.append(repair(np.where(mask, vb, va), n, total, rng))
    return children


def cannibalize(candidates: Sequence[Candidate], rate: float) -> list[Candidate]:
    ranked = sorted(candidates, key=_rank_key)
    drop = _floor(rate * len(ranked))
    return ranked[: len(ranked) - drop]


def mutate(c: Candidate, total: int, rng: np.random.Generator) -> FeatureSubset:
    idx = list(c.subset.indices)
    if len(idx) >= total:
        return c.subset
    pos = int(rng.integers(len(idx)))
    pool = np.setdiff1d(np.arange(total), idx)
    idx[pos] = int(pool[rng.integers(pool.size)])
    return FeatureSubset(tuple(idx), total)


def bwo_optimize(
    fitness: FitnessFunction, config: BwoConfig, total_features: int
) -> tuple[Candidate, BwoTrace]:
    rng = np.random.default_rng(config.seed)
    trace = BwoTrace()
    evaluate = _Evaluator(fitness, trace)
    population = sorted(
        init_population(config, total_features, rng, evaluate), key=_rank_key
    )
    best = population[0]
    stale = 0

    for it in range(1, config.max_iterations + 1):
        evaluate.iteration = it
        p1 = select_p1(population, config.procreation_rate)

        order = rng.permutation(len(p1))
        offspring = []
        for j in range(0, len(order) - 1, 2):
            a, b = p1[order[j]], p1[order[j + 1]]
            for child in procreate_pair(a, b, config.offspring_pairs_per_mating, rng):
                offspring.append(evaluate(child))
        p2 = cannibalize(offspring, config.cannibalism_rate) if offspring else []

        n_mut = _ceil(config.mutation_rate * len(p1))
        chosen = rng.choice(len(p1), size=n_mut, replace=False) if n_mut else []
        p3 = [evaluate(mutate(p1[int(k)], total_features, rng)) for k in chosen]

        population = sorted(population + p2 + p3, key=_rank_key)[: config.population_size]
        leader = population[0]
        improved = leader.fitness > best.fitness + _EPS
        if _rank_key(leader) < _rank_key(best):
            best = leader
        trace.best_fitness.append(best.fitness)
        trace.best_subsets.append(best.subset)

        stale = 0 if improved else stale + 1
        if config.patience is not None and stale >= config.patience:
            break
    return best, trace


def _subset_seed(subset: FeatureSubset, base: int) -> int:
    return (zlib.crc32(bytes(subset.key())) ^ int(base)) & 0x7FFFFFFF


def accuracy_fitness(
    data: Dataset,
    train_rows,
    validation_rows,
    kind: ClassifierKind | ClassifierConfig,
    subset: FeatureSubset,
) -> float:
    """Validation accuracy of a classifier trained on ``subset``'s columns."""
    train_rows = np.asarray(train_rows, dtype=np.intp)
    validation_rows = np.asarray(validation_rows, dtype=np.intp)
    if np.intersect1d(train_rows, validation_rows).size:
        raise ValueError("train and validation rows overlap")
    if subset.total != data.n_features:
        raise ValueError("subset was built for a different feature count")
    base = kind if isinstance(kind, ClassifierConfig) else ClassifierConfig(kind)
    config = ClassifierConfig(base.kind, base.settings, _subset_seed(subset, base.seed))
    cols = list(subset.indices)
    model = train(config, data.features[np.ix_(train_rows, cols)], data.labels[train_rows])
    pred = predict_labels(model, data.features[np.ix_(validation_rows, cols)])
    return float(np.mean(pred == data.labels[validation_rows]))


SURROGATE_DEFAULT = ClassifierConfig(ClassifierKind.DECISION_TREE, {"max_depth": 8})


class SurrogateFitness:
    """Wrapper fitness on a capped, stratified sample of the training rows.

    At most ``max_rows`` rows are drawn per class in proportion, and
    ``holdout`` of them (stratified) are kept aside to measure accuracy.
    ``row_ids`` lets callers attach provenance tags to the rows of
    ``data`` so the rows touched by fitness evaluation can be audited.
    """

    def __init__(
        self,
        data: Dataset,
        classifier: ClassifierConfig = SURROGATE_DEFAULT,
        max_rows: int = 20_000,
        holdout: float = 0.25,
        seed: int = 0,
        row_ids: np.ndarray | None = None,
    ):
        from diabml.dataio import stratified_split

        rng = np.random.default_rng(seed)
        rows = np.arange(data.n_rows)
        if data.n_rows > max_rows:
            picked = []
            for cls in (0, 1):
                members = rows[data.labels == cls]
                take = max(2, int(round(max_rows * members.size / data.n_rows)))
                picked.append(rng.choice(members, min(take, members.size), replace=False))
            rows = np.sort(np.concatenate(picked))
        sample = data.take(rows)
        split = stratified_split(sample, holdout, seed)
        self.data = sample
        self.train_rows = split.train_rows
        self.validation_rows = split.test_rows
        self.classifier = classifier
        ids = rows if row_ids is None else np.asarray(row_ids)[rows]
        self.row_ids = ids
        self._fast = classifier.kind is ClassifierKind.DECISION_TREE
        if self._fast:
            settings = classifier.resolved()
            self._depth = int(settings["max_depth"])
            self._min_split = settings["min_samples_split"]
            self._Xtr = np.ascontiguousarray(sample.features[self.train_rows])
            self._ytr = sample.labels[self.train_rows].astype(np.float64)
            self._Xva = sample.features[self.validation_rows]
            self._yva = sample.labels[self.validation_rows]
            self._order = presort(self._Xtr)

    def __call__(self, subset: FeatureSubset) -> float:
        if not self._fast:
            return accuracy_fitness(
                self.data, self.train_rows, self.validation_rows, self.classifier, subset
            )
        # same tree train() would grow, reusing the column presort
        cols = list(subset.indices)
        tree = build_tree(
            self._Xtr[:, cols],
            self._ytr,
            max_depth=self._depth,
            min_samples_split=self._min_split,
            order=self._order[cols],
        )
        pred = tree_leaf_values(tree, self._Xva[:, cols]) >= 0.5
        return float(np.mean(pred == self._yva))

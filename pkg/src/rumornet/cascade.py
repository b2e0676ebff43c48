"""Weighted threshold-cascade contagion over the information graph.

Each iteration, every still-ordinary node adds the weights of its in-edges
from currently transmitting nodes to a running exposure total (no decay).
A node whose total reaches its threshold becomes Infected; it starts
transmitting on the next iteration. Updates are synchronous.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Optional, Sequence, Union

import numpy as np

from . import _kernels as K
from .errors import ConfigError, RangeError
from .graph import InformationGraph, Role

DEFAULT_MAX_ITERATIONS = 1000


@dataclass(frozen=True)
class Uniform:
    phi: int

    def __post_init__(self):
        if int(self.phi) != self.phi or self.phi < 1:
            raise ConfigError(f"phi must be a positive integer, got {self.phi!r}")


@dataclass(frozen=True)
class PerNode:
    lo: int
    hi: int
    rng_seed: int = 0

    def __post_init__(self):
        if self.lo < 1:
            raise ConfigError(f"threshold lower bound must be >= 1, got {self.lo}")
        if self.lo > self.hi:
            raise RangeError(f"lo={self.lo} > hi={self.hi}")


@dataclass(frozen=True)
class CascadeConfig:
    thresholds: Union[Uniform, PerNode]
    seed_users: frozenset
    max_iterations: int = DEFAULT_MAX_ITERATIONS
    spreader_users: frozenset = frozenset()
    infected_transmit: bool = True

    def __post_init__(self):
        object.__setattr__(self, "seed_users", frozenset(self.seed_users))
        object.__setattr__(self, "spreader_users", frozenset(self.spreader_users) - self.seed_users)
        if not self.seed_users:
            raise ConfigError("seed_users must be non-empty")
        if int(self.max_iterations) != self.max_iterations or self.max_iterations < 1:
            raise ConfigError(f"max_iterations must be a positive integer, got {self.max_iterations!r}")


@dataclass
class CascadeResult:
    iterations_run: int
    # index 0 is the initial state (seeds and spreaders), index i is after iteration i
    infected_fraction_per_iteration: list
    final_roles: dict
    converged: bool
    exposure: dict = field(default_factory=dict, repr=False)

    @property
    def final_fraction(self) -> float:
        return self.infected_fraction_per_iteration[-1]

    def infected(self) -> set:
        return {u for u, r in self.final_roles.items() if r is not Role.ORDINARY}


def sample_thresholds(graph: InformationGraph, lo: int, hi: int, rng_seed: int) -> dict[str, int]:
    """Independent uniform integer thresholds on [lo, hi], in sorted-id order."""
    if lo > hi:
        raise RangeError(f"lo={lo} > hi={hi}")
    ids = graph.user_ids()
    rng = np.random.default_rng(rng_seed)
    draws = rng.integers(lo, hi + 1, size=len(ids), dtype=np.int64)
    return dict(zip(ids, draws.tolist()))


def _threshold_array(graph, csr, thresholds):
    if isinstance(thresholds, Uniform):
        return np.full(csr.n, int(thresholds.phi), dtype=np.int64)
    if isinstance(thresholds, PerNode):
        t = sample_thresholds(graph, thresholds.lo, thresholds.hi, thresholds.rng_seed)
        return np.array([t[u] for u in csr.ids], dtype=np.int64)
    if isinstance(thresholds, Mapping):
        return np.array([int(thresholds[u]) for u in csr.ids], dtype=np.int64)
    raise ConfigError(f"unsupported thresholds {thresholds!r}")


def _initial_state(csr, config):
    state = np.zeros(csr.n, dtype=np.int8)
    for group, code in ((config.spreader_users, K.SPREADER), (config.seed_users, K.SEED)):
        for u in group:
            i = csr.index.get(u)
            if i is None:
                raise ConfigError(f"user {u!r} is not in the graph")
            state[i] = code
    return state


_ROLE_OF = {K.ORDINARY: Role.ORDINARY, K.SEED: Role.SEED, K.SPREADER: Role.SPREADER, K.INFECTED: Role.INFECTED}


def run_cascade(graph: InformationGraph, config: CascadeConfig, use_numba=None) -> CascadeResult:
    csr = graph.to_csr()
    state = _initial_state(csr, config)
    thresholds = _threshold_array(graph, csr, config.thresholds)
    it, fractions, final, exposure, converged = K.run_cascade_kernel(
        csr.indptr, csr.src, csr.weight, thresholds, state,
        config.infected_transmit, config.max_iterations, use_numba=use_numba,
    )
    return CascadeResult(
        iterations_run=int(it),
        infected_fraction_per_iteration=[float(x) for x in fractions],
        final_roles={u: _ROLE_OF[int(s)] for u, s in zip(csr.ids, final)},
        converged=bool(converged),
        exposure={u: int(x) for u, x in zip(csr.ids, exposure)},
    )


def sweep_thresholds(graph: InformationGraph, seeds: Iterable[str], phi_range: Sequence[int] = range(1, 11),
                     max_iterations: int = DEFAULT_MAX_ITERATIONS, spreaders: Iterable[str] = (),
                     infected_transmit: bool = True, use_numba=None) -> dict[int, CascadeResult]:
    seeds = frozenset(seeds)
    spreaders = frozenset(spreaders)
    return {
        int(phi): run_cascade(
            graph,
            CascadeConfig(Uniform(int(phi)), seeds, max_iterations, spreaders, infected_transmit),
            use_numba=use_numba,
        )
        for phi in phi_range
    }


def roles_from_graph(graph: InformationGraph) -> tuple[frozenset, frozenset]:
    """Seed and Spreader ids as assigned during graph construction."""
    seeds = frozenset(n.id for n in graph.nodes() if n.role is Role.SEED)
    spreaders = frozenset(n.id for n in graph.nodes() if n.role is Role.SPREADER)
    return seeds, spreaders


def state_infection(graph: InformationGraph, result: CascadeResult) -> list[tuple[str, float]]:
    """Fraction of non-ordinary nodes per assigned state."""
    total, hit = {}, {}
    for node in graph.nodes():
        if node.state is None:
            continue
        total[node.state] = total.get(node.state, 0) + 1
        if result.final_roles[node.id] is not Role.ORDINARY:
            hit[node.state] = hit.get(node.state, 0) + 1
    return [(st, hit.get(st, 0) / total[st]) for st in sorted(total)]


def write_sweep(results: Mapping[int, CascadeResult], path) -> None:
    with Path(path).open("w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["phi", "final_infected_fraction", "iterations_to_converge"])
        for phi in sorted(results):
            r = results[phi]
            w.writerow([phi, f"{r.final_fraction:.6f}", r.iterations_run if r.converged else ""])


def write_state_infection(rows: Sequence[tuple[str, float]], path) -> None:
    with Path(path).open("w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["state", "infected_fraction"])
        for st, frac in rows:
            w.writerow([st, f"{frac:.6f}"])

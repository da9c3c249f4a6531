"""Observation sets: synthesis from a known system, and CSV round-tripping.

Random streams: observation ``i`` of a run seeded with ``seed`` draws from
``numpy.random.Generator(PCG64(SeedSequence(seed, spawn_key=(i,))))``, first
the initial state, then the start node, then one edge per step. Streams are
independent across indices, so synthesis can be split across workers and
still reproduce bit for bit.
"""

import csv
from dataclasses import dataclass, field
from typing import NamedTuple, Optional

import numpy as np

from .exceptions import DimensionMismatch, EmptyObservations, NormError, ParseError

INGEST_NORM_TOL = 1e-6


class Observation(NamedTuple):
    x0: np.ndarray
    xl: np.ndarray
    word: Optional[tuple] = None


@dataclass(frozen=True, eq=False)
class ObservationSet:
    """Endpoint pairs ``(x0, xl)`` of sampled trajectories, one per row."""

    x0: np.ndarray = field(repr=False)
    xl: np.ndarray = field(repr=False)
    words: Optional[tuple] = field(default=None, repr=False)

    def __post_init__(self):
        x0 = np.array(self.x0, dtype=float, ndmin=2)
        xl = np.array(self.xl, dtype=float, ndmin=2)
        if x0.shape != xl.shape:
            raise DimensionMismatch(f"x0 has shape {x0.shape} but xl has shape {xl.shape}")
        x0.setflags(write=False)
        xl.setflags(write=False)
        object.__setattr__(self, "x0", x0)
        object.__setattr__(self, "xl", xl)

    def __len__(self):
        return self.x0.shape[0]

    def __iter__(self):
        words = self.words or (None,) * len(self)
        for a, b, w in zip(self.x0, self.xl, words):
            yield Observation(a, b, w)

    def __getitem__(self, idx):
        words = None if self.words is None else tuple(np.asarray(self.words, dtype=object)[idx])
        return ObservationSet(self.x0[idx], self.xl[idx], words)

    @property
    def n(self):
        return self.x0.shape[1]

    def strip(self):
        """Copy without the generating words, i.e. what a data-driven solver may see."""
        return ObservationSet(self.x0, self.xl)


@dataclass(frozen=True)
class SamplingConfig:
    N: int
    length: int
    seed: int = 0

    def __post_init__(self):
        if self.N < 1:
            raise ValueError(f"N must be >= 1, got {self.N}")
        if self.length < 1:
            raise ValueError(f"length must be >= 1, got {self.length}")


def observation_rng(seed, index):
    """Random generator dedicated to observation ``index`` of run ``seed``."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(index,))))


def sample_sphere(n, rng):
    """Uniform draw from the unit sphere in R^n."""
    while True:
        x = rng.standard_normal(n)
        norm = np.linalg.norm(x)
        if norm > 0:
            return x / norm


def sample_walk(automaton, length, rng):
    """Labels of a uniform random walk: uniform start node, uniform outgoing edge per step."""
    node = int(rng.integers(automaton.n_nodes))
    labels = []
    for _ in range(length):
        outs = automaton.out_edges[node]
        node, lab = outs[int(rng.integers(len(outs)))]
        labels.append(lab)
    return tuple(labels)


def synthesize(system, config):
    """Draw ``config.N`` observations of ``system`` with trajectories of ``config.length`` steps."""
    n = system.n
    x0 = np.empty((config.N, n))
    xl = np.empty((config.N, n))
    words = []
    for i in range(config.N):
        rng = observation_rng(config.seed, i)
        x = sample_sphere(n, rng)
        word = sample_walk(system.automaton, config.length, rng)
        x0[i] = x
        for lab in word:
            x = system.matrices[lab - 1] @ x
        xl[i] = x
        words.append(word)
    return ObservationSet(x0, xl, tuple(words))


def normalize_pairs(x0, xl):
    """Rescale raw pairs so every initial state has unit norm (dynamics are linear)."""
    x0 = np.asarray(x0, dtype=float)
    xl = np.asarray(xl, dtype=float)
    norms = np.linalg.norm(x0, axis=1, keepdims=True)
    if np.any(norms == 0):
        raise NormError("an initial state is zero and cannot be normalised")
    return ObservationSet(x0 / norms, xl / norms)


def write_csv(observations, path):
    n = observations.n
    header = ["id"] + [f"x0_{k}" for k in range(1, n + 1)] + [f"xl_{k}" for k in range(1, n + 1)]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for i, (a, b) in enumerate(zip(observations.x0, observations.xl)):
            writer.writerow([i] + [repr(float(v)) for v in a] + [repr(float(v)) for v in b])


def ingest(path):
    """Parse a trajectory CSV into an :class:`ObservationSet`.

    Initial states within ``INGEST_NORM_TOL`` of unit norm are re-normalised
    (their end states scaled alike); anything further off is rejected.
    """
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise EmptyObservations(f"{path}: empty file") from None
        if not header or header[0] != "id" or (len(header) - 1) % 2:
            raise ParseError("header must be id, x0_1..x0_n, xl_1..xl_n", line=1)
        n = (len(header) - 1) // 2
        expected = [f"x0_{k}" for k in range(1, n + 1)] + [f"xl_{k}" for k in range(1, n + 1)]
        if header[1:] != expected:
            raise ParseError(f"unexpected columns {header[1:]}, wanted {expected}", line=1)
        x0_rows, xl_rows = [], []
        for row in reader:
            line = reader.line_num
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != 2 * n + 1:
                raise DimensionMismatch(f"expected {2 * n + 1} fields, got {len(row)}", line=line)
            try:
                vals = [float(c) for c in row[1:]]
            except ValueError as exc:
                raise ParseError(str(exc), line=line) from None
            if not all(np.isfinite(vals)):
                raise ParseError("non-finite value", line=line)
            a = np.array(vals[:n])
            b = np.array(vals[n:])
            norm = np.linalg.norm(a)
            if abs(norm - 1.0) > INGEST_NORM_TOL:
                raise NormError(f"row id={row[0]} has |x0| = {norm:.6g}, not on the unit sphere", line=line)
            if abs(norm - 1.0) > 1e-15:
                a, b = a / norm, b / norm
            x0_rows.append(a)
            xl_rows.append(b)
    if not x0_rows:
        raise EmptyObservations(f"{path}: no observations")
    return ObservationSet(np.array(x0_rows), np.array(xl_rows))

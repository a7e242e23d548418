"""Core corpus data model, on-disk text formats, and synthetic corpus generation.

Image ids are dense integers in [0, n). A rank table stores, for every image
used as a query, its full retrieval ordering over the rest of the corpus;
truncation to the k nearest neighbors happens later, at graph-construction
time, so a single table supports any k sweep.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path

import numpy as np

__all__ = [
    "FormatError",
    "RankTable",
    "GroundTruth",
    "FeatureMatrix",
    "SynthSpec",
    "load_rank_table",
    "save_rank_table",
    "load_ground_truth",
    "save_ground_truth",
    "load_feature_matrix",
    "save_feature_matrix",
    "load_name_map",
    "save_name_map",
    "synth_generate",
    "atomic_write_text",
]


class FormatError(ValueError):
    """A corpus file failed parsing or validation."""


def atomic_write_text(path, text):
    """Write `text` to `path` atomically (write to a sibling temp file, rename)."""
    path = Path(path)
    tmp = path.with_name(path.name + f".tmp.{os.getpid()}")
    with open(tmp, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)
    os.replace(tmp, path)


@dataclass(frozen=True)
class RankTable:
    """Full retrieval orderings for an n-image corpus.

    `lists[i]` is a permutation of all ids except i itself, closest first.
    Immutable after construction.
    """

    lists: np.ndarray

    def __post_init__(self):
        arr = np.array(self.lists, dtype=np.int64)
        if arr.size == 0:
            n = arr.shape[0] if arr.ndim == 2 else 0
            arr = arr.reshape(n, max(n - 1, 0))
        if arr.ndim != 2:
            raise ValueError("rank lists must form a 2-d array")
        n = arr.shape[0]
        if arr.shape[1] != max(n - 1, 0):
            raise ValueError(f"each rank list must have length {max(n - 1, 0)}")
        if n > 1:
            owners = np.arange(n)[:, None]
            j = np.arange(n - 1)[None, :]
            # sorted row i must be [0..n-1] with i removed
            expected = j + (j >= owners)
            if not np.array_equal(np.sort(arr, axis=1), expected):
                raise ValueError("each rank list must be a permutation of the other ids")
        arr.setflags(write=False)
        object.__setattr__(self, "lists", arr)

    @property
    def n(self):
        return self.lists.shape[0]

    @cached_property
    def positions(self):
        """(n, n) matrix of 1-based list positions; positions[i, i] = 0."""
        n = self.n
        pos = np.zeros((n, n), dtype=np.int64)
        for i in range(n):
            pos[i, self.lists[i]] = np.arange(1, n)
        pos.setflags(write=False)
        return pos

    def truncated(self, k):
        """The first k columns: exactly n*k stored ids."""
        if not 1 <= k <= max(self.n - 1, 1):
            raise ValueError(f"k={k} out of range for corpus of {self.n}")
        return self.lists[:, :k]


def _parse_id_line(line, lineno):
    head, sep, tail = line.partition(":")
    if not sep:
        raise FormatError(f"line {lineno + 1}: missing ':' separator")
    try:
        owner = int(head)
    except ValueError:
        raise FormatError(f"line {lineno + 1}: bad owner id {head!r}") from None
    try:
        ids = [int(tok) for tok in tail.split()]
    except ValueError:
        raise FormatError(f"line {lineno + 1}: non-integer id") from None
    return owner, ids


def load_rank_table(path):
    """Parse and validate a rank-table file (one `owner: id id ...` line per image)."""
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    n = len(lines)
    rows = np.empty((n, max(n - 1, 0)), dtype=np.int64)
    for lineno, line in enumerate(lines):
        owner, ids = _parse_id_line(line, lineno)
        if owner != lineno:
            raise FormatError(f"line {lineno + 1}: owner id {owner} out of order")
        if len(ids) != n - 1:
            raise FormatError(
                f"line {lineno + 1}: expected {n - 1} ids, got {len(ids)}"
            )
        seen = set()
        for i in ids:
            if not 0 <= i < n:
                raise FormatError(f"line {lineno + 1}: id {i} out of range [0, {n})")
            if i == owner:
                raise FormatError(f"line {lineno + 1}: list contains its owner {owner}")
            if i in seen:
                raise FormatError(f"line {lineno + 1}: duplicate id {i}")
            seen.add(i)
        rows[lineno] = ids
    return RankTable(rows)


def save_rank_table(table, path):
    lines = [
        f"{i}: " + " ".join(str(int(x)) for x in table.lists[i]) if table.n > 1 else f"{i}:"
        for i in range(table.n)
    ]
    atomic_write_text(path, "".join(line + "\n" for line in lines))


@dataclass(frozen=True)
class GroundTruth:
    """Query id -> non-empty set of relevant image ids."""

    relevant: dict

    def __post_init__(self):
        rel = {}
        for q, ids in self.relevant.items():
            ids = frozenset(int(i) for i in ids)
            if not ids:
                raise ValueError(f"query {q}: empty relevant set")
            if any(i < 0 for i in ids) or int(q) < 0:
                raise ValueError("image ids must be non-negative")
            rel[int(q)] = ids
        object.__setattr__(self, "relevant", rel)

    @property
    def queries(self):
        return sorted(self.relevant)


def load_ground_truth(path, n=None):
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    rel = {}
    for lineno, line in enumerate(lines):
        query, ids = _parse_id_line(line, lineno)
        if not ids:
            raise FormatError(f"line {lineno + 1}: empty relevant set for query {query}")
        if query in rel:
            raise FormatError(f"line {lineno + 1}: duplicate query {query}")
        if n is not None:
            for i in [query] + ids:
                if not 0 <= i < n:
                    raise FormatError(f"line {lineno + 1}: id {i} out of range [0, {n})")
        rel[query] = ids
    return GroundTruth(rel)


def save_ground_truth(gt, path):
    lines = [
        f"{q}: " + " ".join(str(i) for i in sorted(gt.relevant[q])) for q in gt.queries
    ]
    atomic_write_text(path, "".join(line + "\n" for line in lines))


def load_name_map(path):
    """Sidecar id -> external-name map (one `id<TAB>name` line per image)."""
    names = {}
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines()):
        head, sep, name = line.partition("\t")
        if not sep:
            raise FormatError(f"line {lineno + 1}: missing tab separator")
        try:
            names[int(head)] = name
        except ValueError:
            raise FormatError(f"line {lineno + 1}: bad id {head!r}") from None
    return names


def save_name_map(names, path):
    atomic_write_text(path, "".join(f"{i}\t{names[i]}\n" for i in sorted(names)))


@dataclass(frozen=True)
class FeatureMatrix:
    """Dense per-image feature vectors, one row per image id."""

    rows: np.ndarray

    def __post_init__(self):
        arr = np.array(self.rows, dtype=np.float64)
        if arr.ndim != 2:
            raise ValueError("feature rows must form a 2-d array")
        if arr.size and not np.isfinite(arr).all():
            raise ValueError("feature entries must be finite")
        arr.setflags(write=False)
        object.__setattr__(self, "rows", arr)

    @property
    def n(self):
        return self.rows.shape[0]

    @property
    def dims(self):
        return self.rows.shape[1]


def load_feature_matrix(path):
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    if not lines:
        raise FormatError("missing feature-matrix header line")
    head = lines[0].split()
    if len(head) != 2:
        raise FormatError("header must be '<n> <dims>'")
    try:
        n, dims = int(head[0]), int(head[1])
    except ValueError:
        raise FormatError("header must be '<n> <dims>'") from None
    if len(lines) - 1 != n:
        raise FormatError(f"expected {n} rows, got {len(lines) - 1}")
    rows = np.empty((n, dims), dtype=np.float64)
    for i, line in enumerate(lines[1:]):
        vals = line.split()
        if len(vals) != dims:
            raise FormatError(f"row {i}: expected {dims} values, got {len(vals)}")
        try:
            rows[i] = [float(v) for v in vals]
        except ValueError:
            raise FormatError(f"row {i}: non-numeric value") from None
    return FeatureMatrix(rows)


def save_feature_matrix(matrix, path):
    out = [f"{matrix.n} {matrix.dims}"]
    for row in matrix.rows:
        out.append(" ".join(f"{x:.17g}" for x in row))
    atomic_write_text(path, "".join(line + "\n" for line in out))


@dataclass(frozen=True)
class SynthSpec:
    """Parameters for the grouped synthetic corpus.

    A group is coherent in a feature space with probability `agreement`;
    members of an incoherent group are scattered around independent decoy
    centroids, so that space carries no signal about the group.
    """

    n_groups: int
    group_size: int = 4
    dims: int = 8
    n_spaces: int = 2
    intra_spread: float = 0.1
    inter_spread: float = 1.0
    agreement: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if self.n_groups < 1 or self.group_size < 1 or self.dims < 1 or self.n_spaces < 1:
            raise ValueError("counts must be positive")
        if not 0.0 <= self.agreement <= 1.0:
            raise ValueError("agreement must lie in [0, 1]")
        if not 0 < self.intra_spread < self.inter_spread:
            raise ValueError("require 0 < intra_spread < inter_spread")

    @property
    def n(self):
        return self.n_groups * self.group_size


def synth_generate(spec):
    """Generate one FeatureMatrix per space plus the group GroundTruth.

    Deterministic for a fixed seed: all randomness flows through one
    generator with a fixed draw order.
    """
    rng = np.random.default_rng(spec.seed)
    spaces = []
    for _ in range(spec.n_spaces):
        centroids = rng.normal(0.0, spec.inter_spread, (spec.n_groups, spec.dims))
        coherent = rng.random(spec.n_groups) < spec.agreement
        rows = np.empty((spec.n, spec.dims))
        for g in range(spec.n_groups):
            base = g * spec.group_size
            if coherent[g]:
                offsets = rng.normal(0.0, spec.intra_spread, (spec.group_size, spec.dims))
                rows[base : base + spec.group_size] = centroids[g] + offsets
            else:
                for m in range(spec.group_size):
                    decoy = rng.normal(0.0, spec.inter_spread, spec.dims)
                    rows[base + m] = decoy + rng.normal(0.0, spec.intra_spread, spec.dims)
        spaces.append(FeatureMatrix(rows))
    relevant = {}
    for g in range(spec.n_groups):
        members = frozenset(range(g * spec.group_size, (g + 1) * spec.group_size))
        for i in members:
            relevant[i] = members
    return spaces, GroundTruth(relevant)

"""Dataset ingestion: CSV tables, train/test splitting, synthetic data, edge lists."""

from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .exceptions import ParseError

logger = logging.getLogger(__name__)

#: cell contents treated as a missing value
MISSING_TOKENS = ("", "?", "NA", "nan")


@dataclass
class TabularDataset:
    """Feature matrix with binary labels; normalization statistics once split."""

    X: np.ndarray  # (n, d) float64
    y: np.ndarray  # (n,) int labels in {0, 1}
    feature_names: list[str]
    feature_means: np.ndarray | None = None  # set when normalized, train statistics
    feature_stds: np.ndarray | None = None
    dropped_rows: int = 0

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def d(self) -> int:
        return self.X.shape[1]

    def denormalized(self) -> np.ndarray:
        """Recover the raw feature values from normalized ones."""
        if self.feature_means is None or self.feature_stds is None:
            raise ValueError("dataset is not normalized")
        return self.X * self.feature_stds + self.feature_means


def load_csv(
    path: str,
    label_column: str,
    positive_label: str,
    drop_columns: tuple[str, ...] = (),
) -> TabularDataset:
    """Load a headered CSV of numeric features plus one label column.

    Labels equal to ``positive_label`` (string comparison on the raw cell)
    map to 1, everything else to 0. Rows containing a missing value
    (empty, '?', 'NA', 'nan') are dropped and counted in ``dropped_rows``.
    """
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = [c.strip() for c in next(reader)]
        except StopIteration:
            raise ParseError(f"{path}: empty file, expected a header row") from None
        if label_column not in header:
            raise ParseError(f"{path}: label column {label_column!r} not in header {header}")
        label_idx = header.index(label_column)
        skip = {label_idx} | {header.index(c) for c in drop_columns if c in header}
        feature_idx = [i for i in range(len(header)) if i not in skip]
        feature_names = [header[i] for i in feature_idx]

        rows: list[list[float]] = []
        labels: list[int] = []
        dropped = 0
        for row_no, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != len(header):
                raise ParseError(f"{path}: row {row_no}: expected {len(header)} cells, got {len(row)}")
            cells = [c.strip() for c in row]
            if any(cells[i] in MISSING_TOKENS for i in feature_idx + [label_idx]):
                dropped += 1
                continue
            values = []
            for i in feature_idx:
                try:
                    values.append(float(cells[i]))
                except ValueError:
                    raise ParseError(
                        f"{path}: row {row_no}, column {header[i]!r}: non-numeric cell {cells[i]!r}"
                    ) from None
            rows.append(values)
            labels.append(1 if cells[label_idx] == positive_label else 0)

    if dropped:
        logger.info("dropped %d rows with missing values from %s", dropped, path)
    if not rows:
        logger.warning("%s contains no data rows", path)
        X = np.empty((0, len(feature_names)))
        y = np.empty((0,), dtype=int)
    else:
        X = np.asarray(rows, dtype=np.float64)
        y = np.asarray(labels, dtype=int)
    return TabularDataset(X=X, y=y, feature_names=feature_names, dropped_rows=dropped)


def train_test_split(
    dataset: TabularDataset, test_fraction: float, seed: int
) -> tuple[TabularDataset, TabularDataset]:
    """Random split with ceil(n * test_fraction) test rows, deterministic per seed.

    Feature normalization statistics (mean, population std) are computed on
    the training rows and applied to both splits; constant columns fall back
    to std = 1.
    """
    if not 0.0 < test_fraction < 1.0:
        raise ValueError(f"test_fraction must be in (0, 1), got {test_fraction}")
    if dataset.n == 0:
        raise ValueError("cannot split an empty dataset")
    n_test = math.ceil(dataset.n * test_fraction)
    perm = np.random.default_rng(seed).permutation(dataset.n)
    test_idx, train_idx = perm[:n_test], perm[n_test:]

    means = dataset.X[train_idx].mean(axis=0)
    stds = dataset.X[train_idx].std(axis=0)
    stds = np.where(stds == 0.0, 1.0, stds)

    def subset(idx: np.ndarray) -> TabularDataset:
        return TabularDataset(
            X=(dataset.X[idx] - means) / stds,
            y=dataset.y[idx].copy(),
            feature_names=list(dataset.feature_names),
            feature_means=means.copy(),
            feature_stds=stds.copy(),
        )

    return subset(train_idx), subset(test_idx)


def generate_toy_data(d_z: int, theta_true: float, seed: int) -> tuple[np.ndarray, np.ndarray]:
    """Draw latents z_i ~ N(theta_true, 1) and observations x_i ~ N(z_i, 1).

    Returns (x, z); deterministic per seed.
    """
    if d_z < 1:
        raise ValueError(f"d_z must be >= 1, got {d_z}")
    rng = np.random.default_rng(seed)
    z = theta_true + rng.standard_normal(d_z)
    x = z + rng.standard_normal(d_z)
    return x, z


@dataclass
class AdjacencyNetwork:
    """Undirected simple graph as a deduplicated set of node-index pairs."""

    n: int
    edges: set[tuple[int, int]]  # (i, j) with i < j
    node_labels: list[str] = field(default_factory=list)
    dropped_self_loops: int = 0

    def to_adjacency(self) -> np.ndarray:
        """Dense symmetric 0/1 matrix with empty diagonal."""
        Y = np.zeros((self.n, self.n))
        for i, j in self.edges:
            Y[i, j] = Y[j, i] = 1.0
        return Y

    def degrees(self) -> np.ndarray:
        return self.to_adjacency().sum(axis=1).astype(int)


def load_edgelist(path: str, labels_path: str | None = None) -> AdjacencyNetwork:
    """Read 'u v' lines (whitespace- or comma-separated) into a network.

    Node names are arbitrary tokens, mapped to indices in sorted-name order.
    Duplicate edges are merged; self-loops are dropped with a warning and
    counted. Blank lines and lines starting with '#' are skipped. An optional
    labels file of 'name display-label' lines overrides display labels.
    """
    pairs: list[tuple[str, str]] = []
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            text = line.strip()
            if not text or text.startswith("#"):
                continue
            tokens = text.replace(",", " ").split()
            if len(tokens) != 2:
                raise ParseError(f"{path}: line {line_no}: expected two node tokens, got {tokens!r}")
            pairs.append((tokens[0], tokens[1]))

    names = sorted({name for pair in pairs for name in pair})
    index = {name: i for i, name in enumerate(names)}
    edges: set[tuple[int, int]] = set()
    self_loops = 0
    for u, v in pairs:
        if u == v:
            self_loops += 1
            continue
        i, j = index[u], index[v]
        edges.add((min(i, j), max(i, j)))
    if self_loops:
        logger.warning("dropped %d self-loop(s) while reading %s", self_loops, path)

    labels = list(names)
    if labels_path is not None:
        mapping: dict[str, str] = {}
        with open(labels_path, encoding="utf-8") as fh:
            for line_no, line in enumerate(fh, start=1):
                text = line.strip()
                if not text or text.startswith("#"):
                    continue
                tokens = text.split(None, 1)
                if len(tokens) != 2:
                    raise ParseError(
                        f"{labels_path}: line {line_no}: expected 'name label', got {text!r}"
                    )
                mapping[tokens[0]] = tokens[1]
        labels = [mapping.get(name, name) for name in names]

    return AdjacencyNetwork(
        n=len(names), edges=edges, node_labels=labels, dropped_self_loops=self_loops
    )

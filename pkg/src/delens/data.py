"""Dataset loading, preprocessing, splitting and increment partitioning.

CSV conventions: comma separated, UTF-8, optional header row, ``?`` marks a
missing cell. Column kinds come from a plain-text sidecar schema (one
``name,kind`` line per column plus ``positive_label=<value>``; an optional
``headerless=true`` line says the CSV has no header row and schema names are
assigned positionally).
"""

from __future__ import annotations

import csv
import os
from dataclasses import dataclass, field
from importlib import resources

import numpy as np

VALID_KINDS = ("numerical", "categorical", "label")

# Name -> short descriptor, shown by `delens datasets list`. Users drop the
# CSV (and a sidecar schema unless one is bundled) into the data directory.
KNOWN_DATASETS = {
    "breast-cancer-w": "699 rows, 9 numerical features, '?' cells present",
    "credit-approval": "690 rows, 9 categorical + 6 numerical, '?' cells present",
    "heart": "270 rows, 6 categorical + 7 numerical",
    "ionosphere": "351 rows, 34 features",
    "kr-vs-kp": "3196 rows, 36 features",
    "online-shopper": "12330 rows, 8 categorical + 10 numerical",
    "occupancy-detection": "20560 rows, 6 numerical",
    "spambase": "4601 rows, 57 numerical features",
}

DATA_DIR_ENV = "DELENS_DATA_DIR"


class SchemaError(ValueError):
    """Malformed schema sidecar or schema/CSV mismatch."""


class DataError(ValueError):
    """CSV contents violate the declared schema."""


@dataclass(frozen=True)
class ColumnSchema:
    """Column kinds for one CSV file."""

    columns: tuple[tuple[str, str], ...]
    positive_label: str
    headerless: bool = False

    def __post_init__(self):
        kinds = [k for _, k in self.columns]
        for k in kinds:
            if k not in VALID_KINDS:
                raise SchemaError(f"unknown column kind {k!r}")
        if kinds.count("label") != 1:
            raise SchemaError("schema must declare exactly one label column")
        if len(self.columns) < 2:
            raise SchemaError("schema needs at least one feature column")

    @property
    def label_index(self) -> int:
        return next(i for i, (_, k) in enumerate(self.columns) if k == "label")


@dataclass
class RawTable:
    """Typed-but-unencoded CSV contents; ``None`` marks a missing cell."""

    columns: tuple[str, ...]
    rows: list[list[str | None]]

    def __len__(self) -> int:
        return len(self.rows)


@dataclass
class Dataset:
    """Encoded feature matrix with binary labels.

    ``numeric_cols`` indexes the encoded columns that carry standardized
    numerical values (one-hot indicator columns are left as 0/1).
    ``col_mean``/``col_std`` hold the standardization statistics of those
    columns, captured from training rows only. A raw numerical column that is
    constant on the training rows encodes as all-zero and its recorded std
    is substituted by 1.
    """

    name: str
    X: np.ndarray
    y: np.ndarray
    feature_names: list[str]
    numeric_cols: np.ndarray
    col_mean: np.ndarray
    col_std: np.ndarray
    n_dropped: int = 0

    @property
    def m(self) -> int:
        return self.X.shape[0]

    @property
    def dim(self) -> int:
        return self.X.shape[1]


@dataclass(frozen=True)
class IncrementPartition:
    """Contiguous row ranges used as training increments."""

    u: int
    T: int
    slices: tuple[tuple[int, int], ...] = field(default_factory=tuple)


def load_schema(path: str | os.PathLike) -> ColumnSchema:
    """Parse a sidecar schema file."""
    columns: list[tuple[str, str]] = []
    positive_label = None
    headerless = False
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" in line and "," not in line:
                key, _, value = line.partition("=")
                key, value = key.strip(), value.strip()
                if key == "positive_label":
                    positive_label = value
                elif key == "headerless":
                    headerless = value.lower() in ("1", "true", "yes")
                else:
                    raise SchemaError(f"{path}:{lineno}: unknown key {key!r}")
                continue
            name, _, kind = line.partition(",")
            columns.append((name.strip(), kind.strip()))
    if positive_label is None:
        raise SchemaError(f"{path}: missing positive_label=<value> line")
    return ColumnSchema(tuple(columns), positive_label, headerless)


def load_csv(path: str | os.PathLike, schema: ColumnSchema) -> RawTable:
    """Read a CSV against ``schema``; missing cells ('?') become ``None``.

    Rows with missing cells are retained here and dropped by
    :func:`preprocess`.
    """
    names = tuple(n for n, _ in schema.columns)
    rows: list[list[str | None]] = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        if not schema.headerless:
            try:
                header = next(reader)
            except StopIteration:
                raise DataError(f"{path}: empty file, expected a header row")
            if tuple(h.strip() for h in header) != names:
                raise DataError(
                    f"{path}: header {header!r} does not match schema columns {names!r}"
                )
        for lineno, row in enumerate(reader, 2 - int(schema.headerless)):
            if not row:
                continue
            if len(row) != len(names):
                raise DataError(
                    f"{path}:{lineno}: expected {len(names)} cells, got {len(row)}"
                )
            rows.append([None if c.strip() == "?" else c.strip() for c in row])
    return RawTable(names, rows)


def preprocess(raw: RawTable, schema: ColumnSchema, name: str = "dataset") -> Dataset:
    """Encode a raw table: drop incomplete rows, one-hot, standardize, map labels.

    Categorical categories are ordered by first appearance. Standardization
    uses population (1/N) variance over the rows given here; when this
    dataset is later split, :func:`shuffle_split` re-standardizes on the
    training rows, so statistics always end up train-derived.
    """
    kept = [r for r in raw.rows if all(c is not None for c in r)]
    n_dropped = len(raw.rows) - len(kept)
    if not kept:
        raise DataError("no complete rows left after dropping missing values")

    label_idx = schema.label_index
    label_values = {r[label_idx] for r in kept}
    if schema.positive_label not in label_values:
        raise DataError(
            f"positive label {schema.positive_label!r} never occurs "
            f"(seen: {sorted(label_values)})"
        )
    y = np.array([1 if r[label_idx] == schema.positive_label else 0 for r in kept],
                 dtype=np.int64)

    blocks: list[np.ndarray] = []
    feature_names: list[str] = []
    numeric_cols: list[int] = []
    for col, (col_name, kind) in enumerate(schema.columns):
        if kind == "label":
            continue
        cells = [r[col] for r in kept]
        if kind == "numerical":
            try:
                values = np.array([float(c) for c in cells], dtype=np.float64)
            except ValueError as exc:
                raise DataError(f"column {col_name!r}: {exc}") from exc
            numeric_cols.append(sum(b.shape[1] for b in blocks))
            blocks.append(values[:, None])
            feature_names.append(col_name)
        else:
            categories: list[str] = []
            for c in cells:
                if c not in categories:
                    categories.append(c)
            onehot = np.zeros((len(cells), len(categories)), dtype=np.float64)
            index = {c: j for j, c in enumerate(categories)}
            for i, c in enumerate(cells):
                onehot[i, index[c]] = 1.0
            blocks.append(onehot)
            feature_names.extend(f"{col_name}={c}" for c in categories)

    X = np.hstack(blocks) if blocks else np.zeros((len(kept), 0))
    numeric = np.array(numeric_cols, dtype=np.int64)
    mean, std = _standardize(X, numeric, np.arange(len(kept)))
    ds = Dataset(name, X, y, feature_names, numeric, mean, std, n_dropped)
    if not np.all(np.isfinite(ds.X)):
        raise DataError("non-finite values after preprocessing")
    return ds


def _standardize(X: np.ndarray, numeric_cols: np.ndarray, fit_rows: np.ndarray):
    """Standardize numeric columns of ``X`` in place using ``fit_rows`` stats."""
    mean = np.zeros(len(numeric_cols))
    std = np.ones(len(numeric_cols))
    for k, col in enumerate(numeric_cols):
        mu = X[fit_rows, col].mean()
        sigma = X[fit_rows, col].std()  # population (1/N)
        if sigma == 0.0:
            sigma = 1.0
        X[:, col] = (X[:, col] - mu) / sigma
        mean[k], std[k] = mu, sigma
    return mean, std


def shuffle_split(ds: Dataset, test_fraction: float, seed: int) -> tuple[Dataset, Dataset]:
    """Shuffle rows and split off a test set, re-standardizing on train rows."""
    if not 0.0 < test_fraction < 1.0:
        raise ValueError("test_fraction must lie in (0, 1)")
    m = ds.m
    n_test = int(round(m * test_fraction))
    if n_test == 0 or n_test == m:
        raise ValueError(f"test_fraction {test_fraction} yields an empty split for m={m}")
    perm = np.random.default_rng(seed).permutation(m)
    test_rows, train_rows = perm[:n_test], perm[n_test:]

    X = ds.X.copy()
    mean, std = _standardize(X, ds.numeric_cols, train_rows)

    def subset(rows: np.ndarray, suffix: str) -> Dataset:
        return Dataset(f"{ds.name}[{suffix}]", np.ascontiguousarray(X[rows]),
                       ds.y[rows].copy(), ds.feature_names, ds.numeric_cols,
                       mean, std, ds.n_dropped)

    return subset(train_rows, "train"), subset(test_rows, "test")


def partition_increments(m_train: int, u: int) -> IncrementPartition:
    """Split the first ``m_train`` row indices into increments of size ``u``.

    Leftover rows (< u) are merged into the final increment, so the last
    increment holds between u and 2u-1 rows.
    """
    if u < 1:
        raise ValueError("increment size u must be >= 1")
    T = m_train // u
    if T == 0:
        raise ValueError(f"u={u} exceeds the {m_train} available training rows")
    slices = [(t * u, (t + 1) * u) for t in range(T)]
    slices[-1] = (slices[-1][0], m_train)
    return IncrementPartition(u=u, T=T, slices=tuple(slices))


def synthetic_gaussians(m: int, seed: int, dim: int = 2, separation: float = 2.0,
                        name: str = "gaussians") -> Dataset:
    """Two isotropic Gaussian classes centred at +/- separation/2 on axis 0."""
    rng = np.random.default_rng(seed)
    half = m // 2
    X = rng.standard_normal((m, dim))
    y = np.zeros(m, dtype=np.int64)
    y[half:] = 1
    X[:half, 0] -= separation / 2.0
    X[half:, 0] += separation / 2.0
    perm = rng.permutation(m)
    return Dataset(name, np.ascontiguousarray(X[perm]), y[perm],
                   [f"x{j}" for j in range(dim)],
                   np.arange(dim), np.zeros(dim), np.ones(dim))


def resolve_data_dir(override: str | None = None) -> str:
    return override or os.environ.get(DATA_DIR_ENV, "data")


def find_schema(dataset: str, data_dir: str) -> str | None:
    """Locate a schema sidecar: next to the CSV first, then bundled."""
    sidecar = os.path.join(data_dir, f"{dataset}.schema")
    if os.path.exists(sidecar):
        return sidecar
    bundled = resources.files("delens.schemas").joinpath(f"{dataset}.schema")
    if bundled.is_file():
        with resources.as_file(bundled) as p:
            return str(p)
    return None


def load_dataset(dataset: str, data_dir: str | None = None) -> Dataset:
    """Load ``<data_dir>/<dataset>.csv`` with its sidecar or bundled schema."""
    directory = resolve_data_dir(data_dir)
    csv_path = os.path.join(directory, f"{dataset}.csv")
    if not os.path.exists(csv_path):
        raise FileNotFoundError(
            f"dataset file not found: {csv_path} "
            f"(set --data-dir or ${DATA_DIR_ENV})"
        )
    schema_path = find_schema(dataset, directory)
    if schema_path is None:
        raise FileNotFoundError(
            f"no schema for {dataset!r}: expected {directory}/{dataset}.schema "
            "or a bundled schema"
        )
    schema = load_schema(schema_path)
    return preprocess(load_csv(csv_path, schema), schema, name=dataset)

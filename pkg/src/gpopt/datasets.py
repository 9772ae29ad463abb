"""CSV ingestion into encoded feature matrices, plus a synthetic surrogate
for the 690-row credit-approval benchmark.

Loading rules: the file must have a header row; empty cells and ``?`` are
missing; a column whose every non-missing cell parses as a number is numeric,
anything else categorical (overridable per column). Missing numeric cells are
imputed with the column median, missing categorical cells with the column
mode (ties toward the lexicographically smallest level), both computed once
over the whole file. Categorical levels and class labels are encoded as
indices into their sorted level lists.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .forest import CATEGORICAL, NUMERIC

MISSING_TOKENS = ("", "?")


class ParseError(Exception):
    """Malformed CSV content; the message carries row/column location."""


class MissingLabel(Exception):
    """The requested label column is not in the header."""


@dataclass(frozen=True)
class Dataset:
    """Encoded table: numeric columns hold raw values, categorical columns
    hold level codes (as floats); labels are codes into ``classes``."""

    X: np.ndarray
    y: np.ndarray
    feature_names: tuple[str, ...]
    feature_kinds: tuple[str, ...]
    categories: tuple[tuple[str, ...] | None, ...]
    classes: tuple[str, ...]
    label_name: str

    def __post_init__(self):
        if len(self.X) != len(self.y):
            raise ValueError("X and y must have the same number of rows")
        if self.X.shape[1] != len(self.feature_kinds):
            raise ValueError("feature_kinds must match the number of columns")

    @property
    def n_rows(self) -> int:
        return len(self.y)

    def decode_row(self, i: int) -> list[str]:
        cells = []
        for j, kind in enumerate(self.feature_kinds):
            if kind == NUMERIC:
                cells.append(repr(float(self.X[i, j])))
            else:
                cells.append(self.categories[j][int(self.X[i, j])])
        return cells


def _is_missing(cell: str) -> bool:
    return cell.strip() in MISSING_TOKENS


def _parses_as_number(cell: str) -> bool:
    try:
        float(cell)
        return True
    except ValueError:
        return False


def load_csv_dataset(path, label_column: str, schema: dict | None = None) -> Dataset:
    """Read a comma-separated file (header required, UTF-8) into a Dataset.

    ``schema`` optionally forces a kind per column name, e.g.
    ``{"age": "numeric"}``; a numeric override over unparseable cells is a
    ParseError at the offending cell.
    """
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise ParseError(f"{path}: file is empty, expected a header row")
    header = [h.strip() for h in rows[0]]
    body = rows[1:]
    if label_column not in header:
        raise MissingLabel(f"{path}: label column {label_column!r} not in header {header}")
    if not body:
        raise ParseError(f"{path}: no data rows after the header")
    label_pos = header.index(label_column)
    for i, row in enumerate(body):
        if len(row) != len(header):
            raise ParseError(
                f"{path}: row {i + 2} has {len(row)} cells, header has {len(header)}"
            )
        if _is_missing(row[label_pos]):
            raise ParseError(f"{path}: row {i + 2} has a missing label")

    feature_names = tuple(h for j, h in enumerate(header) if j != label_pos)
    columns = [[row[j] for row in body] for j in range(len(header)) if j != label_pos]
    labels = [row[label_pos].strip() for row in body]

    schema = dict(schema or {})
    unknown = set(schema) - set(feature_names)
    if unknown:
        raise ParseError(f"{path}: schema names unknown columns {sorted(unknown)}")

    kinds: list[str] = []
    for name, cells in zip(feature_names, columns):
        present = [c for c in cells if not _is_missing(c)]
        if not present:
            raise ParseError(f"{path}: column {name!r} has no usable values")
        if name in schema:
            kind = schema[name]
            if kind not in (NUMERIC, CATEGORICAL):
                raise ParseError(f"{path}: schema for {name!r} must be numeric or categorical")
        else:
            kind = NUMERIC if all(_parses_as_number(c) for c in present) else CATEGORICAL
        kinds.append(kind)

    n = len(body)
    X = np.empty((n, len(feature_names)), dtype=np.float64)
    categories: list[tuple[str, ...] | None] = []
    for j, (name, cells, kind) in enumerate(zip(feature_names, columns, kinds)):
        if kind == NUMERIC:
            values = np.full(n, np.nan)
            for i, cell in enumerate(cells):
                if _is_missing(cell):
                    continue
                if not _parses_as_number(cell):
                    raise ParseError(
                        f"{path}: row {i + 2}, column {name!r}: {cell!r} is not numeric"
                    )
                values[i] = float(cell)
            median = float(np.median(values[~np.isnan(values)]))
            values[np.isnan(values)] = median
            X[:, j] = values
            categories.append(None)
        else:
            stripped = [c.strip() for c in cells]
            present = [c for c in stripped if c not in MISSING_TOKENS]
            levels = sorted(set(present))
            counts = {lv: 0 for lv in levels}
            for c in present:
                counts[c] += 1
            top = max(counts.values())
            mode = next(lv for lv in levels if counts[lv] == top)
            code = {lv: k for k, lv in enumerate(levels)}
            X[:, j] = [code[mode if c in MISSING_TOKENS else c] for c in stripped]
            categories.append(tuple(levels))

    classes = tuple(sorted(set(labels)))
    class_code = {c: k for k, c in enumerate(classes)}
    y = np.array([class_code[lab] for lab in labels], dtype=np.intp)
    return Dataset(
        X=X,
        y=y,
        feature_names=feature_names,
        feature_kinds=tuple(kinds),
        categories=tuple(categories),
        classes=classes,
        label_name=label_column,
    )


def save_csv_dataset(dataset: Dataset, path) -> None:
    """Write a Dataset back out (features in order, label last)."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(list(dataset.feature_names) + [dataset.label_name])
        for i in range(dataset.n_rows):
            writer.writerow(dataset.decode_row(i) + [dataset.classes[dataset.y[i]]])


def make_synthetic_credit_csv(path, seed: int = 20260808, n_rows: int = 690) -> None:
    """Write a deterministic stand-in for the credit-approval table: mixed
    numeric/categorical features, scattered missing cells, and a binary label
    that a bagged tree ensemble can learn well but not perfectly."""
    rng = np.random.Generator(np.random.PCG64(seed))
    age = rng.uniform(18.0, 75.0, n_rows)
    income = rng.lognormal(10.0, 0.6, n_rows)
    debt = rng.lognormal(8.0, 0.9, n_rows)
    years_employed = rng.uniform(0.0, 30.0, n_rows)
    credit_lines = rng.integers(0, 12, n_rows).astype(float)
    late_payments = rng.poisson(1.4, n_rows).astype(float)
    balance = rng.normal(2000.0, 1500.0, n_rows)
    utilization = rng.uniform(0.0, 1.0, n_rows)
    housing = rng.choice(["own", "rent", "other"], n_rows, p=[0.45, 0.4, 0.15])
    purpose = rng.choice(["auto", "edu", "home", "misc"], n_rows)
    employed = rng.choice(["yes", "no"], n_rows, p=[0.7, 0.3])
    region = rng.choice(["n", "s", "e", "w"], n_rows)
    married = rng.choice(["yes", "no"], n_rows)
    prior_default = rng.choice(["yes", "no"], n_rows, p=[0.25, 0.75])

    score = (
        0.9 * (income / 40000.0)
        - 0.8 * (debt / 6000.0)
        - 0.75 * late_payments
        + 0.06 * years_employed
        - 1.6 * utilization
        + 0.9 * (employed == "yes")
        - 1.3 * (prior_default == "yes")
        + 0.35 * (housing == "own")
        + 0.01 * (age - 45.0)
    )
    noise = rng.normal(0.0, 0.45, n_rows)
    label = np.where(score + noise > 0.0, "+", "-")

    numeric_cols = {
        "age": age,
        "income": income,
        "debt": debt,
        "years_employed": years_employed,
        "credit_lines": credit_lines,
        "late_payments": late_payments,
        "balance": balance,
        "utilization": utilization,
    }
    categorical_cols = {
        "housing": housing,
        "purpose": purpose,
        "employed": employed,
        "region": region,
        "married": married,
        "prior_default": prior_default,
    }
    names = list(numeric_cols) + list(categorical_cols)
    missing_mask = rng.random((n_rows, len(names))) < 0.015

    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(names + ["approved"])
        for i in range(n_rows):
            cells = []
            for j, name in enumerate(names):
                if missing_mask[i, j]:
                    cells.append("?")
                elif name in numeric_cols:
                    cells.append(f"{numeric_cols[name][i]:.4f}")
                else:
                    cells.append(str(categorical_cols[name][i]))
            writer.writerow(cells + [label[i]])

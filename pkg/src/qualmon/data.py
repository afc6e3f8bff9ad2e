"""Factor/defect datasets: schema handling, encoding, splits, resampling and
a synthetic generator with a documented ground-truth mechanism."""

from __future__ import annotations

import csv
import json
import warnings
from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class FactorSpec:
    """One process factor: continuous with bounds, or discrete with named states."""

    name: str
    kind: str  # "continuous" | "discrete"
    states: tuple = ()
    controllable: bool = False
    bounds: tuple = ()  # (min, max), continuous only

    def __post_init__(self):
        if self.kind not in ("continuous", "discrete"):
            raise ValueError(f"factor {self.name}: unknown kind {self.kind!r}")
        if self.kind == "discrete":
            if len(self.states) < 2:
                raise ValueError(f"discrete factor {self.name} needs >= 2 states")
        else:
            if len(self.bounds) != 2 or not self.bounds[0] < self.bounds[1]:
                raise ValueError(f"continuous factor {self.name} needs bounds min < max")

    @property
    def width(self):
        """Number of encoded columns this factor occupies."""
        return 1 if self.kind == "continuous" else len(self.states)

    def to_dict(self):
        return {
            "name": self.name,
            "kind": self.kind,
            "states": list(self.states),
            "controllable": self.controllable,
            "bounds": list(self.bounds),
        }

    @classmethod
    def from_dict(cls, d):
        return cls(
            name=d["name"],
            kind=d["kind"],
            states=tuple(d.get("states", ())),
            controllable=bool(d.get("controllable", False)),
            bounds=tuple(d.get("bounds", ())),
        )


def check_schema(schema):
    """Validate name uniqueness; return the schema unchanged."""
    names = [f.name for f in schema]
    if len(set(names)) != len(names):
        raise ValueError("factor names must be unique within a schema")
    if not schema:
        raise ValueError("schema is empty")
    return list(schema)


def schema_to_json(schema):
    return json.dumps({"factors": [f.to_dict() for f in schema]}, indent=2, sort_keys=True)


def schema_from_json(text):
    doc = json.loads(text)
    return check_schema([FactorSpec.from_dict(d) for d in doc["factors"]])


def load_schema(path):
    with open(path, "r", encoding="utf-8") as fh:
        return schema_from_json(fh.read())


def save_schema(schema, path):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(schema_to_json(schema) + "\n")


class Encoder:
    """Maps natural-unit rows to the model input space.

    Continuous factors are z-scored with statistics captured at fit time;
    discrete factors expand to one-hot blocks in state order. Zero-variance
    continuous columns encode to 0 and are flagged in ``zero_variance``.
    """

    def __init__(self, schema, means, stds):
        self.schema = check_schema(schema)
        self.means = dict(means)
        self.stds = dict(stds)
        self.zero_variance = sorted(n for n, s in self.stds.items() if s == 0.0)
        if self.zero_variance:
            warnings.warn(f"zero-variance continuous columns encoded as 0: {self.zero_variance}")
        self._state_index = {
            f.name: {s: i for i, s in enumerate(f.states)}
            for f in self.schema
            if f.kind == "discrete"
        }

    @property
    def width(self):
        return sum(f.width for f in self.schema)

    @classmethod
    def fit(cls, schema, raw_rows):
        """Capture per-continuous-column mean/std from the given rows."""
        schema = check_schema(schema)
        means, stds = {}, {}
        for j, f in enumerate(schema):
            if f.kind != "continuous":
                continue
            col = np.asarray([float(r[j]) for r in raw_rows], dtype=float)
            means[f.name] = float(col.mean())
            stds[f.name] = float(col.std())
        return cls(schema, means, stds)

    def encode_row(self, row):
        if len(row) != len(self.schema):
            raise ValueError(f"row has {len(row)} values, schema has {len(self.schema)} factors")
        out = np.zeros(self.width)
        pos = 0
        for f, value in zip(self.schema, row):
            if f.kind == "continuous":
                std = self.stds[f.name]
                out[pos] = 0.0 if std == 0.0 else (float(value) - self.means[f.name]) / std
                pos += 1
            else:
                idx = self._state_index[f.name].get(_state_key(value))
                if idx is None:
                    raise ValueError(f"unknown state {value!r} for factor {f.name}")
                out[pos + idx] = 1.0
                pos += len(f.states)
        return out

    def encode_many(self, rows):
        return np.asarray([self.encode_row(r) for r in rows])

    def to_dict(self):
        return {
            "schema": [f.to_dict() for f in self.schema],
            "means": {k: self.means[k] for k in sorted(self.means)},
            "stds": {k: self.stds[k] for k in sorted(self.stds)},
        }

    @classmethod
    def from_dict(cls, d):
        schema = [FactorSpec.from_dict(x) for x in d["schema"]]
        return cls(schema, d["means"], d["stds"])


def _state_key(value):
    """Discrete CSV cells may parse as '1', '1.0' or 1; normalize to the state label."""
    s = str(value)
    if s.endswith(".0"):
        s = s[:-2]
    return s


@dataclass
class Dataset:
    """Immutable factor/defect dataset: raw rows, encoded matrix, labels, encoder."""

    schema: list
    raw: list  # rows in natural units, schema order
    X: np.ndarray  # N x D encoded
    y: np.ndarray  # N binary labels, 1 = defect
    encoder: Encoder

    def __post_init__(self):
        self.X = np.asarray(self.X, dtype=float)
        self.y = np.asarray(self.y, dtype=int)
        if self.X.shape[0] != len(self.y) or self.X.shape[0] < 1:
            raise ValueError("encoded matrix and labels disagree or dataset is empty")
        if self.X.shape[1] != self.encoder.width:
            raise ValueError("encoded width does not match schema")
        if not np.isin(self.y, (0, 1)).all():
            raise ValueError("labels must be binary")
        self.X.setflags(write=False)
        self.y.setflags(write=False)

    @property
    def n(self):
        return len(self.y)

    @property
    def width(self):
        return self.X.shape[1]

    def view(self, indices):
        idx = np.asarray(indices, dtype=int)
        return DataView(X=self.X[idx], y=self.y[idx])

    @classmethod
    def from_raw(cls, schema, raw_rows, labels):
        encoder = Encoder.fit(schema, raw_rows)
        X = encoder.encode_many(raw_rows)
        return cls(schema=list(schema), raw=list(raw_rows), X=X, y=np.asarray(labels), encoder=encoder)


@dataclass(frozen=True)
class DataView:
    """Encoded slice handed to trainers: rows plus labels."""

    X: np.ndarray
    y: np.ndarray

    @property
    def n(self):
        return len(self.y)


def load_csv(path, schema):
    """Parse a factor/defect CSV (header row, final `label` column) against a schema."""
    schema = check_schema(schema)
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ValueError(f"{path}: empty file") from None
        expected = [f.name for f in schema] + ["label"]
        if header != expected:
            raise ValueError(f"{path}: header mismatch, expected {expected}, got {header}")
        raw, labels = [], []
        for lineno, cells in enumerate(reader, start=2):
            if not cells:
                continue
            if len(cells) != len(expected):
                raise ValueError(f"{path}:{lineno}: expected {len(expected)} cells, got {len(cells)}")
            row = []
            for f, cell in zip(schema, cells):
                if f.kind == "continuous":
                    try:
                        row.append(float(cell))
                    except ValueError:
                        raise ValueError(
                            f"{path}:{lineno}: non-numeric value {cell!r} for continuous factor {f.name}"
                        ) from None
                else:
                    key = _state_key(cell)
                    if key not in f.states:
                        raise ValueError(f"{path}:{lineno}: unknown state {cell!r} for factor {f.name}")
                    row.append(key)
            label = cells[-1].strip()
            if label not in ("0", "1"):
                raise ValueError(f"{path}:{lineno}: label must be 0 or 1, got {label!r}")
            raw.append(tuple(row))
            labels.append(int(label))
    if not raw:
        raise ValueError(f"{path}: no data rows")
    return Dataset.from_raw(schema, raw, labels)


def save_csv(dataset, path):
    """Write natural-unit rows plus label column; pairs with save_schema."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow([f.name for f in dataset.schema] + ["label"])
        for row, label in zip(dataset.raw, dataset.y):
            cells = []
            for f, v in zip(dataset.schema, row):
                cells.append(repr(float(v)) if f.kind == "continuous" else str(v))
            writer.writerow(cells + [str(int(label))])


@dataclass(frozen=True)
class SplitPlan:
    """Disjoint train/validation index split, reproducible from its seed."""

    train: np.ndarray
    validation: np.ndarray
    seed: int


def holdout_split(n, fraction, seed):
    """Random train/validation split with train size round(fraction * n)."""
    if n < 2:
        raise ValueError("need at least 2 rows to split")
    if not 0.0 < fraction < 1.0:
        raise ValueError("fraction must lie in (0, 1)")
    n_train = int(round(fraction * n))
    if n_train < 1 or n - n_train < 1:
        raise ValueError(f"degenerate split: train={n_train} of {n}")
    rng = np.random.default_rng(seed)
    perm = rng.permutation(n)
    return SplitPlan(
        train=np.sort(perm[:n_train]),
        validation=np.sort(perm[n_train:]),
        seed=int(seed),
    )


def bagging_sample(train_indices, seed):
    """Bootstrap resample: |train| draws from train with replacement."""
    train_indices = np.asarray(train_indices, dtype=int)
    if train_indices.size == 0:
        raise ValueError("empty training set")
    rng = np.random.default_rng(seed)
    return train_indices[rng.integers(0, train_indices.size, size=train_indices.size)]


@dataclass(frozen=True)
class FoldAssignment:
    """Stratified fold id per row; fold sizes and per-fold positives balanced to +-1."""

    k: int
    fold_of: np.ndarray
    seed: int

    def fold_indices(self, fold):
        return np.flatnonzero(self.fold_of == fold)


def stratified_kfold(labels, k, seed):
    """Assign rows to k folds, keeping the positive class proportionally spread."""
    y = np.asarray(labels, dtype=int)
    n = len(y)
    if k < 2:
        raise ValueError("k must be >= 2")
    if k > n:
        raise ValueError(f"k={k} exceeds n={n}")
    classes = np.unique(y)
    if len(classes) < 2:
        warnings.warn("single-class labels: stratification reduces to plain k-fold")
    rng = np.random.default_rng(seed)
    fold_of = np.empty(n, dtype=int)
    # Deal each class round-robin, continuing the deal across classes so the
    # overall fold sizes also stay within one of each other.
    next_fold = 0
    for c in sorted(classes, reverse=True):  # positives first
        idx = np.flatnonzero(y == c)
        rng.shuffle(idx)
        for i, row in enumerate(idx):
            fold_of[row] = (next_fold + i) % k
        next_fold = (next_fold + len(idx)) % k
    return FoldAssignment(k=int(k), fold_of=fold_of, seed=int(seed))


# ---------------------------------------------------------------------------
# Synthetic data with a known mechanism
# ---------------------------------------------------------------------------

def default_schema():
    """Eleven-factor robotic lacquering schema: 9 continuous + 2 discrete(3),
    encoded width 15. Basis weight, drying time and load factor are the
    controllable ones."""
    return [
        FactorSpec("time_per_table", "continuous", bounds=(10.0, 60.0)),
        FactorSpec("liter_per_table", "continuous", bounds=(1.0, 10.0)),
        FactorSpec("num_products", "continuous", bounds=(1.0, 50.0)),
        FactorSpec("num_passes", "discrete", states=("1", "2", "3")),
        FactorSpec("num_layers", "discrete", states=("1", "2", "3")),
        FactorSpec("basis_weight", "continuous", bounds=(80.0, 150.0), controllable=True),
        FactorSpec("drying_time", "continuous", bounds=(180.0, 2000.0), controllable=True),
        FactorSpec("load_factor", "continuous", bounds=(1.0, 8.0), controllable=True),
        FactorSpec("temperature", "continuous", bounds=(15.0, 30.0)),
        FactorSpec("pressure", "continuous", bounds=(990.0, 1030.0)),
        FactorSpec("humidity", "continuous", bounds=(30.0, 70.0)),
    ]


# Ground-truth defect mechanism for the synthetic generator: a logistic model
# over distribution-standardized factors with one pairwise interaction
# (basis_weight x load_factor) and additive latent noise. Coefficients are
# keyed by factor name; discrete factors contribute per-state offsets.
SYNTH_CONTINUOUS_COEF = {
    "time_per_table": 0.45,
    "liter_per_table": -0.35,
    "num_products": 0.30,
    "basis_weight": 1.90,
    "drying_time": -1.60,
    "load_factor": 1.70,
    "temperature": -0.90,
    "pressure": -0.25,
    "humidity": 1.10,
}
SYNTH_DISCRETE_COEF = {
    "num_passes": (0.0, 0.50, 1.10),
    "num_layers": (0.0, -0.45, 0.65),
}
SYNTH_INTERACTION = ("basis_weight", "load_factor", 1.20)
SYNTH_NOISE_STD = 0.25


def _uniform_stats(lo, hi):
    return (lo + hi) / 2.0, (hi - lo) / np.sqrt(12.0)


def synth_generate(schema, n, defect_rate_target, seed):
    """Draw n rows from per-factor distributions and label them with the
    documented logistic mechanism, calibrating the intercept so the mean
    defect probability hits the target rate."""
    schema = check_schema(schema)
    if n < 1:
        raise ValueError("n must be >= 1")
    if not 0.0 < defect_rate_target < 1.0:
        raise ValueError("defect_rate_target must lie in (0, 1)")
    rng = np.random.default_rng(seed)

    columns = {}
    raw_cols = {}
    for f in schema:
        if f.kind == "continuous":
            lo, hi = f.bounds
            v = rng.uniform(lo, hi, size=n)
            mu, sd = _uniform_stats(lo, hi)
            raw_cols[f.name] = v
            columns[f.name] = (v - mu) / sd
        else:
            raw_cols[f.name] = rng.integers(0, len(f.states), size=n)

    latent = np.zeros(n)
    for name, coef in SYNTH_CONTINUOUS_COEF.items():
        if name in columns:
            latent += coef * columns[name]
    for name, offsets in SYNTH_DISCRETE_COEF.items():
        if name in raw_cols and name not in columns:
            latent += np.asarray(offsets)[raw_cols[name]]
    a, b, coef = SYNTH_INTERACTION
    if a in columns and b in columns:
        latent += coef * columns[a] * columns[b]
    latent += rng.normal(0.0, SYNTH_NOISE_STD, size=n)

    intercept = _calibrate_intercept(latent, defect_rate_target)
    p = _sigmoid(latent + intercept)
    labels = (rng.random(n) < p).astype(int)

    raw_rows = []
    for i in range(n):
        row = []
        for f in schema:
            if f.kind == "continuous":
                row.append(float(raw_cols[f.name][i]))
            else:
                row.append(f.states[int(raw_cols[f.name][i])])
        raw_rows.append(tuple(row))
    return Dataset.from_raw(schema, raw_rows, labels)


def _sigmoid(z):
    return 1.0 / (1.0 + np.exp(-np.clip(z, -500, 500)))


def _calibrate_intercept(latent, target, lo=-60.0, hi=60.0):
    """Bisection on the intercept so that mean(sigmoid(latent + b)) == target."""
    f_lo = _sigmoid(latent + lo).mean() - target
    f_hi = _sigmoid(latent + hi).mean() - target
    if f_lo > 0 or f_hi < 0:
        raise ValueError(f"unsatisfiable defect rate target {target}")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if _sigmoid(latent + mid).mean() - target <= 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)

"""Time series containers, UCR-format text IO, and a synthetic cylinder/bell/funnel generator."""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

ZERO_VARIANCE_EPS = 1e-12


class UcrParseError(ValueError):
    """Malformed UCR text file; carries the 1-based line (and token column) at fault."""

    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        super().__init__(message)
        self.line = line
        self.column = column


def as_series(values) -> np.ndarray:
    """Validate and coerce one series: 1-D float64, length >= 2, all finite."""
    arr = np.ascontiguousarray(values, dtype=np.float64)
    if arr.ndim != 1:
        raise ValueError(f"series must be 1-D, got shape {arr.shape}")
    if arr.shape[0] < 2:
        raise ValueError("series must have length >= 2")
    if not np.all(np.isfinite(arr)):
        raise ValueError("series contains NaN or Inf")
    return arr


@dataclass(frozen=True)
class Dataset:
    """Equal-length series stacked row-wise, with optional per-row class labels."""

    values: np.ndarray  # shape (n, m), float64
    labels: tuple[str, ...] | None = None
    name: str = ""

    def __post_init__(self):
        arr = np.ascontiguousarray(self.values, dtype=np.float64)
        if arr.ndim != 2:
            raise ValueError(f"dataset values must be 2-D, got shape {arr.shape}")
        if arr.shape[0] < 1 or arr.shape[1] < 2:
            raise ValueError("dataset needs >= 1 series of length >= 2")
        if not np.all(np.isfinite(arr)):
            raise ValueError("dataset contains NaN or Inf")
        object.__setattr__(self, "values", arr)
        if self.labels is not None:
            labels = tuple(str(l) for l in self.labels)
            if len(labels) != arr.shape[0]:
                raise ValueError(
                    f"{len(labels)} labels for {arr.shape[0]} series"
                )
            object.__setattr__(self, "labels", labels)

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def m(self) -> int:
        return self.values.shape[1]

    def series(self, i: int) -> np.ndarray:
        return self.values[i]

    def z_normalized(self) -> "Dataset":
        out = np.vstack([z_normalize(row) for row in self.values])
        return Dataset(out, self.labels, self.name)


def z_normalize(ts) -> np.ndarray:
    """Zero-mean, unit-deviation copy (population std); near-constant input maps to zeros."""
    arr = as_series(ts)
    mu = arr.mean()
    sigma = arr.std()  # population convention: divide by m
    if sigma < ZERO_VARIANCE_EPS:
        return np.zeros_like(arr)
    return (arr - mu) / sigma


_DELIMITERS = (",", "\t", None)  # None = any whitespace


def _detect_delimiter(first_line: str) -> str | None:
    if "," in first_line:
        return ","
    if "\t" in first_line:
        return "\t"
    return None


def load_ucr(path, delimiter: str | None = "auto", name: str | None = None) -> Dataset:
    """Parse a UCR-style text file: one series per line, ``label v1 v2 ... vm``.

    ``delimiter="auto"`` tries comma, then tab, then whitespace.  Raises
    :class:`UcrParseError` on empty files, ragged rows, or non-numeric tokens.
    """
    path = Path(path)
    raw_lines = path.read_text().splitlines()
    lines = [(idx + 1, line) for idx, line in enumerate(raw_lines) if line.strip()]
    if not lines:
        raise UcrParseError("empty dataset")

    if delimiter == "auto":
        delimiter = _detect_delimiter(lines[0][1])

    labels: list[str] = []
    rows: list[list[float]] = []
    width: int | None = None
    for lineno, line in lines:
        tokens = [t for t in line.strip().split(delimiter) if t != ""]
        if len(tokens) < 3:
            raise UcrParseError(
                f"line {lineno}: expected a label and at least 2 values, got {len(tokens)} tokens",
                line=lineno,
            )
        row = []
        for col, tok in enumerate(tokens[1:], start=2):
            try:
                row.append(float(tok))
            except ValueError:
                raise UcrParseError(
                    f"line {lineno}, column {col}: non-numeric token {tok!r}",
                    line=lineno,
                    column=col,
                ) from None
        if width is None:
            width = len(row)
        elif len(row) != width:
            raise UcrParseError(
                f"line {lineno}: ragged row of length {len(row)}, expected {width}",
                line=lineno,
            )
        labels.append(tokens[0])
        rows.append(row)

    return Dataset(np.array(rows, dtype=np.float64), tuple(labels),
                   name if name is not None else path.stem)


def save_ucr(ds: Dataset, path, delimiter: str = ",") -> None:
    """Write a dataset in the UCR text layout accepted by :func:`load_ucr`."""
    sep = delimiter if delimiter is not None else " "
    with open(path, "w") as fh:
        for i in range(ds.n):
            label = ds.labels[i] if ds.labels is not None else "0"
            vals = sep.join(repr(float(v)) for v in ds.values[i])
            fh.write(f"{label}{sep}{vals}\n")


@dataclass(frozen=True)
class CbfParams:
    """Parameters of the cylinder/bell/funnel synthetic family."""

    per_class_count: int
    length: int
    noise_std: float = 1.0
    rng_seed: int = 0

    def __post_init__(self):
        if self.per_class_count < 1:
            raise ValueError("per_class_count must be >= 1")
        if self.length < 16:
            raise ValueError("length must be >= 16")
        if self.noise_std < 0:
            raise ValueError("noise_std must be >= 0")


CBF_CLASSES = ("cylinder", "bell", "funnel")


def generate_cbf(params: CbfParams) -> Dataset:
    """Deterministic cylinder/bell/funnel sampler.

    Each series is an amplitude-jittered pattern on a random active interval
    [a, b) plus iid Gaussian noise of std ``noise_std``.  Onset and duration
    follow the classical ranges for length 128 (a in [16, 32], b-a in
    [32, 96]) rescaled proportionally to ``length``.
    """
    m = params.length
    rng = np.random.default_rng(params.rng_seed)
    a_lo, a_hi = max(1, round(16 * m / 128)), max(2, round(32 * m / 128))
    d_lo, d_hi = max(2, round(32 * m / 128)), max(3, round(96 * m / 128))

    t = np.arange(m, dtype=np.float64)
    rows = []
    labels = []
    for cls in CBF_CLASSES:
        for _ in range(params.per_class_count):
            a = int(rng.integers(a_lo, a_hi + 1))
            b = min(m, a + int(rng.integers(d_lo, d_hi + 1)))
            amplitude = 6.0 + rng.standard_normal()
            active = ((t >= a) & (t < b)).astype(np.float64)
            if cls == "cylinder":
                shape = active
            elif cls == "bell":
                shape = active * (t - a) / (b - a)
            else:
                shape = active * (b - t) / (b - a)
            noise = params.noise_std * rng.standard_normal(m)
            rows.append(amplitude * shape + noise)
            labels.append(cls)

    return Dataset(np.vstack(rows), tuple(labels), name="cbf")

"""Dataset ingestion: CSV and LibSVM-style files, synthetic LASSO instances, and preprocessing."""

import logging
import math
import re
from pathlib import Path
from typing import Dict, List, Optional, Tuple

import numpy as np
import pandas as pd

from config import settings
from exceptions import ConfigurationError, DatasetError

logger = logging.getLogger(__name__)

LIBSVM_EXTENSIONS = {'.svm', '.libsvm'}


class Dataset:
    """A regression dataset (A, b), optionally with the coefficients that generated it."""

    def __init__(self, A: np.ndarray, b: np.ndarray, name: str, scaled: bool = False,
                 ground_truth: Optional[np.ndarray] = None, zero_columns: Optional[List[int]] = None):
        A = np.asarray(A, dtype=np.float64)
        b = np.asarray(b, dtype=np.float64).reshape(-1)
        if A.ndim != 2 or A.shape[0] != b.size or A.size == 0:
            raise DatasetError(f"{name}: A of shape {A.shape} does not match b of length {b.size}")
        self.A = A
        self.b = b
        self.name = name
        self.scaled = scaled
        self.ground_truth = ground_truth
        self.zero_columns = zero_columns or []

    @property
    def n(self) -> int:
        return self.A.shape[0]

    @property
    def d(self) -> int:
        return self.A.shape[1]

    def to_dict(self) -> Dict:
        """Metadata view (no matrix data)."""
        return {
            'name': self.name,
            'n': self.n,
            'd': self.d,
            'scaled': self.scaled,
            'zero_columns': list(self.zero_columns),
        }

    def __repr__(self) -> str:
        return f"Dataset({self.name!r}, {self.n}x{self.d}, scaled={self.scaled})"


def load_csv(path) -> Dataset:
    """Comma-separated rows without header; the last column is b."""
    path = Path(path)
    try:
        frame = pd.read_csv(path, header=None, dtype=str, skip_blank_lines=True)
    except FileNotFoundError:
        raise DatasetError(f"{path}: file not found")
    except pd.errors.EmptyDataError:
        raise DatasetError(f"{path}: file is empty")
    except pd.errors.ParserError as e:
        match = re.search(r"line (\d+)", str(e))
        line = int(match.group(1)) if match else None
        raise DatasetError(f"{path}: inconsistent number of fields", line=line)

    if frame.empty:
        raise DatasetError(f"{path}: file is empty")
    if frame.shape[1] < 2:
        raise DatasetError(f"{path}: need at least one feature column and the target column")

    values = frame.apply(pd.to_numeric, errors='coerce')
    bad = values.isna().to_numpy() | ~np.isfinite(values.to_numpy(dtype=np.float64))
    if bad.any():
        row, col = np.argwhere(bad)[0]
        raise DatasetError(f"{path}: missing or non-numeric value in column {col + 1}", line=int(row) + 1)

    data = values.to_numpy(dtype=np.float64)
    logger.info(f"Loaded CSV dataset {path.name}: {data.shape[0]} rows, {data.shape[1] - 1} features")
    return Dataset(data[:, :-1], data[:, -1], name=path.stem)


def load_libsvm(path) -> Dataset:
    """Lines 'label index:value ...' with 1-based indices; absent entries are zero."""
    path = Path(path)
    try:
        text = path.read_text()
    except FileNotFoundError:
        raise DatasetError(f"{path}: file not found")

    labels: List[float] = []
    rows: List[Dict[int, float]] = []
    width = 0
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split('#', 1)[0].strip()
        if not line:
            continue
        tokens = line.split()
        try:
            label = float(tokens[0])
        except ValueError:
            raise DatasetError(f"{path}: bad label {tokens[0]!r}", line=lineno)
        entries: Dict[int, float] = {}
        for token in tokens[1:]:
            idx, sep, val = token.partition(':')
            try:
                if not sep:
                    raise ValueError(token)
                index = int(idx)
                value = float(val)
            except ValueError:
                raise DatasetError(f"{path}: malformed entry {token!r}", line=lineno)
            if index < 1:
                raise DatasetError(f"{path}: indices are 1-based, got {index}", line=lineno)
            if not (math.isfinite(value) and math.isfinite(label)):
                raise DatasetError(f"{path}: non-finite value", line=lineno)
            entries[index - 1] = value
            width = max(width, index)
        labels.append(label)
        rows.append(entries)

    if not rows:
        raise DatasetError(f"{path}: file is empty")
    if width == 0:
        raise DatasetError(f"{path}: no feature entries")

    A = np.zeros((len(rows), width))
    for i, entries in enumerate(rows):
        for j, value in entries.items():
            A[i, j] = value
    logger.info(f"Loaded LibSVM dataset {path.name}: {A.shape[0]} rows, {A.shape[1]} features")
    return Dataset(A, np.array(labels), name=path.stem)


def load_dataset(path) -> Dataset:
    """Pick the loader from the file extension (CSV unless .svm/.libsvm)."""
    path = Path(path)
    if path.suffix.lower() in LIBSVM_EXTENSIONS:
        return load_libsvm(path)
    return load_csv(path)


def preprocess(ds: Dataset, nu_fraction: Optional[float] = None) -> Tuple[Dataset, float]:
    """Scale b and every nonzero column of A to unit norm; nu = fraction * ||A'b||_inf.

    Returns:
        (scaled dataset, nu)
    """
    nu_fraction = settings.nu_fraction if nu_fraction is None else nu_fraction
    col_norms = np.linalg.norm(ds.A, axis=0)
    zero_cols = [int(j) for j in np.flatnonzero(col_norms == 0.0)]
    if len(zero_cols) == ds.d:
        raise DatasetError(f"{ds.name}: every column of A is zero")
    b_norm = float(np.linalg.norm(ds.b))
    if b_norm == 0.0:
        raise DatasetError(f"{ds.name}: b is zero, so nu would vanish")
    if zero_cols:
        logger.warning(f"{ds.name}: {len(zero_cols)} zero column(s) left unscaled: {zero_cols[:10]}")

    safe = np.where(col_norms == 0.0, 1.0, col_norms)
    A = ds.A / safe
    b = ds.b / b_norm
    nu = nu_fraction * float(np.abs(A.T @ b).max())
    if nu == 0.0:
        raise DatasetError(f"{ds.name}: A'b vanishes after scaling, so nu would vanish")

    scaled = Dataset(A, b, name=ds.name, scaled=True, ground_truth=ds.ground_truth, zero_columns=zero_cols)
    logger.debug(f"Preprocessed {ds.name}: nu={nu:.6g}")
    return scaled, nu


def gen_synthetic(n: int, d: int, sparsity: float = 0.1, noise_sd: float = 0.01,
                  seed: int = 0) -> Dataset:
    """Gaussian design, ceil(sparsity * d)-sparse coefficients, b = Ax + noise.

    Deterministic in the seed.
    """
    if n < 1 or d < 1:
        raise ConfigurationError(f"need n, d >= 1, got n={n}, d={d}")
    if not 0.0 <= sparsity <= 1.0:
        raise ConfigurationError(f"sparsity must lie in [0, 1], got {sparsity}")
    if noise_sd < 0:
        raise ConfigurationError(f"noise_sd must be nonnegative, got {noise_sd}")

    rng = np.random.default_rng(seed)
    A = rng.standard_normal((n, d))
    nnz = math.ceil(sparsity * d)
    x_true = np.zeros(d)
    support = np.sort(rng.choice(d, size=nnz, replace=False))
    x_true[support] = rng.standard_normal(nnz)
    b = A @ x_true + noise_sd * rng.standard_normal(n)
    return Dataset(A, b, name=f"synthetic_{n}x{d}_seed{seed}", ground_truth=x_true)


def parse_gen_spec(spec: str) -> Tuple[int, int]:
    """'50x100' -> (50, 100)."""
    match = re.fullmatch(r"\s*(\d+)\s*[xX]\s*(\d+)\s*", spec or "")
    if not match:
        raise ConfigurationError(f"--gen expects NxD (e.g. 50x100), got {spec!r}")
    return int(match.group(1)), int(match.group(2))

"""Multi-label datasets: ARFF ingestion, statistics, synthetic instances and
model persistence.

ARFF files go through liac-arff (dense and sparse ``{index value, ...}``
rows). On top of it: numeric attributes and {0,1} nominal attributes only,
label-block selection, and errors located at ``path:line``.

Model files: a "<d> <L>" line, then d lines of L space-separated values;
lines starting with '#' are ignored.
"""

import io
import logging
import xml.etree.ElementTree as ET
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple, Type, Union

import arff
import numpy as np
from pydantic import BaseModel

from .errors import ArffParseError, DataFormatError, ModelFormatError, UsageError
from .matrix import as_matrix
from .utils import header_lines

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]

NUMERIC_TYPES = {"NUMERIC", "REAL", "INTEGER"}
BINARY_VALUES = {"0", "1"}


@dataclass(frozen=True)
class MultiLabelDataset:
    features: np.ndarray
    labels: np.ndarray
    feature_names: Tuple[str, ...]
    label_names: Tuple[str, ...]

    def __post_init__(self):
        if self.features.shape[0] != self.labels.shape[0]:
            raise UsageError(
                f"features have {self.features.shape[0]} rows but labels have {self.labels.shape[0]}"
            )
        if self.features.shape[1] != len(self.feature_names):
            raise UsageError("feature_names length does not match feature columns")
        if self.labels.shape[1] != len(self.label_names):
            raise UsageError("label_names length does not match label columns")
        if not np.all((self.labels == 0) | (self.labels == 1)):
            raise UsageError("labels must be 0/1")
        names = list(self.feature_names) + list(self.label_names)
        if len(set(names)) != len(names):
            raise UsageError("attribute names must be unique")

    @property
    def n(self) -> int:
        return self.features.shape[0]

    @property
    def d(self) -> int:
        return self.features.shape[1]

    @property
    def l(self) -> int:
        return self.labels.shape[1]


class DatasetStats(BaseModel):
    n: int
    d: int
    l: int
    cardinality: float
    density: float
    distinct: int

    def pairs(self):
        return list(self.model_dump().items())


def read_text(path: PathLike, error: Type[DataFormatError]) -> str:
    """Decode a file as UTF-8; an invalid byte raises ``error`` at its line."""
    raw = Path(path).read_bytes()
    try:
        return raw.decode("utf-8")
    except UnicodeDecodeError as e:
        line_no = raw.count(b"\n", 0, e.start) + 1
        raise error(f"invalid UTF-8 byte 0x{raw[e.start]:02x}", str(path), line_no)


def _keyword_lines(lines: Sequence[str], keyword: str) -> List[int]:
    return [i for i, line in enumerate(lines, start=1) if line.strip().lower().startswith(keyword)]


def _data_row_lines(lines: Sequence[str], data_line: int) -> List[int]:
    """Line numbers of the rows after @data; blank and '%' lines hold no row."""
    return [
        i for i, line in enumerate(lines[data_line:], start=data_line + 1)
        if line.strip() and not line.strip().startswith("%")
    ]


def _located(e: arff.ArffException, path: str) -> ArffParseError:
    try:
        message = str(e)
    except (TypeError, ValueError):
        message = type(e).__name__
    line_no = e.line if getattr(e, "line", -1) > 0 else None
    return ArffParseError(message, path, line_no)


def _check_type(name: str, kind: Any, path: str, line_no: Optional[int]) -> None:
    if isinstance(kind, list):
        if set(kind) <= BINARY_VALUES:
            return
        raise ArffParseError(f"nominal attribute {name!r} is {{{','.join(kind)}}}, not {{0,1}}", path, line_no)
    if kind not in NUMERIC_TYPES:
        raise ArffParseError(f"unsupported attribute type {kind} for {name!r}", path, line_no)


def _row_values(row: Sequence[Any], path: str, line_no: Optional[int]) -> np.ndarray:
    if any(value is None for value in row):
        raise ArffParseError("missing value '?'", path, line_no)
    try:
        values = np.array([float(value) for value in row], dtype=np.float64)
    except (TypeError, ValueError):
        raise ArffParseError("non-numeric value", path, line_no)
    if not np.all(np.isfinite(values)):
        raise ArffParseError("non-finite value", path, line_no)
    return values


def load_label_xml(path: PathLike) -> List[str]:
    """Label names from a Mulan XML label file, in document order."""
    try:
        root = ET.parse(str(path)).getroot()
    except ET.ParseError as e:
        raise DataFormatError(f"invalid label XML: {e}", str(path))
    names = [el.get("name") for el in root.iter() if el.tag.split("}")[-1] == "label"]
    names = [name for name in names if name]
    if not names:
        raise DataFormatError("label XML declares no labels", str(path))
    return names


def load_arff(path: PathLike, label_count: int, labels_at_end: bool = True,
              label_names: Optional[Sequence[str]] = None) -> MultiLabelDataset:
    """
    Parse a Mulan-style ARFF file.

    Args:
        path: ARFF file
        label_count: Number of label attributes, >= 1
        labels_at_end: Labels are the last (True) or first (False) attributes
        label_names: When given (e.g. from load_label_xml), selects the label
            attributes by name and overrides the positional rule

    Returns:
        MultiLabelDataset
    """
    if label_count < 1:
        raise UsageError(f"label_count must be >= 1, got {label_count}")
    path_str = str(path)
    text = read_text(path, ArffParseError)
    try:
        parsed = arff.load(io.StringIO(text), encode_nominal=False, return_type=arff.DENSE)
    except arff.ArffException as e:
        raise _located(e, path_str)

    lines = text.split("\n")
    data_marks = _keyword_lines(lines, "@data")
    if not data_marks:
        raise ArffParseError("missing @data section", path_str)
    attribute_lines = _keyword_lines(lines[:data_marks[0]], "@attribute")
    attributes = parsed["attributes"]
    for j, (name, kind) in enumerate(attributes):
        _check_type(name, kind, path_str, attribute_lines[j] if j < len(attribute_lines) else None)
    names = [name for name, _ in attributes]

    if not parsed["data"]:
        raise ArffParseError("no data rows", path_str)
    if label_count >= len(names):
        raise UsageError(f"label_count {label_count} leaves no features among {len(names)} attributes")

    row_lines = _data_row_lines(lines, data_marks[0])
    rows = [
        _row_values(row, path_str, row_lines[i] if i < len(row_lines) else None)
        for i, row in enumerate(parsed["data"])
    ]

    if label_names is not None:
        missing = [name for name in label_names if name not in names]
        if missing:
            raise DataFormatError(f"label attributes not found: {', '.join(missing)}", path_str)
        if len(label_names) != label_count:
            raise UsageError(f"label file lists {len(label_names)} labels, expected {label_count}")
        label_idx = [names.index(name) for name in label_names]
    elif labels_at_end:
        label_idx = list(range(len(names) - label_count, len(names)))
    else:
        label_idx = list(range(label_count))
    label_set = set(label_idx)
    feature_idx = [j for j in range(len(names)) if j not in label_set]

    data = np.vstack(rows)
    labels = data[:, label_idx]
    bad = np.nonzero(~np.all((labels == 0) | (labels == 1), axis=1))[0]
    if bad.size:
        raise ArffParseError("non-binary label value", path_str, row_lines[bad[0]])

    dataset = MultiLabelDataset(
        features=np.ascontiguousarray(data[:, feature_idx]),
        labels=np.ascontiguousarray(labels),
        feature_names=tuple(names[j] for j in feature_idx),
        label_names=tuple(names[j] for j in label_idx),
    )
    logger.info(f"Loaded {path_str}: n={dataset.n} d={dataset.d} L={dataset.l}")
    return dataset


def render_arff(ds: MultiLabelDataset, relation: str = "tailrank", sparse: bool = False) -> str:
    """Serialize a dataset as ARFF text with the labels as the last attributes."""
    attributes = [(name, "NUMERIC") for name in ds.feature_names]
    attributes += [(name, sorted(BINARY_VALUES)) for name in ds.label_names]
    data = []
    for x_row, y_row in zip(ds.features.tolist(), ds.labels.tolist()):
        # nominal cells must be written as their declared strings
        values = x_row + ["1" if y else "0" for y in y_row]
        if sparse:
            data.append({j: v for j, v in enumerate(values) if v != 0.0 and v != "0"})
        else:
            data.append(values)
    text = arff.dumps({"relation": relation, "attributes": attributes, "data": data})
    return text if text.endswith("\n") else text + "\n"


def write_arff(ds: MultiLabelDataset, path: PathLike, relation: str = "tailrank", sparse: bool = False) -> None:
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    with open(target, "w", encoding="utf-8", newline="\n") as f:
        f.write(render_arff(ds, relation, sparse))
    logger.info(f"Wrote {ds.n} rows to {target}")


def concat_datasets(parts: Sequence[MultiLabelDataset]) -> MultiLabelDataset:
    """Stack datasets with identical attribute names (e.g. train + test)."""
    if not parts:
        raise UsageError("no datasets to concatenate")
    first = parts[0]
    for other in parts[1:]:
        if other.feature_names != first.feature_names or other.label_names != first.label_names:
            raise UsageError("datasets have different attributes")
    return MultiLabelDataset(
        features=np.vstack([p.features for p in parts]),
        labels=np.vstack([p.labels for p in parts]),
        feature_names=first.feature_names,
        label_names=first.label_names,
    )


def stats(ds: MultiLabelDataset) -> DatasetStats:
    """Table-style characteristics: size, label cardinality, density, distinct label sets."""
    cardinality = float(np.mean(ds.labels.sum(axis=1)))
    distinct = int(np.unique(ds.labels, axis=0).shape[0])
    return DatasetStats(
        n=ds.n,
        d=ds.d,
        l=ds.l,
        cardinality=cardinality,
        density=cardinality / ds.l,
        distinct=distinct,
    )


def make_rng(seed: int) -> np.random.Generator:
    """PCG64 generator; every seeded draw goes through it."""
    return np.random.Generator(np.random.PCG64(seed))


def planted_instance(n: int, d: int, l: int, rank: int, noise: float,
                     rng: np.random.Generator) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Planted low-rank regression problem.

    Args:
        n, d, l: Examples, features, labels
        rank: Rank of the planted predictor, 1 <= rank <= min(d, l)
        noise: Standard deviation of additive target noise, >= 0
        rng: Generator the draws come from

    Returns:
        (X n×d, S = X·W* + noise·N n×l, W* d×l)
    """
    if min(n, d, l) < 1:
        raise UsageError(f"n, d, l must be >= 1, got {n}, {d}, {l}")
    if not 1 <= rank <= min(d, l):
        raise UsageError(f"rank must be in [1, min(d, l)] = [1, {min(d, l)}], got {rank}")
    if noise < 0:
        raise UsageError(f"noise must be >= 0, got {noise}")
    x = rng.standard_normal((n, d))
    a = rng.standard_normal((d, rank))
    b = rng.standard_normal((l, rank))
    w_star = a @ b.T
    targets = x @ w_star
    if noise > 0:
        targets = targets + noise * rng.standard_normal((n, l))
    return x, targets, w_star


def synth_low_rank(n: int, d: int, l: int, rank: int, noise: float, seed: int) -> Tuple[MultiLabelDataset, np.ndarray]:
    """
    Synthetic multi-label data from a planted rank-`rank` predictor.

    Labels are 1 where the continuous target is at or above its row median.

    Returns:
        (dataset, W*)
    """
    x, targets, w_star = planted_instance(n, d, l, rank, noise, make_rng(seed))
    labels = (targets >= np.median(targets, axis=1, keepdims=True)).astype(np.float64)
    dataset = MultiLabelDataset(
        features=x,
        labels=labels,
        feature_names=tuple(f"x{j + 1}" for j in range(d)),
        label_names=tuple(f"label{j + 1}" for j in range(l)),
    )
    logger.info(f"Synthesized n={n} d={d} L={l} rank={rank} noise={noise} seed={seed}")
    return dataset, w_star


def render_model(w: Any, header: Optional[Dict[str, Any]] = None) -> str:
    w = as_matrix(w, "w")
    lines = header_lines(header) if header else []
    lines.append(f"{w.shape[0]} {w.shape[1]}")
    lines += [" ".join(repr(float(v)) for v in row) for row in w]
    return "\n".join(lines) + "\n"


def save_model(w: Any, path: PathLike, header: Optional[Dict[str, Any]] = None) -> None:
    """Write W as text with full round-trip precision."""
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    with open(target, "w", encoding="utf-8", newline="\n") as f:
        f.write(render_model(w, header))
    logger.info(f"Saved model to {target}")


def load_model(path: PathLike) -> np.ndarray:
    """Read a model file written by save_model."""
    path_str = str(path)
    shape: Optional[Tuple[int, int]] = None
    rows: List[List[float]] = []
    text = read_text(path, ModelFormatError)
    for line_no, raw in enumerate(text.split("\n"), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        tokens = line.split()
        if shape is None:
            if len(tokens) != 2:
                raise ModelFormatError("expected '<d> <L>' header", path_str, line_no)
            try:
                shape = (int(tokens[0]), int(tokens[1]))
            except ValueError:
                raise ModelFormatError("non-integer dimensions in header", path_str, line_no)
            if shape[0] < 1 or shape[1] < 1:
                raise ModelFormatError(f"invalid dimensions {shape}", path_str, line_no)
            continue
        if len(rows) >= shape[0]:
            raise ModelFormatError(f"more than {shape[0]} rows", path_str, line_no)
        if len(tokens) != shape[1]:
            raise ModelFormatError(f"expected {shape[1]} values, got {len(tokens)}", path_str, line_no)
        try:
            values = [float(token) for token in tokens]
        except ValueError:
            raise ModelFormatError("non-numeric value", path_str, line_no)
        if not all(np.isfinite(values)):
            raise ModelFormatError("non-finite value", path_str, line_no)
        rows.append(values)
    if shape is None:
        raise ModelFormatError("empty model file", path_str)
    if len(rows) != shape[0]:
        raise ModelFormatError(f"expected {shape[0]} rows, got {len(rows)}", path_str)
    return np.array(rows, dtype=np.float64)

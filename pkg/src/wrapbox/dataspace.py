"""Labeled embedding datasets: validation, binary/CSV persistence, splitting.

The WBX1 byte layout is the interchange contract with external embedding
extractors and is bit-exact:

    magic ``WBX1`` | u32 n_rows | u32 n_dims | u32 n_classes | u32 flags
    (all little-endian; flags bit0 = texts present), then row-major float32
    features, u32 labels, u64 row ids, and, when flagged, one u32
    length-prefixed UTF-8 string per row.
"""

from __future__ import annotations

import csv
import struct
from dataclasses import dataclass

import numpy as np

from .errors import DatasetFormatError, ValidationError

WBX_MAGIC = b"WBX1"
_HEADER = struct.Struct("<4sIIII")
FLAG_TEXTS = 1


@dataclass
class EmbeddingDataset:
    """Dense float32 feature matrix with class labels and stable row ids."""

    features: np.ndarray
    labels: np.ndarray
    row_ids: np.ndarray
    n_classes: int
    texts: list[str] | None = None

    def __post_init__(self):
        self.features = np.ascontiguousarray(self.features, dtype=np.float32)
        self.labels = np.ascontiguousarray(self.labels, dtype=np.uint32)
        self.row_ids = np.ascontiguousarray(self.row_ids, dtype=np.uint64)
        self.validate()
        # Datasets are immutable after construction; shared freely across threads.
        self.features.setflags(write=False)
        self.labels.setflags(write=False)
        self.row_ids.setflags(write=False)

    @property
    def n_rows(self) -> int:
        return self.features.shape[0]

    @property
    def n_dims(self) -> int:
        return self.features.shape[1]

    def validate(self):
        if self.features.ndim != 2:
            raise ValidationError("features must be a 2-D matrix")
        n = self.features.shape[0]
        if self.labels.shape != (n,):
            raise ValidationError(
                f"labels length {self.labels.shape[0]} != {n} feature rows"
            )
        if self.row_ids.shape != (n,):
            raise ValidationError(
                f"row_ids length {self.row_ids.shape[0]} != {n} feature rows"
            )
        if self.texts is not None and len(self.texts) != n:
            raise ValidationError(f"texts length {len(self.texts)} != {n} feature rows")
        if self.n_classes <= 0:
            raise ValidationError("n_classes must be positive")
        if n and int(self.labels.max()) >= self.n_classes:
            bad = int(np.argmax(self.labels >= self.n_classes))
            raise DatasetFormatError(
                f"label {int(self.labels[bad])} out of range [0, {self.n_classes})",
                row=bad,
            )
        if not np.all(np.isfinite(self.features)):
            bad = int(np.argwhere(~np.isfinite(self.features).all(axis=1))[0, 0])
            raise DatasetFormatError("non-finite feature value", row=bad)
        if n and np.unique(self.row_ids).size != n:
            raise DatasetFormatError("row_ids are not unique")

    def class_histogram(self) -> dict[int, int]:
        counts = np.bincount(self.labels.astype(np.int64), minlength=self.n_classes)
        return {c: int(counts[c]) for c in range(self.n_classes)}

    def with_features(self, features: np.ndarray) -> "EmbeddingDataset":
        """Same rows, new feature matrix (e.g. after a logit transform)."""
        return EmbeddingDataset(
            features=np.asarray(features, dtype=np.float32),
            labels=self.labels.copy(),
            row_ids=self.row_ids.copy(),
            n_classes=self.n_classes,
            texts=list(self.texts) if self.texts is not None else None,
        )


@dataclass
class SplitSpec:
    """Disjoint train/valid/test row indices plus the seed that made them."""

    train_idx: np.ndarray
    valid_idx: np.ndarray
    test_idx: np.ndarray
    stratified: bool = True
    seed: int = 0

    def __post_init__(self):
        self.train_idx = np.asarray(self.train_idx, dtype=np.int64)
        self.valid_idx = np.asarray(self.valid_idx, dtype=np.int64)
        self.test_idx = np.asarray(self.test_idx, dtype=np.int64)
        all_idx = np.concatenate([self.train_idx, self.valid_idx, self.test_idx])
        if np.unique(all_idx).size != all_idx.size:
            raise ValidationError("split index sets are not pairwise disjoint")

    def to_dict(self) -> dict:
        return {
            "train_idx": self.train_idx.tolist(),
            "valid_idx": self.valid_idx.tolist(),
            "test_idx": self.test_idx.tolist(),
            "stratified": bool(self.stratified),
            "seed": int(self.seed),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SplitSpec":
        return cls(
            train_idx=np.asarray(d["train_idx"], dtype=np.int64),
            valid_idx=np.asarray(d["valid_idx"], dtype=np.int64),
            test_idx=np.asarray(d["test_idx"], dtype=np.int64),
            stratified=bool(d.get("stratified", True)),
            seed=int(d.get("seed", 0)),
        )


def write_dataset(ds: EmbeddingDataset, path) -> None:
    """Persist in the WBX1 binary layout. Rejects empty datasets."""
    if ds.n_rows == 0:
        raise ValidationError("empty dataset not writable")
    flags = FLAG_TEXTS if ds.texts is not None else 0
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(WBX_MAGIC, ds.n_rows, ds.n_dims, ds.n_classes, flags))
        fh.write(np.ascontiguousarray(ds.features, dtype="<f4").tobytes())
        fh.write(np.ascontiguousarray(ds.labels, dtype="<u4").tobytes())
        fh.write(np.ascontiguousarray(ds.row_ids, dtype="<u8").tobytes())
        if ds.texts is not None:
            for text in ds.texts:
                raw = text.encode("utf-8")
                fh.write(struct.pack("<I", len(raw)))
                fh.write(raw)


def _load_wbx(path) -> EmbeddingDataset:
    with open(path, "rb") as fh:
        data = fh.read()
    if len(data) < _HEADER.size:
        raise DatasetFormatError("file shorter than WBX1 header", offset=len(data))
    magic, n_rows, n_dims, n_classes, flags = _HEADER.unpack_from(data, 0)
    if magic != WBX_MAGIC:
        raise DatasetFormatError(f"bad magic {magic!r}, expected {WBX_MAGIC!r}", offset=0)
    if n_rows == 0 or n_dims == 0:
        raise DatasetFormatError(
            f"malformed header: n_rows={n_rows}, n_dims={n_dims}", offset=4
        )
    if n_classes == 0:
        raise DatasetFormatError("malformed header: n_classes=0", offset=12)
    if flags & ~FLAG_TEXTS:
        raise DatasetFormatError(f"unknown header flags {flags:#x}", offset=16)

    offset = _HEADER.size
    feat_bytes = 4 * n_rows * n_dims
    label_bytes = 4 * n_rows
    id_bytes = 8 * n_rows
    fixed_end = offset + feat_bytes + label_bytes + id_bytes
    if len(data) < fixed_end:
        raise DatasetFormatError(
            f"dimension mismatch: need {fixed_end} bytes for {n_rows}x{n_dims}, file has {len(data)}",
            offset=len(data),
        )

    features = np.frombuffer(data, dtype="<f4", count=n_rows * n_dims, offset=offset)
    features = features.reshape(n_rows, n_dims).copy()
    if not np.all(np.isfinite(features)):
        bad_row = int(np.argwhere(~np.isfinite(features).all(axis=1))[0, 0])
        raise DatasetFormatError(
            "non-finite feature value",
            row=bad_row,
            offset=offset + 4 * bad_row * n_dims,
        )
    offset += feat_bytes

    labels = np.frombuffer(data, dtype="<u4", count=n_rows, offset=offset).copy()
    if int(labels.max()) >= n_classes:
        bad_row = int(np.argmax(labels >= n_classes))
        raise DatasetFormatError(
            f"label {int(labels[bad_row])} out of range [0, {n_classes})",
            row=bad_row,
            offset=offset + 4 * bad_row,
        )
    offset += label_bytes

    row_ids = np.frombuffer(data, dtype="<u8", count=n_rows, offset=offset).copy()
    if np.unique(row_ids).size != n_rows:
        raise DatasetFormatError("row_ids are not unique", offset=offset)
    offset += id_bytes

    texts = None
    if flags & FLAG_TEXTS:
        texts = []
        for row in range(n_rows):
            if offset + 4 > len(data):
                raise DatasetFormatError("truncated text section", row=row, offset=offset)
            (length,) = struct.unpack_from("<I", data, offset)
            offset += 4
            if offset + length > len(data):
                raise DatasetFormatError("truncated text entry", row=row, offset=offset)
            try:
                texts.append(data[offset : offset + length].decode("utf-8"))
            except UnicodeDecodeError as exc:
                raise DatasetFormatError(f"invalid UTF-8: {exc}", row=row, offset=offset)
            offset += length
    if offset != len(data):
        raise DatasetFormatError(
            f"{len(data) - offset} trailing bytes after payload", offset=offset
        )

    return EmbeddingDataset(
        features=features, labels=labels, row_ids=row_ids, n_classes=n_classes, texts=texts
    )


def _load_csv(path) -> EmbeddingDataset:
    with open(path, "r", newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DatasetFormatError("empty CSV file", row=0)
        if len(header) < 3 or header[0] != "id" or header[1] != "label":
            raise DatasetFormatError(
                f"malformed header: expected id,label,f0..,[text], got {header[:4]}", row=0
            )
        has_text = header[-1] == "text"
        feat_cols = header[2 : -1 if has_text else len(header)]
        for i, name in enumerate(feat_cols):
            if name != f"f{i}":
                raise DatasetFormatError(
                    f"malformed header: feature column {i} named {name!r}", row=0
                )
        n_dims = len(feat_cols)
        if n_dims == 0:
            raise DatasetFormatError("malformed header: no feature columns", row=0)

        ids, labels, rows, texts = [], [], [], []
        for row_no, rec in enumerate(reader):
            expected = 2 + n_dims + (1 if has_text else 0)
            if len(rec) != expected:
                raise DatasetFormatError(
                    f"dimension mismatch: {len(rec)} fields, expected {expected}", row=row_no
                )
            try:
                ids.append(int(rec[0]))
                labels.append(int(rec[1]))
            except ValueError as exc:
                raise DatasetFormatError(f"bad id/label: {exc}", row=row_no)
            try:
                vals = [float(v) for v in rec[2 : 2 + n_dims]]
            except ValueError as exc:
                raise DatasetFormatError(f"bad feature value: {exc}", row=row_no)
            if not all(np.isfinite(vals)):
                raise DatasetFormatError("non-finite feature value", row=row_no)
            rows.append(vals)
            if has_text:
                texts.append(rec[-1])

    if not rows:
        raise DatasetFormatError("CSV has a header but no data rows", row=0)
    labels_arr = np.asarray(labels, dtype=np.int64)
    if labels_arr.min() < 0:
        raise DatasetFormatError("negative label", row=int(np.argmin(labels_arr)))
    n_classes = int(labels_arr.max()) + 1
    return EmbeddingDataset(
        features=np.asarray(rows, dtype=np.float32),
        labels=labels_arr.astype(np.uint32),
        row_ids=np.asarray(ids, dtype=np.uint64),
        n_classes=n_classes,
        texts=texts if has_text else None,
    )


def write_dataset_csv(ds: EmbeddingDataset, path) -> None:
    """Human-inspectable fallback; floats printed round-trip safe."""
    if ds.n_rows == 0:
        raise ValidationError("empty dataset not writable")
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        header = ["id", "label"] + [f"f{i}" for i in range(ds.n_dims)]
        if ds.texts is not None:
            header.append("text")
        writer.writerow(header)
        for i in range(ds.n_rows):
            # float32 -> float64 is exact, and repr(float64) round-trips.
            rec = [int(ds.row_ids[i]), int(ds.labels[i])]
            rec += [repr(float(v)) for v in ds.features[i]]
            if ds.texts is not None:
                rec.append(ds.texts[i])
            writer.writerow(rec)


def load_dataset(path, format: str | None = None) -> EmbeddingDataset:
    """Load a dataset; format inferred from the extension unless given."""
    if format is None:
        format = "csv" if str(path).endswith(".csv") else "wbx"
    if format == "wbx":
        return _load_wbx(path)
    if format == "csv":
        return _load_csv(path)
    raise ValidationError(f"unknown dataset format {format!r}")


def stratified_split(
    ds: EmbeddingDataset, fractions: tuple[float, float, float], seed: int
) -> SplitSpec:
    """Per-class proportional split, deterministic for a fixed seed.

    Within every class the three splits receive floor/ceil of the exact
    fractional share (largest-remainder rounding), so per-split class
    proportions match the full set within one row per class.
    """
    fractions = tuple(float(f) for f in fractions)
    if len(fractions) != 3:
        raise ValidationError("fractions must be (train, valid, test)")
    if any(f < 0 for f in fractions):
        raise ValidationError("fractions must be nonnegative")
    if abs(sum(fractions) - 1.0) > 1e-9:
        raise ValidationError(f"fractions must sum to 1, got {sum(fractions)}")
    if fractions[0] <= 0:
        raise ValidationError("train fraction must be positive")

    n_active = sum(1 for f in fractions if f > 0)
    counts = np.bincount(ds.labels.astype(np.int64), minlength=ds.n_classes)
    for c in range(ds.n_classes):
        if 0 < counts[c] < n_active:
            raise ValidationError(
                f"class {c} has {int(counts[c])} rows, fewer than {n_active} splits"
            )

    rng = np.random.default_rng(seed)
    parts: list[list[np.ndarray]] = [[], [], []]
    for c in range(ds.n_classes):
        members = np.flatnonzero(ds.labels == c)
        if members.size == 0:
            continue
        members = members[rng.permutation(members.size)]
        # Largest-remainder rounding: every split gets floor or ceil of its
        # exact share, so per-class counts stay within one row of target.
        targets = [f * members.size for f in fractions]
        alloc = [int(np.floor(t)) for t in targets]
        remainder = members.size - sum(alloc)
        order = sorted(
            (s for s in range(3) if fractions[s] > 0),
            key=lambda s: (-(targets[s] - alloc[s]), s),
        )
        for s in order[:remainder]:
            alloc[s] += 1
        assert sum(alloc) == members.size
        start = 0
        for s in range(3):
            parts[s].append(members[start : start + alloc[s]])
            start += alloc[s]

    train, valid, test = (
        np.sort(np.concatenate(p)) if p else np.empty(0, dtype=np.int64) for p in parts
    )
    return SplitSpec(train_idx=train, valid_idx=valid, test_idx=test, stratified=True, seed=seed)

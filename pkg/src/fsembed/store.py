"""On-disk embedding container: definition, reader, writer, and validation.

A store file is a self-describing binary container holding one modality's
embeddings for one dataset (little-endian throughout):

- bytes 0-7: magic ``FSEMBED1``
- bytes 8-11: unsigned 32-bit manifest length M
- bytes 12-(11+M): UTF-8 JSON manifest with fields ``dim``, ``count``,
  ``modality``, ``dataset_name``, ``model_id``, ``normalized`` and an
  ``items`` list (``{"id", "class", "template_id"}``) in payload order
- remaining bytes: count x dim float32 vectors, row-major, one row per item

The payload length must equal ``count * dim * 4`` exactly; the reader
rejects malformed input rather than repairing it.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .errors import StoreError
from .validation import row_norms

MAGIC = b"FSEMBED1"
MODALITIES = ("image", "text")

# Loose enough for float32 storage of normalized vectors, tight enough to
# catch corruption.
UNIT_NORM_LOAD_TOL = 1e-5
UNIT_NORM_POST_TOL = 1e-6
ZERO_NORM_TOL = 1e-12

_MANIFEST_KEYS = {"dim", "count", "modality", "dataset_name", "model_id", "normalized", "items"}
_ITEM_KEYS = {"id", "class", "template_id"}


@dataclass(frozen=True)
class EmbeddingItem:
    """One embedded element: an image, or one prompted class text."""

    item_id: str
    class_label: str
    vector: np.ndarray
    prompt_template_id: Optional[str] = None


class EmbeddingStore:
    """Immutable collection of same-dimensional embedding vectors.

    Vectors are kept as a read-only ``(count, dim)`` float32 matrix so a
    store round-trips bit-exactly through the file format. Construction
    performs shape coercion only; call :meth:`validate` (the reader and
    writer both do) to enforce the semantic invariants.
    """

    def __init__(
        self,
        dim: int,
        modality: str,
        dataset_name: str,
        model_id: str,
        normalized: bool,
        ids: Sequence[str],
        labels: Sequence[str],
        vectors,
        template_ids: Optional[Sequence[Optional[str]]] = None,
    ):
        self.dim = int(dim)
        self.modality = str(modality)
        self.dataset_name = str(dataset_name)
        self.model_id = str(model_id)
        self.normalized = bool(normalized)
        self.ids = tuple(ids)
        self.labels = tuple(labels)
        if template_ids is None:
            template_ids = (None,) * len(self.ids)
        self.template_ids = tuple(template_ids)

        mat = np.ascontiguousarray(vectors, dtype=np.float32)
        if mat.size == 0:
            mat = mat.reshape(0, self.dim)
        if mat.ndim != 2 or mat.shape != (len(self.ids), self.dim):
            raise StoreError(
                f"vector matrix shape {mat.shape} does not match "
                f"{len(self.ids)} items of dim {self.dim}"
            )
        if not (len(self.ids) == len(self.labels) == len(self.template_ids)):
            raise StoreError("ids, labels and template_ids must have equal length")
        mat.flags.writeable = False
        self.vectors = mat

    @property
    def count(self) -> int:
        return len(self.ids)

    def __len__(self) -> int:
        return self.count

    def item(self, position: int) -> EmbeddingItem:
        return EmbeddingItem(
            item_id=self.ids[position],
            class_label=self.labels[position],
            vector=self.vectors[position],
            prompt_template_id=self.template_ids[position],
        )

    @property
    def items(self) -> list[EmbeddingItem]:
        return [self.item(i) for i in range(self.count)]

    @classmethod
    def from_items(
        cls,
        dim: int,
        modality: str,
        dataset_name: str,
        model_id: str,
        normalized: bool,
        items: Sequence[EmbeddingItem],
    ) -> "EmbeddingStore":
        vectors = np.asarray([it.vector for it in items], dtype=np.float32)
        if len(items) == 0:
            vectors = vectors.reshape(0, dim)
        return cls(
            dim=dim,
            modality=modality,
            dataset_name=dataset_name,
            model_id=model_id,
            normalized=normalized,
            ids=[it.item_id for it in items],
            labels=[it.class_label for it in items],
            vectors=vectors,
            template_ids=[it.prompt_template_id for it in items],
        )

    def validate(self) -> None:
        """Check every store invariant, raising StoreError on the first violation."""
        if self.dim <= 0:
            raise StoreError(f"dim must be positive, got {self.dim}")
        if self.modality not in MODALITIES:
            raise StoreError(f"unknown modality {self.modality!r}")

        seen: set[str] = set()
        for item_id in self.ids:
            if not item_id:
                raise StoreError("empty item id")
            if item_id in seen:
                raise StoreError(f"duplicate id {item_id!r}")
            seen.add(item_id)

        for item_id, label in zip(self.ids, self.labels):
            if not label:
                raise StoreError(f"item {item_id!r} has an empty class label")

        want_template = self.modality == "text"
        for item_id, template_id in zip(self.ids, self.template_ids):
            if want_template and template_id is None:
                raise StoreError(f"text store item {item_id!r} is missing a template_id")
            if not want_template and template_id is not None:
                raise StoreError(f"image store item {item_id!r} carries a template_id")

        if self.count:
            finite = np.isfinite(self.vectors).all(axis=1)
            if not finite.all():
                bad = int(np.argmin(finite))
                raise StoreError(f"item {self.ids[bad]!r} has a non-finite vector component")
            if self.normalized:
                norms = row_norms(self.vectors)
                off = np.abs(norms - 1.0)
                if off.max() > UNIT_NORM_LOAD_TOL:
                    bad = int(off.argmax())
                    raise StoreError(
                        f"norm {float(norms[bad])!r} exceeds tolerance {UNIT_NORM_LOAD_TOL} "
                        f"for item {self.ids[bad]!r} in a normalized store"
                    )

    def __eq__(self, other) -> bool:
        if not isinstance(other, EmbeddingStore):
            return NotImplemented
        return (
            self.dim == other.dim
            and self.modality == other.modality
            and self.dataset_name == other.dataset_name
            and self.model_id == other.model_id
            and self.normalized == other.normalized
            and self.ids == other.ids
            and self.labels == other.labels
            and self.template_ids == other.template_ids
            and self.vectors.tobytes() == other.vectors.tobytes()
        )

    def __repr__(self) -> str:
        return (
            f"EmbeddingStore(dataset={self.dataset_name!r}, modality={self.modality!r}, "
            f"count={self.count}, dim={self.dim}, normalized={self.normalized})"
        )


class ClassIndex:
    """Mapping from class label to the ordered item positions in a store."""

    def __init__(self, buckets: dict[str, np.ndarray]):
        self._buckets = {label: np.asarray(pos, dtype=np.int64) for label, pos in buckets.items()}
        self.labels = tuple(self._buckets)

    @property
    def n_classes(self) -> int:
        return len(self.labels)

    def positions(self, label: str) -> np.ndarray:
        return self._buckets[label]

    def bucket_size(self, label: str) -> int:
        return int(self._buckets[label].size)

    def bucket_sizes(self) -> dict[str, int]:
        return {label: int(pos.size) for label, pos in self._buckets.items()}

    def __contains__(self, label: str) -> bool:
        return label in self._buckets

    def __len__(self) -> int:
        return self.n_classes


def build_class_index(store: EmbeddingStore) -> ClassIndex:
    """Group item positions by class label, preserving store order."""
    buckets: dict[str, list[int]] = {}
    for pos, label in enumerate(store.labels):
        buckets.setdefault(label, []).append(pos)
    return ClassIndex({label: np.asarray(pos, dtype=np.int64) for label, pos in buckets.items()})


def normalize(store: EmbeddingStore) -> EmbeddingStore:
    """Return a copy of ``store`` with every vector scaled to unit norm.

    Direction is preserved; the ``normalized`` flag is set on the result.
    Raises StoreError naming the offending item if any vector's norm is
    below ``ZERO_NORM_TOL``.
    """
    if store.count == 0:
        return EmbeddingStore(
            dim=store.dim,
            modality=store.modality,
            dataset_name=store.dataset_name,
            model_id=store.model_id,
            normalized=True,
            ids=store.ids,
            labels=store.labels,
            vectors=store.vectors,
            template_ids=store.template_ids,
        )
    norms = row_norms(store.vectors)
    if norms.min() < ZERO_NORM_TOL:
        bad = int(norms.argmin())
        raise StoreError(f"zero-norm vector for item {store.ids[bad]!r}")
    scaled = (store.vectors.astype(np.float64) / norms[:, None]).astype(np.float32)
    return EmbeddingStore(
        dim=store.dim,
        modality=store.modality,
        dataset_name=store.dataset_name,
        model_id=store.model_id,
        normalized=True,
        ids=store.ids,
        labels=store.labels,
        vectors=scaled,
        template_ids=store.template_ids,
    )


def _manifest_bytes(store: EmbeddingStore) -> bytes:
    manifest = {
        "dim": store.dim,
        "count": store.count,
        "modality": store.modality,
        "dataset_name": store.dataset_name,
        "model_id": store.model_id,
        "normalized": store.normalized,
        "items": [
            {"id": item_id, "class": label, "template_id": template_id}
            for item_id, label, template_id in zip(store.ids, store.labels, store.template_ids)
        ],
    }
    return json.dumps(manifest, separators=(",", ":")).encode("utf-8")


def write_store(store: EmbeddingStore, path) -> None:
    """Serialize a validated store to ``path`` in the container format."""
    store.validate()
    manifest = _manifest_bytes(store)
    header = MAGIC + len(manifest).to_bytes(4, "little")
    payload = store.vectors.astype("<f4", copy=False).tobytes()
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(manifest)
        fh.write(payload)


def read_store(path) -> EmbeddingStore:
    """Read and validate a store file, rejecting malformed input."""
    try:
        data = Path(path).read_bytes()
    except OSError as exc:
        raise StoreError(f"cannot read store file {path}: {exc}") from exc
    if len(data) < 12 or data[:8] != MAGIC:
        raise StoreError(f"bad magic bytes in {path}")
    manifest_len = int(np.frombuffer(data[8:12], dtype="<u4")[0])
    if 12 + manifest_len > len(data):
        raise StoreError(f"manifest length {manifest_len} overruns the file")
    try:
        manifest = json.loads(data[12 : 12 + manifest_len].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise StoreError(f"manifest is not valid UTF-8 JSON: {exc}") from exc

    if not isinstance(manifest, dict) or set(manifest) != _MANIFEST_KEYS:
        raise StoreError("manifest does not carry exactly the expected fields")
    dim = manifest["dim"]
    count = manifest["count"]
    items = manifest["items"]
    if not isinstance(dim, int) or not isinstance(count, int) or isinstance(dim, bool) or isinstance(count, bool):
        raise StoreError("manifest dim/count must be integers")
    if dim <= 0 or count < 0:
        raise StoreError(f"invalid dim={dim} count={count}")
    if not isinstance(items, list) or len(items) != count:
        raise StoreError(f"manifest lists {len(items)} items but count={count}")
    for entry in items:
        if not isinstance(entry, dict) or set(entry) != _ITEM_KEYS:
            raise StoreError("manifest item does not carry exactly id/class/template_id")
        if not isinstance(entry["id"], str) or not isinstance(entry["class"], str):
            raise StoreError("manifest item id/class must be strings")
        if entry["template_id"] is not None and not isinstance(entry["template_id"], str):
            raise StoreError("manifest item template_id must be a string or null")

    payload = data[12 + manifest_len :]
    expected = count * dim * 4
    if len(payload) != expected:
        raise StoreError(
            f"payload length mismatch: expected {expected} bytes for "
            f"{count}x{dim} float32, found {len(payload)}"
        )
    vectors = np.frombuffer(payload, dtype="<f4").reshape(count, dim)

    store = EmbeddingStore(
        dim=dim,
        modality=manifest["modality"],
        dataset_name=manifest["dataset_name"],
        model_id=manifest["model_id"],
        normalized=manifest["normalized"],
        ids=[entry["id"] for entry in items],
        labels=[entry["class"] for entry in items],
        vectors=vectors,
        template_ids=[entry["template_id"] for entry in items],
    )
    store.validate()
    return store

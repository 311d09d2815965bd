"""Incremental open-set classification over feature vectors.

Each taught class is represented by the mean of its sample features. A
query is labeled by its nearest prototype unless the first/second distance
ratio says the match is ambiguous, in which case it is Unknown — the signal
the workbench uses to ask the operator to teach the object.
"""

from __future__ import annotations

import json
import threading
import time
from dataclasses import dataclass, field

import numpy as np

from ..errors import (
    DimensionMismatch,
    DuplicateClass,
    EmptyRegistry,
    EmptySession,
    FormatError,
    InvalidInput,
    InvalidName,
    SessionFull,
    UnknownClass,
)

UNKNOWN = "Unknown"
DEFAULT_RATIO_THRESHOLD = 0.8
DEFAULT_ABSOLUTE_THRESHOLD = 0.5
DEFAULT_TARGET_SAMPLES = 200

_REGISTRY_FORMAT = "workbench-registry"
_REGISTRY_VERSION = 1


def _check_feature(values: np.ndarray, dim: int | None = None) -> np.ndarray:
    values = np.asarray(values, dtype=float)
    if values.ndim != 1 or values.size == 0 or not np.all(np.isfinite(values)):
        raise InvalidInput("feature must be a finite non-empty 1-D vector")
    if dim is not None and values.size != dim:
        raise DimensionMismatch(f"feature dimension {values.size}, expected {dim}")
    return values


@dataclass(frozen=True)
class ClassRecord:
    """One taught class: name plus its mean-feature prototype."""

    name: str
    prototype: np.ndarray
    sample_count: int
    created_at: float

    def __post_init__(self):
        proto = _check_feature(self.prototype)
        proto.flags.writeable = False
        object.__setattr__(self, "prototype", proto)
        if self.sample_count < 1:
            raise InvalidInput("sample_count must be >= 1")


@dataclass(frozen=True)
class ClassificationResult:
    """Outcome of one query: label (possibly Unknown) plus the evidence.

    `ratio` and `d2` are None when only one class exists; `single_class`
    flags that the absolute-distance fallback decided the label."""

    label: str
    d1: float
    d2: float | None = None
    ratio: float | None = None
    single_class: bool = False


@dataclass
class TeachingSession:
    """Accumulates samples for one new class as a running sum."""

    name: str
    target_samples: int = DEFAULT_TARGET_SAMPLES
    count: int = 0
    _sum: np.ndarray | None = field(default=None, repr=False)

    @property
    def prototype(self) -> np.ndarray:
        if self.count == 0:
            raise EmptySession(f"no samples for '{self.name}'")
        return self._sum / self.count


class ClassRegistry:
    """Thread-safe prototype store: concurrent classify, serialized writes.

    Readers snapshot the class tuple under the lock, so a classify racing a
    finalize sees either the old or the new class set, never half of one."""

    def __init__(self, dim: int | None = None):
        self._lock = threading.RLock()
        self._classes: dict[str, ClassRecord] = {}
        self._dim = dim

    @property
    def dim(self) -> int | None:
        with self._lock:
            return self._dim

    @property
    def names(self) -> list[str]:
        with self._lock:
            return list(self._classes)

    def __len__(self) -> int:
        with self._lock:
            return len(self._classes)

    def __contains__(self, name: str) -> bool:
        with self._lock:
            return name in self._classes

    def get(self, name: str) -> ClassRecord:
        with self._lock:
            if name not in self._classes:
                raise UnknownClass(name)
            return self._classes[name]

    def snapshot(self) -> tuple[ClassRecord, ...]:
        with self._lock:
            return tuple(self._classes.values())

    def _add(self, record: ClassRecord) -> None:
        with self._lock:
            if record.name in self._classes:
                raise DuplicateClass(record.name)
            if self._dim is None:
                self._dim = record.prototype.size
            elif record.prototype.size != self._dim:
                raise DimensionMismatch(
                    f"prototype dimension {record.prototype.size}, expected {self._dim}"
                )
            self._classes[record.name] = record


def begin_teaching(
    registry: ClassRegistry, name: str, target_samples: int = DEFAULT_TARGET_SAMPLES
) -> TeachingSession:
    """Open a sample-collection session for a new class name."""
    if not isinstance(name, str) or not name.strip():
        raise InvalidName("class name must be a non-empty string")
    if name == UNKNOWN:
        raise InvalidName(f"'{UNKNOWN}' is reserved")
    if target_samples < 1:
        raise InvalidInput("target_samples must be >= 1")
    if name in registry:
        raise DuplicateClass(name)
    return TeachingSession(name=name, target_samples=target_samples)


def add_sample(session: TeachingSession, feature: np.ndarray) -> TeachingSession:
    """Fold one feature into the session's running mean."""
    if session.count >= session.target_samples:
        raise SessionFull(f"session already holds {session.target_samples} samples")
    if session._sum is None:
        feature = _check_feature(feature)
        session._sum = feature.copy()
    else:
        feature = _check_feature(feature, session._sum.size)
        session._sum = session._sum + feature
    session.count += 1
    return session


def finalize_class(registry: ClassRegistry, session: TeachingSession) -> ClassRecord:
    """Commit the session's mean prototype to the registry atomically."""
    if session.count == 0:
        raise EmptySession(f"no samples for '{session.name}'")
    record = ClassRecord(
        name=session.name,
        prototype=session.prototype,
        sample_count=session.count,
        created_at=time.time(),
    )
    registry._add(record)
    return record


def classify(
    registry: ClassRegistry,
    query: np.ndarray,
    ratio_threshold: float = DEFAULT_RATIO_THRESHOLD,
    absolute_threshold: float = DEFAULT_ABSOLUTE_THRESHOLD,
) -> ClassificationResult:
    """Open-set nearest-neighbor classification.

    With two or more classes the query is labeled by its nearest prototype
    unless d1/d2 >= ratio_threshold (ambiguous -> Unknown). With a single
    class there is no second distance, so an absolute distance threshold
    decides instead and the result is flagged `single_class`."""
    if not (0.0 < ratio_threshold <= 1.0):
        raise InvalidInput("ratio threshold must be in (0, 1]")
    records = registry.snapshot()
    if not records:
        raise EmptyRegistry("no classes taught yet")
    query = _check_feature(query, records[0].prototype.size)

    protos = np.array([r.prototype for r in records])
    dists = np.linalg.norm(protos - query, axis=1)
    order = np.argsort(dists, kind="stable")
    d1 = float(dists[order[0]])
    nearest = records[order[0]].name

    if len(records) == 1:
        label = nearest if d1 < absolute_threshold else UNKNOWN
        return ClassificationResult(label=label, d1=d1, single_class=True)

    d2 = float(dists[order[1]])
    ratio = 1.0 if d2 == 0.0 else d1 / d2
    label = nearest if ratio < ratio_threshold else UNKNOWN
    return ClassificationResult(label=label, d1=d1, d2=d2, ratio=ratio)


def remove_class(registry: ClassRegistry, name: str) -> ClassRegistry:
    """Drop a taught class; later classifications never return it."""
    with registry._lock:
        if name not in registry._classes:
            raise UnknownClass(name)
        del registry._classes[name]
    return registry


def save_registry(registry: ClassRegistry, destination) -> None:
    """Write the registry as versioned JSON; prototypes round-trip bit-exact."""
    records = registry.snapshot()
    payload = {
        "format": _REGISTRY_FORMAT,
        "version": _REGISTRY_VERSION,
        "dim": registry.dim,
        "classes": [
            {
                "name": r.name,
                "prototype": [float(x) for x in r.prototype],
                "sample_count": r.sample_count,
                "created_at": r.created_at,
            }
            for r in records
        ],
    }
    with open(destination, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=1)


def load_registry(source) -> ClassRegistry:
    """Inverse of save_registry; corrupt payloads raise FormatError."""
    try:
        with open(source, "r", encoding="utf-8") as fh:
            payload = json.load(fh)
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise FormatError(f"unreadable registry payload: {exc}") from exc
    try:
        if payload["format"] != _REGISTRY_FORMAT or payload["version"] != _REGISTRY_VERSION:
            raise FormatError("unrecognized registry format or version")
        registry = ClassRegistry(dim=payload["dim"])
        for entry in payload["classes"]:
            registry._add(
                ClassRecord(
                    name=entry["name"],
                    prototype=np.array(entry["prototype"], dtype=float),
                    sample_count=int(entry["sample_count"]),
                    created_at=float(entry["created_at"]),
                )
            )
    except FormatError:
        raise
    except (KeyError, TypeError, ValueError, InvalidInput) as exc:
        raise FormatError(f"malformed registry payload: {exc}") from exc
    return registry

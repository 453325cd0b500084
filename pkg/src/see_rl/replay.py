"""Experience stores: the transition buffer and the parameter buffer.

Both are fixed-capacity FIFO rings with seeded uniform sampling *with
replacement* (the parameter buffer is routinely asked for more draws than
it holds). Sampling never mutates contents and is reproducible from the
generator seed and call sequence.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError


@dataclass
class Transition:
    s: np.ndarray
    a: int
    r: float
    s_next: np.ndarray
    terminated: bool
    truncated: bool


@dataclass
class TransitionBatch:
    """Column-wise view of sampled transitions."""

    s: np.ndarray          # (batch, obs_dim)
    a: np.ndarray          # (batch,) int
    r: np.ndarray          # (batch,)
    s_next: np.ndarray     # (batch, obs_dim)
    terminated: np.ndarray # (batch,) bool
    truncated: np.ndarray  # (batch,) bool

    def __len__(self) -> int:
        return len(self.a)

    def to_transitions(self) -> list[Transition]:
        return [
            Transition(
                self.s[i].copy(),
                int(self.a[i]),
                float(self.r[i]),
                self.s_next[i].copy(),
                bool(self.terminated[i]),
                bool(self.truncated[i]),
            )
            for i in range(len(self))
        ]

    @classmethod
    def from_transitions(cls, transitions, dtype=np.float32) -> "TransitionBatch":
        return cls(
            s=np.array([t.s for t in transitions], dtype=dtype),
            a=np.array([t.a for t in transitions], dtype=np.int64),
            r=np.array([t.r for t in transitions], dtype=dtype),
            s_next=np.array([t.s_next for t in transitions], dtype=dtype),
            terminated=np.array([t.terminated for t in transitions], dtype=bool),
            truncated=np.array([t.truncated for t in transitions], dtype=bool),
        )


_DUMP_MAGIC = b"SEEBUF01"


class TransitionBuffer:
    """Ring buffer of environment transitions with uniform sampling."""

    def __init__(self, capacity: int, obs_dim: int, rng: np.random.Generator, dtype=np.float32):
        if capacity < 1:
            raise ConfigurationError(f"capacity must be positive, got {capacity}")
        self.capacity = int(capacity)
        self.obs_dim = int(obs_dim)
        self._rng = rng
        self._dtype = np.dtype(dtype)
        self._s = np.zeros((capacity, obs_dim), dtype=dtype)
        self._a = np.zeros(capacity, dtype=np.int64)
        self._r = np.zeros(capacity, dtype=dtype)
        self._s_next = np.zeros((capacity, obs_dim), dtype=dtype)
        self._terminated = np.zeros(capacity, dtype=bool)
        self._truncated = np.zeros(capacity, dtype=bool)
        self._size = 0
        self._next = 0

    def __len__(self) -> int:
        return self._size

    def push(self, s, a, r, s_next, terminated, truncated) -> None:
        i = self._next
        self._s[i] = s
        self._a[i] = a
        self._r[i] = r
        self._s_next[i] = s_next
        self._terminated[i] = terminated
        self._truncated[i] = truncated
        self._next = (i + 1) % self.capacity
        self._size = min(self._size + 1, self.capacity)

    def push_transition(self, t: Transition) -> None:
        self.push(t.s, t.a, t.r, t.s_next, t.terminated, t.truncated)

    def sample(self, batch: int) -> TransitionBatch:
        """Uniform with replacement; deterministic given the buffer's rng state."""
        if self._size == 0:
            raise RuntimeError("cannot sample from an empty transition buffer")
        if batch < 1:
            raise ConfigurationError(f"batch must be positive, got {batch}")
        idx = self._rng.integers(0, self._size, size=batch)
        return TransitionBatch(
            s=self._s[idx],
            a=self._a[idx],
            r=self._r[idx],
            s_next=self._s_next[idx],
            terminated=self._terminated[idx],
            truncated=self._truncated[idx],
        )

    def oldest_first(self) -> list[Transition]:
        """Stored transitions in insertion order (oldest first)."""
        if self._size < self.capacity:
            order = range(self._size)
        else:
            order = [(self._next + k) % self.capacity for k in range(self.capacity)]
        return [
            Transition(
                self._s[i].copy(),
                int(self._a[i]),
                float(self._r[i]),
                self._s_next[i].copy(),
                bool(self._terminated[i]),
                bool(self._truncated[i]),
            )
            for i in order
        ]

    # Debug dump/restore: magic, u32 header length, JSON header, raw arrays.
    def save(self, path) -> None:
        header = {
            "capacity": self.capacity,
            "obs_dim": self.obs_dim,
            "size": self._size,
            "next": self._next,
            "dtype": self._dtype.name,
            "rng_state": _encode_rng_state(self._rng),
        }
        blob = json.dumps(header).encode()
        with open(path, "wb") as f:
            f.write(_DUMP_MAGIC)
            f.write(struct.pack("<I", len(blob)))
            f.write(blob)
            for arr in (self._s, self._a, self._r, self._s_next, self._terminated, self._truncated):
                f.write(arr.tobytes())

    @classmethod
    def load(cls, path) -> "TransitionBuffer":
        with open(path, "rb") as f:
            if f.read(len(_DUMP_MAGIC)) != _DUMP_MAGIC:
                raise ConfigurationError(f"{path}: not a transition-buffer dump")
            (blob_len,) = struct.unpack("<I", f.read(4))
            header = json.loads(f.read(blob_len).decode())
            buf = cls(
                header["capacity"],
                header["obs_dim"],
                rng=np.random.default_rng(),
                dtype=np.dtype(header["dtype"]),
            )
            buf._size = header["size"]
            buf._next = header["next"]
            _restore_rng_state(buf._rng, header["rng_state"])
            for name in ("_s", "_a", "_r", "_s_next", "_terminated", "_truncated"):
                arr = getattr(buf, name)
                raw = f.read(arr.nbytes)
                arr[...] = np.frombuffer(raw, dtype=arr.dtype).reshape(arr.shape)
        return buf


class ParameterBuffer:
    """Ring buffer of frozen parameter-vector snapshots."""

    def __init__(self, capacity: int, rng: np.random.Generator):
        if capacity < 1:
            raise ConfigurationError(f"capacity must be positive, got {capacity}")
        self.capacity = int(capacity)
        self._rng = rng
        self._storage: list[np.ndarray] = []
        self._next = 0

    def __len__(self) -> int:
        return len(self._storage)

    def push(self, params: np.ndarray) -> None:
        snapshot = np.array(params, copy=True)
        snapshot.setflags(write=False)
        if len(self._storage) < self.capacity:
            self._storage.append(snapshot)
        else:
            self._storage[self._next] = snapshot
        self._next = (self._next + 1) % self.capacity

    def sample(self, batch: int) -> list[np.ndarray]:
        """Uniform with replacement; batch may exceed the buffer size."""
        if not self._storage:
            raise RuntimeError("cannot sample from an empty parameter buffer")
        if batch < 1:
            raise ConfigurationError(f"batch must be positive, got {batch}")
        idx = self._rng.integers(0, len(self._storage), size=batch)
        return [self._storage[i] for i in idx]

    def oldest_first(self) -> list[np.ndarray]:
        if len(self._storage) < self.capacity:
            return list(self._storage)
        return [self._storage[(self._next + k) % self.capacity] for k in range(self.capacity)]


def _encode_rng_state(rng: np.random.Generator) -> dict:
    state = rng.bit_generator.state
    return json.loads(json.dumps(state, default=int))


def _restore_rng_state(rng: np.random.Generator, state: dict) -> None:
    rng.bit_generator.state = state

"""Versioned binary checkpoints of a GA run.

Layout: magic (8 bytes) | format version (u16) | header length (u32) |
JSON header | members (int8) | fitness (int64) | evaluated (bool).
"""

from __future__ import annotations

import json
import os
import struct
from pathlib import Path

import numpy as np

from .evolve import Population

MAGIC = b"AIMKTCKP"
VERSION = 1
_PREFIX = struct.Struct("<8sHI")


class CheckpointError(RuntimeError):
    pass


def save_checkpoint(path, pop: Population, rng: np.random.Generator, history, *, config_hash: str, mode: str, seeds: dict):
    header = {
        "config_hash": config_hash,
        "mode": mode,
        "seeds": seeds,
        "generation": pop.generation,
        "shape": list(pop.members.shape),
        "rng_state": rng.bit_generator.state,
        "history": [list(h) for h in history],
    }
    blob = json.dumps(header).encode()
    path = Path(path)
    tmp = path.with_suffix(path.suffix + ".tmp")
    with open(tmp, "wb") as fh:
        fh.write(_PREFIX.pack(MAGIC, VERSION, len(blob)))
        fh.write(blob)
        fh.write(np.ascontiguousarray(pop.members, dtype=np.int8).tobytes())
        fh.write(np.ascontiguousarray(pop.fitness, dtype="<i8").tobytes())
        fh.write(np.ascontiguousarray(pop.evaluated, dtype=bool).tobytes())
    os.replace(tmp, path)


def load_checkpoint(path, *, config_hash: str | None = None, mode: str | None = None):
    """Returns ``(population, rng, history, header)``; refuses foreign checkpoints."""
    data = Path(path).read_bytes()
    if len(data) < _PREFIX.size:
        raise CheckpointError(f"{path}: truncated checkpoint")
    magic, version, hlen = _PREFIX.unpack_from(data)
    if magic != MAGIC:
        raise CheckpointError(f"{path}: not a checkpoint file")
    if version != VERSION:
        raise CheckpointError(f"{path}: format version {version}, this build reads {VERSION}")
    off = _PREFIX.size
    header = json.loads(data[off : off + hlen])
    off += hlen
    if config_hash is not None and header["config_hash"] != config_hash:
        raise CheckpointError(
            f"{path}: written for config {header['config_hash']}, current config is {config_hash}"
        )
    if mode is not None and header["mode"] != mode:
        raise CheckpointError(f"{path}: checkpoint is for mode {header['mode']!r}, not {mode!r}")
    count, n_actions = header["shape"]
    expected = off + count * n_actions + count * 8 + count
    if len(data) != expected:
        raise CheckpointError(f"{path}: size {len(data)} does not match header ({expected})")
    members = np.frombuffer(data, np.int8, count * n_actions, off).reshape(count, n_actions).copy()
    off += count * n_actions
    fitness = np.frombuffer(data, "<i8", count, off).astype(np.int64)
    off += count * 8
    evaluated = np.frombuffer(data, bool, count, off).copy()
    rng = np.random.Generator(np.random.PCG64())
    rng.bit_generator.state = header["rng_state"]
    pop = Population(header["generation"], members, fitness, evaluated)
    history = [tuple(h) for h in header["history"]]
    return pop, rng, history, header

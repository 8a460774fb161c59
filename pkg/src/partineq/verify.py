"""Checkpointed sweeps of q_d^(2)(n) - Q_d^(2[,-])(n) over 0 <= n <= n_cap.

The congruence table is built part by part; after each part every entry below
the next allowed part is final, so signs are emitted in increasing n while the
table is still being filled.  A checkpoint stores the partially built table,
the index of the next part, how far signs were emitted and the negatives seen
so far.  The d-distinct side is cheap and is recomputed on resume.

Checkpoint file layout::

    magic b"PTCK", u16 version, u32 header length, JSON header,
    encoded table values (see seriesio.encode_ints), 32-byte sha256 of all
    preceding bytes
"""

from __future__ import annotations

import enum
import hashlib
import json
import os
import struct
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .errors import CheckpointError, DomainError
from .exact import (
    DEFAULT_MEMORY_BUDGET, CongruenceDP, FamilyConfig, check_capacity, count_distinct,
)
from .seriesio import CacheFormatError, decode_ints, encode_ints

CHECKPOINT_MAGIC = b"PTCK"
CHECKPOINT_VERSION = 1
DEFAULT_CHECKPOINT_EVERY = 100_000
_PREFIX = struct.Struct("<4sHI")
_SIGN = {-1: b"-", 0: b"0", 1: b"+"}


class Mode(str, enum.Enum):
    DELTA_MINUS = "delta-minus"
    DELTA = "delta"


@dataclass(frozen=True)
class SweepJob:
    d: int
    mode: Mode
    n_cap: int
    checkpoint_every: int = DEFAULT_CHECKPOINT_EVERY
    resume_from: str | None = None

    def __post_init__(self):
        if not isinstance(self.mode, Mode):
            object.__setattr__(self, "mode", Mode(self.mode))
        if self.d < 1:
            raise DomainError("d must be >= 1")
        if self.n_cap < 1:
            raise DomainError("n_cap must be >= 1")
        if self.checkpoint_every < 1:
            raise DomainError("checkpoint_every must be >= 1")

    @property
    def family(self) -> FamilyConfig:
        return FamilyConfig(self.d, 2, self.mode is Mode.DELTA_MINUS)

    def config_hash(self) -> str:
        text = json.dumps(
            {"d": self.d, "a": 2, "mode": self.mode.value, "n_cap": self.n_cap,
             "checkpoint_every": self.checkpoint_every, "format": CHECKPOINT_VERSION},
            sort_keys=True,
        )
        return hashlib.sha256(text.encode()).hexdigest()

    def to_dict(self) -> dict:
        return {"d": self.d, "mode": self.mode.value, "n_cap": self.n_cap,
                "checkpoint_every": self.checkpoint_every}


@dataclass(frozen=True)
class VerificationReport:
    job: SweepJob
    negatives: tuple          # (n, delta) pairs with delta < 0, sorted by n
    max_n_verified: int
    wall_time: float
    checkpoint_chain: tuple   # chained sha256 of emitted signs, one per checkpoint
    sign_digest: str          # chain value over every emitted sign
    complete: bool
    deltas: tuple | None = field(default=None, compare=False, repr=False)

    @property
    def negative_set(self) -> set[int]:
        return {n for n, _ in self.negatives}

    @property
    def predicted(self) -> set[int] | None:
        return predicted_negatives(self.job.d, self.job.mode)

    def matches_prediction(self) -> bool:
        pred = self.predicted
        if pred is None:
            return not self.negatives
        # a truncated sweep can only be compared on the range it covered
        return self.negative_set == {n for n in pred if n <= self.max_n_verified}

    def to_dict(self) -> dict:
        pred = self.predicted
        return {
            "artifact_version": __version__,
            "job": self.job.to_dict(),
            "negatives": [{"n": n, "delta_decimal": str(v)} for n, v in self.negatives],
            "max_n_verified": self.max_n_verified,
            "complete": self.complete,
            "checkpoints": list(self.checkpoint_chain),
            "sign_digest": self.sign_digest,
            "predicted_negatives": None if pred is None else sorted(pred),
            "matches_prediction": self.matches_prediction(),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    def negatives_csv(self) -> str:
        lines = ["d,mode,n,delta"]
        lines += [f"{self.job.d},{self.job.mode.value},{n},{v}" for n, v in self.negatives]
        return "\n".join(lines) + "\n"


def predicted_negatives(d: int, mode: Mode) -> set[int] | None:
    """Negative indices predicted by the known results, or None where they are silent."""
    mode = Mode(mode)
    if mode is Mode.DELTA_MINUS:
        if 6 <= d <= 61 or d in (1, 3, 4, 5):
            return set()
        return None
    if 6 <= d <= 61:
        return {d + 1, d + 3, d + 5} if d % 2 else set()
    return None


# -- checkpoint files -----------------------------------------------------------


@dataclass
class SweepState:
    next_index: int
    emitted_upto: int
    negatives: list
    chain: list
    values: np.ndarray


def _chain(prev: str, segment_digest: bytes) -> str:
    return hashlib.sha256(bytes.fromhex(prev) + segment_digest).hexdigest()


def _genesis(job: SweepJob) -> str:
    return hashlib.sha256(job.config_hash().encode()).hexdigest()


def write_checkpoint(path, job: SweepJob, state: SweepState) -> str:
    """Atomically write a checkpoint; returns the file's sha256."""
    header = json.dumps({
        "config_hash": job.config_hash(),
        "job": job.to_dict(),
        "next_index": state.next_index,
        "emitted_upto": state.emitted_upto,
        "negatives": [[n, str(v)] for n, v in state.negatives],
        "chain": state.chain,
        "length": len(state.values),
    }, sort_keys=True).encode()
    body = _PREFIX.pack(CHECKPOINT_MAGIC, CHECKPOINT_VERSION, len(header)) + header
    body += encode_ints(state.values.tolist())
    digest = hashlib.sha256(body).digest()
    path = Path(path)
    tmp = path.with_name(path.name + ".tmp")
    with open(tmp, "wb") as fh:
        fh.write(body + digest)
        fh.flush()
        os.fsync(fh.fileno())
    os.replace(tmp, path)
    return digest.hex()


def read_checkpoint(path, job: SweepJob) -> SweepState:
    try:
        buf = Path(path).read_bytes()
    except OSError as exc:
        raise CheckpointError(f"cannot read checkpoint: {exc}") from exc
    if len(buf) < _PREFIX.size + 32:
        raise CheckpointError("checkpoint truncated")
    body, digest = buf[:-32], buf[-32:]
    if hashlib.sha256(body).digest() != digest:
        raise CheckpointError("checkpoint content hash mismatch (corrupt or truncated)")
    magic, version, hlen = _PREFIX.unpack_from(body, 0)
    if magic != CHECKPOINT_MAGIC:
        raise CheckpointError("not a checkpoint file")
    if version != CHECKPOINT_VERSION:
        raise CheckpointError(f"checkpoint version {version} is not supported")
    try:
        header = json.loads(body[_PREFIX.size:_PREFIX.size + hlen])
    except ValueError as exc:
        raise CheckpointError("checkpoint header is not valid JSON") from exc
    if header.get("config_hash") != job.config_hash():
        raise CheckpointError("checkpoint was written for a different job (config hash mismatch)")
    length = header["length"]
    try:
        values, end = decode_ints(body, length, _PREFIX.size + hlen)
    except CacheFormatError as exc:
        raise CheckpointError(f"checkpoint payload damaged: {exc}") from exc
    if end != len(body) or length != job.n_cap + 1:
        raise CheckpointError("checkpoint payload has the wrong size")
    arr = np.empty(length, dtype=object)
    arr[:] = values
    return SweepState(
        next_index=header["next_index"],
        emitted_upto=header["emitted_upto"],
        negatives=[(n, int(v)) for n, v in header["negatives"]],
        chain=list(header["chain"]),
        values=arr,
    )


# -- the sweep ----------------------------------------------------------------


def run_sweep(job: SweepJob, *, checkpoint_path=None, stop_after: int | None = None,
              memory_budget: int | None = DEFAULT_MEMORY_BUDGET,
              keep_deltas: bool = False) -> VerificationReport:
    """Compute the sign of the difference at every 0 <= n <= n_cap.

    With ``checkpoint_path`` a checkpoint is written each time emission
    reaches a multiple of ``checkpoint_every``.  ``stop_after`` ends the run
    after that many checkpoints (an interrupted run); resume it with
    ``job.resume_from``.
    """
    start = time.perf_counter()
    if keep_deltas and job.resume_from is not None:
        raise DomainError("keep_deltas is only available for runs from the start")
    check_capacity(job.n_cap, memory_budget, rows=3)
    n_cap = job.n_cap
    q = count_distinct(job.d, 2, n_cap, memory_budget=None).values

    if job.resume_from is not None:
        state = read_checkpoint(job.resume_from, job)
        dp = CongruenceDP(job.family, n_cap, values=state.values, next_index=state.next_index)
    else:
        dp = CongruenceDP(job.family, n_cap)
        state = SweepState(0, 0, [], [_genesis(job)], dp.values)

    every = job.checkpoint_every
    segment = hashlib.sha256()
    written = 0
    deltas = [] if keep_deltas else None
    values = dp.values

    def emit(upto):
        nonlocal segment, written
        n = state.emitted_upto
        while n < upto:
            stop = min(upto, (n // every + 1) * every)
            signs = bytearray()
            for i in range(n, stop):
                diff = q[i] - values[i]
                if keep_deltas:
                    deltas.append(diff)
                if diff < 0:
                    state.negatives.append((i, diff))
                    signs += b"-"
                else:
                    signs += b"+" if diff else b"0"
            segment.update(bytes(signs))
            n = stop
            state.emitted_upto = n
            if n % every == 0 or n == n_cap + 1:
                state.chain.append(_chain(state.chain[-1], segment.digest()))
                segment = hashlib.sha256()
                if n % every == 0 and n <= n_cap and checkpoint_path is not None:
                    state.next_index = dp.next_index
                    write_checkpoint(checkpoint_path, job, state)
                    written += 1
                    if stop_after is not None and written >= stop_after:
                        return True
        return False

    interrupted = False
    while not interrupted:
        interrupted = emit(dp.final_below)
        if dp.done or interrupted:
            break
        dp.step()
    if not interrupted:
        emit(n_cap + 1)

    complete = state.emitted_upto == n_cap + 1
    return VerificationReport(
        job=job,
        negatives=tuple(state.negatives),
        max_n_verified=state.emitted_upto - 1,
        wall_time=time.perf_counter() - start,
        checkpoint_chain=tuple(state.chain[1:]),
        sign_digest=state.chain[-1],
        complete=complete,
        deltas=tuple(deltas) if keep_deltas else None,
    )


def exception_set(d: int, n_cap: int, mode: Mode = Mode.DELTA, **kwargs) -> set[int]:
    """Indices n <= n_cap where the difference is negative."""
    report = run_sweep(SweepJob(d, mode, n_cap), **kwargs)
    return report.negative_set


def _run_job(args):
    job, kwargs = args
    return run_sweep(job, **kwargs)


def run_sweeps(jobs, workers: int = 1, **kwargs) -> list[VerificationReport]:
    """Run independent jobs, in parallel across processes when workers > 1."""
    jobs = list(jobs)
    if workers <= 1 or len(jobs) <= 1:
        return [run_sweep(j, **kwargs) for j in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_run_job, [(j, kwargs) for j in jobs]))

"""JSON-lines measurement records.

One line per snapshot.  Simulated records carry ``{seed, stream_id, n, d,
outcome_bits}``, enough to regenerate the circuit from the counter-based RNG
stream; externally produced records replace seed/stream_id with an explicit
``gates`` entry (``{"layers": [...]}`` or ``{"symplectic", "phases"}``).
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .circuits import INF


def depth_to_json(d):
    return "inf" if d == INF else int(d)


def snapshot_to_record(snap) -> dict:
    rec = {"n": snap.n, "d": depth_to_json(snap.d), "outcome_bits": "".join(str(int(b)) for b in snap.bits)}
    if snap.gates is not None:
        rec["gates"] = snap.gates
    else:
        rec["seed"] = int(snap.seed)
        rec["stream_id"] = int(snap.stream_id)
    return rec


def record_to_snapshot(rec: dict):
    from .shadows import Snapshot

    bits = rec["outcome_bits"]
    if isinstance(bits, str):
        bits = [int(c) for c in bits]
    missing = {"n", "d"} - rec.keys()
    if missing:
        raise ValueError(f"record lacks {sorted(missing)}")
    if "gates" not in rec and not {"seed", "stream_id"} <= rec.keys():
        raise ValueError("record needs either seed/stream_id or explicit gates")
    return Snapshot(
        n=int(rec["n"]),
        d=rec["d"],
        bits=np.asarray(bits, dtype=np.uint8),
        seed=rec.get("seed"),
        stream_id=rec.get("stream_id"),
        gates=rec.get("gates"),
    )


def write_records(path, snapshots) -> int:
    count = 0
    with Path(path).open("w") as fh:
        for s in snapshots:
            fh.write(json.dumps(snapshot_to_record(s)) + "\n")
            count += 1
    return count


def read_records(path) -> list:
    out = []
    with Path(path).open() as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line:
                continue
            try:
                out.append(record_to_snapshot(json.loads(line)))
            except (ValueError, KeyError) as err:
                raise ValueError(f"{path}:{lineno}: {err}") from err
    return out

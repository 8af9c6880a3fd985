"""CSV, PGM, and run-manifest emission.

All files use LF line endings and '.' decimals; floats are written with
repr so identical runs produce byte-identical payloads.
"""

from __future__ import annotations

import csv
import json
import sys
from contextlib import contextmanager
from datetime import datetime, timezone
from typing import Iterable, Iterator, Sequence, TextIO

from . import __version__, kernels

SWEEP_HEADER = ["p", "eps", "L", "burnin", "measure_steps", "replicas", "seed",
                "current_mean", "current_stderr"]
DENSITY_HEADER = ["p", "eps", "L", "mode", "bin_index", "site_lo", "site_hi",
                  "density"]
THRESHOLD_HEADER = ["p", "eps_star", "tolerance", "noise_floor"]
ORACLE_HEADER = ["state_index", "bitstring", "engine_count", "stationary_prob",
                 "in_ph", "in_omega_inf"]


def fnum(x) -> str:
    """Deterministic text form of a number; shortest round-tripping float repr."""
    if isinstance(x, bool):
        return "1" if x else "0"
    if isinstance(x, int):
        return str(x)
    if x is None:
        return ""
    return repr(float(x))


@contextmanager
def open_output(path: str | None) -> Iterator[TextIO]:
    """The named file, or stdout when path is None."""
    if path is None:
        yield sys.stdout
    else:
        with open(path, "w", newline="") as handle:
            yield handle


def write_csv(handle: TextIO, header: Sequence[str],
              rows: Iterable[Sequence[str]]) -> None:
    writer = csv.writer(handle, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow(row)


def write_pgm(path: str, density_rows: Sequence[Sequence[float]]) -> None:
    """Plain-text grayscale image: density 0 -> 255 (white), 1 -> 0 (black)."""
    height = len(density_rows)
    width = len(density_rows[0]) if height else 0
    lines = [f"P2", f"{width} {height}", "255"]
    for row in density_rows:
        pixels = [str(max(0, min(255, round(255 * (1.0 - d))))) for d in row]
        lines.append(" ".join(pixels))
    with open(path, "w", newline="") as handle:
        handle.write("\n".join(lines) + "\n")


def write_manifest(csv_path: str, command: str, argv: Sequence[str],
                   parameters: dict, master_seed: int,
                   outputs: Sequence[str]) -> str:
    """JSON sidecar recording everything needed to reproduce the outputs."""
    manifest = {
        "command": command,
        "argv": list(argv),
        "parameters": parameters,
        "master_seed": master_seed,
        "version": __version__,
        "kernel_backend": kernels.BACKEND,
        "timestamp": datetime.now(timezone.utc).isoformat(),
        "outputs": list(outputs),
    }
    path = csv_path + ".manifest.json"
    with open(path, "w", newline="") as handle:
        json.dump(manifest, handle, indent=2, sort_keys=True)
        handle.write("\n")
    return path

"""Disk cache for branch boundary data.

One JSON record per (boundary condition, level index, eta, grid fingerprint)
holding the eigenvalue and the boundary values of the eigenfunction; eta is
serialized as a 17-significant-digit decimal so keys round-trip exactly.
Appending is line-oriented, so interrupted runs leave a usable cache, and
cached results are the solver's own doubles, making cache-on and cache-off
runs bit-identical.
"""

from __future__ import annotations

import json
import os
from pathlib import Path
from typing import Dict, List, Optional, Tuple

import numpy as np

__all__ = ["BranchCache", "default_cache_dir"]

_SCHEMA = 1


def default_cache_dir() -> Optional[Path]:
    env = os.environ.get("MAGSPEC_CACHE")
    return Path(env) if env else None


def _eta_key(eta: float) -> str:
    return f"{eta:.17g}"


class BranchCache:
    """Append-only JSONL store of (bc, n, eta, grid) -> scalar branch data.

    Only scalar boundary data is persisted; eigenfunction samples are always
    recomputed.  A record whose grid fingerprint does not match the active
    discretization is ignored, which is the whole cache-invalidation story.
    """

    def __init__(self, directory: Path):
        self.directory = Path(directory)
        self.directory.mkdir(parents=True, exist_ok=True)
        self.path = self.directory / "branches.jsonl"
        self._mem: Dict[Tuple[str, str, str], Dict[int, Tuple[float, float, float]]] = {}
        self._load()

    def _load(self):
        if not self.path.exists():
            return
        with open(self.path, "r", encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if not line:
                    continue
                try:
                    rec = json.loads(line)
                except json.JSONDecodeError:
                    continue
                if rec.get("v") != _SCHEMA:
                    continue
                key = (rec["bc"], rec["grid"], rec["eta"])
                self._mem.setdefault(key, {})[rec["n"]] = (
                    rec["lam"],
                    rec["u"],
                    rec["du"],
                )

    def get(self, bc, grid, eta: float, n_max: int):
        """Scalar record in SpectrumCache layout, or None on any miss."""
        key = (bc.label, grid.fingerprint, _eta_key(eta))
        rows = self._mem.get(key)
        if rows is None:
            return None
        if any(n not in rows for n in range(n_max + 1)):
            return None
        lams = np.array([rows[n][0] for n in range(n_max + 1)])
        us = np.array([rows[n][1] for n in range(n_max + 1)])
        dus = np.array([rows[n][2] for n in range(n_max + 1)])
        return (n_max, lams, us, dus)

    def put(self, bc, grid, eta: float, pairs) -> None:
        key = (bc.label, grid.fingerprint, _eta_key(eta))
        rows = self._mem.setdefault(key, {})
        new_lines: List[str] = []
        for p in pairs:
            if p.n in rows:
                continue
            rows[p.n] = (p.lam, p.boundary_value, p.boundary_derivative)
            new_lines.append(
                json.dumps(
                    {
                        "v": _SCHEMA,
                        "bc": bc.label,
                        "grid": grid.fingerprint,
                        "eta": _eta_key(eta),
                        "n": p.n,
                        "lam": p.lam,
                        "u": p.boundary_value,
                        "du": p.boundary_derivative,
                    },
                    sort_keys=True,
                )
            )
        if new_lines:
            with open(self.path, "a", encoding="utf-8") as fh:
                fh.write("\n".join(new_lines) + "\n")

    def __len__(self) -> int:
        return sum(len(v) for v in self._mem.values())

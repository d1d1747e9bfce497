"""Performance-profile transform and CSV emission.

A profile reports, for each method and each threshold tau, the fraction of
cases whose measure is within a factor tau of the best method on that case.
The tau grid is exactly the set of observed ratios, so the emitted profile
is the exact empirical curve.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

__all__ = ["Profile", "performance_profile", "write_csv"]

_TINY = 1e-12


@dataclass
class Profile:
    methods: list[str]
    taus: np.ndarray
    fractions: dict[str, np.ndarray]

    def rows(self) -> list[dict]:
        out = []
        for method in self.methods:
            for tau, frac in zip(self.taus, self.fractions[method]):
                out.append({"method": method, "tau": f"{tau:.9g}", "fraction": f"{frac:.9g}"})
        return out


def performance_profile(values: dict[str, dict[str, float]]) -> Profile:
    """values[method][case] = positive measure; lower is better."""
    methods = list(values)
    if not methods:
        raise ValueError("no methods to profile")
    cases = sorted(set().union(*(values[m].keys() for m in methods)))
    if not cases:
        raise ValueError("no cases to profile")
    table = np.array(
        [[max(values[m][c], _TINY) for c in cases] for m in methods], dtype=np.float64
    )
    best = table.min(axis=0)
    ratios = table / best
    taus = np.unique(np.concatenate((ratios.ravel(), [1.0])))
    fractions = {
        m: (ratios[i][None, :] <= taus[:, None]).mean(axis=1)
        for i, m in enumerate(methods)
    }
    return Profile(methods, taus, fractions)


def write_csv(path, fieldnames, rows) -> None:
    """CSV with a single timestamp comment line above the header."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    stamp = datetime.now(timezone.utc).isoformat(timespec="seconds")
    with open(path, "w", newline="") as handle:
        handle.write(f"# generated: {stamp}\n")
        writer = csv.DictWriter(handle, fieldnames=fieldnames)
        writer.writeheader()
        for row in rows:
            writer.writerow(row)

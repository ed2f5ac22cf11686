"""Evaluation-method descriptors shared by integration and sup-norms."""
from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class Exact:
    name = "exact"


@dataclass(frozen=True)
class MonteCarlo:
    samples: int
    seed: int = 0
    workers: int = 1
    name = "mc"

    def __post_init__(self):
        if self.samples < 2:
            raise ValueError("Monte Carlo needs at least 2 samples")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")


EXACT = Exact()


def mc(samples: int, seed: int = 0, workers: int = 1) -> MonteCarlo:
    return MonteCarlo(int(samples), int(seed), int(workers))


def method_from_json(obj: dict):
    kind = obj.get("kind", "exact")
    if kind == "exact":
        return EXACT
    if kind in ("mc", "sampled"):
        return MonteCarlo(int(obj["samples"]), int(obj.get("seed", 0)), int(obj.get("workers", 1)))
    raise ValueError(f"unknown method kind {kind!r}")

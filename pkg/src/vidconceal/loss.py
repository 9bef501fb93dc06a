"""Seeded random macroblock loss masks.

Losses are exact-count (round(rate * total) MBs per frame, sampled without
replacement) rather than per-MB Bernoulli, which keeps trial variance down.
A lost MB loses both its pixels and its motion vector. Frame 0 is treated as
intra/error-free and never receives losses.

The PRNG is NumPy's PCG64 keyed on (seed, trial_index, frame_index), a fixed
algorithm rather than any platform default, so masks are reproducible across
runs for a given NumPy version.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .core import MbAddress, MbState, MbStatusMap

_U64 = (1 << 64) - 1


@dataclass(frozen=True)
class TrialConfig:
    rate: float
    seed: int
    trial_index: int = 0

    def __post_init__(self):
        if not 0.0 <= self.rate <= 1.0:
            raise ValueError(f"loss rate {self.rate} outside [0, 1]")
        if self.trial_index < 0:
            raise ValueError("trial_index must be >= 0")


@dataclass(frozen=True)
class LossMask:
    frame_index: int
    lost: frozenset[MbAddress]

    def sorted(self) -> list[MbAddress]:
        return sorted(self.lost, key=lambda mb: (mb.row, mb.col))


def make_mask(frame_index: int, mb_cols: int, mb_rows: int, cfg: TrialConfig) -> LossMask:
    """Exactly round(rate * mb_cols * mb_rows) distinct lost MBs (round half
    to even), drawn deterministically from (seed, trial_index, frame_index)."""
    if frame_index < 0:
        raise ValueError("frame_index must be >= 0")
    total = mb_cols * mb_rows
    count = round(cfg.rate * total)
    if frame_index == 0 or count == 0:
        return LossMask(frame_index, frozenset())
    key = np.random.SeedSequence([cfg.seed & _U64, cfg.trial_index, frame_index])
    rng = np.random.Generator(np.random.PCG64(key))
    picks = rng.choice(total, size=count, replace=False)
    return LossMask(
        frame_index,
        frozenset(MbAddress(int(k) % mb_cols, int(k) // mb_cols) for k in picks),
    )


def apply_mask(status: MbStatusMap, mask: LossMask) -> MbStatusMap:
    """Fresh status map: masked MBs Damaged, everything else Correct."""
    out = MbStatusMap.all_correct(status.mb_cols, status.mb_rows)
    for mb in mask.lost:
        if not out.in_grid(mb):
            raise ValueError(f"mask entry {mb} outside {out.mb_cols}x{out.mb_rows} grid")
        out.set_damaged(mb)
    return out


def save_masks(masks: Iterable[LossMask], path: str) -> None:
    """Text serialization: one "frame_index mb_col mb_row" line per lost MB."""
    with open(path, "w", newline="") as f:
        for mask in masks:
            for mb in mask.sorted():
                f.write(f"{mask.frame_index} {mb.col} {mb.row}\n")


def load_masks(path: str) -> dict[int, LossMask]:
    lost: dict[int, set[MbAddress]] = {}
    with open(path) as f:
        for line in f:
            line = line.strip()
            if not line:
                continue
            t, col, row = (int(v) for v in line.split())
            lost.setdefault(t, set()).add(MbAddress(col, row))
    return {t: LossMask(t, frozenset(s)) for t, s in lost.items()}

"""Exhaustive-search block motion estimation against the previous frame.

This models the encoder side: every inter frame gets one motion vector per
macroblock, found by full search over a square window. Displacements that
would push the block outside the reference are excluded from the search, so
every stored vector can be applied for motion compensation without any edge
handling.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .core import MB, Frame, MbAddress, MotionVector


@dataclass(frozen=True)
class SearchParams:
    p: int = 7  # search radius, pixels per component
    block: int = MB

    def __post_init__(self):
        if self.p < 0:
            raise ValueError("search radius must be >= 0")
        if self.block != MB:
            raise ValueError(f"only {MB}x{MB} blocks are supported")


@dataclass
class MvField:
    """Per-macroblock motion vectors of one inter frame (frame_index >= 1)."""

    frame_index: int
    vx: np.ndarray  # int16, shape (mb_rows, mb_cols)
    vy: np.ndarray

    def __post_init__(self):
        self.vx = np.asarray(self.vx, dtype=np.int16)
        self.vy = np.asarray(self.vy, dtype=np.int16)
        if self.vx.shape != self.vy.shape or self.vx.ndim != 2:
            raise ValueError("vx/vy must be 2-D grids of equal shape")

    @classmethod
    def zeros(cls, mb_cols: int, mb_rows: int, frame_index: int) -> "MvField":
        return cls(
            frame_index,
            np.zeros((mb_rows, mb_cols), dtype=np.int16),
            np.zeros((mb_rows, mb_cols), dtype=np.int16),
        )

    @property
    def mb_cols(self) -> int:
        return self.vx.shape[1]

    @property
    def mb_rows(self) -> int:
        return self.vx.shape[0]

    def mv_at(self, mb: MbAddress) -> MotionVector:
        return MotionVector(int(self.vx[mb.row, mb.col]), int(self.vy[mb.row, mb.col]))

    def set(self, mb: MbAddress, mv: MotionVector) -> None:
        self.vx[mb.row, mb.col] = mv.vx
        self.vy[mb.row, mb.col] = mv.vy


def full_search(cur: Frame, ref: Frame, mb: MbAddress, params: SearchParams = SearchParams()) -> MotionVector:
    """Best in-window displacement for one macroblock, by minimum SAD.

    Ties are broken toward the smallest |vx|+|vy|, then raster order of
    (vy, vx), which favors the zero vector in flat regions.
    """
    if cur.luma.shape != ref.luma.shape:
        raise ValueError("current and reference frames must have equal dimensions")
    i, j = mb.origin()
    w, h = cur.width, cur.height
    if i + MB > w or j + MB > h:
        raise IndexError(f"macroblock {mb} outside {w}x{h}")
    p = params.p
    vx_lo, vx_hi = max(-p, -i), min(p, w - MB - i)
    vy_lo, vy_hi = max(-p, -j), min(p, h - MB - j)

    block = cur.luma[j : j + MB, i : i + MB].astype(np.int32)
    region = ref.luma[j + vy_lo : j + vy_hi + MB, i + vx_lo : i + vx_hi + MB]
    windows = sliding_window_view(region, (MB, MB)).astype(np.int32)
    sads = np.abs(windows - block).sum(axis=(2, 3))

    best = int(sads.min())
    ties = np.argwhere(sads == best)
    key = lambda t: (abs(vx_lo + t[1]) + abs(vy_lo + t[0]), vy_lo + t[0], vx_lo + t[1])
    iy, ix = min(ties, key=key)
    return MotionVector(vx_lo + int(ix), vy_lo + int(iy))


def estimate_field(cur: Frame, ref: Frame, params: SearchParams = SearchParams(), frame_index: int = 1) -> MvField:
    """full_search applied to every macroblock of the frame."""
    field = MvField.zeros(cur.mb_cols, cur.mb_rows, frame_index)
    for row in range(cur.mb_rows):
        for col in range(cur.mb_cols):
            field.set(MbAddress(col, row), full_search(cur, ref, MbAddress(col, row), params))
    return field


def save_mv_fields(fields: Iterable[MvField], path: str) -> None:
    """CSV serialization: one line per MB in raster order per frame."""
    with open(path, "w", newline="") as f:
        f.write("frame_index,mb_col,mb_row,vx,vy\n")
        for fld in fields:
            for row in range(fld.mb_rows):
                for col in range(fld.mb_cols):
                    mv = fld.mv_at(MbAddress(col, row))
                    f.write(f"{fld.frame_index},{col},{row},{mv.vx},{mv.vy}\n")


def load_mv_fields(path: str) -> dict[int, MvField]:
    """Inverse of save_mv_fields, keyed by frame index."""
    cells: dict[int, list[tuple[int, int, int, int]]] = {}
    with open(path) as f:
        header = f.readline()
        if not header.startswith("frame_index"):
            raise ValueError(f"{path}: missing header line")
        for line in f:
            line = line.strip()
            if not line:
                continue
            t, col, row, vx, vy = (int(v) for v in line.split(","))
            cells.setdefault(t, []).append((col, row, vx, vy))
    fields: dict[int, MvField] = {}
    for t, entries in cells.items():
        cols = max(e[0] for e in entries) + 1
        rows = max(e[1] for e in entries) + 1
        if len(entries) != cols * rows:
            raise ValueError(f"{path}: frame {t} has an incomplete MB grid")
        fld = MvField.zeros(cols, rows, t)
        for col, row, vx, vy in entries:
            fld.set(MbAddress(col, row), MotionVector(vx, vy))
        fields[t] = fld
    return fields

"""Motion-vector recovery for damaged macroblocks.

A damaged MB is reconstructed by copying the reference-frame block displaced
by an estimated motion vector. Candidates are scored by boundary matching:

* classic criterion (``bma``): SAD between each candidate block's inner
  boundary in the reference frame and the damaged MB's outer boundary in the
  current frame;
* additional-boundary criterion: SAD between that same inner boundary and
  the outer boundary of the motion-compensated neighbor MB, both read from
  the reference frame. With locally coherent motion the two segments are
  adjacent rows/columns of the same object, so the matching distortion of
  the true vector is near zero regardless of texture;
* adaptive combination (``ebmc``): per boundary side, the smaller of the two
  criteria that are available, summed over sides.

Damaged MBs are processed in priority order (most available 4-neighbors
first), and each concealment immediately raises the priority of its damaged
neighbors, so blocks with weak context are deferred until their context has
been rebuilt.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core import (
    MB,
    SIDES,
    SIDE_STEPS,
    BoundarySide,
    Frame,
    MbAddress,
    MbState,
    MbStatusMap,
    MotionVector,
    ZERO_MV,
    extract_col,
    extract_row,
    neighbor_of,
    sad,
)
from .motion import MvField

MODES = ("tr", "avg", "median", "bma", "ebmc")

CandidateSet = list[MotionVector]


@dataclass(frozen=True)
class SideNeighbor:
    """What the damaged MB knows about the neighbor owning one boundary."""

    available: bool
    mv: MotionVector | None = None
    state: MbState | None = None  # CORRECT or CONCEALED when available


@dataclass(frozen=True)
class NeighborContext:
    sides: dict[BoundarySide, SideNeighbor]

    def available_mvs(self) -> list[MotionVector]:
        """Neighbor MVs in fixed side order (top, bottom, left, right)."""
        return [
            info.mv
            for side in SIDES
            if (info := self.sides[side]).available and info.mv is not None
        ]


def neighbor_context(status: MbStatusMap, mv_field: MvField | None, mb: MbAddress) -> NeighborContext:
    """Availability and motion vector of each 4-neighbor.

    A side is available iff the neighbor exists in-frame and is Correct or
    Concealed; a still-Damaged neighbor has lost both pixels and vector.
    Correct neighbors contribute their transmitted vector, concealed ones the
    vector estimated when they were recovered.
    """
    state = status.state
    rows, cols = state.shape
    sides: dict[BoundarySide, SideNeighbor] = {}
    for side in SIDES:
        dc, dr = SIDE_STEPS[side]
        c, r = mb.col + dc, mb.row + dr
        if not (0 <= c < cols and 0 <= r < rows):
            sides[side] = SideNeighbor(False)
            continue
        code = int(state[r, c])
        if code == MbState.DAMAGED:
            sides[side] = SideNeighbor(False)
        elif code == MbState.CONCEALED:
            mv = MotionVector(int(status.mv_x[r, c]), int(status.mv_y[r, c]))
            sides[side] = SideNeighbor(True, mv, MbState.CONCEALED)
        else:
            mv = MotionVector(int(mv_field.vx[r, c]), int(mv_field.vy[r, c])) if mv_field is not None else None
            sides[side] = SideNeighbor(True, mv, MbState.CORRECT)
    return NeighborContext(sides)


def block_in_frame(frame: Frame, mb: MbAddress, mv: MotionVector) -> bool:
    i, j = mb.origin()
    return (
        0 <= i + mv.vx
        and i + mv.vx + MB <= frame.width
        and 0 <= j + mv.vy
        and j + mv.vy + MB <= frame.height
    )


def _inner_boundary(ref: Frame, mb: MbAddress, mv: MotionVector, side: BoundarySide) -> np.ndarray:
    """Inner boundary of the candidate block, read from the reference frame."""
    i, j = mb.origin()
    bx, by = i + mv.vx, j + mv.vy
    if side == BoundarySide.TOP:
        return extract_row(ref, bx, by, MB)
    if side == BoundarySide.BOTTOM:
        return extract_row(ref, bx, by + MB - 1, MB)
    if side == BoundarySide.LEFT:
        return extract_col(ref, bx, by, MB)
    return extract_col(ref, bx + MB - 1, by, MB)


def _outer_boundary(cur: Frame, mb: MbAddress, side: BoundarySide) -> np.ndarray | None:
    """Outer boundary of the damaged MB in the current frame, or None at the
    frame edge."""
    i, j = mb.origin()
    if side == BoundarySide.TOP:
        return extract_row(cur, i, j - 1, MB) if j > 0 else None
    if side == BoundarySide.BOTTOM:
        return extract_row(cur, i, j + MB, MB) if j + MB < cur.height else None
    if side == BoundarySide.LEFT:
        return extract_col(cur, i - 1, j, MB) if i > 0 else None
    return extract_col(cur, i + MB, j, MB) if i + MB < cur.width else None


def _additional_span(mb: MbAddress, nmv: MotionVector, side: BoundarySide):
    """Start pixel and orientation of the additional boundary: the outer
    boundary of the neighbor MB as placed in the reference by its own vector.
    That segment is flush against the candidate block's inner boundary when
    the candidate vector equals the neighbor's."""
    i, j = mb.origin()
    if side == BoundarySide.TOP:
        return i + nmv.vx, j + nmv.vy, "row"
    if side == BoundarySide.BOTTOM:
        return i + nmv.vx, j + nmv.vy + MB - 1, "row"
    if side == BoundarySide.LEFT:
        return i + nmv.vx, j + nmv.vy, "col"
    return i + nmv.vx + MB - 1, j + nmv.vy, "col"


def _additional_boundary(ref: Frame, mb: MbAddress, nmv: MotionVector, side: BoundarySide) -> np.ndarray | None:
    """The additional-boundary samples, or None when the segment leaves the
    reference frame."""
    x, y, axis = _additional_span(mb, nmv, side)
    if axis == "row":
        if not (0 <= y < ref.height and 0 <= x and x + MB <= ref.width):
            return None
        return extract_row(ref, x, y, MB)
    if not (0 <= x < ref.width and 0 <= y and y + MB <= ref.height):
        return None
    return extract_col(ref, x, y, MB)


def _additional_cells(mb: MbAddress, nmv: MotionVector, side: BoundarySide) -> list[MbAddress]:
    """Reference-frame MB cells intersected by the additional boundary
    (one or two; the segment is 16 pixels long in one row or column)."""
    x, y, axis = _additional_span(mb, nmv, side)
    if axis == "row":
        ends = {(x // MB, y // MB), ((x + MB - 1) // MB, y // MB)}
    else:
        ends = {(x // MB, y // MB), (x // MB, (y + MB - 1) // MB)}
    return [MbAddress(c, r) for c, r in sorted(ends)]


def boundary_bmc(
    cur: Frame,
    ref: Frame,
    mb: MbAddress,
    mv: MotionVector,
    side: BoundarySide,
    status: MbStatusMap | None = None,
) -> int | None:
    """Classic boundary matching distortion for one side.

    Absent (None) when the outer boundary lies outside the frame, or when
    the status map shows its owning neighbor as Damaged (those pixels were
    lost and have not been reconstructed yet).
    """
    outer = _outer_boundary(cur, mb, side)
    if outer is None:
        return None
    if status is not None:
        n = neighbor_of(mb, side, status.mb_cols, status.mb_rows)
        if n is not None and status.state_at(n) == MbState.DAMAGED:
            return None
    return sad(outer, _inner_boundary(ref, mb, mv, side))


def bmc_total(side_values) -> int:
    """Sum of the per-side distortions that are present (absent sides
    contribute nothing)."""
    return sum(v for v in side_values if v is not None)


def boundary_pbmc(
    ref: Frame,
    ref_status: MbStatusMap,
    mb: MbAddress,
    mv: MotionVector,
    side: BoundarySide,
    ctx: NeighborContext,
) -> int | None:
    """Additional-boundary matching distortion for one side.

    Absent when (a) that side's neighbor is unavailable, (b) any reference
    MB under the additional boundary was itself concealed (unreliable
    pixels), or (c) the segment falls outside the reference frame.
    """
    info = ctx.sides[side]
    if not info.available or info.mv is None:
        return None
    addl = _additional_boundary(ref, mb, info.mv, side)
    if addl is None:
        return None
    for cell in _additional_cells(mb, info.mv, side):
        if ref_status.state_at(cell) == MbState.CONCEALED:
            return None
    return sad(_inner_boundary(ref, mb, mv, side), addl)


@dataclass
class BoundaryDistortion:
    """Per-side score breakdown for one candidate vector."""

    classic: dict[BoundarySide, int | None]
    proposed: dict[BoundarySide, int | None]
    chosen: dict[BoundarySide, int | None]
    total: int
    collocated_fallback: bool = False

    @property
    def sides_absent(self) -> int:
        return sum(1 for side in SIDES if self.chosen[side] is None)

    @property
    def classic_total(self) -> int:
        return bmc_total(self.classic.values())

    @classmethod
    def empty(cls) -> "BoundaryDistortion":
        absent: dict[BoundarySide, int | None] = {side: None for side in SIDES}
        return cls(dict(absent), dict(absent), dict(absent), 0)


def ebmc_total(
    cur: Frame,
    ref: Frame,
    ref_status: MbStatusMap,
    mb: MbAddress,
    mv: MotionVector,
    ctx: NeighborContext,
) -> BoundaryDistortion:
    """Adaptive per-side combination: the smaller of the classic and the
    additional-boundary distortion on each side, summed over sides.

    When the MB collocated with the damaged one was concealed in the
    reference frame, the additional boundaries are distrusted wholesale and
    the classic criterion is used on every side.
    """
    fallback = ref_status.state_at(mb) == MbState.CONCEALED
    classic: dict[BoundarySide, int | None] = {}
    proposed: dict[BoundarySide, int | None] = {}
    chosen: dict[BoundarySide, int | None] = {}
    total = 0
    for side in SIDES:
        info = ctx.sides[side]
        outer = _outer_boundary(cur, mb, side) if info.available else None
        inner = None
        if outer is not None:
            inner = _inner_boundary(ref, mb, mv, side)
            classic[side] = sad(outer, inner)
        else:
            classic[side] = None
        if fallback:
            proposed[side] = None
        else:
            proposed[side] = boundary_pbmc(ref, ref_status, mb, mv, side, ctx)
        present = [v for v in (classic[side], proposed[side]) if v is not None]
        chosen[side] = min(present) if present else None
        if chosen[side] is not None:
            total += chosen[side]
    return BoundaryDistortion(classic, proposed, chosen, total, fallback)


class _MbScorer:
    """Per-MB candidate scoring with the side data hoisted out of the
    candidate loop.

    The outer boundaries, the additional boundaries and their reliability
    screening depend only on the damaged MB and its neighbors, not on the
    candidate, so they are gathered once; each candidate then costs one
    boundary gather plus one (bma) or two (ebmc) batched SAD evaluations.
    Results are identical to composing boundary_bmc/boundary_pbmc/ebmc_total
    per side (the randomized oracle tests pin this down).
    """

    def __init__(self, cur: Frame, ref: Frame, ref_status: MbStatusMap,
                 mb: MbAddress, ctx: NeighborContext, mode: str):
        self.ref = ref
        self.mb = mb
        self.mode = mode
        self.i, self.j = mb.origin()
        self.avail = [ctx.sides[side].available for side in SIDES]
        self.outer = np.zeros((4, MB), dtype=np.int32)
        for k, side in enumerate(SIDES):
            if self.avail[k]:
                self.outer[k] = _outer_boundary(cur, mb, side)
        self.fallback = False
        self.addl_mask = [False] * 4
        self.addl = np.zeros((4, MB), dtype=np.int32)
        self.have_addl = False
        if mode == "ebmc":
            state = ref_status.state
            concealed = int(MbState.CONCEALED)
            self.fallback = int(state[mb.row, mb.col]) == concealed
            if not self.fallback:
                luma = ref.luma
                h, w = luma.shape
                for k, side in enumerate(SIDES):
                    info = ctx.sides[side]
                    if not info.available or info.mv is None:
                        continue
                    x, y, axis = _additional_span(mb, info.mv, side)
                    if axis == "row":
                        if not (0 <= y < h and 0 <= x and x + MB <= w):
                            continue
                        if (
                            state[y // MB, x // MB] == concealed
                            or state[y // MB, (x + MB - 1) // MB] == concealed
                        ):
                            continue
                        self.addl[k] = luma[y, x : x + MB]
                    else:
                        if not (0 <= x < w and 0 <= y and y + MB <= h):
                            continue
                        if (
                            state[y // MB, x // MB] == concealed
                            or state[(y + MB - 1) // MB, x // MB] == concealed
                        ):
                            continue
                        self.addl[k] = luma[y : y + MB, x]
                    self.addl_mask[k] = True
                    self.have_addl = True

    def _side_values(self, mv: MotionVector):
        """Classic and additional per-side SADs of one candidate, as two
        length-4 int lists (entries meaningful only where the masks say)."""
        luma = self.ref.luma
        bx, by = self.i + mv.vx, self.j + mv.vy
        inner = np.stack(
            (
                luma[by, bx : bx + MB],
                luma[by + MB - 1, bx : bx + MB],
                luma[by : by + MB, bx],
                luma[by : by + MB, bx + MB - 1],
            )
        ).astype(np.int32)
        classic = np.abs(inner - self.outer).sum(axis=1).tolist()
        proposed = np.abs(inner - self.addl).sum(axis=1).tolist() if self.have_addl else None
        return classic, proposed

    def total(self, mv: MotionVector) -> int:
        classic, proposed = self._side_values(mv)
        total = 0
        for k in range(4):
            if not self.avail[k]:
                continue
            c = classic[k]
            if proposed is not None and self.addl_mask[k]:
                p = proposed[k]
                total += p if p < c else c
            else:
                total += c
        return total

    def breakdown(self, mv: MotionVector) -> BoundaryDistortion:
        classic_all, proposed_all = self._side_values(mv)
        classic: dict[BoundarySide, int | None] = {}
        proposed: dict[BoundarySide, int | None] = {}
        chosen: dict[BoundarySide, int | None] = {}
        total = 0
        for k, side in enumerate(SIDES):
            c = classic_all[k] if self.avail[k] else None
            p = proposed_all[k] if proposed_all is not None and self.addl_mask[k] else None
            classic[side] = c
            proposed[side] = p
            if c is None and p is None:
                chosen[side] = None
            else:
                ch = c if p is None else (p if c is None else min(c, p))
                chosen[side] = ch
                total += ch
        return BoundaryDistortion(classic, proposed, chosen, total, self.fallback)


def _round_half_away(num: int, den: int) -> int:
    """Round num/den half away from zero (den > 0)."""
    if num >= 0:
        return (2 * num + den) // (2 * den)
    return -((-2 * num + den) // (2 * den))


def mean_mv(mvs: list[MotionVector]) -> MotionVector:
    n = len(mvs)
    return MotionVector(
        _round_half_away(sum(mv.vx for mv in mvs), n),
        _round_half_away(sum(mv.vy for mv in mvs), n),
    )


def median_mv(mvs: list[MotionVector]) -> MotionVector:
    """Component-wise median; an even count averages the two middle values,
    rounded half away from zero."""

    def med(values: list[int]) -> int:
        s = sorted(values)
        n = len(s)
        return _round_half_away(s[(n - 1) // 2] + s[n // 2], 2)

    return MotionVector(med([mv.vx for mv in mvs]), med([mv.vy for mv in mvs]))


def build_candidates(
    prev_mv_field: MvField | None, ctx: NeighborContext, mb: MbAddress
) -> CandidateSet:
    """Ordered, deduplicated candidate vectors for one damaged MB.

    Order is normative (it breaks score ties): zero, collocated from the
    previous frame's field, the four neighbor vectors, then the mean and the
    median of the available neighbor vectors. Vectors from still-damaged
    neighbors never enter the set.
    """
    out: CandidateSet = []

    def push(mv: MotionVector) -> None:
        if mv not in out:
            out.append(mv)

    push(ZERO_MV)
    push(prev_mv_field.mv_at(mb) if prev_mv_field is not None else ZERO_MV)
    for side in SIDES:
        info = ctx.sides[side]
        if info.available and info.mv is not None:
            push(info.mv)
    neighbor_mvs = ctx.available_mvs()
    if neighbor_mvs:
        push(mean_mv(neighbor_mvs))
        push(median_mv(neighbor_mvs))
    return out


def select_mv(
    cur: Frame,
    ref: Frame,
    ref_status: MbStatusMap,
    mb: MbAddress,
    candidates: CandidateSet,
    ctx: NeighborContext,
    mode: str,
) -> tuple[MotionVector, BoundaryDistortion]:
    """Score every feasible candidate and return the first one attaining the
    minimal total distortion (earlier candidates win ties).

    Candidates whose displaced block leaves the reference frame are skipped;
    if that removes every candidate, the zero vector is returned unscored.
    """
    if mode not in ("bma", "ebmc"):
        raise ValueError(f"select_mv mode must be bma or ebmc, got {mode!r}")
    scorer = _MbScorer(cur, ref, ref_status, mb, ctx, mode)
    best_mv: MotionVector | None = None
    best_total = 0
    for mv in candidates:
        if not block_in_frame(ref, mb, mv):
            continue
        total = scorer.total(mv)
        if best_mv is None or total < best_total:
            best_mv, best_total = mv, total
    if best_mv is None:
        return ZERO_MV, BoundaryDistortion.empty()
    return best_mv, scorer.breakdown(best_mv)


class PrioritySchedule:
    """Dynamic concealment order: damaged MBs keyed by how many of their
    4-neighbors are currently available (Correct or Concealed).

    extract() pops the highest count, breaking ties in raster order; each
    concealment bumps the count of every remaining damaged 4-neighbor by
    exactly one.
    """

    def __init__(self, status: MbStatusMap):
        self._cols = status.mb_cols
        self._rows = status.mb_rows
        avail = status.state != MbState.DAMAGED
        neigh = np.zeros(avail.shape, dtype=np.int8)
        neigh[1:, :] += avail[:-1, :]
        neigh[:-1, :] += avail[1:, :]
        neigh[:, 1:] += avail[:, :-1]
        neigh[:, :-1] += avail[:, 1:]
        self.counts: dict[MbAddress, int] = {
            mb: int(neigh[mb.row, mb.col]) for mb in status.damaged()
        }

    def __len__(self) -> int:
        return len(self.counts)

    def extract(self) -> MbAddress | None:
        if not self.counts:
            return None
        mb = min(self.counts, key=lambda a: (-self.counts[a], a.row, a.col))
        del self.counts[mb]
        return mb

    def on_concealed(self, mb: MbAddress) -> None:
        for side in SIDES:
            n = neighbor_of(mb, side, self._cols, self._rows)
            if n is not None and n in self.counts:
                self.counts[n] += 1


@dataclass
class AuditRecord:
    """One concealment event: which MB, with what vector, at what cost."""

    mb: MbAddress
    mode: str
    mv: MotionVector
    priority: int
    distortion: BoundaryDistortion | None  # None for modes that do not score

    @property
    def total(self) -> int:
        return self.distortion.total if self.distortion is not None else -1

    @property
    def classic_total(self) -> int:
        return self.distortion.classic_total if self.distortion is not None else -1

    @property
    def sides_absent(self) -> int:
        return self.distortion.sides_absent if self.distortion is not None else 4


@dataclass
class ConcealedFrame:
    frame: Frame
    status: MbStatusMap
    audit: list[AuditRecord] = field(default_factory=list)


def _clamp_mv(frame: Frame, mb: MbAddress, mv: MotionVector) -> MotionVector:
    """Clamp a displacement so the copied block stays inside the frame."""
    i, j = mb.origin()
    return MotionVector(
        min(max(mv.vx, -i), frame.width - MB - i),
        min(max(mv.vy, -j), frame.height - MB - j),
    )


def conceal_frame(
    cur_damaged: Frame,
    ref_frame: Frame,
    ref_status: MbStatusMap,
    status: MbStatusMap,
    mv_field: MvField | None,
    prev_mv_field: MvField | None,
    mode: str,
) -> ConcealedFrame:
    """Reconstruct every damaged MB of a frame, in priority order.

    ``mv_field`` holds the current frame's transmitted vectors (read for
    correctly received neighbors), ``prev_mv_field`` the previous frame's
    (read for the collocated candidate). The reference is the previous
    *reconstructed* frame together with its final status map, which is how
    concealment errors propagate into later frames and how the additional
    boundaries get their reliability screening.
    """
    if mode not in MODES:
        raise ValueError(f"unknown mode {mode!r}; expected one of {MODES}")
    if cur_damaged.luma.shape != ref_frame.luma.shape:
        raise ValueError("current and reference frames must have equal dimensions")
    if mode != "tr" and mv_field is None:
        raise ValueError(f"mode {mode!r} needs the current frame's MV field")

    work = cur_damaged.luma.copy()
    out_frame = Frame(work)
    st = status.copy()
    sched = PrioritySchedule(st)
    audit: list[AuditRecord] = []

    while True:
        mb = sched.extract()
        if mb is None:
            break
        ctx = neighbor_context(st, mv_field, mb)
        n_avail = sum(1 for side in SIDES if ctx.sides[side].available)
        dist: BoundaryDistortion | None = None
        if mode == "tr":
            mv = ZERO_MV
        elif mode in ("avg", "median"):
            mvs = ctx.available_mvs()
            mv = (mean_mv(mvs) if mode == "avg" else median_mv(mvs)) if mvs else ZERO_MV
            mv = _clamp_mv(ref_frame, mb, mv)
        else:
            candidates = build_candidates(prev_mv_field, ctx, mb)
            mv, dist = select_mv(out_frame, ref_frame, ref_status, mb, candidates, ctx, mode)
        i, j = mb.origin()
        work[j : j + MB, i : i + MB] = ref_frame.luma[
            j + mv.vy : j + mv.vy + MB, i + mv.vx : i + mv.vx + MB
        ]
        st.set_concealed(mb, mv)
        sched.on_concealed(mb)
        audit.append(AuditRecord(mb, mode, mv, n_avail, dist))

    return ConcealedFrame(out_frame, st, audit)


def audit_csv_header() -> str:
    return "frame,mb_col,mb_row,mode,vx,vy,total,bmc_total,sides_absent"


def audit_csv_line(frame_index: int, rec: AuditRecord) -> str:
    return (
        f"{frame_index},{rec.mb.col},{rec.mb.row},{rec.mode},"
        f"{rec.mv.vx},{rec.mv.vy},{rec.total},{rec.classic_total},{rec.sides_absent}"
    )

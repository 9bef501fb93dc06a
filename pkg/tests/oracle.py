"""Independent brute-force reference implementations used only by tests.

Everything here works on plain data (2-D pixel arrays indexed [y][x],
status-code grids, (vx, vy) tuples) with explicit per-pixel loops, and never
imports the package's engine, so it can serve as an oracle for it.

Status codes: 0 = correct, 1 = damaged, 2 = concealed.
"""

from __future__ import annotations

from fractions import Fraction

S = 16

SIDE_NAMES = ("top", "bottom", "left", "right")

_STEP = {"top": (0, -1), "bottom": (0, 1), "left": (-1, 0), "right": (1, 0)}


def neighbor_cell(col, row, side, cols, rows):
    dc, dr = _STEP[side]
    c, r = col + dc, row + dr
    if 0 <= c < cols and 0 <= r < rows:
        return (c, r)
    return None


def side_available(status, col, row, side):
    rows, cols = len(status), len(status[0])
    n = neighbor_cell(col, row, side, cols, rows)
    return n is not None and status[n[1]][n[0]] != 1


def neighbor_mvs(status, cur_field, concealed_mvs, col, row):
    """Per-side neighbor MV: transmitted for correct MBs, the concealment
    vector for concealed ones, None when unavailable."""
    rows, cols = len(status), len(status[0])
    out = {}
    for side in SIDE_NAMES:
        n = neighbor_cell(col, row, side, cols, rows)
        if n is None or status[n[1]][n[0]] == 1:
            out[side] = None
        elif status[n[1]][n[0]] == 2:
            out[side] = concealed_mvs[n[1]][n[0]]
        else:
            out[side] = cur_field[n[1]][n[0]]
    return out


def bmc_side(cur, ref, col, row, vi, vj, side):
    """Classic per-side distortion by explicit per-pixel summation.
    Assumes the outer boundary exists; availability is the caller's job."""
    i, j = S * col, S * row
    if side == "top":
        return sum(abs(int(cur[j - 1][i + n]) - int(ref[j + vj][i + vi + n])) for n in range(S))
    if side == "bottom":
        return sum(abs(int(cur[j + S][i + n]) - int(ref[j + vj + S - 1][i + vi + n])) for n in range(S))
    if side == "left":
        return sum(abs(int(cur[j + n][i - 1]) - int(ref[j + vj + n][i + vi])) for n in range(S))
    if side == "right":
        return sum(abs(int(cur[j + n][i + S]) - int(ref[j + vj + n][i + vi + S - 1])) for n in range(S))
    raise ValueError(side)


def bmc_side_checked(cur, ref, status, col, row, vi, vj, side):
    """None when the outer boundary is off-frame or its owner is damaged."""
    if not side_available(status, col, row, side):
        return None
    return bmc_side(cur, ref, col, row, vi, vj, side)


def _additional_segment(col, row, nmv, side):
    """Anchor pixel and axis of the additional boundary in the reference."""
    i, j = S * col, S * row
    nx, ny = nmv
    if side == "top":
        return i + nx, j + ny, "row"
    if side == "bottom":
        return i + nx, j + ny + S - 1, "row"
    if side == "left":
        return i + nx, j + ny, "col"
    return i + nx + S - 1, j + ny, "col"


def pbmc_side(ref, ref_status, col, row, vi, vj, side, nmv):
    """Additional-boundary per-side distortion with its availability rules.

    None when the neighbor MV is missing, the segment leaves the frame, or
    any reference MB under the segment is concealed.
    """
    if nmv is None:
        return None
    h, w = len(ref), len(ref[0])
    x, y, axis = _additional_segment(col, row, nmv, side)
    if axis == "row":
        if not (0 <= y < h and 0 <= x and x + S <= w):
            return None
        cells = {(x // S, y // S), ((x + S - 1) // S, y // S)}
    else:
        if not (0 <= x < w and 0 <= y and y + S <= h):
            return None
        cells = {(x // S, y // S), (x // S, (y + S - 1) // S)}
    for c, r in cells:
        if ref_status[r][c] == 2:
            return None

    i, j = S * col, S * row
    nx, ny = nmv
    if side == "top":
        return sum(abs(int(ref[j + vj][i + vi + n]) - int(ref[j + ny][i + nx + n])) for n in range(S))
    if side == "bottom":
        return sum(
            abs(int(ref[j + vj + S - 1][i + vi + n]) - int(ref[j + ny + S - 1][i + nx + n]))
            for n in range(S)
        )
    if side == "left":
        return sum(abs(int(ref[j + vj + n][i + vi]) - int(ref[j + ny + n][i + nx])) for n in range(S))
    return sum(
        abs(int(ref[j + vj + n][i + vi + S - 1]) - int(ref[j + ny + n][i + nx + S - 1]))
        for n in range(S)
    )


def ebmc_eval(cur, ref, status, ref_status, col, row, vi, vj, nmvs):
    """Adaptive total: per side the min of the two criteria that exist, with
    the wholesale classic fallback when the collocated reference MB was
    concealed. Returns (total, per-side chosen dict)."""
    fallback = ref_status[row][col] == 2
    chosen = {}
    total = 0
    for side in SIDE_NAMES:
        c = bmc_side_checked(cur, ref, status, col, row, vi, vj, side)
        p = None if fallback else pbmc_side(ref, ref_status, col, row, vi, vj, side, nmvs[side])
        present = [v for v in (c, p) if v is not None]
        chosen[side] = min(present) if present else None
        if chosen[side] is not None:
            total += chosen[side]
    return total, chosen


def bma_eval(cur, ref, status, col, row, vi, vj):
    total = 0
    for side in SIDE_NAMES:
        c = bmc_side_checked(cur, ref, status, col, row, vi, vj, side)
        if c is not None:
            total += c
    return total


def select(mode, cur, ref, status, ref_status, col, row, candidates, nmvs):
    """First candidate with the strictly smallest total; out-of-frame blocks
    are skipped; (0, 0) unscored if nothing survives."""
    h, w = len(cur), len(cur[0])
    i, j = S * col, S * row
    best = None
    for vi, vj in candidates:
        if not (0 <= i + vi and i + vi + S <= w and 0 <= j + vj and j + vj + S <= h):
            continue
        if mode == "bma":
            total = bma_eval(cur, ref, status, col, row, vi, vj)
        else:
            total, _ = ebmc_eval(cur, ref, status, ref_status, col, row, vi, vj, nmvs)
        if best is None or total < best[1]:
            best = ((vi, vj), total)
    return best if best is not None else ((0, 0), 0)


def _round_half_away(f: Fraction) -> int:
    if f < 0:
        return -_round_half_away(-f)
    return int(f + Fraction(1, 2))  # floor(f + 1/2) on non-negatives


def mean_mv(mvs):
    n = len(mvs)
    return (
        _round_half_away(Fraction(sum(v[0] for v in mvs), n)),
        _round_half_away(Fraction(sum(v[1] for v in mvs), n)),
    )


def median_mv(mvs):
    def med(vals):
        s = sorted(vals)
        n = len(s)
        return _round_half_away(Fraction(s[(n - 1) // 2] + s[n // 2], 2))

    return (med([v[0] for v in mvs]), med([v[1] for v in mvs]))


def candidates(status, cur_field, concealed_mvs, prev_field, col, row):
    """Ordered deduplicated candidate list: zero, collocated, the four
    neighbor MVs (top, bottom, left, right), mean, median."""
    nmvs = neighbor_mvs(status, cur_field, concealed_mvs, col, row)
    out = []

    def push(mv):
        if mv is not None and mv not in out:
            out.append(mv)

    push((0, 0))
    push(prev_field[row][col] if prev_field is not None else (0, 0))
    for side in SIDE_NAMES:
        push(nmvs[side])
    avail = [nmvs[s] for s in SIDE_NAMES if nmvs[s] is not None]
    if avail:
        push(mean_mv(avail))
        push(median_mv(avail))
    return out


def full_search(cur, ref, col, row, p):
    """Exhaustive SAD search with the smallest-displacement tie-break."""
    h, w = len(cur), len(cur[0])
    i, j = S * col, S * row
    scored = []
    for vy in range(-p, p + 1):
        for vx in range(-p, p + 1):
            if not (0 <= i + vx and i + vx + S <= w and 0 <= j + vy and j + vy + S <= h):
                continue
            total = 0
            for m in range(S):
                for n in range(S):
                    total += abs(int(cur[j + m][i + n]) - int(ref[j + vy + m][i + vx + n]))
            scored.append((total, abs(vx) + abs(vy), vy, vx))
    total, _, vy, vx = min(scored)
    return (vx, vy)


def replay_schedule(initial_damaged, cols, rows, order):
    """Re-derive the priority schedule from an extraction order.

    Checks that every extracted MB had the maximum live availability count
    (raster tie-break) at its own extraction time, and returns the per-event
    counts so callers can compare against the engine's records.
    """
    remaining = set(initial_damaged)
    if set(order) != remaining or len(order) != len(remaining):
        raise AssertionError("extraction order is not a permutation of the damaged set")

    def count(mb):
        col, row = mb
        c = 0
        for side in SIDE_NAMES:
            n = neighbor_cell(col, row, side, cols, rows)
            if n is not None and n not in remaining:
                c += 1
        return c

    counts_at_extraction = []
    for mb in order:
        live = {m: count(m) for m in remaining}
        best = max(live.values())
        if live[mb] != best:
            raise AssertionError(f"{mb} extracted with count {live[mb]}, max was {best}")
        tied = [m for m, c in live.items() if c == best]
        expected = min(tied, key=lambda m: (m[1], m[0]))
        if mb != expected:
            raise AssertionError(f"{mb} extracted but raster tie-break says {expected}")
        counts_at_extraction.append(live[mb])
        remaining.discard(mb)
    return counts_at_extraction

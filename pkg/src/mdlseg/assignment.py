"""Linear sum assignment and speaker-ID to character-name assignment.

Character faces are matched against the faces detected in each scene, the
per-scene costs are averaged over the scenes each speaker ID occurs in, and
speakers are then matched to characters with the Hungarian algorithm. Each
character may absorb up to three speaker IDs, since diarization often splits
one person into several IDs. A match is kept only when it beats the average
cost of pairing a random speaker with a random character.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

UNASSIGNED = "UNASSIGNED"
MAX_IDS_PER_CHARACTER = 3


def _solve_square(cost: np.ndarray) -> np.ndarray:
    """Minimum-cost perfect matching of a square finite matrix.

    Shortest augmenting path with row/column potentials, O(n^3).
    Returns ``col_of_row``.
    """
    n = cost.shape[0]
    u = np.zeros(n + 1)
    v = np.zeros(n + 1)
    row_of_col = np.zeros(n + 1, dtype=np.int64)  # 1-based, 0 = free
    way = np.zeros(n + 1, dtype=np.int64)
    for i in range(1, n + 1):
        row_of_col[0] = i
        j0 = 0
        minv = np.full(n + 1, np.inf)
        used = np.zeros(n + 1, dtype=bool)
        while True:
            used[j0] = True
            i0 = row_of_col[j0]
            free = ~used[1:]
            cur = cost[i0 - 1] - u[i0] - v[1:]
            better = free & (cur < minv[1:])
            minv[1:][better] = cur[better]
            way[1:][better] = j0
            masked = np.where(free, minv[1:], np.inf)
            j1 = int(np.argmin(masked)) + 1
            delta = masked[j1 - 1]
            u[row_of_col[used]] += delta
            v[used] -= delta
            minv[1:][free] -= delta
            j0 = j1
            if row_of_col[j0] == 0:
                break
        while j0:
            j1 = way[j0]
            row_of_col[j0] = row_of_col[j1]
            j0 = j1
    col_of_row = np.empty(n, dtype=np.int64)
    col_of_row[row_of_col[1:] - 1] = np.arange(n)
    return col_of_row


def _prepare(cost, maximize):
    c = np.array(cost, dtype=np.float64)
    if c.ndim != 2 or c.size == 0:
        raise ValueError("cost matrix must be a non-empty 2-d array")
    if np.isnan(c).any():
        raise ValueError("cost matrix contains NaN")
    if maximize:
        c = -c
    finite = np.isfinite(c)
    if not finite.all():
        if np.isneginf(c).any():
            raise ValueError("cost matrix contains -inf (or +inf when maximizing)")
        span = np.abs(c[finite]).sum() if finite.any() else 0.0
        # larger than any finite total, so forced pairs are used only when unavoidable
        c[~finite] = 4.0 * (span + 1.0)
    rows, cols = c.shape
    size = max(rows, cols)
    square = np.zeros((size, size))
    square[:rows, :cols] = c
    return square, rows, cols


def linear_sum_assignment(cost, maximize=False):
    """Optimal rectangular assignment, no tie-breaking guarantee.

    Returns ``(row_ind, col_ind)`` like :func:`scipy.optimize.linear_sum_assignment`.
    """
    square, rows, cols = _prepare(cost, maximize)
    col_of_row = _solve_square(square)
    r = np.arange(rows)
    c = col_of_row[:rows]
    keep = c < cols
    return r[keep], c[keep]


def _tolerance(square):
    return 1e-10 * max(1.0, float(np.abs(square).sum()))


def hungarian(cost, maximize=False):
    """Optimal one-to-one assignment of rows to columns.

    Among all optimal assignments the lexicographically smallest vector of
    column indices is returned (a row left without a column sorts after every
    real column). Infinite entries are used only if unavoidable.

    Returns
    -------
    assignment : list of (int or None)
        Column for each row, or None when the row is left unassigned
        (more rows than columns).
    total : float
        Sum of the original entries over assigned pairs, in row order.
    """
    square, rows, cols = _prepare(cost, maximize)
    size = square.shape[0]
    col_of_row = _solve_square(square)
    opt = float(square[np.arange(size), col_of_row].sum())
    tol = _tolerance(square)

    # Greedy lexicographic refinement: for each row in turn, try every smaller
    # free column and keep it if the rest can still be completed optimally.
    fixed_rows, fixed_cols, fixed_sum = [], [], 0.0
    for r in range(size):
        current = int(col_of_row[r])
        taken = set(fixed_cols)
        for c in range(current):
            if c in taken:
                continue
            free_r = [x for x in range(size) if x not in fixed_rows and x != r]
            free_c = [x for x in range(size) if x not in taken and x != c]
            sub_total = fixed_sum + square[r, c]
            if free_r:
                sub = square[np.ix_(free_r, free_c)]
                sub_cols = _solve_square(sub)
                sub_total += float(sub[np.arange(len(free_r)), sub_cols].sum())
            if sub_total <= opt + tol:
                col_of_row = col_of_row.copy()
                col_of_row[r] = c
                for k, fr in enumerate(free_r):
                    col_of_row[fr] = free_c[sub_cols[k]]
                current = c
                break
        fixed_rows.append(r)
        fixed_cols.append(current)
        fixed_sum += square[r, current]

    original = np.asarray(cost, dtype=np.float64)
    assignment, total = [], 0.0
    for r in range(rows):
        c = int(col_of_row[r])
        if c < cols:
            assignment.append(c)
            total += float(original[r, c])
        else:
            assignment.append(None)
    return assignment, total


# -- name assignment ---------------------------------------------------------


@dataclass
class AssignmentProblem:
    """Character-to-scene costs, speaker incidence and the derived costs.

    ``scene_costs`` is ``m x n_scenes``; ``speaker_costs`` is ``m x k``;
    ``threshold`` is the mean of the finite speaker costs.
    """

    characters: list[str]
    speakers: list[str]
    scene_costs: np.ndarray
    incidence: list[frozenset[int]]
    speaker_costs: np.ndarray = field(init=False)
    threshold: float = field(init=False)

    def __post_init__(self):
        self.scene_costs = np.asarray(self.scene_costs, dtype=np.float64)
        if self.scene_costs.shape[0] != len(self.characters):
            raise ValueError("scene_costs must have one row per character")
        if len(self.incidence) != len(self.speakers):
            raise ValueError("incidence must have one entry per speaker")
        self.incidence = [frozenset(int(j) for j in s) for s in self.incidence]
        self.speaker_costs, self.threshold = build_speaker_costs(self.scene_costs, self.incidence)


def _as_face_matrix(vectors, d=None):
    arr = np.asarray(vectors, dtype=np.float64)
    if arr.size == 0:
        return np.zeros((0, d or 0))
    if arr.ndim == 1:
        arr = arr[None, :]
    if arr.ndim != 2:
        raise ValueError("face vectors must form a 2-d array")
    if not np.isfinite(arr).all():
        raise ValueError("face vectors must be finite")
    return arr


def build_scene_costs(bank: Sequence[Sequence], scenes: Sequence) -> np.ndarray:
    """Minimum Euclidean distance from each character's faces to each scene's faces.

    ``bank`` is a list of per-character face-vector lists, ``scenes`` a list of
    per-scene face-vector lists. A scene without faces costs ``inf``.
    """
    chars = [_as_face_matrix(faces) for faces in bank]
    if any(c.shape[0] == 0 for c in chars):
        raise ValueError("every character needs at least one face vector")
    dims = {c.shape[1] for c in chars}
    if len(dims) != 1:
        raise ValueError(f"character face vectors disagree on dimension: {sorted(dims)}")
    d = dims.pop()
    out = np.full((len(chars), len(scenes)), np.inf)
    for j, faces in enumerate(scenes):
        D = _as_face_matrix(faces, d)
        if D.shape[0] == 0:
            continue
        if D.shape[1] != d:
            raise ValueError(f"scene {j}: face dimension {D.shape[1]} != {d}")
        for i, A in enumerate(chars):
            diff = A[:, None, :] - D[None, :, :]
            out[i, j] = float(np.sqrt((diff * diff).sum(axis=2)).min())
    return out


def build_speaker_costs(scene_costs, incidence):
    """Average scene cost over the scenes each speaker occurs in.

    Faceless (infinite) scenes are skipped; a speaker seen only in such scenes
    gets ``inf``. Returns ``(speaker_costs, threshold)`` where threshold is the
    mean of the finite entries (NaN when there are none).
    """
    C1 = np.asarray(scene_costs, dtype=np.float64)
    m, n_scenes = C1.shape
    C2 = np.full((m, len(incidence)), np.inf)
    for s, scenes in enumerate(incidence):
        idx = sorted(int(j) for j in scenes)
        if not idx:
            raise ValueError(f"speaker {s} appears in no scene")
        if idx[0] < 0 or idx[-1] >= n_scenes:
            raise ValueError(f"speaker {s} references a scene outside [0, {n_scenes})")
        block = C1[:, idx]
        for i in range(m):
            row = block[i][np.isfinite(block[i])]
            if row.size:
                C2[i, s] = row.mean()
    finite = C2[np.isfinite(C2)]
    threshold = float(finite.mean()) if finite.size else math.nan
    return C2, threshold


def assign_names(problem: AssignmentProblem) -> dict[str, str]:
    """Map each speaker ID to a character name or ``UNASSIGNED``."""
    C2 = problem.speaker_costs
    m, k = C2.shape
    if m == 0 or k == 0:
        return {s: UNASSIGNED for s in problem.speakers}
    # speakers x (three copies of the characters); column c is character c % m
    cost = np.tile(C2.T, (1, MAX_IDS_PER_CHARACTER))
    cols, _ = hungarian(cost)
    mapping = {}
    for s, col in enumerate(cols):
        name = UNASSIGNED
        if col is not None:
            ch = col % m
            if C2[ch, s] < problem.threshold:
                name = problem.characters[ch]
        mapping[problem.speakers[s]] = name
    return mapping


def problem_from_dict(doc: Mapping) -> AssignmentProblem:
    """Build a problem from the JSON document layout used by the CLI.

    ``{"characters": [{"name": ..., "faces": [[...], ...]}, ...],
    "scenes": [[[...], ...], ...], "speakers": {"SPK": [scene, ...], ...}}``
    """
    try:
        characters = [c["name"] for c in doc["characters"]]
        bank = [c["faces"] for c in doc["characters"]]
        scenes = doc["scenes"]
        speakers = list(doc["speakers"].keys())
        incidence = [doc["speakers"][s] for s in speakers]
    except (KeyError, TypeError, AttributeError) as exc:
        raise ValueError(f"malformed assignment document: {exc}") from None
    C1 = build_scene_costs(bank, scenes)
    return AssignmentProblem(characters, speakers, C1, incidence)

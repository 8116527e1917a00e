"""Exact and baseline solvers for placing images on paragraphs.

Both alignment flavours are assignment problems on the image x paragraph
score matrix:

* complete: every image is placed, no paragraph takes two images;
* selective: exactly ``budget`` images are placed, each image and each
  paragraph used at most once.

The constraint matrix is totally unimodular, so the integer optimum is found
by a fixed-cardinality maximum-weight bipartite matching, solved here with
successive shortest augmenting paths (Dijkstra on reduced costs). Among
co-optimal solutions the lexicographically smallest assignment vector wins
(paragraph of image 0, then image 1, ...; an unplaced image sorts after
every paragraph). Objectives within ``tie_tolerance`` of the optimum count
as co-optimal.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from functools import lru_cache
from itertools import combinations, permutations
from pathlib import Path

import numpy as np

from .errors import InfeasibleError, LoadError, UsageError
from .similarity import SimilarityMatrix

TIE_RTOL = 1e-9
ORACLE_MAX = 8

__all__ = [
    "Alignment",
    "complete_align",
    "selective_align",
    "brute_force_align",
    "greedy_align",
    "random_align",
    "tie_tolerance",
]


@dataclass(frozen=True)
class Alignment:
    assignments: dict[str, int] = field(default_factory=dict)
    objective_value: float = 0.0

    def __post_init__(self):
        cols = list(self.assignments.values())
        if len(set(cols)) != len(cols):
            raise UsageError("alignment places two images on the same paragraph")
        if any(c < 0 for c in cols):
            raise UsageError("alignment contains a negative paragraph index")

    def to_dict(self) -> dict:
        return {"assignments": dict(self.assignments), "objective": self.objective_value}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"

    def write(self, path: str | Path) -> None:
        Path(path).write_text(self.to_json(), encoding="utf-8")

    @classmethod
    def from_dict(cls, raw) -> Alignment:
        if not isinstance(raw, dict) or not isinstance(raw.get("assignments"), dict):
            raise LoadError("alignment JSON needs an object at $.assignments")
        assignments = {}
        for k, v in raw["assignments"].items():
            if not isinstance(v, int) or isinstance(v, bool):
                raise LoadError(f"$.assignments.{k}: paragraph index must be an integer")
            assignments[k] = v
        objective = raw.get("objective", 0.0)
        if not isinstance(objective, (int, float)) or isinstance(objective, bool):
            raise LoadError("$.objective must be a number")
        try:
            return cls(assignments, float(objective))
        except UsageError as exc:
            raise LoadError(str(exc)) from None

    @classmethod
    def load(cls, path: str | Path) -> Alignment:
        path = Path(path)
        try:
            raw = json.loads(path.read_text(encoding="utf-8"))
        except OSError as exc:
            raise LoadError(f"cannot read alignment file {path}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise LoadError(f"{path}: invalid JSON: {exc}") from exc
        try:
            return cls.from_dict(raw)
        except LoadError as exc:
            raise LoadError(f"{path}: {exc}") from None

    def vector(self, image_ids, paragraph_count: int) -> tuple[int, ...]:
        """Assignment vector in ``image_ids`` order; unplaced images map to
        ``paragraph_count``."""
        return tuple(self.assignments.get(i, paragraph_count) for i in image_ids)


def tie_tolerance(scores) -> float:
    scores = np.asarray(scores)
    return TIE_RTOL * float(np.abs(scores).max()) if scores.size else 0.0


def _as_matrix(matrix) -> SimilarityMatrix:
    if isinstance(matrix, SimilarityMatrix):
        return matrix
    return SimilarityMatrix.from_array(matrix)


def _make_alignment(m: SimilarityMatrix, vec) -> Alignment:
    assignments = {}
    picked = []
    for r, c in enumerate(vec):
        if 0 <= c < m.paragraph_count:
            assignments[m.image_ids[r]] = int(c)
            picked.append(m.scores[r, c])
    return Alignment(assignments, math.fsum(picked))


def _check_budget(m: SimilarityMatrix, budget) -> int:
    n, t = m.shape
    if isinstance(budget, bool) or not isinstance(budget, (int, np.integer)):
        raise UsageError(f"budget must be an integer, got {budget!r}")
    if not 1 <= budget <= min(n, t):
        raise UsageError(f"budget {budget} outside 1..min(|I|={n}, |T|={t})")
    return int(budget)


def _check_complete(m: SimilarityMatrix) -> None:
    n, t = m.shape
    if n == 0:
        raise UsageError("no images to align")
    if n > t:
        raise InfeasibleError(f"complete alignment needs |I| <= |T|, got {n} images and {t} paragraphs")


# --- exact solver -----------------------------------------------------------


def _max_matching(w: np.ndarray, b: int):
    """Maximum-weight matching of exactly ``b`` edges in the dense bipartite
    graph ``w`` (rows x cols).

    Min-cost flow with costs ``-w``: source -> row -> col -> sink, unit
    capacities, ``b`` successive shortest paths. Returns the row -> col
    vector (-1 for unmatched rows) and the final reduced costs of the
    row -> col arcs.
    """
    n, m = w.shape
    cost = -w
    row_to_col = np.full(n, -1)
    col_to_row = np.full(m, -1)
    # Feasible initial potentials: shortest distances in the empty-flow DAG.
    pr = np.zeros(n)
    pc = cost.min(axis=0) if n else np.zeros(m)
    pt = float(pc.min()) if m else 0.0
    inf = math.inf

    for _ in range(b):
        dr = np.where(row_to_col < 0, -pr, inf)  # s -> free rows; ps == 0
        np.maximum(dr, 0.0, out=dr, where=np.isfinite(dr))
        dc = np.full(m, inf)
        dt = inf
        par_c = np.full(m, -1)  # row preceding each col
        done_r = np.zeros(n, bool)
        done_c = np.zeros(m, bool)
        end_col = -1
        while True:
            rr = np.where(done_r, inf, dr)
            cc = np.where(done_c, inf, dc)
            i = int(rr.argmin()) if n else -1
            j = int(cc.argmin()) if m else -1
            best_r = rr[i] if n else inf
            best_c = cc[j] if m else inf
            if dt <= best_r and dt <= best_c:
                break
            if best_r <= best_c:
                done_r[i] = True
                rc = cost[i] + pr[i] - pc
                np.maximum(rc, 0.0, out=rc)
                nd = dr[i] + rc
                if row_to_col[i] >= 0:
                    nd[row_to_col[i]] = inf  # matched arc only exists backwards
                upd = (nd < dc) & ~done_c
                dc[upd] = nd[upd]
                par_c[upd] = i
            else:
                done_c[j] = True
                r = col_to_row[j]
                if r >= 0:
                    nd = dc[j] + max(0.0, -cost[r, j] + pc[j] - pr[r])
                    if nd < dr[r] and not done_r[r]:
                        dr[r] = nd
                else:
                    nd = dc[j] + max(0.0, pc[j] - pt)
                    if nd < dt:
                        dt = nd
                        end_col = j
        if end_col < 0:
            raise InfeasibleError("no augmenting path; budget exceeds matchable size")
        pr += np.minimum(dr, dt)
        pc += np.minimum(dc, dt)
        pt += dt
        j = end_col
        while True:
            i = par_c[j]
            prev = row_to_col[i]
            row_to_col[i] = j
            col_to_row[j] = i
            if prev < 0:
                break
            j = prev
    reduced = cost + pr[:, None] - pc[None, :]
    return row_to_col, reduced


def _value(w: np.ndarray, vec) -> float:
    return math.fsum(w[r, c] for r, c in enumerate(vec) if c >= 0)


def _complete_prefix(w: np.ndarray, prefix: list[int], b: int):
    """Best completion of a fixed prefix of row assignments, or None."""
    n, m = w.shape
    k = len(prefix)
    used = {c for c in prefix if c >= 0}
    left = b - len(used)
    rows = list(range(k, n))
    cols = [c for c in range(m) if c not in used]
    if left < 0 or left > min(len(rows), len(cols)):
        return None
    vec = list(prefix) + [-1] * len(rows)
    if left:
        sub, _ = _max_matching(w[np.ix_(rows, cols)], left)
        for r, c in zip(rows, sub):
            if c >= 0:
                vec[r] = cols[c]
    return vec


def _exact(w: np.ndarray, b: int) -> list[int]:
    n, m = w.shape
    first, reduced = _max_matching(w, b)
    best = _value(w, first)
    tol = tie_tolerance(w)
    vec = [int(c) for c in first]
    prefix: list[int] = []
    for k in range(n):
        current = vec[k] if vec[k] >= 0 else m
        used = {c for c in prefix if c >= 0}
        for p in range(current):
            if p in used:
                continue
            # Any solution using arc (k, p) loses at least its reduced cost.
            if first[k] != p and reduced[k, p] > tol:
                continue
            cand = _complete_prefix(w, prefix + [p], b)
            if cand is not None and _value(w, cand) >= best - tol:
                vec = cand
                break
        prefix.append(vec[k])
    return vec


def complete_align(matrix) -> Alignment:
    """Place every image, at most one per paragraph, maximizing total score."""
    m = _as_matrix(matrix)
    _check_complete(m)
    return _make_alignment(m, _exact(m.scores, m.shape[0]))


def selective_align(matrix, budget: int) -> Alignment:
    """Choose and place exactly ``budget`` images, maximizing total score."""
    m = _as_matrix(matrix)
    b = _check_budget(m, budget)
    return _make_alignment(m, _exact(m.scores, b))


# --- oracle -----------------------------------------------------------------


@lru_cache(maxsize=None)
def _perm_table(m: int, k: int) -> np.ndarray:
    return np.array(list(permutations(range(m), k)), dtype=np.int64).reshape(-1, k)


@lru_cache(maxsize=64)
def feasible_vectors(n: int, m: int, b: int | None) -> np.ndarray:
    """Every feasible assignment vector, lexicographically sorted.

    ``b=None`` enumerates complete alignments; otherwise exactly ``b``
    placed images with the rest set to ``m``.
    """
    if b is None:
        return _perm_table(m, n)
    perms = _perm_table(m, b)
    blocks = []
    for rows in combinations(range(n), b):
        block = np.full((len(perms), n), m, dtype=np.int64)
        block[:, list(rows)] = perms
        blocks.append(block)
    table = np.concatenate(blocks) if blocks else np.full((1, n), m, dtype=np.int64)
    order = np.lexsort(table.T[::-1])
    return table[order]


def brute_force_align(matrix, budget: int | None = None) -> Alignment:
    """Exhaustive enumeration; limited to 8 images and 8 paragraphs."""
    m = _as_matrix(matrix)
    n, t = m.shape
    if n > ORACLE_MAX or t > ORACLE_MAX:
        raise UsageError(f"brute force is limited to {ORACLE_MAX}x{ORACLE_MAX}, got {n}x{t}")
    if budget is None:
        _check_complete(m)
        b = None
    else:
        b = _check_budget(m, budget)
    table = feasible_vectors(n, t, b)
    padded = np.hstack([m.scores, np.zeros((n, 1))])
    totals = padded[np.arange(n), table].sum(axis=1)
    tol = tie_tolerance(m.scores)
    idx = int(np.argmax(totals >= totals.max() - tol))
    return _make_alignment(m, table[idx])


# --- baselines --------------------------------------------------------------


def greedy_align(matrix, budget: int | None = None) -> Alignment:
    """Nearest-neighbour baseline: repeatedly take the best remaining pair
    whose image and paragraph are both free."""
    m = _as_matrix(matrix)
    n, t = m.shape
    if budget is None:
        _check_complete(m)
        want = n
    else:
        want = _check_budget(m, budget)
    # stable sort on -score keeps (image, paragraph) row-major order on ties
    order = np.argsort(-m.scores, axis=None, kind="stable")
    vec = [t] * n
    used_c = set()
    placed = 0
    for flat in order:
        if placed == want:
            break
        r, c = divmod(int(flat), t)
        if vec[r] != t or c in used_c:
            continue
        vec[r] = c
        used_c.add(c)
        placed += 1
    return _make_alignment(m, vec)


def random_align(matrix, budget: int | None = None, seed: int = 0) -> Alignment:
    """Uniformly random feasible alignment, reproducible for a fixed seed."""
    m = _as_matrix(matrix)
    n, t = m.shape
    rng = np.random.default_rng(seed)
    vec = [t] * n
    if budget is None:
        _check_complete(m)
        for r, c in enumerate(rng.permutation(t)[:n]):
            vec[r] = int(c)
    else:
        b = _check_budget(m, budget)
        rows = sorted(int(r) for r in rng.choice(n, size=b, replace=False))
        for r, c in zip(rows, rng.permutation(t)[:b]):
            vec[r] = int(c)
    return _make_alignment(m, vec)


SOLVERS = {
    "exact": lambda m, b, seed: complete_align(m) if b is None else selective_align(m, b),
    "greedy": lambda m, b, seed: greedy_align(m, b),
    "random": lambda m, b, seed: random_align(m, b, seed),
    "oracle": lambda m, b, seed: brute_force_align(m, b),
}


def solve(matrix, solver: str = "exact", budget: int | None = None, seed: int = 0) -> Alignment:
    try:
        fn = SOLVERS[solver]
    except KeyError:
        raise UsageError(f"unknown solver {solver!r}; choose from {', '.join(SOLVERS)}") from None
    return fn(_as_matrix(matrix), budget, seed)

"""
Exact Cover Service - Algorithm X over dict-of-sets with primary and secondary columns.

Every exact search in the package reduces to this engine:

- C_t-factors: columns are target vertices, rows are t-cycles
- saturating matchings: A-vertices are primary, B-vertices secondary
- template perfect matchings: every remaining vertex is primary

Primary columns must be covered exactly once, secondary columns at most
once. Columns are chosen by minimum remaining rows (ties to the smallest
column id); rows inside a column are tried in row-id order, so callers
put hint rows first.
"""
import heapq
import logging
import time
from typing import Hashable, Iterable, Literal, NamedTuple, Sequence

logger = logging.getLogger(__name__)

SearchStatus = Literal["found", "none", "unknown"]

# Steps between deadline polls
POLL_EVERY = 1024


class ExactCoverError(Exception):
    """Raised when an exact cover instance is malformed."""
    pass


class CoverOutcome(NamedTuple):
    status: SearchStatus
    rows: list[int] | None
    steps: int


# =============================================================================
# DATA STRUCTURES
# =============================================================================

class ExactCover:
    """
    Sparse exact cover instance.

    X maps column -> set of rows still containing it,
    Y maps row -> list of its columns.
    """

    def __init__(self, rows: Sequence[Iterable[Hashable]], primary: Iterable[Hashable],
                 secondary: Iterable[Hashable] = ()):
        """
        Args:
            rows: Row contents; row i is referred to by index i
            primary: Columns that must be covered exactly once
            secondary: Columns that may be covered at most once

        Rows touching a column outside primary ∪ secondary are dropped.
        """
        self.primary = set(primary)
        secondary = set(secondary)
        if self.primary & secondary:
            raise ExactCoverError("a column cannot be both primary and secondary")
        universe = self.primary | secondary

        self.X: dict[Hashable, set[int]] = {c: set() for c in universe}
        self.Y: dict[int, list[Hashable]] = {}
        for i, row in enumerate(rows):
            cols = list(dict.fromkeys(row))
            if not cols or any(c not in universe for c in cols):
                continue
            self.Y[i] = cols
            for c in cols:
                self.X[c].add(i)
        self.remaining = set(self.primary)
        # lazy min-heap of (row count, column); stale entries are skipped
        self._heap = [(len(self.X[c]), c) for c in self.primary]
        heapq.heapify(self._heap)

    # =========================================================================
    # COVER / UNCOVER
    # =========================================================================

    def select(self, r: int) -> list[set[int]]:
        """Take row r: remove its columns and every row that clashes with it."""
        X, Y = self.X, self.Y
        saved = []
        for j in Y[r]:
            for i in X[j]:
                for k in Y[i]:
                    if k != j:
                        X[k].remove(i)
                        self._touch(k)
            saved.append(X.pop(j))
            self.remaining.discard(j)
        return saved

    def deselect(self, r: int, saved: list[set[int]]) -> None:
        """Undo select(r); must be called in reverse order of selection."""
        X, Y = self.X, self.Y
        for j in reversed(Y[r]):
            X[j] = saved.pop()
            if j in self.primary:
                self.remaining.add(j)
                self._touch(j)
            for i in X[j]:
                for k in Y[i]:
                    if k != j:
                        X[k].add(i)
                        self._touch(k)

    def _touch(self, c: Hashable) -> None:
        if c in self.remaining:
            heapq.heappush(self._heap, (len(self.X[c]), c))

    def choose_column(self) -> Hashable | None:
        """Primary column with fewest candidate rows, or None when all are covered."""
        if not self.remaining:
            return None
        heap = self._heap
        while heap:
            size, c = heap[0]
            if c in self.remaining and len(self.X[c]) == size:
                return c
            heapq.heappop(heap)
        # unreachable while the heap invariant holds
        return min(self.remaining, key=lambda c: (len(self.X[c]), c))

    # =========================================================================
    # SEARCH
    # =========================================================================

    def solve(self, deadline: float | None = None) -> CoverOutcome:
        """
        Depth-first search for one exact cover.

        Args:
            deadline: time.monotonic() value after which the search gives up

        Returns:
            CoverOutcome with status "found" (rows set), "none" after a complete
            search, or "unknown" when the deadline passed
        """
        solution: list[int] = []
        steps = 0

        col = self.choose_column()
        if col is None:
            return CoverOutcome("found", [], 0)

        # frame: [candidates, next index, chosen row, saved columns]
        stack = [[sorted(self.X[col]), 0, None, None]]
        while stack:
            frame = stack[-1]
            if frame[2] is not None:
                self.deselect(frame[2], frame[3])
                solution.pop()
                frame[2] = frame[3] = None
            if frame[1] >= len(frame[0]):
                stack.pop()
                continue

            r = frame[0][frame[1]]
            frame[1] += 1
            frame[3] = self.select(r)
            frame[2] = r
            solution.append(r)

            steps += 1
            if deadline is not None and steps % POLL_EVERY == 0 and time.monotonic() > deadline:
                logger.debug("exact cover timed out after %d steps", steps)
                self._unwind(stack)
                return CoverOutcome("unknown", None, steps)

            col = self.choose_column()
            if col is None:
                found = list(solution)
                self._unwind(stack)
                logger.debug("exact cover solved in %d steps", steps)
                return CoverOutcome("found", found, steps)
            if self.X[col]:
                stack.append([sorted(self.X[col]), 0, None, None])

        logger.debug("exact cover exhausted after %d steps", steps)
        return CoverOutcome("none", None, steps)

    def _unwind(self, stack: list) -> None:
        # restore the instance so it can be searched again
        for frame in reversed(stack):
            if frame[2] is not None:
                self.deselect(frame[2], frame[3])


def solve_exact_cover(rows: Sequence[Iterable[Hashable]], primary: Iterable[Hashable],
                      secondary: Iterable[Hashable] = (), deadline: float | None = None) -> CoverOutcome:
    """Build an ExactCover instance and run one search."""
    return ExactCover(rows, primary, secondary).solve(deadline)


def deadline_after(budget_ms: int | None) -> float | None:
    """time.monotonic() deadline for a millisecond budget; None means unbounded."""
    if budget_ms is None:
        return None
    return time.monotonic() + budget_ms / 1000.0

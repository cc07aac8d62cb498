import pytest

from src.services.exact_cover import ExactCover, ExactCoverError, solve_exact_cover

# Knuth's example: rows A..F over columns 1..7, unique cover {B, D, F}
KNUTH_ROWS = [
    {1, 4, 7},
    {1, 4},
    {4, 5, 7},
    {3, 5, 6},
    {2, 3, 6, 7},
    {2, 7},
]


def test_knuth_example():
    outcome = solve_exact_cover(KNUTH_ROWS, primary=range(1, 8))
    assert outcome.status == "found"
    assert sorted(outcome.rows) == [1, 3, 5]


def test_complete_search_reports_none():
    outcome = solve_exact_cover([{1, 2}, {2, 3}], primary={1, 2, 3})
    assert outcome.status == "none"
    assert outcome.rows is None


def test_secondary_columns_are_covered_at_most_once():
    rows = [{1, "a"}, {2, "a"}, {2}]
    outcome = solve_exact_cover(rows, primary={1, 2}, secondary={"a"})
    assert outcome.status == "found"
    assert sorted(outcome.rows) == [0, 2]


def test_empty_primary_is_trivially_covered():
    assert solve_exact_cover([{1}], primary=()).status == "found"


def test_rows_outside_the_universe_are_dropped():
    outcome = solve_exact_cover([{1, 9}, {1}], primary={1})
    assert outcome.rows == [1]


def test_column_cannot_be_primary_and_secondary():
    with pytest.raises(ExactCoverError):
        ExactCover([{1}], primary={1}, secondary={1})


def test_instance_is_restored_after_a_search():
    cover = ExactCover(KNUTH_ROWS, primary=range(1, 8))
    first = cover.solve()
    second = cover.solve()
    assert first.rows == second.rows
    assert first.steps == second.steps

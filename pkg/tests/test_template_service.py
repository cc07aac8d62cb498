import pytest

from src.models.pipeline import Template
from src.services.template_service import (
    TemplateError,
    balanced_subset_count,
    balanced_subsets,
    build_template,
    find_failing_subset,
    perfect_matching,
    verify_template,
)


def _identity(t: int, m: int) -> Template:
    size = 2 * m
    return Template(t=t, m=m, edges=tuple(tuple(i * size + j for i in range(t)) for j in range(size)), max_degree=1)


def test_smallest_template_is_the_two_identity_lines():
    tpl = build_template(3, 1)
    assert tpl.edges == ((0, 2, 4), (1, 3, 5))
    assert tpl.verified
    assert verify_template(tpl)
    assert perfect_matching(tpl) == [0, 1]
    assert perfect_matching(tpl, frozenset({0, 2, 4})) == [1]


def test_template_parameter_errors():
    with pytest.raises(TemplateError):
        build_template(3, 1, max_degree=0)
    with pytest.raises(TemplateError):
        build_template(2, 1)
    with pytest.raises(TemplateError):
        build_template(3, 0)


def test_built_template_is_robust():
    tpl = build_template(3, 2, seed=5)
    assert tpl.verified
    assert find_failing_subset(tpl) is None
    assert len(tpl.edges) >= 4
    assert tpl.degree() <= tpl.max_degree


def test_template_is_seeded():
    assert build_template(3, 2, seed=5) == build_template(3, 2, seed=5)


def test_removing_an_edge_breaks_the_template():
    tpl = build_template(3, 1)
    broken = tpl.model_copy(update={"edges": tpl.edges[1:]})
    assert not verify_template(broken)
    assert find_failing_subset(broken) == frozenset()
    empty = Template(t=3, m=1, edges=(), max_degree=1)
    assert not verify_template(empty)


def test_identity_lines_fail_for_larger_m():
    tpl = _identity(3, 2)
    assert not verify_template(tpl)
    # Z = {0, 5, 8} kills lines 0 and 1, so vertex 4 is on no surviving line
    assert perfect_matching(tpl, frozenset({0, 5, 8})) is None


def test_balanced_subsets_are_counted():
    tpl = _identity(3, 2)
    subsets = list(balanced_subsets(tpl))
    assert len(subsets) == balanced_subset_count(3, 2) == 10
    assert all(len(Z) % 3 == 0 for Z in subsets)
    assert all(all(tpl.is_flexible(b) for b in Z) for Z in subsets)


def test_exhaustive_verification_is_capped():
    with pytest.raises(TemplateError):
        find_failing_subset(_identity(3, 4))


def test_spot_checked_template_above_cap():
    tpl = build_template(3, 4, seed=1)
    assert not tpl.verified
    assert len(tpl.edges) >= 8


def test_template_rejects_edges_across_wrong_parts():
    with pytest.raises(ValueError):
        Template(t=3, m=1, edges=((0, 1, 4),), max_degree=1)

from fractions import Fraction

import pytest

from src.models.pipeline import PipelineConfig
from src.services.factor_service import verify_factor
from src.services.graph_service import complete_blowup
from src.services.random_service import sample_blowup_subgraph
from src.workflow import PHASES, PipelineError, create_pipeline_workflow, get_workflow, run_pipeline


def test_workflow_is_a_singleton():
    assert get_workflow() is get_workflow()
    assert create_pipeline_workflow() is not get_workflow()


def test_small_complete_blowup_skips_absorber_phases():
    pg = complete_blowup(3, 30)
    result = run_pipeline(pg, PipelineConfig(t=3, k=2))
    assert verify_factor(pg.graph, result.certificate, 3, range(90))
    assert result.m == 0 and result.template_edges == 0 and result.absorber_vertices == 0
    assert [entry.phase for entry in result.trace] == PHASES
    statuses = {entry.phase: entry.status for entry in result.trace}
    assert statuses["template"] == "skipped"
    assert statuses["bulk"] == statuses["assemble"] == "ok"


def test_pipeline_with_one_absorber_per_template_edge():
    pg = complete_blowup(3, 93)
    result = run_pipeline(pg, PipelineConfig(t=3, k=2, seed=2))
    assert verify_factor(pg.graph, result.certificate, 3, range(pg.graph.n))
    assert result.m == 1
    assert result.template_edges == 2
    assert result.absorber_vertices == 276
    assert all(entry.status == "ok" for entry in result.trace)


def test_indivisible_part_size_fails_validation():
    with pytest.raises(PipelineError) as exc:
        run_pipeline(complete_blowup(3, 7), PipelineConfig(t=3, k=2))
    assert exc.value.phase == "validate"
    trace = exc.value.partial["trace"]
    assert trace[0].status == "failed"
    assert all(entry.status == "skipped" for entry in trace[1:])


def test_part_count_must_match_t():
    with pytest.raises(PipelineError) as exc:
        run_pipeline(complete_blowup(3, 8), PipelineConfig(t=4, k=2))
    assert exc.value.phase == "validate"


def test_config_ranges():
    with pytest.raises(ValueError):
        PipelineConfig(t=5, k=2)
    with pytest.raises(ValueError):
        PipelineConfig(t=3, k=2, rho=Fraction(1))
    with pytest.raises(ValueError):
        PipelineConfig(t=3, k=2, p=Fraction(0))
    assert PipelineConfig(t=3, k=2, rho=0).rho == 0


def test_random_host_is_covered():
    pg = sample_blowup_subgraph(3, 24, Fraction(3, 5), Fraction(1), seed=0)
    result = run_pipeline(pg, PipelineConfig(t=3, k=2, p=Fraction(3, 5), seed=0))
    assert verify_factor(pg.graph, result.certificate, 3, range(72))


def test_same_seed_same_certificate():
    pg = complete_blowup(3, 30)
    cfg = PipelineConfig(t=3, k=2, seed=9)
    assert run_pipeline(pg, cfg).certificate == run_pipeline(pg, cfg).certificate


@pytest.mark.slow
@pytest.mark.parametrize("seed", range(10))
def test_random_hosts_across_seeds(seed):
    pg = sample_blowup_subgraph(3, 30, Fraction(3, 5), Fraction(1), seed=seed)
    result = run_pipeline(pg, PipelineConfig(t=3, k=2, p=Fraction(3, 5), seed=seed))
    assert verify_factor(pg.graph, result.certificate, 3, range(90))

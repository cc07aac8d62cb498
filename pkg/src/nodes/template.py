"""
Template Node - Capacity planning and template construction.
"""
import logging

from src.nodes.phase import done, fail, halted, skip
from src.services.gadget_service import switcher_size
from src.services.template_service import TemplateError, build_template
from src.state import PipelineState

logger = logging.getLogger(__name__)

PHASE = "template"


def template_node(state: PipelineState) -> dict:
    """
    Pick the largest m ≤ max(1, ⌊ξñ⌋) whose W-absorber fits into every part,
    and build its template.

    A W-absorber with template B uses 2m roots per part plus v(F_abs)/t - 1
    further vertices per part for each edge of B. When not even m = 1 fits,
    the absorber phases are skipped and the bulk phase covers everything.

    Args:
        state: Workflow state with pg and cfg

    Returns:
        Dict with state updates
    """
    if halted(state):
        return skip(PHASE, "earlier phase failed")
    pg, cfg = state["pg"], state["cfg"]
    n_tilde, t = pg.n_tilde, cfg.t
    per_edge = switcher_size(t, cfg.k) - 1
    start = cfg.m if cfg.m is not None else max(1, int(cfg.xi * n_tilde))

    for m in range(start, 0, -1):
        # a template has at least its 2m identity lines
        if 2 * m + 2 * m * per_edge > n_tilde:
            continue
        try:
            tpl = build_template(t, m, cfg.max_degree, cfg.seed, cfg.verify_cap)
        except TemplateError as e:
            return fail(PHASE, str(e), m=m)
        need = 2 * m + len(tpl.edges) * per_edge
        if need <= n_tilde:
            logger.info("template m=%d fits: %d of %d vertices per part", m, need, n_tilde)
            return {
                "m": m,
                "template": tpl,
                "skipped": False,
                **done(PHASE, note="verified" if tpl.verified else "spot-checked",
                       m=m, edges=len(tpl.edges), max_degree=tpl.degree(), per_part=need),
            }
        logger.debug("template m=%d needs %d vertices per part, only %d available", m, need, n_tilde)

    logger.info("no absorber fits into parts of size %d; covering exactly", n_tilde)
    return {"m": 0, "skipped": True, **skip(PHASE, f"no W-absorber fits into parts of size {n_tilde}")}

"""
Gadget Service - C_t-trees, ladders, switchers, absorbers and their derived graphs.

All constructions assign ids deterministically (level order for trees,
row order for ladders) so repeated builds are identical.
"""
import logging
import re
from fractions import Fraction
from typing import Sequence

from src.models.gadget import PropertyCheck, RootedGadget
from src.models.graph import Graph
from src.services.factor_service import find_ct_factor, verify_factor
from src.services.graph_service import two_density_flow

logger = logging.getLogger(__name__)


class GadgetError(Exception):
    """Raised when a gadget cannot be built or labelled."""
    pass


# C_t-TREES

def tree_size(t: int, k: int) -> int:
    """Vertices in a C_t-tree of depth k: levels 0..k+1."""
    return sum((t - 1) ** i for i in range(k + 2))


def _tree_parts(t: int, k: int, offset: int) -> tuple[dict[tuple[int, int], int], list[tuple[int, int]], list[tuple[int, ...]]]:
    """
    Labels u[i,j] -> id, edges and defining cycles of a C_t-tree placed at `offset`.
    """
    ids: dict[tuple[int, int], int] = {}
    nxt = offset
    for i in range(k + 2):
        for j in range(1, (t - 1) ** i + 1):
            ids[(i, j)] = nxt
            nxt += 1

    edges, cycles = [], []
    for i in range(k + 1):
        for j in range(1, (t - 1) ** i + 1):
            base = (j - 1) * (t - 1)
            cyc = (ids[(i, j)],) + tuple(ids[(i + 1, base + x)] for x in range(1, t))
            cycles.append(cyc)
            edges.extend((cyc[x], cyc[(x + 1) % t]) for x in range(t))
    return ids, edges, cycles


def build_ct_tree(t: int, k: int) -> RootedGadget:
    """
    C_t-tree of depth k: a (t-1)-ary tree of depth k with every node
    replaced by a t-cycle, rooted at u[0,1].

    Raises:
        GadgetError: If t < 3 or k < 1
    """
    if t < 3 or k < 1:
        raise GadgetError(f"C_t-tree needs t >= 3 and k >= 1, got t={t}, k={k}")
    ids, edges, cycles = _tree_parts(t, k, 0)
    roles = {v: f"u[{i},{j}]" for (i, j), v in ids.items()}
    return RootedGadget(
        graph=Graph(len(ids), edges),
        kind="ct_tree",
        t=t,
        k=k,
        roles=roles,
        cycle_list=tuple(cycles),
    )


# LADDERS

def _ladder_parts(rows: Sequence[Sequence[int]]) -> tuple[list[tuple[int, int]], list[tuple[int, ...]]]:
    """Edges and cells of a ladder whose rows are given as vertex lists."""
    edges = []
    for row in rows:
        edges.extend(zip(row, row[1:]))
    for upper, lower in zip(rows, rows[1:]):
        edges.append((upper[0], lower[0]))
        if (upper[-1], lower[-1]) != (upper[0], lower[0]):
            edges.append((upper[-1], lower[-1]))
    # each cell: row i forward, row i+1 backward
    cells = [tuple(upper) + tuple(reversed(lower)) for upper, lower in zip(rows, rows[1:])]
    return edges, cells


def build_ladder(a: int, b: int, l: int) -> RootedGadget:
    """
    (a,b)-ladder of length l: rows w[i,1..a] for odd i and w[i,1..b] for
    even i, each a path, plus the two boundary paths down the first and
    last entries of every row.

    Raises:
        GadgetError: If l is even or below 3, or a or b is below 1
    """
    if l % 2 == 0 or l < 3:
        raise GadgetError(f"ladder length must be odd and at least 3, got {l}")
    if a < 1 or b < 1:
        raise GadgetError(f"ladder widths must be positive, got a={a}, b={b}")
    rows, roles, nxt = [], {}, 0
    for i in range(1, l + 1):
        width = a if i % 2 else b
        row = list(range(nxt, nxt + width))
        for x, v in enumerate(row, start=1):
            roles[v] = f"w[{i},{x}]"
        rows.append(row)
        nxt += width
    edges, cells = _ladder_parts(rows)
    return RootedGadget(
        graph=Graph(nxt, edges, dedupe=True),
        kind="ladder",
        t=a + b,
        k=(l + 1) // 2,
        roles=roles,
        cycle_list=tuple(cells),
    )


# SWITCHERS AND ABSORBERS

def _check_tk(t: int, k: int) -> None:
    if k < 2 or t not in (2 * k - 1, 2 * k):
        raise GadgetError(f"switchers need k >= 2 and t in {{2k-1, 2k}}, got t={t}, k={k}")


def switcher_size(t: int, k: int) -> int:
    interior = (k - 2) * (t - 1) + (k - 1) * (t + 1)
    return 2 * tree_size(t, k) + (t - 1) ** k * interior


def build_switcher(t: int, k: int) -> RootedGadget:
    """
    (v,v')-switcher: two C_t-trees of depth k rooted at v and v' whose
    bottom cycle pairs are joined by a (k-1, t-k+1)-ladder and a
    (t-k, k)-ladder, both of length 2k-1.

    Ladder 1 runs from v_2..v_k to u_2..u_k, ladder 2 from v_{k+1}..v_t to
    u_{k+1}..u_t, where v_1..v_t is the bottom cycle in the v-tree and
    u_1..u_t its twin in the v'-tree.

    Raises:
        GadgetError: If t is not 2k-1 or 2k, or k < 2
    """
    _check_tk(t, k)
    size = tree_size(t, k)
    ids_v, edges, cycles = _tree_parts(t, k, 0)
    ids_w, edges_w, cycles_w = _tree_parts(t, k, size)
    edges = edges + edges_w
    cycles = cycles + cycles_w

    roles = {v: f"v:u[{i},{j}]" for (i, j), v in ids_v.items()}
    roles.update({v: f"v':u[{i},{j}]" for (i, j), v in ids_w.items()})
    roles[ids_v[(0, 1)]] = "v"
    roles[ids_w[(0, 1)]] = "v'"

    length = 2 * k - 1
    widths = ((k - 1, t - k + 1), (t - k, k))
    nxt = 2 * size
    cells_all = []
    for j in range(1, (t - 1) ** k + 1):
        base = (j - 1) * (t - 1)
        lower = [ids_v[(k, j)]] + [ids_v[(k + 1, base + x)] for x in range(1, t)]
        upper = [ids_w[(k, j)]] + [ids_w[(k + 1, base + x)] for x in range(1, t)]
        ends = (
            (lower[1:k], upper[1:k]),
            (lower[k:t], upper[k:t]),
        )
        for side, ((a, b), (first, last)) in enumerate(zip(widths, ends), start=1):
            rows = [first]
            for i in range(2, length):
                width = a if i % 2 else b
                row = list(range(nxt, nxt + width))
                for x, v in enumerate(row, start=1):
                    roles[v] = f"L{side}[{j}]:w[{i},{x}]"
                rows.append(row)
                nxt += width
            rows.append(last)
            ladder_edges, cells = _ladder_parts(rows)
            edges.extend(ladder_edges)
            cells_all.extend(cells)

    graph = Graph(nxt, edges, dedupe=True)
    logger.debug("switcher(t=%d, k=%d): %d vertices, %d edges", t, k, graph.n, graph.num_edges)
    return RootedGadget(
        graph=graph,
        kind="switcher",
        t=t,
        k=k,
        roles=roles,
        cycle_list=tuple(cycles + cells_all),
    )


def build_absorber(t: int, k: int) -> RootedGadget:
    """
    R-absorber: a t-cycle s_1..s_t plus disjoint (s_i, r_i)-switchers.

    Switcher i occupies ids (i-1)*v(F_sw) .. i*v(F_sw)-1 with its v at s_i
    and its v' at r_i. The s-cycle is listed first in cycle_list.

    Raises:
        GadgetError: If t is not 2k-1 or 2k, or k < 2
    """
    sw = build_switcher(t, k)
    S = sw.graph.n
    v_id, w_id = sw.vertex("v"), sw.vertex("v'")

    edges, cycles, roles = [], [], {}
    for i in range(t):
        shift = i * S
        edges.extend((int(a) + shift, int(b) + shift) for a, b in sw.graph.edges)
        cycles.extend(tuple(x + shift for x in c) for c in sw.cycle_list)
        for x, role in sw.roles.items():
            roles[x + shift] = f"sw[{i + 1}]/{role}"
        roles[v_id + shift] = f"s[{i + 1}]"
        roles[w_id + shift] = f"r[{i + 1}]"

    s_cycle = tuple(v_id + i * S for i in range(t))
    edges.extend((s_cycle[i], s_cycle[(i + 1) % t]) for i in range(t))
    return RootedGadget(
        graph=Graph(t * S, edges),
        kind="absorber",
        t=t,
        k=k,
        roles=roles,
        cycle_list=(s_cycle,) + tuple(cycles),
    )


# DERIVED GRAPHS

_ROOT_TREE_ROLE = re.compile(r"^sw\[(\d+)\]/v':u\[(\d+),(\d+)\]$")
_ROOT_ROLE = re.compile(r"^r\[(\d+)\]$")


def root_tree_members(absorber: RootedGadget) -> dict[int, list[int]]:
    """
    For each i, the vertices of the depth-(k-1) C_t-tree rooted at r_i
    (levels 0..k of the v'-tree of switcher i).
    """
    trees: dict[int, list[int]] = {i: [] for i in range(1, absorber.t + 1)}
    for v, role in sorted(absorber.roles.items()):
        m = _ROOT_ROLE.match(role)
        if m:
            trees[int(m.group(1))].append(v)
            continue
        m = _ROOT_TREE_ROLE.match(role)
        if m and int(m.group(2)) <= absorber.k:
            trees[int(m.group(1))].append(v)
    return trees


def contract_fconn(absorber: RootedGadget) -> RootedGadget:
    """
    F_conn: each depth-(k-1) C_t-tree rooted at r_i contracted to a single
    vertex R[i]; loops and parallel edges dropped.

    Surviving vertices keep their order; R[1..t] are appended.

    Raises:
        GadgetError: If the input is not an absorber
    """
    if absorber.kind != "absorber":
        raise GadgetError(f"F_conn is built from an absorber, got {absorber.kind}")
    trees = root_tree_members(absorber)
    contracted = {v for members in trees.values() for v in members}
    keep = [v for v in range(absorber.graph.n) if v not in contracted]
    new_id = {v: i for i, v in enumerate(keep)}
    for i in range(1, absorber.t + 1):
        R = len(keep) + i - 1
        for v in trees[i]:
            new_id[v] = R

    edges = {
        tuple(sorted((new_id[int(a)], new_id[int(b)])))
        for a, b in absorber.graph.edges
        if new_id[int(a)] != new_id[int(b)]
    }
    roles = {new_id[v]: r for v, r in absorber.roles.items() if v not in contracted}
    roles.update({len(keep) + i - 1: f"R[{i}]" for i in range(1, absorber.t + 1)})
    cycles = tuple(
        tuple(new_id[v] for v in c)
        for c in absorber.cycle_list
        if sum(v in contracted for v in c) <= 1
    )
    return RootedGadget(
        graph=Graph(len(keep) + absorber.t, sorted(edges)),
        kind="fconn",
        t=absorber.t,
        k=absorber.k,
        roles=roles,
        cycle_list=cycles,
    )


def remove_root_trees(absorber: RootedGadget) -> RootedGadget:
    """
    F_abs^-: the absorber with the depth-(k-1) trees at r_1..r_t deleted.

    Raises:
        GadgetError: If the input is not an absorber
    """
    if absorber.kind != "absorber":
        raise GadgetError(f"F_abs^- is built from an absorber, got {absorber.kind}")
    removed = {v for members in root_tree_members(absorber).values() for v in members}
    keep = [v for v in range(absorber.graph.n) if v not in removed]
    new_id = {v: i for i, v in enumerate(keep)}
    edges = [
        (new_id[int(a)], new_id[int(b)])
        for a, b in absorber.graph.edges
        if int(a) not in removed and int(b) not in removed
    ]
    return RootedGadget(
        graph=Graph(len(keep), edges),
        kind="fabs_minus",
        t=absorber.t,
        k=absorber.k,
        roles={new_id[v]: r for v, r in absorber.roles.items() if v not in removed},
        cycle_list=tuple(tuple(new_id[v] for v in c) for c in absorber.cycle_list if not removed.intersection(c)),
    )


# BLOW-UP LABELLING

def propagate_labels(cycles: Sequence[Sequence[int]], t: int, seeds: dict[int, int]) -> dict[int, int]:
    """
    Greedy cyclic labelling: every cycle with a labelled vertex gets labels
    that step by +1 (or, failing that, -1) mod t along the cycle.

    Raises:
        GadgetError: If some cycle admits neither direction
    """
    labels = dict(seeds)
    pending = list(cycles)
    while pending:
        left = []
        for cyc in pending:
            anchor = next((p for p, v in enumerate(cyc) if v in labels), None)
            if anchor is None:
                left.append(cyc)
                continue
            base = labels[cyc[anchor]]
            for step in (1, -1):
                proposal = {v: (base + step * (p - anchor)) % t for p, v in enumerate(cyc)}
                if all(labels.get(v, lab) == lab for v, lab in proposal.items()):
                    labels.update(proposal)
                    break
            else:
                raise GadgetError(f"labelling contradiction on cycle {tuple(cyc)}")
        if len(left) == len(pending):
            break
        pending = left
    return labels


def blowup_labeling(gadget: RootedGadget) -> dict[int, int]:
    """
    Map every gadget vertex to a part in 0..t-1 so that every edge joins
    cyclically consecutive parts. For absorbers r_i lands in part i-1.

    Raises:
        GadgetError: For unsupported kinds or if propagation contradicts itself
    """
    if gadget.kind not in ("absorber", "switcher", "ct_tree", "ladder"):
        raise GadgetError(f"no blow-up labelling for kind {gadget.kind}")
    if not gadget.cycle_list:
        return {}
    labels = propagate_labels(gadget.cycle_list, gadget.t, {gadget.cycle_list[0][0]: 0})
    if len(labels) != gadget.graph.n:
        raise GadgetError(f"labelling reached {len(labels)} of {gadget.graph.n} vertices")
    t = gadget.t
    for a, b in gadget.graph.edges:
        if (labels[int(a)] - labels[int(b)]) % t not in (1, t - 1):
            raise GadgetError(f"edge ({a}, {b}) joins non-consecutive parts")
    return labels


def labeling_is_valid(gadget: RootedGadget, labels: dict[int, int]) -> bool:
    """Every edge between consecutive parts and, for absorbers, r_i in distinct parts."""
    t = gadget.t
    if any((labels[int(a)] - labels[int(b)]) % t not in (1, t - 1) for a, b in gadget.graph.edges):
        return False
    if gadget.kind == "absorber":
        return len({labels[r] for r in gadget.roots()}) == t
    return True


# PROPERTY SUITE

def gadget_factor(gadget: RootedGadget, removed: Sequence[int] = (), budget_ms: int | None = None):
    """C_t-factor search on gadget minus `removed`, using its defining cycles as hints."""
    drop = set(removed)
    target = [v for v in range(gadget.graph.n) if v not in drop]
    hints = [c for c in gadget.cycle_list if not drop.intersection(c)]
    return find_ct_factor(gadget.graph, gadget.t, restrict_to=target, budget_ms=budget_ms, hints=hints)


def verify_absorber_properties(t: int, k: int, budget_ms: int | None = None) -> list[PropertyCheck]:
    """
    Run the absorber property suite: factors of F_sw - v, F_sw - v', F_abs
    and F_abs - R; m_2(F_conn) ≤ k/(k-1); a valid blow-up labelling.

    Returns:
        One PropertyCheck per property
    """
    checks: list[PropertyCheck] = []
    sw = build_switcher(t, k)
    ab = build_absorber(t, k)
    v, v2 = sw.roots()

    # 1. Divisibility
    checks.append(PropertyCheck(
        name="v(F_sw) = 1 mod t",
        status="pass" if sw.graph.n % t == 1 else "fail",
        detail=f"v(F_sw)={sw.graph.n}",
    ))
    checks.append(PropertyCheck(
        name="v(F_abs) = 0 mod t",
        status="pass" if ab.graph.n % t == 0 else "fail",
        detail=f"v(F_abs)={ab.graph.n}",
    ))

    # 2. Factors
    for name, gadget, removed in (
        ("F_sw - v has a C_t-factor", sw, (v,)),
        ("F_sw - v' has a C_t-factor", sw, (v2,)),
        ("F_abs has a C_t-factor", ab, ()),
        ("F_abs - R has a C_t-factor", ab, ab.roots()),
    ):
        result = gadget_factor(gadget, removed, budget_ms)
        cover = set(range(gadget.graph.n)) - set(removed)
        if result.status == "found":
            ok = verify_factor(gadget.graph, result.certificate, t, cover)
            status = "pass" if ok else "fail"
            detail = f"{len(result.certificate.cycles)} cycles, verified={ok}"
        else:
            status = "unknown" if result.status == "unknown" else "fail"
            detail = result.status
        checks.append(PropertyCheck(name=name, status=status, detail=detail))

    # 3. 2-density of F_conn
    fconn = contract_fconn(ab)
    m2 = two_density_flow(fconn.graph).value
    bound = Fraction(k, k - 1)
    checks.append(PropertyCheck(
        name="m_2(F_conn) <= k/(k-1)",
        status="pass" if m2 <= bound else "fail",
        detail=f"m_2={m2}, bound={bound}",
    ))

    # 4. Blow-up labelling
    try:
        labels = blowup_labeling(ab)
        ok = labeling_is_valid(ab, labels)
        checks.append(PropertyCheck(
            name="F_abs is a subgraph of a C_t blow-up",
            status="pass" if ok else "fail",
            detail="roots in parts " + ",".join(str(labels[r] + 1) for r in ab.roots()),
        ))
    except GadgetError as e:
        checks.append(PropertyCheck(name="F_abs is a subgraph of a C_t blow-up", status="fail", detail=str(e)))

    for check in checks:
        logger.info("(t=%d, k=%d) %s: %s", t, k, check.name, check.status)
    return checks

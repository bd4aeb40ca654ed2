"""End-to-end construction: distances -> tree -> optimized unit graph."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .data_io import DistanceMatrix
from .filters import FilterAssignment, FilterMST, filter_mst, reduce_matrix
from .graph_core import SortedEdgeList, UnitGraph, build_unit_graph, mst, sort_edges, split_tree
from .layout_export import StadNetwork, annotate
from .objective import ObjectiveContext
from .optimizer import AnnealSchedule, OptimizationResult, anneal, brute_force_optimum

MST_MODES = ("classical", "filter-aware")
CORRELATION_TARGETS = ("reduced", "full")


@dataclass(frozen=True)
class StadResult:
    context: ObjectiveContext
    optimization: OptimizationResult
    graph: UnitGraph
    tree: SortedEdgeList
    filter_tree: Optional[FilterMST] = None

    @property
    def correlation(self) -> float:
        return self.optimization.best_r


def prepare(
    d: DistanceMatrix,
    assignment: Optional[FilterAssignment] = None,
    mst_mode: str = "classical",
    correlate_against: str = "reduced",
    walk_length: int = 4,
) -> tuple[ObjectiveContext, Optional[FilterMST]]:
    """Build the objective context: spanning tree, remaining sorted edges and
    the pairs the correlation runs over."""
    if mst_mode not in MST_MODES:
        raise ValueError(f"unknown MST mode {mst_mode!r}")
    if correlate_against not in CORRELATION_TARGETS:
        raise ValueError(f"unknown correlation target {correlate_against!r}")
    if assignment is None:
        if mst_mode == "filter-aware":
            raise ValueError("filter-aware MST mode needs a filter")
        edges = sort_edges(d)
        tree = mst(edges)
        return ObjectiveContext(d.condensed, tree, split_tree(edges, tree)), None

    rd = reduce_matrix(d, assignment)
    edges = rd.sorted_edges()
    ftree = None
    if mst_mode == "classical":
        tree = mst(edges)
    else:
        ftree = filter_mst(rd, assignment, walk_length=walk_length)
        tree = ftree.edges
    mask = rd.retained if correlate_against == "reduced" and not np.all(rd.retained) else None
    return ObjectiveContext(d.condensed, tree, split_tree(edges, tree), mask), ftree


def build_network(
    d: DistanceMatrix,
    assignment: Optional[FilterAssignment] = None,
    schedule: AnnealSchedule = AnnealSchedule(),
    mst_mode: str = "classical",
    correlate_against: str = "reduced",
    exhaustive: bool = False,
    walk_length: int = 4,
) -> StadResult:
    ctx, ftree = prepare(d, assignment, mst_mode, correlate_against, walk_length)
    opt = brute_force_optimum(ctx) if exhaustive else anneal(ctx, schedule)
    g = build_unit_graph(ctx.mst_edges, ctx.sorted_non_tree, opt.best_i)
    return StadResult(ctx, opt, g, ctx.mst_edges, ftree)


def to_network(
    result: StadResult,
    d: DistanceMatrix,
    meta: Optional[dict] = None,
    labels=None,
    attributes=None,
) -> StadNetwork:
    meta = dict(meta or {})
    meta.setdefault("edges_added", result.optimization.best_i)
    meta.setdefault("evaluations", result.optimization.evaluations)
    trace = result.optimization.trace
    if trace.i.size and trace.i[0] == 0:
        meta.setdefault("mst_correlation", float(trace.r[0]))
    return annotate(result.graph, d, meta, labels, attributes, result.correlation)

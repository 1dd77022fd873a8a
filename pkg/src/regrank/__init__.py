"""Preference-graph recommendation with reliable meta-path projections."""

from regrank.evaluation import MetricReport, UPLSplit, dcg, ndcg_at_n, run_experiment, runtime_ordering, upl_split
from regrank.io import DatasetDescriptor, ingest, load_graph, load_snapshot, save_graph
from regrank.metapath import canned, expand, matches, parse_description, simplify
from regrank.preferences import PreferenceNode, RepresentativeNode, TripartitePreferenceGraph, build_tpg, derive_preferences
from regrank.projection import ProjectedGraph, build_variant, project, project_pnc, project_rnc, project_unc, verify_projection
from regrank.ranking import PPRConfig, personalized_pagerank, rank_items, recommend

__all__ = [
    "DatasetDescriptor", "MetricReport", "PPRConfig", "PreferenceNode", "ProjectedGraph",
    "RepresentativeNode", "TripartitePreferenceGraph", "UPLSplit",
    "build_tpg", "build_variant", "canned", "dcg", "derive_preferences", "expand", "ingest",
    "load_graph", "load_snapshot", "matches", "ndcg_at_n", "parse_description", "personalized_pagerank",
    "project", "project_pnc", "project_rnc", "project_unc", "rank_items", "recommend", "run_experiment",
    "runtime_ordering", "save_graph", "simplify", "upl_split", "verify_projection",
]

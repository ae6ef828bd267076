"""Chase-escape dynamics on configuration-model random multigraphs."""
from .chase_engine import (
    Outcome,
    PassageTimes,
    TreeResult,
    draw_passage_times,
    path_fronts,
    run_gillespie,
    run_path,
    run_quenched,
    run_tree,
)
from .config_graph import (
    ComponentLabels,
    DisjointSet,
    MultiGraph,
    components,
    count_sa_paths,
    dump_edgelist,
    load_edgelist,
    match_half_edges,
    sample_graph,
)
from .degree_theory import (
    DegreeModel,
    DomainError,
    TheoryReport,
    branching_ratio,
    c_lambda,
    lambda_crit,
    molloy_reed,
    open_probability,
    parse_model,
    range_const,
    size_biased_offspring,
    survival_bound,
    theory_report,
)
from .experiments import (
    Estimate,
    SweepConfig,
    SweepResult,
    estimate_path_survival,
    property_suite,
    sweep,
    validate_bounds,
)
from .percolation import (
    JPRRStats,
    OpenMask,
    PercReport,
    build_open_subgraph,
    draw_open_mask,
    giant_check,
    half_edges_closed,
    jprr_stats,
    mark_open,
    percolation_report,
)

__version__ = "0.1.0"

"""Approximate and exact maximum agreement forests of unrooted binary trees."""

from .errors import (
    BudgetExhausted,
    InternalInconsistencyError,
    MafError,
    NewickError,
    PartitionError,
    SizeGuardError,
    TreeError,
)
from .forest import (
    AgreementForest,
    Verdict,
    brute_force_maf,
    minimal_cut,
    partition_from_cut,
    tbr_estimate,
    verify_af,
    verify_cut_feasibility_equivalence,
)
from .instances import (
    RandomInstanceSpec,
    af_component_lower_bound,
    generate_caterpillar_grid,
    lemma5_fractional,
    quarter_pendant_solution,
    random_instance,
    separating_edges,
)
from .lp import LpModel, build_model, solve_ilp_exact, solve_lp
from .phylo import (
    PhyloTree,
    RootedView,
    canonical_form,
    caterpillar,
    is_isomorphic,
    parse_newick,
    restrict,
    rooted_view,
    spanning_path_edges,
    write_newick,
)
from .quartets import QuartetConstraint, QuartetTopology, incompatible_quartets, quartet_topology
from .rounding import round_quarter, rounding_certificate, rounding_trace
from .solution import EdgeCut, FractionalSolution, IntegralSolution

__version__ = "0.1.0"

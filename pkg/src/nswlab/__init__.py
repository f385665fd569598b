"""nswlab: exact Nash-social-welfare toolkit over cubic-graph gadget instances."""

from .core import (
    Allocation,
    AllocationError,
    Instance,
    InstanceFormatError,
    Rational,
    WelfareValue,
    agent_utility,
    compare,
    format_rational,
    nsw_product,
    parse_rational,
    read_allocation,
    read_instance,
    validate,
    write_allocation,
    write_instance,
)
from .graphs import (
    CoverBoundError,
    Graph,
    GraphError,
    gen_random_cubic,
    induced_edges,
    is_cubic,
    is_vertex_cover,
    min_vertex_cover,
    named_graph,
    read_graph,
    write_graph,
)
from .reduction import (
    ALPHA_DEFAULT,
    HardnessConstants,
    InequalityCheck,
    ReducedInstance,
    ReductionError,
    ReductionParams,
    build_instance,
    completeness_allocation,
    completeness_value,
    hardness_constants,
    improving_move_inequalities,
    load_reduced,
    write_tags,
)
from .solver import (
    IdentityReport,
    NormalFormError,
    SearchConfig,
    SearchLimitError,
    StructureProfile,
    analyze_structure,
    exact_max_nsw,
    shared_item_rule,
    normal_form_violation,
    normalize,
    product_formula,
    soundness_bound,
    verify_identities,
)

__version__ = "0.1.0"

"""Belief-function and exact credal inference on credal-network chains."""

from .credal import (
    CredalLinearInstance,
    brute_force_bounds,
    credal_chain_bounds,
    credal_vertices,
    greedy_linear_max,
    greedy_linear_min,
)
from .embedding import ConditionalMassTable, embed_conditional, full_chain_joint, joint, mass_step
from .errors import (
    DomainError,
    InfeasibleError,
    ModelFormatError,
    StructuralError,
    TotalConflictError,
)
from .experiments import ExperimentSpec, WidthRecord, run_experiment, write_csv
from .inference import (
    AdhocMassInfo,
    ChainModel,
    InferenceResult,
    OpCounter,
    StepDiagnostics,
    Strategy,
    adhoc_mass_step,
    forbidden_sets,
    propagate_chain,
    theorem1_step,
)
from .intervals import (
    CoherenceVerdict,
    Frame,
    GoodnessReport,
    ProbabilityInterval,
    adhoc_fix_amounts,
    coherent_envelope,
    fix_adhoc,
    fix_uniform,
    goodness,
    natural_extension,
    validate_coherence,
)
from .lp import LinearProgram, LpSolution, solve
from .mass import (
    MassFunction,
    NotABelief,
    ProductFrame,
    bel,
    combine_dempster,
    interval_from_mass,
    marginalize,
    marginalize_to,
    mobius_inverse,
    pl,
    representability_repair,
    sgm_from_interval,
    vacuous,
    vacuous_extend,
)
from .modelio import load_mass, load_model, save_model
from .sampling import IntervalSampler, SamplerConfig, sample_chain, sample_intervals

__version__ = "0.1.0"

"""Maximin-share allocation under monotone subadditive valuations, at desk scale."""
from .additive_fit import AdditiveFit, fit_additive_lower, fit_ratio
from .concentration import (SamplingSpec, bounded_surrogate, check_concentration,
                            check_expectation_bound, sample_subset)
from .converter import classify_agents, convert_multiallocation, multialloc_to_alloc
from .core import (Instance, instance_from_json, load_instance, multiplicity,
                   normalize_to_unit_mms, verify_allocation)
from .errors import (CapExceeded, InputError, InternalHallViolation, InvalidValuation,
                     InvariantViolation, MatchingIncomplete, MissingTableEntry, MMSError,
                     RestartsExhausted, RetriesExhausted, StandInFailed, ZeroMMS)
from .guiding import (base_graph, estimate_success, girth, girth_lift, label_edges,
                      label_nodes, sample_allocation)
from .mms import big_item_reduction, certify_beta_mms, mms_profile, mms_value
from .partial import (GuidingParams, PartialAllocation, disjoint_partials,
                      partial_half_guided, partial_quarter)
from .pipelines import (PIPELINES, PipelineReport, guarantee_report, main_pipeline, reduction_wrapper,
                        warmup1, warmup2, warmup2_threshold)
from .valuations import (XOS, Additive, BudgetAdditive, Coverage, Table, UnitDemand,
                         Valuation, check_monotone_subadditive, valuation_from_json)

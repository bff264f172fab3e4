"""Sequence-to-response regression with hidden Markov models.

A subset of HMM states is designated as "counted"; every state path induces
a visit-count vector over those states, and a linear Gaussian model maps
visit vectors to real responses.  Inference runs exact dynamic programming
over the joint (state, visit-vector) lattice, and EM training conditions the
E-step on observed responses so that motif discovery is driven by the
regression signal.
"""

from .errors import (AlphabetError, CapacityError, DecodeFailureError,
                     GenerationError, InvalidConfigError, InvalidInputError,
                     LatticeBudgetError, ModelFormatError, ParseError,
                     PathAggError)
from .model import (DNA, Alphabet, HmmParams, HmmTopology, VisitCaps,
                    build_arrangement_topology, build_occurrence_topology,
                    default_caps, init_params, motif_arrangements,
                    path_to_counts)
from .inference import (DEFAULT_LATTICE_BUDGET, SufficientStats,
                        VisitDistribution, VisitLattice, backward,
                        e_step_stats, expected_visits, forward,
                        joint_objective, visit_distribution, viterbi_decode)
from .regression import (RegressionParams, WeightedDesign, fit_expected,
                         fit_weighted, marginal_response_density,
                         predict_density, predict_mean)
from .training import (MeanBaseline, TrainConfig, TrainedModel, em_step,
                       em_train, mean_baseline, train_with_restarts,
                       two_phase_train)
from .structure import (StructureSearchConfig, add_motif, initial_structure,
                        structure_search)
from .datagen import (GeneratedInstance, SyntheticConfig, SyntheticDataset,
                      generate_dataset, mutate_motif, save_synthetic)
from .dataio import (Dataset, LabeledSequence, load_dataset, load_model,
                     save_dataset, save_model)
from .evaluate import evaluate_mae, predict, predict_batch
from .experiment import (ExperimentSpec, load_spec, results_to_csv,
                         run_experiment, spec_from_dict, spec_to_dict,
                         write_results_csv)

__version__ = "0.1.0"

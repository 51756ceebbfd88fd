"""Operator-chain selection and parameter tuning for contour segmentation
by tabular Q-learning, with an exhaustive-search reference."""

from .chains import ActionSpec, ActionTable, ChainSpec, OperatorSpec
from .config import ProblemConfig, default_config, load_config, parse_config
from .dataset import generate_synthetic_dataset, load_dataset
from .errors import BudgetExceededError, ContractError, DatasetError, InvalidParameterError
from .evaluation import ChainEvaluator, DatasetEntry
from .imaging import (Connectivity, EdgeMethod, apply_chain, connected_components, detect_edges,
                      median_filter, order_statistic_filter, remove_small_objects, wiener_filter)
from .metrics import EvalReport, GroundTruth, StateFeatures, build_ground_truth, discretize_state, evaluate
from .orchestration import (EvaluatorPool, PhaseDef, SearchResult, enumerate_actions, enumerate_chains,
                            exhaustive_search, search)
from .qlearn import LearnParams, Policy, QTable, TuneResult, q_update, select_action, tune_chain

__version__ = "0.1.0"

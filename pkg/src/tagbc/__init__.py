"""Tagged F2-structures: amalgamation, finite generic chains, back-and-forth
lifting, and a graph coding into tagged groups with its verifiers."""

from .amalgam import AmalgamationProblem, AmalgamationResult, amalgamate_k, amalgamate_k0, free_extension
from .engine import Engine, EngineParams, build_engine, claim1_check, sigma_lift, verify_sigma
from .estimators import GraphCodec
from .f2core import F2LinearMap, F2Subspace, F2Vector, get_enumeration_guard, set_enumeration_guard
from .fraisse import Chain, build_chain, check_richness, classes_count, embed_fixing
from .graphcodec import CodedStructure, Graph, brute_force_iso, decode, encode, transport
from .lifting import ClassBijection, TrackedPartialIso, extend_one_step, is_in_Fh, lift_over
from .tagged import (
    Embedding,
    TaggedStructure,
    XEStructure,
    XStructure,
    compute_X,
    find_embeddings,
    generated_substructure,
    validate_k,
    validate_k0,
)

__version__ = "0.1.0"

"""Grammar-based SMILES parsing and heuristic manifold traversal of latent
chemical spaces: parse molecules into production-rule sequences, embed them
with pluggable encoder/decoders, and search the latent manifold for novel
candidate compounds."""

from .grammar import (
    DecodeResult,
    Grammar,
    GrammarConflictError,
    GrammarError,
    GrammarFileError,
    Production,
    RuleSequence,
    SmilesParseError,
    check_ring_pairing,
    derive,
    encode_onehot_chars,
    encode_onehot_rules,
    load_default_grammar,
    load_grammar,
    parse,
    stack_decode,
    valid_mask,
)
from .kdtree import KdTree
from .latent import (
    CoordinateEchoDecoder,
    GrammarLogitDecoder,
    LinearDecoder,
    ProjectionEncoder,
    SyntheticTanhDecoder,
    jacobian_fd,
    jacobian_term,
)
from .molecule import (
    ActivityClass,
    CompoundProfile,
    Fingerprint,
    FragmentTable,
    HeuristicVector,
    MolGraph,
    MoleculeError,
    activity_class,
    build_fragment_table,
    cosine_sim,
    drug_likeness,
    fingerprint,
    heuristic_distance,
    molecular_weight,
    sa_score,
    tanimoto,
    to_molgraph,
    validate,
    validate_smiles,
)
from .traversal import (
    DisconnectedError,
    Endpoint,
    HeuristicWeights,
    LatentIndex,
    PoiGraph,
    RequestError,
    TraversalRequest,
    TraversalResult,
    attach_endpoints,
    build_index,
    build_poi_graph,
    centroid,
    graph_from_edges,
    knn,
    label_by_neighbors,
    linear_interpolation_points,
    mine_region,
    perturb,
    segment_path,
    shortest_path,
    traverse,
    yen_k_paths,
)

__version__ = "0.1.0"

"""Matrix-product vector and density-operator analysis toolkit."""

from .algebra import (
    AlgebraBlock,
    AlgebraDecomposition,
    algebra_basis,
    decompose_algebra,
)
from .canonical import (
    BlockEntry,
    BlockInjectiveResult,
    CanonicalDecomposition,
    EquivalenceVerdict,
    GaugeResult,
    InjectivityReport,
    NormalityCertificate,
    canonical_form,
    find_gauge,
    fundamental_theorem_check,
    is_injective,
    is_normal,
    to_block_injective,
    to_cfii,
)
from .examples import example, example_names
from .fileio import (
    TensorFile,
    TensorFormatError,
    parse_tensor,
    serialize_tensor,
    write_tensor,
)
from .mpdo import (
    GsnnchStructure,
    MpdoValidity,
    MutualInfoProfile,
    PureTsChannels,
    PurificationResult,
    SimplicityResult,
    TsChannels,
    build_ts_channels,
    extract_gsnnch,
    is_prfp,
    is_simple,
    is_zcl_mixed,
    mutual_info_profile,
    purify,
    ts_channels_pure,
    validate_mpdo,
)
from .rfp_general import (
    AlgebraStructure,
    FusionResult,
    ProjectorGibbsDecomposition,
    RfpMpdoReport,
    VerticalCF,
    fibonacci_rank,
    fit_algebra,
    fusion_isometry,
    gauge_rfp_spectral_check,
    is_rfp_mpdo,
    matches_geometric_rank,
    projector_gibbs_decomposition,
    vertical_cf,
)
from .rfp_pure import (
    DecorrelationResult,
    FlowResult,
    ParentHamiltonian,
    RfpDecomposition,
    decorrelation_check,
    entropy_profile_pure,
    is_cid,
    is_locally_orthogonal,
    is_rfp_pure,
    parent_hamiltonian,
    renormalization_flow,
    rfp_decompose,
)
from .tensors import (
    MpdoTensor,
    MpvTensor,
    TransferMap,
    direct_sum_tensors,
    mpdo_dense,
    mpdo_from_pure,
    mpv_dense,
    open_chain,
    open_chain_vectors,
    reduced_density,
    transfer_map,
    von_neumann_entropy,
)

__version__ = "0.1.0"

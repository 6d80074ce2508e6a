"""Representational toolkit for quantum channels and superchannels.

Labeled multipartite operators, the four equivalent channel representations,
link-product composition, superchannel validation and realization with
minimal memory, and PPT-based classification of correlation- and
causality-breaking superchannels.
"""

from .errors import (
    DimensionMismatch,
    DocumentError,
    GenerationFailed,
    IncompleteDecomposition,
    NotAValidSuperchannel,
    NotHermitian,
    NotIsometry,
    NotPSD,
    NotTP,
    ParseError,
    ResidualTooLarge,
    SuperchanError,
    UnknownKind,
    UnknownLabel,
)
from .operators import (
    DEFAULT_ATOL,
    DEFAULT_RANK_RTOL,
    LabeledOperator,
    SpectralDecomposition,
    System,
    SystemList,
    gamma,
    identity_operator,
    kron,
    mat,
    numeric_rank,
    partial_mat,
    partial_trace,
    partial_transpose,
    partial_vec,
    permute_systems,
    psd_decompose,
    vec,
)
from .channels import (
    ChannelValidityReport,
    ChoiRep,
    KrausRep,
    LiouvilleRep,
    StinespringRep,
    apply_channel,
    choi_from_kraus,
    choi_from_liouville,
    compose_channels,
    convert_channel,
    generalized_choi,
    kraus_from_choi,
    kraus_from_stinespring,
    link_product,
    liouville_from_choi,
    liouville_from_kraus,
    random_channel,
    random_density_matrix,
    stinespring_from_kraus,
    validate_channel,
)
from .superchannels import (
    FThetaChannel,
    Realization,
    SuperchannelChoi,
    SuperchannelDims,
    SuperchannelReport,
    SuperKrausFamily,
    apply_to_channel,
    choi_from_gour,
    f_theta_channel,
    gour_from_choi,
    kraus_apply,
    liouville_apply,
    memory_cost,
    n_operators,
    q_apply_to_state,
    random_superchannel,
    realize,
    stinespring_apply_to_state,
    super_liouville,
    super_stinespring,
    superchannel_from_parts,
    validate_superchannel,
)
from .breaking import (
    Bipartition,
    BreakingReport,
    EbChannelReport,
    MeasurePrepare,
    PptVerdict,
    SeparableDecomposition,
    apply_measure_prepare,
    choi_from_measure_prepare,
    depolarizing_channel,
    eb_channel_report,
    example_type1_not_type2,
    measure_prepare_from_decomposition,
    ppt_battery,
    ppt_test,
    random_eb_measure_prepare,
    random_eb_superchannel,
    superchannel_breaking_report,
)
from .documents import load_document, save_document

__version__ = "0.1.0"

"""Link-level simulation of multi-way massive MIMO decode-and-forward relaying.

The package models K single-antenna users exchanging symbols through an
M-antenna relay and compares two broadcast protocols: the conventional one
(K total slots) and a successive-cancelation scheme that finishes in
ceil((K-1)/2) + 1 slots by letting each user strip known symbols and
zero-force the rest from its residual equations. It provides exact
per-realization SINRs, Jensen closed-form bounds, large-array asymptotics,
seeded Monte Carlo estimators, and a symbol-level protocol validator.
"""

from .bounds import (
    BoundReport,
    analytic_sum_se,
    bound_report,
    conventional_dl_bound,
    inverse_norm_moments,
    proposed_dl_bound,
    trace_lemma_statistic,
    uplink_bound,
    zf_asymptotic_rate,
)
from .channel import (
    ChannelRealization,
    GeometryModel,
    LargeScaleProfile,
    SystemConfig,
    compose_channel,
    draw_large_scale,
    draw_small_scale,
    read_beta_file,
    substream,
    unit_profile,
    write_beta_file,
)
from .exceptions import DegenerateChannelError, InvalidConfigError, SingularSystemError
from .montecarlo import (
    CdfResult,
    MonteCarloEstimate,
    SumSeReport,
    cdf_experiment,
    estimate_downlink_se,
    estimate_link_se,
    estimate_uplink_se,
    resolve_workers,
    sum_se,
    sum_se_once,
)
from .rates import (
    ZfStage,
    build_zf_stage,
    conventional_dl_sinr,
    instantaneous_se,
    proposed_dl_sinr,
    relay_precode,
    uplink_sinr,
    zf_sinr,
)
from .schedule import (
    SlotIndexer,
    known_set,
    partner_index,
    remaining_unknowns,
    slot_count,
    zf_coefficient_offset,
)
from .validation import (
    KnowledgeState,
    NoiselessRound,
    SymbolFrame,
    fixed_frame,
    qpsk_frame,
    run_round_noiseless,
    run_round_noisy,
)

__version__ = "0.1.0"

"""Two-user MIMO interference channel with an instantaneous relay.

Library for building and verifying interference-neutralizing beamforming
plans, computing DoF regions and outer bounds, checking rank certificates
of linear-relay optimality, and estimating DoF from finite-SNR rate slopes.
"""

__version__ = "0.1.0"

from .channel import (AntennaConfig, ChannelInstance, derive_seed,
                      extend_channel, read_channel, sample_channel,
                      write_channel)
from .converse import (RankBoundReport, TransformedChannel, cross_rank_sum,
                       pad_relay, rank_bound_check, relay_cross_terms,
                       transform_channel)
from .linalg import (DEFAULT_TOL, TolerancePolicy, null_space_basis,
                     numerical_rank, pseudo_inverse, schur_complement)
from .region import (DofRegion, OuterBounds, allocate_antennas, ic_dof_region,
                     linear_dof_region, linear_sum_dof, outer_bounds,
                     region_contains, region_vertices)
from .scheme import (BeamformingPlan, StreamAllocation, VerificationReport,
                     allocate_streams, build_aligned_plan, build_plan,
                     build_separate_plan, closed_form_streams,
                     effective_channels, read_plan, verify_plan, write_plan)
from .simulate import SlopeEstimate, SnrSweep, rates_at_snr, slope_estimate

"""Key-rate analysis of sending-or-not-sending twin-field QKD with discrete phase modulation."""

from .bounds import decoy_bounds, key_rate, raw_key_rate
from .channel import ChannelParams, click_probs_coherent, plob_bound, simulate_observables
from .errors import DomainError, NumericError, SNSError, TruncationError, ValidityError
from .lp import lp_s1_lower
from .optimize import OptimizationSpec, optimize_rate, scan_distances
from .params import DecoyBounds, ObservedRates, ProtocolParams

__all__ = [
    "ChannelParams",
    "DecoyBounds",
    "DomainError",
    "NumericError",
    "ObservedRates",
    "OptimizationSpec",
    "ProtocolParams",
    "SNSError",
    "TruncationError",
    "ValidityError",
    "click_probs_coherent",
    "decoy_bounds",
    "key_rate",
    "lp_s1_lower",
    "optimize_rate",
    "plob_bound",
    "raw_key_rate",
    "scan_distances",
    "simulate_observables",
]

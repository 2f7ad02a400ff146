"""GRAND-family soft-decision decoders and benchmark harness."""

from .channel import ChannelConfig, ReliabilityProfile, observe, transmit
from .ep_tree import EPTree, ErrorPattern, zeta_direct
from .hybrid import Envelope, compute_envelope, hybrid_decode
from .linear_code import CodeError, LinearCode, build_code
from .orbgrand import (AbstractPatternSet, generate_pattern_set,
                       load_pattern_set, orb_decode, permute_patterns,
                       save_pattern_set)
from .psgrand import (BatchSchedule, PoolFrontier, ResumeState,
                      batch_syndrome, early_termination_check, psgrand_decode)
from .sgrand import (ArrayFrontier, DecodeResult, EPGenerator, HeapFrontier,
                     sgrand_decode)

__all__ = [
    "AbstractPatternSet", "ArrayFrontier", "BatchSchedule", "ChannelConfig",
    "CodeError", "DecodeResult", "EPGenerator", "EPTree", "Envelope",
    "ErrorPattern", "HeapFrontier", "LinearCode", "PoolFrontier",
    "ReliabilityProfile", "ResumeState", "batch_syndrome", "build_code",
    "compute_envelope", "early_termination_check", "generate_pattern_set",
    "hybrid_decode", "load_pattern_set", "observe", "orb_decode",
    "permute_patterns", "psgrand_decode", "save_pattern_set", "sgrand_decode",
    "transmit", "zeta_direct",
]

__version__ = "0.1.0"

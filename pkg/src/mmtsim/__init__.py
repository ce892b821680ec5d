"""Linear network coding and all-to-all broadcast on multi-mesh-of-trees."""

from .aab import CODED, PLAIN, StepSchedule, full_aab
from .codec import CodedPacket, DecoderState, Generation, NotYetDecodable
from .engine import Metrics, RunConfig, RunResult, run, verify_all_to_all
from .gf import Field, FieldElement
from .topology import LinkKind, Link, MmtGraph, ProcessorId, build_mmt, max_flow

__version__ = "0.1.0"

__all__ = [
    "CODED",
    "CodedPacket",
    "DecoderState",
    "Field",
    "FieldElement",
    "Generation",
    "Link",
    "LinkKind",
    "Metrics",
    "MmtGraph",
    "NotYetDecodable",
    "PLAIN",
    "ProcessorId",
    "RunConfig",
    "RunResult",
    "StepSchedule",
    "build_mmt",
    "full_aab",
    "max_flow",
    "run",
    "verify_all_to_all",
    "__version__",
]

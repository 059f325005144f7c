"""Semidefinite programs over equality partitions."""
from npa_sampling.sdp.problem import (
    Affine,
    BellFunctional,
    SdpProblem,
    assemble_sdp,
    behavior_map,
)
from npa_sampling.sdp.sdpa import export_sdpa, format_sdpa, import_sdpa, parse_sdpa
from npa_sampling.sdp.solver import SolveReport, solve

__all__ = [
    "Affine",
    "BellFunctional",
    "SdpProblem",
    "SolveReport",
    "assemble_sdp",
    "behavior_map",
    "export_sdpa",
    "format_sdpa",
    "import_sdpa",
    "parse_sdpa",
    "solve",
]

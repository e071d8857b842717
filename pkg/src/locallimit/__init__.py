"""Finite graphs whose local ball statistics follow an involution-invariant tree measure."""

from .balls import BallCode, EdgeBall, RootedGraph, VecBall, canonicalize, truncate
from .census import CensusReport, ball_census, certified_radius, girth, tv_distance
from .estimators import BallCensus, LocalLimitSynthesizer, check_graph, check_table
from .exceptions import LocalLimitError
from .measures import (
    MarginalTable,
    load_table,
    marginals_atom,
    marginals_regular,
    marginals_rooted,
    marginals_ugw,
    mixture,
    save_table,
)
from .rationalizer import build_H, choose_N, rationalize
from .synthesizer import SyntheticGraph, read_edge_list, synthesize, write_edge_list
from .validator import check

__version__ = "0.1.0"

__all__ = [
    "BallCensus",
    "BallCode",
    "CensusReport",
    "EdgeBall",
    "LocalLimitError",
    "LocalLimitSynthesizer",
    "MarginalTable",
    "RootedGraph",
    "SyntheticGraph",
    "VecBall",
    "ball_census",
    "build_H",
    "canonicalize",
    "certified_radius",
    "check",
    "check_graph",
    "check_table",
    "choose_N",
    "girth",
    "load_table",
    "marginals_atom",
    "marginals_regular",
    "marginals_rooted",
    "marginals_ugw",
    "mixture",
    "rationalize",
    "read_edge_list",
    "save_table",
    "synthesize",
    "truncate",
    "tv_distance",
    "write_edge_list",
]

"""Almost-sure Büchi analysis of MDPs with average-case experiments on random models."""

from .core import (
    Mdp,
    SolveResult,
    bsccs,
    classical_buchi,
    format_mdp,
    gen_worst_case,
    oracle_almost_sure,
    parse_mdp,
    random_attractor,
    reverse_reachable,
)
from .errors import CapacityError, DomainError, InputError, ParseError, SpecError
from .models import DegreeSpec, GnpSpec, sample_constant_outdegree, sample_gnp, to_mdp

__all__ = [
    "CapacityError",
    "DegreeSpec",
    "DomainError",
    "GnpSpec",
    "InputError",
    "Mdp",
    "ParseError",
    "SolveResult",
    "SpecError",
    "bsccs",
    "classical_buchi",
    "format_mdp",
    "gen_worst_case",
    "oracle_almost_sure",
    "parse_mdp",
    "random_attractor",
    "reverse_reachable",
    "sample_constant_outdegree",
    "sample_gnp",
    "to_mdp",
]

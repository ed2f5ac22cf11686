"""Desk-scale generalized connections: path groupoids, the projective family
A_L = G^n, cylindrical functions and the uniform measure."""
from .groups import Group, GroupElement, compose, invert, haar_sample, enumerate_group, character
from .groupoid import (
    Alphabet,
    Atom,
    Decomposition,
    Edge,
    PathWord,
    TameSubgroupoid,
    all_tame_subgroupoids,
    atoms_subgroupoid,
    compose_paths,
    edge,
    identity_word,
    is_independent,
    reduce,
    subgroupoid_leq,
    word,
)
from .family import (
    AmbientConnection,
    Chart,
    consistent_families,
    Inconsistent,
    coordinates,
    evaluate,
    project,
    reconstruct_from_family,
    surjectivity_witness,
)
from .cyl import CylFunction, eval_cyl, pullback, rewrite_over_paths, sup_norm
from .measure import UNIFORM, FiniteFamily, IntegralEstimate, check_consistency, inner_product, integrate, pushforward
from .methods import EXACT, Exact, MonteCarlo, mc
from .symmetry import (
    GaugeTransformation,
    GroupoidAutomorphism,
    act_on_function,
    automorphism_act,
    gauge_act,
    invariance_report,
)
from .basis import gram_matrix, make_spin_network, wilson_loop

__version__ = "0.1.0"

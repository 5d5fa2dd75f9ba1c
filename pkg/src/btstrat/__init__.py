"""Bruhat-Tits stratification of unitary Rapoport-Zink spaces at parahoric level."""

__version__ = "0.1.0"

from .core_algebra import GF, FieldSpec, TruncSeries, field, embed, conway_modulus
from .lattices import AmbientSpace, WindowLattice, VertexLattice, vertex_recognize, tau_closure
from .hermitian_residue import HermSpace, Subspace, residue_space, enumerate_coisotropic, lift_to_vertex
from .coxeter import CoxElement, SimpleSubset
from .dl_varieties import DLDescriptor, count_points, classify_partial_flag
from .bt_strata import (ParahoricTuple, AbstractBTIndex, ConcreteBTIndex, RZPoint, StratumDescriptor,
                        validate_abstract, validate_concrete, leq_index, intersect_index,
                        complete_index, minimize_types, enumerate_abstract, orbit_key,
                        irreducible_components, stratum_descriptor, fine_decomposition,
                        open_selection, enumerate_points, bt_type_of_point, point_map)

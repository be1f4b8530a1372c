"""SIPG discontinuous Galerkin solver for dynamic linear viscoelasticity."""

from .assembly import AssembledSystem, assemble_system
from .errors import ErrorReport, convergence_rate, error_norms
from .manufactured import ManufacturedCase, benchmark_material
from .material import PronyMaterial
from .mesh import TriMesh, build_structured_mesh
from .space import DGSpace
from .stepper import Scheme, State, run

__all__ = [
    "AssembledSystem",
    "DGSpace",
    "ErrorReport",
    "ManufacturedCase",
    "PronyMaterial",
    "Scheme",
    "State",
    "TriMesh",
    "assemble_system",
    "benchmark_material",
    "build_structured_mesh",
    "convergence_rate",
    "error_norms",
    "run",
]

__version__ = "0.1.0"

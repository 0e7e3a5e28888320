"""p-form electromagnetism on simplicial complexes: twisted exterior calculus,
Kodaira splitting, exact classical evolution and coherent-state quantization."""

__version__ = "0.1.0"

from .complex import Mesh, MetricData, SimplicialComplex, coboundary, generate_mesh, load_mesh, save_mesh
from .dynamics import PhasePoint, PhaseSpace
from .errors import (
    AssemblyError,
    CycleError,
    DegreeError,
    DomainError,
    InvalidParameterError,
    MetricError,
    NumericalError,
    ParseError,
    PFormError,
    SectorError,
)
from .kodaira import betti, betti_numbers, harmonic_dimension, kodaira_split
from .operators import OperatorBundle, SpectralData, apply_function, assemble, laplacian, spectral_decomposition
from .quantization import ComplexStructure, Observable, complex_structure, observable
from .wilson import Chain, make_chain

__all__ = [
    "__version__",
    "SimplicialComplex", "MetricData", "Mesh", "generate_mesh", "coboundary", "save_mesh", "load_mesh",
    "OperatorBundle", "SpectralData", "assemble", "laplacian", "spectral_decomposition", "apply_function",
    "kodaira_split", "harmonic_dimension", "betti", "betti_numbers",
    "PhasePoint", "PhaseSpace",
    "ComplexStructure", "Observable", "complex_structure", "observable",
    "Chain", "make_chain",
    "PFormError", "InvalidParameterError", "DegreeError", "MetricError", "AssemblyError",
    "NumericalError", "DomainError", "SectorError", "CycleError", "ParseError",
]

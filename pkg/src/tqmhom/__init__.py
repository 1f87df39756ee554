"""Exact homotopy transfer, 1D topological quantum mechanics and Saito theory for A_n."""

from .bcov import BCOVData, bcov_vector_field, check_oa, structure_constants, validate_bcov
from .commutativity import (CommFamily, ConnectionOneForm, HodgeData, build_A, check_commutativity,
                            transferred_one_form, validate_comm_family, validate_strong_hodge)
from .complexes import SDR, Complex, PreconditionError, validate_sdr
from .graded import GradedMap, GradedSpace
from .models import polyvector_model, strong_hodge_model
from .report import Report
from .saito import (CohClass, SaitoData, SectionS, c_operators, check_good_section, find_good_section,
                    gm_frame, milnor_ring, reduce_in_brieskorn)
from .series import Ring, Series, TruncationError
from .transfer import OperationSet, check_linfty, transferred_operations

__version__ = "0.1.0"

__all__ = [
    "bcov_vector_field", "BCOVData", "build_A", "c_operators", "check_commutativity", "check_good_section",
    "check_linfty", "check_oa", "CohClass", "CommFamily", "Complex", "ConnectionOneForm", "find_good_section",
    "gm_frame", "GradedMap", "GradedSpace", "HodgeData", "milnor_ring", "OperationSet", "polyvector_model",
    "PreconditionError", "reduce_in_brieskorn", "Report", "Ring", "SaitoData", "SDR", "SectionS", "Series",
    "strong_hodge_model", "structure_constants", "transferred_one_form", "transferred_operations",
    "TruncationError", "validate_bcov", "validate_comm_family", "validate_sdr", "validate_strong_hodge",
]


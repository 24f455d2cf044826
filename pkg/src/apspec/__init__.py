"""Almost periodicity of averaged metrics and discrete spectrum of dynamical systems.

Build a system from the catalog, estimate its averaged displacement
functions on a shared sample, scan them for almost periodicity and read off
eigenvalues and spectral type.
"""
from .almost_periodic import (cross_check_period_notions, fourier_bohr_coefficients,
                              measure_theoretic_almost_periods, scan_almost_periods,
                              translation_defect)
from .pointsets import (PointSet, PointSetHull, TestFunction, diffraction,
                          gamma_identity_check, generate_point_set, n_map,
                          patterson_autocorrelation)
from .metrics import (WeightedFamily, check_domination, metric_pseudometric,
                      pseudometric_from_observable, weighted_pseudometric)
from .profiles import (GroupGrid, Method, Profile, autocorrelation_profile, average_pseudometric,
                       compute_profiles, displacement_profile, summed_displacement,
                       two_variable_profile)
from .report import compare, run
from .spectral import (cross_equivalence_suite, discrete_spectrum_verdict, estimate_spectrum,
                       nf_consistency, observable_spectrum, wiener_atom_mass)
from .systems import CATALOG, build_system

__all__ = [
    "CATALOG", "build_system", "GroupGrid", "Method", "Profile", "compute_profiles",
    "average_pseudometric", "displacement_profile", "autocorrelation_profile",
    "summed_displacement", "two_variable_profile", "WeightedFamily", "metric_pseudometric",
    "pseudometric_from_observable", "weighted_pseudometric", "check_domination",
    "scan_almost_periods", "translation_defect", "fourier_bohr_coefficients",
    "measure_theoretic_almost_periods", "cross_check_period_notions", "wiener_atom_mass",
    "estimate_spectrum", "observable_spectrum", "discrete_spectrum_verdict",
    "cross_equivalence_suite", "nf_consistency", "PointSet", "PointSetHull", "TestFunction",
    "generate_point_set", "patterson_autocorrelation", "diffraction", "n_map",
    "gamma_identity_check", "run", "compare",
]

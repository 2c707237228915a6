"""Maximal information coefficient: estimators, density algorithm and equitability harness."""

__version__ = "0.1.0"

from mickit.info import (
    DiscreteJoint,
    PerturbationSpec,
    binary_entropy,
    entropy,
    linfoot,
    mutual_information,
    normalized_mi,
    perturb,
)
from mickit.partition import (
    Grid,
    MasterJoint,
    Partition,
    apply_grid,
    brute_force_partition,
    equipartition_counts,
    optimize_partition_dp,
)
from mickit.estimators import (
    BPolicy,
    CharMatrix,
    SampleData,
    char_matrix_approx,
    char_matrix_e,
    i_star_equi,
    mic_approx,
    mic_brute,
    mic_e,
)
from mickit.density import (
    DensitySpec,
    MassGrid,
    PrecisionParams,
    boundary_entry,
    discretize,
    histogram_density,
    mic_d,
    mic_star,
)
from mickit.functions import FunctionSpec
from mickit.bench import (
    BenchConfig,
    IntervalEstimate,
    ModelInstance,
    PowerCurve,
    equitability_report,
    interpretable_interval,
    noise_for_r2,
    power_function,
    r_squared,
    reliable_interval,
    resolve_statistic,
    sample_instance,
    uncertain_set,
)

__all__ = [
    "__version__",
    "BPolicy",
    "BenchConfig",
    "FunctionSpec",
    "IntervalEstimate",
    "ModelInstance",
    "PowerCurve",
    "equitability_report",
    "interpretable_interval",
    "noise_for_r2",
    "power_function",
    "r_squared",
    "reliable_interval",
    "resolve_statistic",
    "sample_instance",
    "uncertain_set",
    "CharMatrix",
    "DensitySpec",
    "DiscreteJoint",
    "Grid",
    "MassGrid",
    "MasterJoint",
    "Partition",
    "PerturbationSpec",
    "PrecisionParams",
    "SampleData",
    "apply_grid",
    "binary_entropy",
    "boundary_entry",
    "brute_force_partition",
    "char_matrix_approx",
    "char_matrix_e",
    "discretize",
    "entropy",
    "equipartition_counts",
    "histogram_density",
    "i_star_equi",
    "linfoot",
    "mic_approx",
    "mic_brute",
    "mic_d",
    "mic_e",
    "mic_star",
    "mutual_information",
    "normalized_mi",
    "optimize_partition_dp",
    "perturb",
]

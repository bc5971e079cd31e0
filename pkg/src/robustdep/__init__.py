"""Robust inference on serial dependence in heavy-tailed time series."""

__version__ = "0.1.0"

from .dgp import DgpSpec, InnovationDist, kesten_zeta, simulate_ar_arch, simulate_batch  # noqa: E402
from .errors import ConfigError, DataError, DegenerateSeriesError, NumericalError, RobustDepError  # noqa: E402
from .groups import GroupTestResult, critical_value, p_value_bound, run_group_test  # noqa: E402
from .hac import HacResult, KernelSpec, hac_test, long_run_variance  # noqa: E402
from .series import DependenceSpec, TransformSpec, dependence_estimate  # noqa: E402
from .tail import TailEstimate, rank_size_zeta, select_power  # noqa: E402

__all__ = [
    "ConfigError", "DataError", "DegenerateSeriesError", "DependenceSpec", "DgpSpec", "GroupTestResult",
    "HacResult", "InnovationDist", "KernelSpec", "NumericalError", "RobustDepError", "TailEstimate",
    "TransformSpec", "critical_value", "dependence_estimate", "hac_test", "kesten_zeta", "long_run_variance",
    "p_value_bound", "rank_size_zeta", "run_group_test", "select_power", "simulate_ar_arch", "simulate_batch",
]

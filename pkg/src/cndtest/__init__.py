"""Canonical noise distributions for f-differential privacy, and the
private hypothesis tests built on them."""

__version__ = "0.1.0"

from ._backend import active_backend
from .charfn import CharFn, gaussian_cf, gil_pelaez_cdf, t_statistic_cf, tulap_cf
from .cnd import (
    CndDist,
    GaussianCnd,
    RescaledDist,
    TulapDist,
    add_noise,
    cnd_identity_check,
    noise_from_config,
)
from .dist import (
    BinomialModel,
    HyperModel,
    binom_cf,
    binom_pmf,
    hyper_pmf,
    laplace_sample,
    uniform_cdf,
)
from .dptest import (
    BinaryUmpTest,
    TestFn,
    binary_pvalue,
    binary_statistic,
    binary_testfn,
    check_fdp,
    check_fdp_cnd,
    free_pvalue,
    free_pvalue_statistic,
    testfn_from_csv,
    ump_binary,
)
from .simulate import SimConfig, run_power, run_pvalue_ecdf, run_type1
from .tradeoff import (
    TradeoffFn,
    custom_tradeoff,
    eps_delta_tradeoff,
    fixed_point,
    gdp_tradeoff,
    tradeoff_inverse,
    twofold,
    validate_tradeoff,
)
from .twoprop import (
    EpsDP,
    GDP,
    TestReport,
    TwoSampleData,
    classic_normal_test,
    dp_normal_test,
    inversion_test,
    nonprivate_umpu,
    plugin_test,
    semiprivate_test,
    semiprivate_threshold,
    two_sided,
)

__all__ = [
    "__version__",
    "active_backend",
    "CharFn",
    "gaussian_cf",
    "gil_pelaez_cdf",
    "t_statistic_cf",
    "tulap_cf",
    "BinomialModel",
    "HyperModel",
    "binom_cf",
    "binom_pmf",
    "hyper_pmf",
    "laplace_sample",
    "uniform_cdf",
    "SimConfig",
    "run_power",
    "run_pvalue_ecdf",
    "run_type1",
    "CndDist",
    "GaussianCnd",
    "RescaledDist",
    "TulapDist",
    "add_noise",
    "cnd_identity_check",
    "noise_from_config",
    "BinaryUmpTest",
    "TestFn",
    "binary_pvalue",
    "binary_statistic",
    "binary_testfn",
    "check_fdp",
    "check_fdp_cnd",
    "free_pvalue",
    "free_pvalue_statistic",
    "testfn_from_csv",
    "ump_binary",
    "TradeoffFn",
    "custom_tradeoff",
    "eps_delta_tradeoff",
    "fixed_point",
    "gdp_tradeoff",
    "tradeoff_inverse",
    "twofold",
    "validate_tradeoff",
    "EpsDP",
    "GDP",
    "TestReport",
    "TwoSampleData",
    "classic_normal_test",
    "dp_normal_test",
    "inversion_test",
    "nonprivate_umpu",
    "plugin_test",
    "semiprivate_test",
    "semiprivate_threshold",
    "two_sided",
]

"""Backend-dispatched hot kernels.

Imports resolve to the numba lane or the pure-numpy lane according to
:mod:`cndtest._backend`.  Both lanes implement the same function surface;
``benchmarks/bench_backends.py`` compares them.
"""

from ._backend import HAVE_NUMBA, active_backend  # noqa: F401

if HAVE_NUMBA:
    from . import _kernels_numba as _impl
else:
    from . import _kernels_numpy as _impl

tulap_cdf = _impl.tulap_cdf
tulap_quantile = _impl.tulap_quantile
hyper_weights = _impl.hyper_weights
gp_sweep_tstat = _impl.gp_sweep_tstat
semiprivate_pvalues = _impl.semiprivate_pvalues
plugin_pvalues = _impl.plugin_pvalues
umpu_pvalues = _impl.umpu_pvalues

"""Chain-rule optimal transport distances between finite mixtures.

Thin wrapper over the compiled ``_crot`` extension module.
"""

try:
    from crot._crot import *  # noqa: F401,F403  (installed package layout)
except ImportError:
    from _crot import *  # noqa: F401,F403  (build-tree layout)

__all__ = [
    "Mixture",
    "NumericalError",
    "bound_report_json",
    "chi2_kl_bound",
    "cost_matrix",
    "crot_distance",
    "expfam_kl_bound",
    "fit_em",
    "fit_scrot",
    "gelbrich_lb",
    "idx_points",
    "js_alpha_cap",
    "kde_log_pdf",
    "mc_kl",
    "mc_renyi",
    "pca_fit_transform",
    "scub",
    "softmin_weights",
    "solve_exact",
    "solve_sinkhorn",
    "tv_mc",
]

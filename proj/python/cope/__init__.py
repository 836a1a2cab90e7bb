"""Python bindings for the coupled polynomial expansion library."""

from ._cope import (
    Model,
    cp_reconstruct,
    default_config,
    derive_seed,
    khatri_rao,
    mode_unfold,
    run_experiment,
    run_suite,
    suite_names,
)

__all__ = [
    "Model",
    "cp_reconstruct",
    "default_config",
    "derive_seed",
    "khatri_rao",
    "mode_unfold",
    "run_experiment",
    "run_suite",
    "suite_names",
]

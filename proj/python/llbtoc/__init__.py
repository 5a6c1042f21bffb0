"""Python bindings for the llbtoc solver library."""

from ._llbtoc import (
    Control,
    Grid,
    LlbtocError,
    Problem,
    SolverConfig,
    VectorField,
    __version__,
    check_optimality,
    cost,
    gradient,
    hitting_time,
    inner_U,
    load_config,
    optimize,
    radial_oracle,
    radial_oracle_inverse,
    read_control,
    read_snapshot,
    simulate,
    spectral_simulate_1d,
    taylor_sweep,
    write_control,
    write_snapshot,
)

__all__ = [
    "Control",
    "Grid",
    "LlbtocError",
    "Problem",
    "SolverConfig",
    "VectorField",
    "__version__",
    "check_optimality",
    "cost",
    "gradient",
    "hitting_time",
    "inner_U",
    "load_config",
    "optimize",
    "radial_oracle",
    "radial_oracle_inverse",
    "read_control",
    "read_snapshot",
    "simulate",
    "spectral_simulate_1d",
    "taylor_sweep",
    "write_control",
    "write_snapshot",
]

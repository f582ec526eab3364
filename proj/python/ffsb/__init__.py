"""Finite Fourier series shape-based and minimum-time low-thrust transfers."""

from ._core import (
    FinalAngleMode,
    NlpResult,
    ObjectiveMode,
    OptimalSolution,
    PropagationReport,
    ReportError,
    ScenarioConfig,
    ScenarioError,
    ShapeSolution,
    SweepRecord,
    __version__,
    integrate_open_loop,
    load_scenario,
    objective,
    parse_scenario,
    residual_vector,
    solve,
    solve_min_time,
    spearman,
    summary,
    sweep,
)

__all__ = [name for name in dir() if not name.startswith("_")] + ["__version__"]

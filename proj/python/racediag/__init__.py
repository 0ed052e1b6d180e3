"""Data race prediction over recorded traces, with guaranteed/maybe diagnosis."""

from ._racediag import (
    CandidateProductTooLarge,
    GenConfigError,
    Trace,
    TraceError,
    __version__,
    diagnose,
    fasttrack,
    gen_trace,
    hb_races,
    oracle_classify,
    perturb,
    run_cli,
    shb_races,
    validate,
)

__all__ = [
    "CandidateProductTooLarge",
    "GenConfigError",
    "Trace",
    "TraceError",
    "__version__",
    "diagnose",
    "fasttrack",
    "gen_trace",
    "hb_races",
    "oracle_classify",
    "perturb",
    "run_cli",
    "shb_races",
    "validate",
]

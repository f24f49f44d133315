"""Python bindings for the branch-solve-merge engine.

Backends are scripted mocks: pass either a path to a mock script JSON file or
the script as a dict ({"rules": [...], "default": "..."}).
"""

from ._bsm import (
    BsmError,
    agreement,
    combine_runs,
    concept_present,
    generate_story,
    judge,
    load_report,
    merge_sum,
    missing_concepts,
    parse_criteria,
    parse_scores,
    parse_story_plan,
    parse_verdict,
    porter_stem,
    position_bias,
    render_table,
    run_suite,
    word_tokens,
)

__all__ = [
    "BsmError",
    "agreement",
    "combine_runs",
    "concept_present",
    "generate_story",
    "judge",
    "load_report",
    "merge_sum",
    "missing_concepts",
    "parse_criteria",
    "parse_scores",
    "parse_story_plan",
    "parse_verdict",
    "porter_stem",
    "position_bias",
    "render_table",
    "run_suite",
    "word_tokens",
]

from ._core import (
    ArgumentError,
    bilevel_H,
    dp1,
    exact_prox_1d,
    is_acceptable,
    objective,
    problem_ids,
    reference,
    solve,
    suite_ids,
    verify,
)

__all__ = [
    "ArgumentError",
    "bilevel_H",
    "dp1",
    "exact_prox_1d",
    "is_acceptable",
    "objective",
    "problem_ids",
    "reference",
    "solve",
    "suite_ids",
    "verify",
]

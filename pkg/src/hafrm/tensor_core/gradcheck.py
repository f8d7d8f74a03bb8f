"""Finite-difference verification of analytic gradients."""

import logging
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Mapping, Optional, Tuple

import numpy as np

from ..utils.exceptions import ContractError, NumericError
from .tensor import Tensor, backward, no_grad

logger = logging.getLogger(__name__)


@dataclass
class GradCheckReport:
    """Outcome of comparing analytic and central-difference gradients."""

    passed: bool
    max_rel_error: float
    n_checked: int
    tol: float
    h: float
    worst_index: Optional[Tuple] = None
    message: str = ""
    per_param: Dict[str, float] = field(default_factory=dict)


def _rel_error(analytic: float, numeric: float) -> float:
    return abs(analytic - numeric) / max(1.0, abs(analytic), abs(numeric))


def _eval_scalar(f: Callable[[], Tensor]) -> float:
    with no_grad():
        value = f().item()
    if not np.isfinite(value):
        raise NumericError(f"function value is not finite: {value}")
    return value


def _central_difference(f: Callable[[], Tensor], x: Tensor, index: Tuple, h: float) -> float:
    original = x.data[index]
    try:
        x.data[index] = original + h
        plus = _eval_scalar(f)
        x.data[index] = original - h
        minus = _eval_scalar(f)
    finally:
        x.data[index] = original
    return (plus - minus) / (2.0 * h)


def _sample_indices(shape: Tuple[int, ...], max_coords: Optional[int], rng: np.random.Generator) -> List[Tuple]:
    size = int(np.prod(shape)) if shape else 1
    if max_coords is None or max_coords >= size:
        flat = np.arange(size)
    else:
        flat = np.sort(rng.choice(size, size=max_coords, replace=False))
    return [tuple(int(i) for i in np.unravel_index(k, shape)) for k in flat]


def grad_check_params(
    f: Callable[[], Tensor],
    params: Mapping[str, Tensor],
    h: float = 1e-5,
    tol: float = 1e-4,
    coords_per_param: Optional[int] = None,
    seed: int = 0,
) -> GradCheckReport:
    """Check d f / d p for every tensor in ``params``.

    ``f`` takes no arguments and closes over the parameters. When
    ``coords_per_param`` is set, that many coordinates per tensor are drawn
    with a seeded generator instead of checking all of them.
    """
    if h <= 0:
        raise ContractError(f"grad_check step h must be > 0, got {h}")
    for p in params.values():
        if not p.requires_grad:
            raise ContractError("grad_check needs tensors with requires_grad=True")
        p.zero_grad()

    try:
        loss = f()
        backward(loss)
    except NumericError as e:
        return GradCheckReport(False, float("inf"), 0, tol, h, message=f"analytic pass failed: {e}")

    rng = np.random.default_rng(seed)
    worst = 0.0
    worst_index = None
    n_checked = 0
    per_param: Dict[str, float] = {}
    for name, p in params.items():
        param_worst = 0.0
        for index in _sample_indices(p.shape, coords_per_param, rng):
            try:
                numeric = _central_difference(f, p, index, h)
            except NumericError as e:
                return GradCheckReport(
                    False, float("inf"), n_checked, tol, h,
                    worst_index=(name,) + index, message=f"numeric pass failed: {e}",
                )
            err = _rel_error(float(p.grad[index]), numeric)
            n_checked += 1
            param_worst = max(param_worst, err)
            if err > worst:
                worst, worst_index = err, (name,) + index
        per_param[name] = param_worst

    passed = worst <= tol
    if not passed:
        logger.debug(f"grad check failed: max rel error {worst:.3e} at {worst_index}")
    return GradCheckReport(
        passed=passed,
        max_rel_error=worst,
        n_checked=n_checked,
        tol=tol,
        h=h,
        worst_index=worst_index,
        message="ok" if passed else f"max relative error {worst:.3e} exceeds {tol:.1e}",
        per_param=per_param,
    )


def grad_check(
    f: Callable[[Tensor], Tensor],
    x: Tensor,
    h: float = 1e-5,
    tol: float = 1e-6,
    max_coords: Optional[int] = None,
    seed: int = 0,
) -> GradCheckReport:
    """Compare the analytic gradient of scalar ``f`` at ``x`` with central differences.

    Relative error per coordinate is ``|a - n| / max(1, |a|, |n|)``; the check
    passes iff the maximum is ``<= tol``. A non-finite evaluation yields a
    failing report rather than an exception.
    """
    report = grad_check_params(lambda: f(x), {"x": x}, h=h, tol=tol, coords_per_param=max_coords, seed=seed)
    if report.worst_index is not None:
        report.worst_index = report.worst_index[1:]
    return report

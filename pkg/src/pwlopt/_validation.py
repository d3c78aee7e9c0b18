"""Small argument checks in the spirit of ``sklearn.utils.validation``."""
import math
import numbers

import numpy as np

from .exceptions import InvalidArgument


def check_positive(value, name, allow_inf=False):
    if not isinstance(value, numbers.Real) or math.isnan(value):
        raise InvalidArgument(f"{name} must be a real number, got {value!r}")
    if value <= 0:
        raise InvalidArgument(f"{name} must be positive, got {value!r}")
    if math.isinf(value) and not allow_inf:
        raise InvalidArgument(f"{name} must be finite")
    return value


def check_interval(lower, upper, name="interval"):
    check_positive(lower, f"{name} lower bound")
    check_positive(upper, f"{name} upper bound")
    if lower > upper:
        raise InvalidArgument(f"{name}: lower bound {lower} exceeds upper bound {upper}")
    return lower, upper


def check_ratio(rho, name="rho"):
    if not isinstance(rho, numbers.Real) or not rho > 1:
        raise InvalidArgument(f"{name} must be a real number > 1, got {rho!r}")
    return rho


def check_arguments(x, name="x"):
    """Return ``x`` as a float ndarray, rejecting NaN."""
    arr = np.asarray(x, dtype=float)
    if np.isnan(arr).any():
        raise InvalidArgument(f"{name} contains NaN")
    return arr


def check_random_state(seed):
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)

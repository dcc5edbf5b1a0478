"""Input checks shared by the estimator wrappers and the harness."""
from numbers import Integral, Real

from sklearn.utils import check_scalar

from .grid import MapField


def check_field(X, name="X"):
    """Return ``X`` after confirming it is a valid :class:`MapField`.

    The shape, finiteness and on-target tolerance are re-checked, since
    ``values`` is a mutable array.
    """
    if not isinstance(X, MapField):
        raise TypeError(f"{name} must be a MapField, got {type(X).__name__}")
    X._validate()
    return X


def check_positive(value, name, include_zero=False):
    value = check_scalar(value, name, Real, min_val=0.0)
    if value == 0 and not include_zero:
        raise ValueError(f"{name} == 0, must be > 0.")
    return value


def check_count(value, name, min_val=1):
    return check_scalar(value, name, Integral, min_val=min_val)


def check_choice(value, name, choices):
    if value not in choices:
        raise ValueError(f"{name} must be one of {sorted(choices)}, got {value!r}")
    return value

import numpy as np

# Largest double strictly below 1; logistic outputs are kept in the open interval.
_UPPER = np.nextafter(1.0, 0.0)
_LOWER = np.nextafter(0.0, 1.0)


def logistic_scale(values, reference=None):
    """Squash ``values`` through 1 / (1 + exp(-(v - mean) / std)).

    ``mean`` and ``std`` (population) come from ``reference`` when given,
    otherwise from ``values`` itself. A degenerate reference (all entries
    equal) maps everything to 0.5.
    """
    values = np.asarray(values, dtype=float)
    ref = values if reference is None else np.asarray(reference, dtype=float)
    if ref.size == 0 or np.ptp(ref) == 0:
        return np.full(values.shape, 0.5)
    mean = ref.mean()
    std = ref.std()
    if std == 0:
        return np.full(values.shape, 0.5)
    with np.errstate(over="ignore"):
        out = 1.0 / (1.0 + np.exp(-(values - mean) / std))
    return np.clip(out, _LOWER, _UPPER)

"""Hypothesis strategies shared by the property tests."""
import numpy as np
from hypothesis import strategies as st

dims_st = st.lists(st.integers(1, 3), min_size=1, max_size=3).map(tuple)


@st.composite
def streams(draw, dims=None, min_size=1, max_size=25, integer=False):
    """A channel layout and a short stream of points with small coordinates."""
    dims = dims or draw(dims_st)
    z = sum(dims)
    n = draw(st.integers(min_size, max_size))
    if integer:
        vals = st.integers(-50, 50)
    else:
        vals = st.floats(-10, 10, allow_nan=False, allow_infinity=False, width=32)
    rows = draw(st.lists(st.lists(vals, min_size=z, max_size=z), min_size=n, max_size=n))
    return dims, np.asarray(rows, dtype=float)


rho_st = st.sampled_from([0.0, 0.1, 0.3, 0.5, 0.7, 0.9, 1.0])
tau_st = st.sampled_from([0.0, 0.5, 0.85, 1.2])
rate_st = st.sampled_from([1.0, 0.75, 0.5, 0.25])

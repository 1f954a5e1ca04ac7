"""Shared hypothesis strategies for chain parameters."""

from hypothesis import strategies as st

from xyqst import ModelParams


@st.composite
def model_params(draw, min_sites=2, max_sites=12, max_falloff=4.0, max_anisotropy=2.0):
    n = draw(st.integers(min_sites, max_sites))
    return ModelParams(
        n_sites=n,
        coordination=draw(st.integers(1, n - 1)),
        falloff=draw(st.floats(0.0, max_falloff)),
        anisotropy=draw(st.floats(0.0, max_anisotropy)),
        field=draw(st.floats(-3.0, 3.0)),
        coupling_scale=draw(st.floats(0.2, 3.0)),
    )

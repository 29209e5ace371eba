from hypothesis import settings

# numba kernels compile on first use, which would trip per-example deadlines
settings.register_profile("default", deadline=None)
settings.load_profile("default")

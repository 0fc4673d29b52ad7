from hypothesis import settings

# first calls compile numba kernels, which blows any per-example deadline
settings.register_profile("nflevo", deadline=None, max_examples=100)
settings.load_profile("nflevo")

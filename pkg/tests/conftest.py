import hypothesis
import numpy as np

np.seterr(all="raise", under="ignore")

hypothesis.settings.register_profile(
    "default", max_examples=50, deadline=None, derandomize=True
)
hypothesis.settings.load_profile("default")

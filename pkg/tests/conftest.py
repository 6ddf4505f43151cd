import math
import os

from hypothesis import HealthCheck, settings

settings.register_profile("default", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.register_profile("ci", deadline=None, max_examples=300, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


def bisect(fn, lo, hi, iters=200):
    """Root of a continuous ``fn`` with a sign change on [lo, hi], to the last bit."""
    flo = fn(lo)
    assert flo * fn(hi) <= 0, "no sign change"
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi):
            break
        fm = fn(mid)
        if (fm < 0) == (flo < 0):
            lo, flo = mid, fm
        else:
            hi = mid
    return lo if abs(fn(lo)) <= abs(fn(hi)) else hi


ASIN_04 = bisect(lambda x: math.sin(x) - 0.4, 0.0, 1.0)
CUBIC_ROOT = bisect(lambda x: x**3 - 2 * x - 5, 2.0, 3.0)

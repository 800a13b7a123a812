from hypothesis import HealthCheck, settings

# FFT timings jitter enough under load to trip the per-example deadline,
# and the flow fixtures are intentionally slow to build.
settings.register_profile(
    "default",
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("default")

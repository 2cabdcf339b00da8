class ConfigurationError(ValueError):
    """Invalid run or memory configuration (bad permutation, ring layout, ...)."""


class HarnessError(AssertionError):
    """A harness-level assertion failed: the simulated algorithm broke a rule
    it must never break (writing a foreign identity, out-of-range index, ...)."""


class UsageError(HarnessError):
    """lock()/unlock() invoked out of order."""

from dataclasses import dataclass

import numpy as np

from ..errors import InvalidInputError

# With alpha_i = epsilon * sigma_i^2 / sigma_1^2 the first level steps by
# epsilon itself; values near 1 let the sampler move a unit-scale image.
DEFAULT_EPSILON = 1.0


@dataclass(frozen=True)
class NoiseSchedule:
    """Strictly decreasing geometric noise levels plus the step-size base."""

    sigmas: tuple
    epsilon: float = DEFAULT_EPSILON

    def __post_init__(self):
        s = np.asarray(self.sigmas, dtype=float)
        if s.ndim != 1 or s.size < 1:
            raise InvalidInputError("schedule needs at least one noise level")
        if not np.all(s > 0) or not np.all(np.isfinite(s)):
            raise InvalidInputError("noise levels must be positive and finite")
        if s.size > 1:
            if not np.all(np.diff(s) < 0):
                raise InvalidInputError("noise levels must be strictly decreasing")
            ratio = s[1:] / s[:-1]
            if np.max(np.abs(ratio - ratio[0])) > 1e-12:
                raise InvalidInputError("noise levels must form a geometric sequence")
        if not self.epsilon > 0:
            raise InvalidInputError(f"epsilon must be > 0, got {self.epsilon}")
        object.__setattr__(self, "sigmas", tuple(float(v) for v in s))

    @classmethod
    def geometric(cls, sigma_max=1.0, sigma_min=0.01, n_levels=10, epsilon=DEFAULT_EPSILON):
        if n_levels < 1:
            raise InvalidInputError(f"need n_levels >= 1, got {n_levels}")
        if n_levels == 1:
            return cls((float(sigma_max),), epsilon)
        if not sigma_max > sigma_min > 0:
            raise InvalidInputError("need sigma_max > sigma_min > 0")
        ratio = (sigma_min / sigma_max) ** (1.0 / (n_levels - 1))
        sig = sigma_max * ratio ** np.arange(n_levels)
        sig[-1] = sigma_min
        return cls(tuple(sig), epsilon)

    @property
    def n_levels(self):
        return len(self.sigmas)

    @property
    def ratio(self):
        s = self.sigmas
        return s[1] / s[0] if len(s) > 1 else 1.0

    def as_array(self):
        return np.asarray(self.sigmas)

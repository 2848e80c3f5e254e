"""Exact stochastic-convolution sampling and stream replay.

The linear part and the noise of the mild solution are sampled from
their exact per-mode law, so the only discretization error anywhere in
the package comes from drift freezing.  This script checks the
variance formula empirically and demonstrates the replayable streams
that make shared-noise coupling possible.
"""

import numpy as np

from slowfast_spde.model import heat_example
from slowfast_spde.noise import conv_increment_law, derive_substream, sample_increments

cfg = heat_example(0.1, 0.1, 32)
delta = 0.05

decay, std = conv_increment_law(delta, cfg.q1, cfg.eigs)
print("mode   decay e^(-k^2 dt)   std of the convolution increment")
for k in (1, 2, 4, 8, 32):
    print(f"{k:4d}   {decay[k-1]:.6f}          {std[k-1]:.6f}")

stream = derive_substream(2026, 0, "W1", 32)
draws = np.stack([sample_increments(stream, delta, cfg.q1, cfg.eigs)
                  for _ in range(20000)])
emp = draws.std(axis=0, ddof=1)
print(f"\nempirical std over 2e4 draws vs exact, worst relative error: "
      f"{np.max(np.abs(emp - std) / std):.3f}")

# replay: the same key always yields the same sequence
a = derive_substream(2026, 7, "W1", 4)
b = derive_substream(2026, 7, "W1", 4)
print("\nreplayed stream identical:",
      np.array_equal(a.standard_normals(), b.standard_normals()))

# roles separate the slow and fast driving noises
w1 = derive_substream(2026, 7, "W1", 1)
w2 = derive_substream(2026, 7, "W2", 1)
x1 = w1.standard_normals(50000).ravel()
x2 = w2.standard_normals(50000).ravel()
print(f"cross-correlation of W1 and W2 roles: {np.corrcoef(x1, x2)[0,1]:+.4f} "
      f"(4-sigma band +/-{4/np.sqrt(50000):.4f})")

# time-change identity: fast-equation noise over dt equals slow-form
# noise over dt/eps
from slowfast_spde.noise import NoiseSpectrum
from slowfast_spde.spectral import OperatorSpectrum

eps = 1e-2
fast_eigs = OperatorSpectrum(cfg.eigs.eigenvalues / eps)
fast_q = NoiseSpectrum(cfg.q2.q / eps)
d1, s1 = conv_increment_law(delta, fast_q, fast_eigs)
d2, s2 = conv_increment_law(delta / eps, cfg.q2, cfg.eigs)
print(f"time-change identity max deviation: "
      f"{max(np.max(np.abs(d1-d2)), np.max(np.abs(s1-s2))):.2e}")

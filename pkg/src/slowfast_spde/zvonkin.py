"""Elliptic equation lambda*U - L*U = G at truncated dimension d <= 3.

L is the generator of the linear-plus-averaged-drift diffusion; the
solution is constructed exactly as the fixed point of

    U(x) = int_0^inf e^{-lambda t} T_t( <Bbar, DU> + G )(x) dt,

where T_t is the transition semigroup of the drift-free
Ornstein-Uhlenbeck process dZ = AZ dt + sqrt(Q1) dW.  On a truncated
set of d modes T_t has an explicit Gaussian kernel, evaluated here by
tensor Gauss-Hermite quadrature; gradients DT_t use Gaussian
integration by parts (per-axis scalar weights in the diagonal case),
which stays finite for rough integrands.  Functions of the truncated
state live on tensor grids with multilinear interpolation; queries
outside the box clamp to the boundary (U and DU are bounded, so
clamping is consistent).

The iteration starts from U_0 = 0 and contracts once lambda is large
enough; the time integral is truncated at T_max = 40 / lambda_1 on
log-spaced Gauss-Legendre panels, so the damped tail is below
e^{-lambda T_max} of the integrand bound.

This module exists to verify the construction (fixed point, decay of
the resolvent norm in lambda, gradient bounds) at desk scale, not for
production use in the simulator.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import RegularGridInterpolator

from .errors import ConfigError, PicardDivergenceError

__all__ = [
    "OuKernel",
    "TruncatedFunction",
    "ZvonkinSolution",
    "box_axes",
    "ou_semigroup_apply",
    "ou_gradient_apply",
    "picard_solve",
    "dlambda_curve",
]


@dataclass(frozen=True)
class OuKernel:
    """Diagonal OU transition parameters on d retained modes."""

    eigenvalues: np.ndarray
    q: np.ndarray

    def __post_init__(self):
        lam = np.atleast_1d(np.asarray(self.eigenvalues, dtype=float))
        q = np.atleast_1d(np.asarray(self.q, dtype=float))
        if lam.shape != q.shape or lam.ndim != 1:
            raise ConfigError("eigenvalues and q must be 1-d arrays of equal length")
        if np.any(lam <= 0) or np.any(q < 0):
            raise ConfigError("need lambda > 0 and q >= 0")
        lam.setflags(write=False)
        q.setflags(write=False)
        object.__setattr__(self, "eigenvalues", lam)
        object.__setattr__(self, "q", q)

    @property
    def dim(self) -> int:
        return self.eigenvalues.shape[0]

    def transition(self, t: float) -> tuple[np.ndarray, np.ndarray]:
        """Mean decay e^{-lambda t} and std of the t-transition, per axis."""
        decay = np.exp(-self.eigenvalues * t)
        var = self.q * (-np.expm1(-2.0 * self.eigenvalues * t)) / (2.0 * self.eigenvalues)
        return decay, np.sqrt(var)

    def stationary_std(self) -> np.ndarray:
        return np.sqrt(self.q / (2.0 * self.eigenvalues))


@dataclass
class TruncatedFunction:
    """Tensor-grid samples with multilinear interpolation and clamping.

    ``values`` has shape grid_shape + out_shape; evaluation accepts
    points shaped (..., d) and returns (..., *out_shape).
    """

    axes: tuple[np.ndarray, ...]
    values: np.ndarray
    _interp: RegularGridInterpolator | None = field(default=None, repr=False,
                                                    compare=False)

    def __post_init__(self):
        self.axes = tuple(np.asarray(a, dtype=float) for a in self.axes)
        self.values = np.asarray(self.values, dtype=float)
        gshape = tuple(a.shape[0] for a in self.axes)
        if self.values.shape[: len(gshape)] != gshape:
            raise ConfigError("values do not match the grid shape")

    @property
    def dim(self) -> int:
        return len(self.axes)

    @property
    def out_shape(self) -> tuple:
        return self.values.shape[self.dim:]

    @property
    def grid_shape(self) -> tuple:
        return self.values.shape[: self.dim]

    def grid_points(self) -> np.ndarray:
        """All grid nodes as an array of shape (n_nodes, d)."""
        mesh = np.meshgrid(*self.axes, indexing="ij")
        return np.stack([m.ravel() for m in mesh], axis=-1)

    def __call__(self, points: np.ndarray) -> np.ndarray:
        if self._interp is None:
            self._interp = RegularGridInterpolator(
                self.axes, self.values, method="linear", bounds_error=False)
        pts = np.asarray(points, dtype=float)
        lead = pts.shape[:-1]
        pts = pts.reshape(-1, self.dim).copy()
        for j, ax in enumerate(self.axes):
            np.clip(pts[:, j], ax[0], ax[-1], out=pts[:, j])
        out = self._interp(pts)
        return out.reshape(lead + self.out_shape)

    def sup_norm(self) -> float:
        """Max over grid nodes of the euclidean norm over output axes."""
        flat = self.values.reshape(self.grid_shape + (-1,))
        return float(np.max(np.linalg.norm(flat, axis=-1)))

    @classmethod
    def from_callable(cls, fn, axes) -> "TruncatedFunction":
        axes = tuple(np.asarray(a, dtype=float) for a in axes)
        mesh = np.meshgrid(*axes, indexing="ij")
        pts = np.stack([m.ravel() for m in mesh], axis=-1)
        vals = np.asarray(fn(pts), dtype=float)
        gshape = tuple(a.shape[0] for a in axes)
        return cls(axes, vals.reshape(gshape + vals.shape[1:]))


def box_axes(kernel: OuKernel, n_per_axis: int = 257,
             radius_mult: float = 4.0) -> tuple[np.ndarray, ...]:
    """Per-axis grids covering radius_mult stationary deviations."""
    radii = radius_mult * kernel.stationary_std()
    radii = np.where(radii > 0, radii, 1.0)
    return tuple(np.linspace(-r, r, n_per_axis) for r in radii)


def _hermite_nodes(order: int, dim: int) -> tuple[np.ndarray, np.ndarray]:
    """Tensor standard-normal quadrature: nodes (Q, d), weights (Q,)."""
    z, w = np.polynomial.hermite_e.hermegauss(order)
    w = w / math.sqrt(2.0 * math.pi)
    zs = np.meshgrid(*([z] * dim), indexing="ij")
    ws = np.meshgrid(*([w] * dim), indexing="ij")
    nodes = np.stack([a.ravel() for a in zs], axis=-1)
    weights = np.prod(np.stack([a.ravel() for a in ws], axis=-1), axis=-1)
    return nodes, weights


def _kernel_apply(f: TruncatedFunction, t: float, kernel: OuKernel, order: int,
                  want_gradient: bool):
    """(T_t f, optionally DT_t f) sampled on f's own grid."""
    decay, std = kernel.transition(t)
    x = f.grid_points()  # (G, d)
    z, w = _hermite_nodes(order, kernel.dim)  # (Q, d), (Q,)
    pts = x[:, None, :] * decay + z[None, :, :] * std  # (G, Q, d)
    vals = f(pts)  # (G, Q, *out)
    mean = np.tensordot(vals, w, axes=([1], [0]))  # (G, *out)
    grad = None
    if want_gradient:
        if np.any(std == 0.0):
            raise ValueError("gradient weights are singular for a degenerate axis")
        wgt = w[:, None] * z * (decay / std)  # (Q, d)
        grad = np.tensordot(vals, wgt, axes=([1], [0]))  # (G, *out, d)
    return mean, grad


def ou_semigroup_apply(f: TruncatedFunction, t: float, kernel: OuKernel,
                       order: int = 24) -> TruncatedFunction:
    """(T_t f)(x) = E f(Z_t^x) by tensor Gauss-Hermite quadrature.

    t = 0 returns f unchanged; requires at least cubic quadrature.
    """
    if t < 0:
        raise ValueError("time must be nonnegative")
    if order < 3:
        raise ValueError("quadrature order must be >= 3")
    if t == 0.0:
        return TruncatedFunction(f.axes, f.values.copy())
    mean, _ = _kernel_apply(f, t, kernel, order, want_gradient=False)
    return TruncatedFunction(f.axes, mean.reshape(f.grid_shape + f.out_shape))


def ou_gradient_apply(f: TruncatedFunction, t: float, kernel: OuKernel,
                      order: int = 24) -> TruncatedFunction:
    """Gradient D(T_t f) via Gaussian integration by parts.

    Output gains a trailing axis of length d.  t must be positive (the
    reweighting is singular at t = 0); the estimate needs only bounded
    f, no smoothness.
    """
    if t <= 0:
        raise ValueError("gradient of the transition requires t > 0")
    if order < 3:
        raise ValueError("quadrature order must be >= 3")
    _, grad = _kernel_apply(f, t, kernel, order, want_gradient=True)
    return TruncatedFunction(f.axes, grad.reshape(f.grid_shape + f.out_shape
                                                  + (kernel.dim,)))


def _time_quadrature(lam: float, kernel: OuKernel, t_min: float, n_panels: int,
                     gl_order: int) -> tuple[np.ndarray, np.ndarray]:
    t_max = 40.0 / float(kernel.eigenvalues[0])
    edges = np.exp(np.linspace(math.log(t_min), math.log(t_max), n_panels + 1))
    gx, gw = np.polynomial.legendre.leggauss(gl_order)
    nodes, weights = [], []
    for a, b in zip(edges[:-1], edges[1:]):
        mid, half = 0.5 * (a + b), 0.5 * (b - a)
        nodes.append(mid + half * gx)
        weights.append(half * gw)
    return np.concatenate(nodes), np.concatenate(weights)


@dataclass
class ZvonkinSolution:
    """Fixed point U with its gradient field and convergence record."""

    u: TruncatedFunction
    du: TruncatedFunction  # Jacobian, out_shape (d_out, d)
    lam: float
    residual: float
    iterations: int
    converged: bool
    change_history: list[float]


def _pair_drift(bbar_vals: np.ndarray, du_vals: np.ndarray) -> np.ndarray:
    """<Bbar, DU>: directional derivative of each output along Bbar."""
    return np.einsum("...j,...cj->...c", bbar_vals, du_vals)


def picard_solve(g: TruncatedFunction, bbar, lam: float, kernel: OuKernel,
                 order: int = 24, n_panels: int = 30, gl_order: int = 8,
                 t_min: float = 1e-8, max_iter: int = 60,
                 tol: float | None = None) -> ZvonkinSolution:
    """Solve lambda*U - L*U = G by iterating the damped integral map.

    Starting from U_0 = 0, each sweep evaluates
    U_n = int e^{-lambda t} T_t(<Bbar, DU_{n-1}> + G) dt on g's grid,
    with the gradient computed by the integration-by-parts weights at
    the same time nodes.  Stops when the sup-norm change of (U, DU)
    falls below ``tol`` (default 1e-3 * sup|G|); growth of the change
    across three consecutive sweeps raises
    :class:`PicardDivergenceError` (increase lambda).
    """
    if lam <= 0:
        raise ConfigError("lambda must be positive")
    d = kernel.dim
    if g.dim != d:
        raise ConfigError("g and kernel dimensions differ")
    out = g.out_shape
    x = g.grid_points()
    bbar_vals = np.asarray(bbar(x), dtype=float).reshape(g.grid_shape + (d,))
    if tol is None:
        tol = 1e-3 * max(g.sup_norm(), 1e-12)

    nodes, weights = _time_quadrature(lam, kernel, t_min, n_panels, gl_order)
    damp = weights * np.exp(-lam * nodes)
    head = -math.expm1(-lam * t_min) / lam  # int_0^tmin e^{-lam t} dt, T_t ~ Id

    u_vals = np.zeros(g.grid_shape + out)
    du_vals = np.zeros(g.grid_shape + out + (d,))

    def sweep(u_vals, du_vals):
        psi_vals = g.values + _pair_drift(bbar_vals, du_vals)
        psi = TruncatedFunction(g.axes, psi_vals)
        new_u = head * psi_vals.copy()
        new_du = np.zeros_like(du_vals)
        for t, w in zip(nodes, damp):
            mean, grad = _kernel_apply(psi, t, kernel, order, want_gradient=True)
            new_u += w * mean.reshape(new_u.shape)
            new_du += w * grad.reshape(new_du.shape)
        return new_u, new_du

    history: list[float] = []
    converged = False
    grew = 0
    for it in range(1, max_iter + 1):
        new_u, new_du = sweep(u_vals, du_vals)
        change = max(float(np.max(np.abs(new_u - u_vals))),
                     float(np.max(np.abs(new_du - du_vals))))
        u_vals, du_vals = new_u, new_du
        history.append(change)
        if change < tol:
            converged = True
            break
        if len(history) >= 2 and history[-1] > history[-2]:
            grew += 1
            if grew >= 3:
                raise PicardDivergenceError(
                    f"fixed-point sweeps are expanding at lambda={lam:g}; "
                    "increase lambda"
                )
        else:
            grew = 0

    resid_u, _ = sweep(u_vals, du_vals)
    residual = float(np.max(np.linalg.norm(
        (resid_u - u_vals).reshape(g.grid_shape + (-1,)), axis=-1)))
    u = TruncatedFunction(g.axes, u_vals)
    du = TruncatedFunction(g.axes, du_vals)
    return ZvonkinSolution(u=u, du=du, lam=lam, residual=residual,
                           iterations=len(history), converged=converged,
                           change_history=history)


def dlambda_curve(g: TruncatedFunction, bbar, kernel: OuKernel,
                  lambdas, **solve_kw) -> list[dict]:
    """Resolvent norms across increasing lambda.

    Returns one row per lambda with sup|U|, sup|DU| (Frobenius per
    point) and the fixed-point residual; the sup norms decay as lambda
    grows.
    """
    lambdas = list(lambdas)
    if any(b <= a for a, b in zip(lambdas[:-1], lambdas[1:])):
        raise ConfigError("lambdas must be increasing")
    rows = []
    for lam in lambdas:
        sol = picard_solve(g, bbar, lam, kernel, **solve_kw)
        rows.append({
            "lambda": float(lam),
            "sup_u": sol.u.sup_norm(),
            "sup_du": sol.du.sup_norm(),
            "residual": sol.residual,
            "iterations": sol.iterations,
        })
    return rows

"""Solution operators for the two master classes of causal evolution systems.

The ODE class couples a time derivative of a positive coefficient with a
bounded block perturbation and is inverted two independent ways (geometric
series and causal time stepping); the PDE class adds a skew spatial operator
assembled so that skew-adjointness is a bit-exact matrix identity (staggered
one-sided differences: the divergence leg is literally minus the transpose
of the Dirichlet gradient leg).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .signals import Coefficient, Signal, TimeGrid, norm_nu, truncate_before
from .timecalc import antiderivative, derivative

__all__ = [
    "OdeBlockSystem",
    "PdeSystem",
    "SpatialOperator",
    "solve_ode_block",
    "ode_block_solution_map",
    "picard_solve",
    "solve_evo_pde",
    "evo_pde_solution_map",
    "funid_residual",
    "maxwell_1d_solve",
    "heat_1d_solve",
    "wave_1d_solve",
    "elliptic_solve",
    "staggered_grad0",
    "mean_zero_project",
]

NORM_FLOOR = 1e-30


# ---------------------------------------------------------------------------
# spatial operators
# ---------------------------------------------------------------------------

def staggered_grad0(m_x: int, length: float = 1.0) -> np.ndarray:
    """One-sided difference gradient with zero Dirichlet values.

    Maps interior node values (m_x of them on (0, L)) to edge values
    (m_x + 1); minus its transpose is the matching divergence, so the block
    [[0, -G^T], [G, 0]] is skew-symmetric exactly.
    """
    dx = length / (m_x + 1)
    g = np.zeros((m_x + 1, m_x))
    for i in range(m_x + 1):
        if i < m_x:
            g[i, i] = 1.0
        if i > 0:
            g[i, i - 1] = -1.0
    return g / dx


def mean_zero_project(v: np.ndarray) -> np.ndarray:
    """Orthogonal projection onto the mean-zero subspace (the discrete range
    of the Dirichlet gradient in one dimension)."""
    return v - v.mean(axis=0, keepdims=True)


@dataclass(frozen=True)
class SpatialOperator:
    """Skew spatial block of an evolution system.

    kinds:
      * "skew-matrix": an explicit bounded skew matrix (stands in for the
        three-dimensional curl realizations; only skewness, boundedness and
        commutation with the time operators are ever used).
      * "grad0-div-1d": state (u-leg of size m_x, flux-leg of size m_x+1)
        with block [[0, -G^T], [G, 0]].
      * "grad0-div-1d-projected": the same pair conjugated with the
        projection onto mean-zero flux values (acoustic wave form).
    """

    kind: str
    m_x: int = 0
    length: float = 1.0
    matrix: np.ndarray | None = field(default=None, repr=False)

    @staticmethod
    def skew_matrix(A) -> "SpatialOperator":
        A = np.atleast_2d(np.asarray(A, dtype=complex))
        defect = np.linalg.norm(A + A.conj().T, 2)
        if defect > 1e-12 * max(1.0, np.linalg.norm(A, 2)):
            raise ValueError(f"matrix is not skew-adjoint: defect {defect:.2e}")
        return SpatialOperator(kind="skew-matrix", m_x=A.shape[0], matrix=A)

    @staticmethod
    def grad0_div_1d(m_x: int, length: float = 1.0) -> "SpatialOperator":
        return SpatialOperator(kind="grad0-div-1d", m_x=m_x, length=length)

    @staticmethod
    def grad0_div_1d_projected(m_x: int, length: float = 1.0) -> "SpatialOperator":
        return SpatialOperator(kind="grad0-div-1d-projected", m_x=m_x, length=length)

    @property
    def state_dim(self) -> int:
        if self.kind == "skew-matrix":
            return self.matrix.shape[0]
        if self.kind == "grad0-div-1d":
            return 2 * self.m_x + 1
        return 2 * self.m_x + 1  # v-leg m_x, embedded mean-zero flux m_x+1

    def dense(self) -> np.ndarray:
        """Assembled matrix; used by checks and the skew-matrix solve path."""
        if self.kind == "skew-matrix":
            return self.matrix
        g = staggered_grad0(self.m_x, self.length)
        m = self.m_x
        a = np.zeros((2 * m + 1, 2 * m + 1))
        a[:m, m:] = -g.T
        a[m:, :m] = g
        if self.kind == "grad0-div-1d-projected":
            # conjugate the flux leg with the mean-zero projection and flip
            # sign: the wave system carries minus the heat block
            p = np.eye(m + 1) - np.full((m + 1, m + 1), 1.0 / (m + 1))
            a[:m, m:] = a[:m, m:] @ p
            a[m:, :m] = p @ a[m:, :m]
            a = -a
        return a


# ---------------------------------------------------------------------------
# tridiagonal helper (Thomas algorithm, numpy only)
# ---------------------------------------------------------------------------

def _tridiag_solve(lower, diag, upper, rhs):
    """Solve a tridiagonal system; bands given as length-m arrays."""
    m = len(diag)
    c = np.empty(m - 1, dtype=complex)
    d = np.empty(m, dtype=complex)
    c[0] = upper[0] / diag[0]
    d[0] = rhs[0] / diag[0]
    for i in range(1, m):
        denom = diag[i] - lower[i - 1] * c[i - 1]
        if i < m - 1:
            c[i] = upper[i] / denom
        d[i] = (rhs[i] - lower[i - 1] * d[i - 1]) / denom
    x = np.empty(m, dtype=complex)
    x[-1] = d[-1]
    for i in range(m - 2, -1, -1):
        x[i] = d[i] - c[i] * x[i + 1]
    return x


def _laplacian_bands(g: np.ndarray, weight: np.ndarray):
    """Bands of G^T diag(weight) G for the staggered gradient G."""
    m = g.shape[1]
    dx_inv2 = g[0, 0] ** 2  # 1/dx^2
    w = np.asarray(weight, dtype=complex)
    diag = (w[:m] + w[1 : m + 1]) * dx_inv2
    off = -w[1:m] * dx_inv2
    return off, diag, off


# ---------------------------------------------------------------------------
# ODE block systems
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class OdeBlockSystem:
    """Data (M, N00, N01, N10, N11) of the block system with a derivative on
    the first leg only; c is the shared accretivity constant of M and N11."""

    M: Coefficient
    N00: Coefficient
    c: float
    N01: Coefficient | None = None
    N10: Coefficient | None = None
    N11: Coefficient | None = None

    @property
    def m0(self) -> int:
        return self.M.dim

    @property
    def m1(self) -> int:
        return 0 if self.N11 is None else self.N11.dim

    def block_norms(self, grid: TimeGrid):
        """Sup over nodes of the spectral norms of the four blocks."""
        def sup_norm(c: Coefficient | None) -> float:
            if c is None:
                return 0.0
            mats = c.sample_all(grid)
            return max(float(np.linalg.norm(mats[k], 2)) for k in range(grid.n))

        return {
            "N00": sup_norm(self.N00),
            "N01": sup_norm(self.N01),
            "N10": sup_norm(self.N10),
            "N11": sup_norm(self.N11),
        }

    def theta(self, grid: TimeGrid, nu: float) -> float:
        ns = self.block_norms(grid)
        return (self.c * ns["N00"] + ns["N01"] * ns["N10"]) / (nu * self.c**2)


def _solve_ode_block_stepping(sys: OdeBlockSystem, F: Signal, grid: TimeGrid) -> np.ndarray:
    """Causal time stepping for (d/dt diag(M,0) + N) U = F, backward
    difference applied to the product M u."""
    n, m0, m1 = grid.n, sys.m0, sys.m1
    dt = grid.dt
    Ms = sys.M.sample_all(grid)
    N00 = sys.N00.sample_all(grid)
    if m1:
        N01 = sys.N01.sample_all(grid)
        N10 = sys.N10.sample_all(grid)
        N11 = sys.N11.sample_all(grid)
    out = np.empty((n, m0 + m1), dtype=complex)
    mu_prev = np.zeros(m0, dtype=complex)  # (M u) at the previous node
    for k in range(n):
        if m1:
            blk = np.block([[Ms[k] / dt + N00[k], N01[k]], [N10[k], N11[k]]])
            rhs = np.concatenate([F.values[k, :m0] + mu_prev / dt, F.values[k, m0:]])
        else:
            blk = Ms[k] / dt + N00[k]
            rhs = F.values[k] + mu_prev / dt
        uk = np.linalg.solve(blk, rhs)
        out[k] = uk
        mu_prev = Ms[k] @ uk[:m0]
    return out


def _solve_ode_block_neumann(
    sys: OdeBlockSystem, F: Signal, grid: TimeGrid, nu: float, tol: float
) -> np.ndarray:
    """Geometric-series route through the triangular factorization of the
    block operator; truncation index fixed a priori from theta."""
    m0, m1 = sys.m0, sys.m1
    Ms = sys.M.sample_all(grid)
    M_inv = np.linalg.inv(Ms)
    N00 = sys.N00.sample_all(grid)
    if m1:
        N01 = sys.N01.sample_all(grid)
        N10 = sys.N10.sample_all(grid)
        N11_inv = np.linalg.inv(sys.N11.sample_all(grid))
        R = N00 - np.einsum("kab,kbc,kcd->kad", N01, N11_inv, N10)
    else:
        R = N00

    def apply_nodewise(mats, vals):
        return np.einsum("kab,kb->ka", mats, vals)

    def cum(vals):
        return grid.dt * np.cumsum(vals, axis=0)

    def b_tilde_inv(g: np.ndarray) -> np.ndarray:
        # sum_k T^k (M^-1 J g), T = -(M^-1 J R .), J the causal integral
        theta = sys.theta(grid, nu)
        if not theta < 1:
            raise ValueError(f"series route needs theta < 1, got {theta:.3f} at nu={nu}")
        base = apply_nodewise(M_inv, cum(g))
        norm_pref = 1.0 / (sys.c * nu) * 1.05
        k_max = 0
        rem = theta / (1 - theta) * norm_pref
        while rem > tol / 10 and k_max < 10_000:
            k_max += 1
            rem *= theta
        acc = base.copy()
        for _ in range(k_max):
            acc = base - apply_nodewise(M_inv, cum(apply_nodewise(R, acc)))
        return acc

    f0 = F.values[:, :m0]
    if m1 == 0:
        return b_tilde_inv(f0)
    f1 = F.values[:, m0:]
    g0 = f0 - apply_nodewise(N01, apply_nodewise(N11_inv, f1))
    w = b_tilde_inv(g0)
    v = apply_nodewise(N11_inv, f1) - apply_nodewise(N11_inv, apply_nodewise(N10, w))
    return np.concatenate([w, v], axis=1)


def solve_ode_block(
    sys: OdeBlockSystem, F: Signal, nu: float | None = None, tol: float = 1e-8
) -> Signal:
    """Solve (d/dt diag(M,0) + N) U = F by two independent routes.

    Route (a) is the truncated geometric series through the block
    factorization, route (b) direct causal stepping; their agreement within
    `tol` is asserted before route (b) is returned.  Requires the
    contraction condition theta < 1 at the working weight.
    """
    grid = F.grid if nu is None else F.grid.with_nu(nu)
    nu = grid.nu
    theta = sys.theta(grid, nu)
    if not theta < 1:
        raise ValueError(f"contraction fails: theta={theta:.3f} >= 1 at nu={nu}")
    u_step = _solve_ode_block_stepping(sys, F, grid)
    u_neum = _solve_ode_block_neumann(sys, F, grid, nu, tol)
    sig_step = Signal(grid, u_step)
    scale = max(norm_nu(sig_step), NORM_FLOOR)
    gap = norm_nu(Signal(grid, u_step - u_neum)) / scale
    if gap > tol:
        raise ValueError(f"route disagreement {gap:.3e} > tol={tol}")
    return sig_step


def ode_block_solution_map(sys: OdeBlockSystem, grid: TimeGrid, tol: float = 1e-8):
    """The solution operator as a plain callable Signal -> Signal."""
    def act(F: Signal) -> Signal:
        return solve_ode_block(sys, Signal(grid, F.values), nu=grid.nu, tol=tol)

    return act


# ---------------------------------------------------------------------------
# Picard fixed point for Lipschitz right-hand sides
# ---------------------------------------------------------------------------

def picard_solve(
    F_rule: Callable[[np.ndarray], np.ndarray],
    lip: float,
    f: Signal,
    tol: float = 1e-10,
    max_iter: int = 200,
) -> Signal:
    """Fixed point of u = J(F(u) + f) with J the causal integral.

    The working weight is chosen as twice the Lipschitz bound, which makes
    the iteration a 1/2-contraction; the returned signal satisfies the
    backward-difference equation du = F(u) + f nodewise to within 10*tol.

    Convergence is in the weighted norm: pointwise accuracy at the window
    tail degrades like exp(2*lip*t) times the iteration gap, so nodal
    comparisons should use windows with lip * t_end moderate.
    """
    if not lip > 0:
        raise ValueError(f"Lipschitz bound must be positive, got {lip}")
    nu = 2.0 * lip
    grid = f.grid.with_nu(nu)
    fv = Signal(grid, f.values)
    kappa = 0.5

    def nemitskii(u: Signal) -> Signal:
        try:  # vectorized rules act on the whole (n, m) stack at once
            vals = np.asarray(F_rule(u.values), dtype=complex)
            if vals.shape != u.values.shape:
                raise ValueError
        except Exception:
            vals = np.stack([np.asarray(F_rule(row), dtype=complex) for row in u.values])
        return Signal(grid, vals)

    u = Signal.zero(grid, f.dim)
    for _ in range(max_iter):
        u_next = antiderivative(nemitskii(u) + fv)
        gap = norm_nu(u_next - u)
        u = u_next
        if gap <= tol * (1 - kappa):
            break
    else:
        raise ValueError(f"fixed point did not reach tol={tol} in {max_iter} iterations")
    defect = norm_nu(derivative(u) - (nemitskii(u) + fv))
    if defect > 10 * tol * max(1.0, norm_nu(u)):
        raise ValueError(f"fixed-point equation defect {defect:.2e} too large")
    return Signal(f.grid, u.values)


# ---------------------------------------------------------------------------
# PDE systems
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PdeSystem:
    """State-space data for (d/dt M + N + A) u = f.

    For the 1D kinds the coefficients are given per leg as time profiles
    (scalars) or edge-sampled arrays; `c` is the certified accretivity
    constant of the full system at the working weight.
    """

    A: SpatialOperator
    c: float
    M: Coefficient | None = None       # skew-matrix kind: full-state blocks
    N: Coefficient | None = None
    m0_profile: Callable[[float], np.ndarray] | None = None  # 1d kinds: leg values
    m1_profile: Callable[[float], np.ndarray] | None = None
    n0_profile: Callable[[float], np.ndarray] | None = None
    n1_profile: Callable[[float], np.ndarray] | None = None
    m0_deriv: Callable[[float], np.ndarray] | None = None
    m1_deriv: Callable[[float], np.ndarray] | None = None
    wave_coefficient: np.ndarray | None = None  # edge-sampled a for the wave form

    @property
    def state_dim(self) -> int:
        return self.A.state_dim

    @staticmethod
    def dense_small(M: Coefficient, N: Coefficient, A: SpatialOperator, c: float) -> "PdeSystem":
        return PdeSystem(A=A, c=c, M=M, N=N)

    @staticmethod
    def heat(a_edge: np.ndarray, length: float = 1.0, c: float | None = None,
             nu: float = 1.0) -> "PdeSystem":
        """Heat system: state (theta, flux), M = diag(1, 0), N = diag(0, 1/a)."""
        a_edge = np.asarray(a_edge, dtype=complex)
        m_x = len(a_edge) - 1
        amin = float(np.min(a_edge.real))
        amax = float(np.max(np.abs(a_edge)))
        if amin <= 0:
            raise ValueError("conductivity must have positive real part")
        c_eff = min(nu, amin / amax**2) if c is None else c
        ones0 = np.ones(m_x)
        zeros1 = np.zeros(m_x + 1)
        return PdeSystem(
            A=SpatialOperator.grad0_div_1d(m_x, length),
            c=c_eff,
            m0_profile=lambda t: ones0,
            m1_profile=lambda t: zeros1,
            n0_profile=lambda t: np.zeros(m_x),
            n1_profile=lambda t: 1.0 / a_edge,
            m0_deriv=lambda t: np.zeros(m_x),
            m1_deriv=lambda t: zeros1,
        )

    @staticmethod
    def maxwell(eps: Coefficient, mu: Coefficient, sigma: Coefficient,
                m_x: int, length: float = 1.0, c: float = 1.0) -> "PdeSystem":
        """1D Maxwell block: state (E on interior nodes, H on edges)."""
        ones0, ones1 = np.ones(m_x), np.ones(m_x + 1)

        def scalar(cf: Coefficient, t: float) -> complex:
            return complex(np.atleast_2d(cf.sampler(t))[0, 0])

        def scalar_d(cf: Coefficient, t: float) -> complex:
            if cf.deriv_sampler is None:
                raise ValueError("maxwell coefficients need analytic derivatives")
            return complex(np.atleast_2d(cf.deriv_sampler(t))[0, 0])

        return PdeSystem(
            A=SpatialOperator.grad0_div_1d(m_x, length),
            c=c,
            m0_profile=lambda t: scalar(eps, t) * ones0,
            m1_profile=lambda t: scalar(mu, t) * ones1,
            n0_profile=lambda t: scalar(sigma, t) * ones0,
            n1_profile=lambda t: np.zeros(m_x + 1),
            m0_deriv=lambda t: scalar_d(eps, t) * ones0,
            m1_deriv=lambda t: scalar_d(mu, t) * ones1,
        )

    @staticmethod
    def wave(a_edge: np.ndarray, length: float = 1.0, nu: float = 1.0) -> "PdeSystem":
        """Acoustic wave in first-order form with mean-zero projected flux."""
        a_edge = np.asarray(a_edge, dtype=complex)
        m_x = len(a_edge) - 1
        amax = float(np.max(np.abs(a_edge)))
        c_eff = nu * min(1.0, 1.0 / amax)
        return PdeSystem(
            A=SpatialOperator.grad0_div_1d_projected(m_x, length),
            c=c_eff,
            wave_coefficient=a_edge,
        )


def _pde_check(sys: PdeSystem, grid: TimeGrid, nu: float):
    """Spot-check the positivity certificate Re(nu M + M'/2) + Re N >= c."""
    ts = grid.times[:: max(1, grid.n // 7)]
    if sys.A.kind == "skew-matrix" and sys.M is not None:
        for t in ts:
            m = np.atleast_2d(sys.M.sampler(t))
            n = np.atleast_2d(sys.N.sampler(t))
            md = (
                np.zeros_like(m)
                if sys.M.deriv_sampler is None
                else np.atleast_2d(sys.M.deriv_sampler(t))
            )
            herm = nu * m + 0.5 * md + n
            herm = 0.5 * (herm + herm.conj().T)
            low = float(np.linalg.eigvalsh(herm)[0])
            if low < sys.c - 1e-9:
                raise ValueError(
                    f"positivity certificate fails at t={t}: {low:.4f} < c={sys.c}"
                )
    elif sys.m0_profile is not None:
        for t in ts:
            legs = (
                (sys.m0_profile, sys.m0_deriv, sys.n0_profile),
                (sys.m1_profile, sys.m1_deriv, sys.n1_profile),
            )
            for prof, dprof, nprof in legs:
                mv = np.asarray(prof(t))
                dv = np.zeros_like(mv) if dprof is None else np.asarray(dprof(t))
                nv = np.asarray(nprof(t))
                damped = float(np.min((nu * mv + 0.5 * dv).real))
                if damped < -1e-12:
                    raise ValueError(f"leg damping fails at t={t}: {damped:.3e} < 0")
                low = float(np.min((nu * mv + 0.5 * dv + nv).real))
                if low < sys.c - 1e-9:
                    raise ValueError(
                        f"leg positivity fails at t={t}: {low:.4f} < c={sys.c}"
                    )


def _step_skew_dense(sys: PdeSystem, F: np.ndarray, grid: TimeGrid) -> np.ndarray:
    n = grid.n
    dt = grid.dt
    A = sys.A.dense()
    Ms = sys.M.sample_all(grid)
    Ns = sys.N.sample_all(grid)
    out = np.empty_like(F)
    mu_prev = np.zeros(F.shape[1], dtype=complex)
    for k in range(n):
        blk = Ms[k] / dt + Ns[k] + A
        uk = np.linalg.solve(blk, F[k] + mu_prev / dt)
        out[k] = uk
        mu_prev = Ms[k] @ uk
    return out


def _step_grad_div(sys: PdeSystem, F: np.ndarray, grid: TimeGrid) -> np.ndarray:
    """Implicit step for the (u-leg, flux-leg) systems; flux eliminated per
    node, leaving a tridiagonal solve on the u-leg."""
    m_x = sys.A.m_x
    g = staggered_grad0(m_x, sys.A.length)
    dx_inv = g[0, 0]
    dt = grid.dt
    n = grid.n
    out = np.empty((n, 2 * m_x + 1), dtype=complex)
    u_prev = np.zeros(m_x, dtype=complex)
    h_prev = np.zeros(m_x + 1, dtype=complex)
    m0p, m1p = sys.m0_profile, sys.m1_profile
    n0p, n1p = sys.n0_profile, sys.n1_profile
    m0_prev = np.asarray(m0p(grid.times[0] - dt), dtype=complex)
    m1_prev = np.asarray(m1p(grid.times[0] - dt), dtype=complex)
    for k, t in enumerate(grid.times):
        m0 = np.asarray(m0p(t), dtype=complex)
        m1 = np.asarray(m1p(t), dtype=complex)
        n0 = np.asarray(n0p(t), dtype=complex)
        n1 = np.asarray(n1p(t), dtype=complex)
        f0 = F[k, :m_x]
        f1 = F[k, m_x:]
        d1 = m1 / dt + n1
        if np.any(np.abs(d1) < 1e-300):
            raise ValueError("flux-leg coefficient vanishes; cannot eliminate")
        rhs1 = f1 + m1_prev * h_prev / dt
        # flux-leg: d1 * h + G u = rhs1  ->  h = (rhs1 - G u)/d1
        # u-leg: (m0/dt + n0) u - G^T h = f0 + m0_prev u_prev / dt
        w = 1.0 / d1
        off_l, diag, off_u = _laplacian_bands(g, w)
        diag = diag + m0 / dt + n0
        rhs0 = f0 + m0_prev * u_prev / dt + _gt_apply(w * rhs1, dx_inv)
        u = _tridiag_solve(off_l, diag, off_u, rhs0)
        h = (rhs1 - _g_apply(u, dx_inv)) * w
        out[k, :m_x] = u
        out[k, m_x:] = h
        u_prev, h_prev = u, h
        m0_prev, m1_prev = m0, m1
    return out


def _g_apply(u: np.ndarray, dx_inv: float) -> np.ndarray:
    """Staggered gradient: edge_i = (u_i - u_{i-1})/dx with zero boundary."""
    m = len(u)
    out = np.empty(m + 1, dtype=complex)
    out[0] = u[0]
    out[1:m] = u[1:] - u[:-1]
    out[m] = -u[-1]
    return out * dx_inv


def _gt_apply(h: np.ndarray, dx_inv: float) -> np.ndarray:
    """Transpose of the staggered gradient (minus the divergence)."""
    return (h[:-1] - h[1:]) * dx_inv


def _step_wave(sys: PdeSystem, F: np.ndarray, grid: TimeGrid) -> np.ndarray:
    """Velocity/strain stepping of the projected wave system.

    Internally integrates (v, q) with dq = pi grad0 v so that only a
    constant tridiagonal solve appears; the reported flux p = pi a pi* q is
    mean-zero by construction.
    """
    m_x = sys.A.m_x
    a = sys.wave_coefficient
    g = staggered_grad0(m_x, sys.A.length)
    dx_inv = g[0, 0]
    dt = grid.dt
    n = grid.n
    off_l, diag, off_u = _laplacian_bands(g, a)
    diag = diag * dt + 1.0 / dt
    off_l, off_u = off_l * dt, off_u * dt
    out = np.empty((n, 2 * m_x + 1), dtype=complex)
    v_prev = np.zeros(m_x, dtype=complex)
    q_prev = np.zeros(m_x + 1, dtype=complex)
    for k in range(n):
        fv = F[k, :m_x]
        # (1/dt + dt G^T a G) v_k = f + v_prev/dt - G^T a q_prev
        rhs = fv + v_prev / dt - _gt_apply(a * q_prev, dx_inv)
        v = _tridiag_solve(off_l, diag, off_u, rhs)
        q = q_prev + dt * _g_apply(v, dx_inv)
        p = mean_zero_project((a * q)[:, None])[:, 0]
        out[k, :m_x] = v
        out[k, m_x:] = p
        v_prev, q_prev = v, q
    return out


def solve_evo_pde(
    sys: PdeSystem,
    f: Signal,
    nu: float | None = None,
    tol: float = 1e-8,
    check_causality: bool = True,
    check_norm: bool = True,
) -> Signal:
    """Implicit causal step for (d/dt M + N + A) u = f.

    Asserts the accretive norm bound |u| <= (1/c)|f| with 5% discretization
    slack and a spot causality check (three cut times, using f itself as the
    probe) before returning.
    """
    grid = f.grid if nu is None else f.grid.with_nu(nu)
    nu = grid.nu
    _pde_check(sys, grid, nu)
    u_vals = _dispatch_step(sys, f.values, grid)
    u = Signal(grid, u_vals)
    if check_norm:
        bound = (1.0 / sys.c) * norm_nu(Signal(grid, f.values)) * 1.05
        if norm_nu(u) > bound + 1e-14:
            raise ValueError(
                f"norm bound violated: |u|={norm_nu(u):.4e} > (1/c)|f|*1.05={bound:.4e}"
            )
    if check_causality:
        span = grid.t_end - grid.t0
        for frac in (0.25, 0.5, 0.75):
            t_cut = grid.t0 + frac * span
            clipped = truncate_before(Signal(grid, f.values), t_cut)
            u_clip = Signal(grid, _dispatch_step(sys, clipped.values, grid))
            defect = norm_nu(truncate_before(u - u_clip, t_cut))
            if defect > 1e-10 * max(norm_nu(Signal(grid, f.values)), NORM_FLOOR):
                raise ValueError(f"causality defect {defect:.2e} at t={t_cut}")
    return u


def _dispatch_step(sys: PdeSystem, F: np.ndarray, grid: TimeGrid) -> np.ndarray:
    if sys.A.kind == "skew-matrix":
        return _step_skew_dense(sys, F, grid)
    if sys.A.kind == "grad0-div-1d":
        return _step_grad_div(sys, F, grid)
    if sys.A.kind == "grad0-div-1d-projected":
        return _step_wave(sys, F, grid)
    raise ValueError(f"unknown spatial kind {sys.A.kind}")


def evo_pde_solution_map(sys: PdeSystem, grid: TimeGrid):
    """Solution operator as a callable, with the per-call checks disabled
    (diagnostics run them on the map as a whole)."""
    def act(F: Signal) -> Signal:
        return Signal(grid, _dispatch_step(sys, F.values, grid))

    return act


# ---------------------------------------------------------------------------
# fundamental identity and continuity estimate
# ---------------------------------------------------------------------------

def funid_residual(
    M: Coefficient,
    N: Coefficient,
    O: Coefficient,
    P: Coefficient,
    A: SpatialOperator,
    f: Signal,
    nu: float,
    c: float,
) -> float:
    """Relative discrepancy between the two sides of the exchange identity

        (sol(M,N) - sol(O,P)) sol(O,P)^-1 J sol(O,P)
          = sol(M,N) ((O-M) + (O'-M') J + (P-N) J) sol(O,P)

    evaluated on f, J the causal integral.  Time derivatives of the
    coefficients enter as analytic data; for constant-in-time pairs the
    discrete identity is exact up to solver roundoff.
    """
    grid = f.grid.with_nu(nu)
    sys_mn = PdeSystem.dense_small(M, N, A, c)
    sys_op = PdeSystem.dense_small(O, P, A, c)
    sol_mn = evo_pde_solution_map(sys_mn, grid)
    sol_op = evo_pde_solution_map(sys_op, grid)

    fw = Signal(grid, f.values)
    u = sol_op(fw)
    ju = antiderivative(u)
    # y = B_OP J u  (forward operator applied to the smoothed state)
    O_mats = O.sample_all(grid)
    P_mats = P.sample_all(grid)
    M_mats = M.sample_all(grid)
    N_mats = N.sample_all(grid)
    o_ju = Signal(grid, np.einsum("kab,kb->ka", O_mats, ju.values))
    y = derivative(o_ju) + Signal(grid, np.einsum("kab,kb->ka", P_mats, ju.values))
    y = y + Signal(grid, ju.values @ A.dense().T)
    lhs = sol_mn(y) - sol_op(y)

    dM = O_mats - M_mats
    dN = P_mats - N_mats
    dMp = np.zeros_like(dM)
    if O.deriv_sampler is not None or M.deriv_sampler is not None:
        Od = O.sample_deriv_all(grid) if O.deriv_sampler is not None else np.zeros_like(O_mats)
        Md = M.sample_deriv_all(grid) if M.deriv_sampler is not None else np.zeros_like(M_mats)
        dMp = Od - Md
    inner = (
        np.einsum("kab,kb->ka", dM, u.values)
        + np.einsum("kab,kb->ka", dMp, ju.values)
        + np.einsum("kab,kb->ka", dN, ju.values)
    )
    rhs = sol_mn(Signal(grid, inner))

    denom = max(norm_nu(lhs), norm_nu(rhs), 1e-8 * max(norm_nu(ju), NORM_FLOOR))
    return norm_nu(lhs - rhs) / denom


# ---------------------------------------------------------------------------
# named physical systems
# ---------------------------------------------------------------------------

def maxwell_1d_solve(
    eps: Coefficient,
    mu: Coefficient,
    sigma: Coefficient,
    J: Signal,
    nu: float,
    m_x: int | None = None,
    length: float = 1.0,
    c: float = 1.0,
    check: bool = True,
) -> Signal:
    """Solve the 1D Maxwell block with Dirichlet condition on the E leg.

    J is the current density on the E leg; the returned signal stacks
    (E, H).  The damped-dielectricity inequalities (nu*eps + eps'/2 >= 0,
    nu*mu + mu'/2 and Re sigma >= c) are spot-checked at sampled times;
    eps = 0 is admissible (eddy-current regime).
    """
    m_x = J.dim if m_x is None else m_x
    grid = J.grid.with_nu(nu)
    for t in grid.times[:: max(1, grid.n // 11)]:
        e = complex(np.atleast_2d(eps.sampler(t))[0, 0])
        ed = 0.0 if eps.deriv_sampler is None else complex(
            np.atleast_2d(eps.deriv_sampler(t))[0, 0]
        )
        m = complex(np.atleast_2d(mu.sampler(t))[0, 0])
        md = 0.0 if mu.deriv_sampler is None else complex(
            np.atleast_2d(mu.deriv_sampler(t))[0, 0]
        )
        s = complex(np.atleast_2d(sigma.sampler(t))[0, 0])
        if (nu * e + 0.5 * ed).real < -1e-12:
            raise ValueError(f"dielectricity inequality fails at t={t}")
        if (nu * m + 0.5 * md).real < c - 1e-9:
            raise ValueError(f"permeability inequality fails at t={t}")
        # the E leg is accretive through damping and conduction combined, so
        # sigma = 0 is fine whenever nu*eps carries the constant
        if (nu * e + 0.5 * ed + s).real < c - 1e-9:
            raise ValueError(f"E-leg accretivity fails at t={t}")
    sys = PdeSystem.maxwell(eps, mu, sigma, m_x, length, c)
    F = np.zeros((grid.n, 2 * m_x + 1), dtype=complex)
    F[:, :m_x] = J.values
    out = _dispatch_step(sys, F, grid)
    if check:
        u = Signal(grid, out)
        nf = norm_nu(Signal(grid, F))
        if norm_nu(u) > (1.0 / c) * nf * 1.05 + 1e-14:
            raise ValueError("maxwell norm bound violated")
    return Signal(grid, out)


def heat_1d_solve(
    a_edge, f: Signal, nu: float, length: float = 1.0
) -> Signal:
    """Heat flow with edge-sampled conductivity; f drives the theta leg."""
    if isinstance(a_edge, Coefficient):
        a_edge = a_edge.diagonal_values()
    grid = f.grid.with_nu(nu)
    sys = PdeSystem.heat(a_edge, length, nu=nu)
    m_x = sys.A.m_x
    F = np.zeros((grid.n, 2 * m_x + 1), dtype=complex)
    F[:, :m_x] = f.values
    return Signal(grid, _dispatch_step(sys, F, grid))


def wave_1d_solve(
    a_edge, f: Signal, nu: float, length: float = 1.0
) -> Signal:
    """First-order wave system driven on the velocity leg; returns (v, p)."""
    if isinstance(a_edge, Coefficient):
        a_edge = a_edge.diagonal_values()
    grid = f.grid.with_nu(nu)
    sys = PdeSystem.wave(a_edge, length, nu=nu)
    m_x = sys.A.m_x
    F = np.zeros((grid.n, 2 * m_x + 1), dtype=complex)
    F[:, :m_x] = f.values
    return Signal(grid, _dispatch_step(sys, F, grid))


# ---------------------------------------------------------------------------
# elliptic divergence-form solve via the three-factor formula
# ---------------------------------------------------------------------------

def elliptic_solve(
    a_edge,
    f_nodes: np.ndarray,
    length: float = 1.0,
    cross_check_tol: float = 1e-8,
) -> np.ndarray:
    """Solve -(a u')' = f with zero boundary values in one dimension.

    Uses the factorization of the inverse into (projected gradient)^-1,
    (projected coefficient)^-1 and (projected divergence)^-1 and
    cross-checks against the direct three-point solve; the two must agree
    to `cross_check_tol` since the discrete factorization is exact.  The
    coefficient may be an edge-sampled array or a space-profile Coefficient.
    """
    if isinstance(a_edge, Coefficient):
        a_edge = a_edge.diagonal_values()
    a_edge = np.asarray(a_edge, dtype=complex)
    f_nodes = np.asarray(f_nodes, dtype=complex)
    m_x = len(f_nodes)
    if len(a_edge) != m_x + 1:
        raise ValueError("a must be sampled on the m_x+1 edges")
    alpha = float(np.min(a_edge.real))
    if alpha <= 0:
        raise ValueError(f"coefficient not uniformly positive: min Re a = {alpha}")
    g = staggered_grad0(m_x, length)

    # step 1: sigma = (-div pi*)^-1 f, the mean-zero edge field with G^T s = f
    gtg = g.T @ g
    y = np.linalg.solve(gtg, f_nodes)
    sigma = g @ y  # automatically mean-zero
    # step 2: w = (pi a pi*)^-1 sigma on the mean-zero subspace
    p = np.eye(m_x + 1) - np.full((m_x + 1, m_x + 1), 1.0 / (m_x + 1))
    pap = p @ np.diag(a_edge) @ p + np.full((m_x + 1, m_x + 1), 1.0 / (m_x + 1))
    w = np.linalg.solve(pap, sigma)
    w = w - w.mean()
    # step 3: u = (pi grad0)^-1 w
    u = np.linalg.solve(gtg, g.T @ w)

    direct = np.linalg.solve(g.T @ np.diag(a_edge) @ g, f_nodes)
    scale = max(float(np.linalg.norm(direct)), NORM_FLOOR)
    gap = float(np.linalg.norm(u - direct)) / scale
    if gap > cross_check_tol:
        raise ValueError(f"three-factor route disagrees with direct solve: {gap:.2e}")
    return u

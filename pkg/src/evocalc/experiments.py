"""Named certification experiments behind the command line.

Each run_* function takes a flat config dict (already validated by the CLI
layer or built from defaults), performs the experiment with fixed seeds, and
returns a ConvergenceReport whose rows carry the per-check verdicts.  The
acceptance test suite calls the same functions, so the CLI and pytest
certify identical computations.
"""

from __future__ import annotations

import numpy as np

from .signals import Coefficient, Signal, TimeGrid, norm_nu
from .timecalc import (
    antiderivative,
    apply_multiplier,
    derivative,
    MultiplierFunction,
    spectrum_of_antiderivative,
)
from .operators import (
    CausalOp,
    ProbeSet,
    causality_defect,
    nu_independence_defect,
    op_norm,
    transfer_function,
)
from .solvers import (
    OdeBlockSystem,
    PdeSystem,
    SpatialOperator,
    _solve_ode_block_neumann,
    _solve_ode_block_stepping,
    funid_residual,
    picard_solve,
    evo_pde_solution_map,
)
from .homogenization import (
    ConvergenceReport,
    dbf_experiment,
    eddy_current_experiment,
    heat_strong_continuity_experiment,
    memory_kernel_experiment,
    product_mean_limit,
    wave_g_convergence_experiment,
)
from . import causality_audit as audit

NORM_FLOOR = 1e-30

DEFAULTS = {
    "spectrum": {"nu": 0.5, "dt": 0.01, "n": 2048, "tol.circle": 1e-12, "tol.norm_slack": 0.02},
    "ode-block": {"nu": 20.0, "dt": 0.01, "n": 2001, "seed": 42,
                  "tol.routes": 1e-6, "tol.oracle_dt_mult": 2.0, "tol.bound_slack": 0.05},
    "picard": {"dt": 1e-3, "t_end": 2.0, "seed": 42, "tol.rel": 1e-3},
    "transfer": {"nu": 0.5, "dt": 1e-3, "t_end": 20.0, "tol.abs": 1e-3},
    "causality-suite": {"nu": 1.0, "dt": 0.01, "n": 3001, "seed": 42, "m_x": 16,
                        "tol.defect": 1e-10, "tol.anticausal_min": 0.1,
                        "tol.nu_indep_dt_mult": 10.0},
    "timprod": {"nu": 1.0, "scales": (8, 16, 32, 64), "seed": 42,
                "tol.pairing": 0.02, "tol.slope": -0.5},
    "dbf": {"nu": 2.0, "scales": (8, 16, 32, 64), "seed": 42,
            "tol.pairing": 0.02, "tol.slope": -0.5, "control": "harmonic"},
    "memory-kernel": {"nu": 2.0, "scales": (8, 16, 32, 64), "seed": 42,
                      "tol.pairing": 0.02, "tol.slope": -0.5},
    "eddy": {"scales": (8, 16, 32, 64), "eta_list": (1.0, 2.0), "seed": 42,
             "tol.slack": 0.10, "tol.slope": -0.9},
    "heat": {"nu": 1.0, "scales": (2, 4, 8, 16), "seed": 42, "m_x": 100,
             "tol.final": 0.02, "tol.ainv": 1e-10},
    "wave": {"nu": 1.0, "scales": (8, 16, 32, 64), "seed": 42,
             "tol.pairing": 0.05, "tol.slope": -0.5},
    "funid": {"nu": 1.0, "dt": 0.01, "n": 1001, "seed": 42,
              "tol.residual": 1e-6, "tol.trivial": 1e-12, "tol.bound_slack": 0.05},
}


def run_spectrum(cfg: dict) -> ConvergenceReport:
    """Spectral circle of the causal antiderivative plus its norm bound."""
    nu = cfg["nu"]
    grid = TimeGrid(0.0, cfg["dt"], int(cfg["n"]), nu)
    deviation, h_samples, dense_eigs = spectrum_of_antiderivative(grid)
    r = 1.0 / (2.0 * nu)
    rep = ConvergenceReport("spectrum", metadata={
        "nu": nu, "radius": r,
        "dense_eig_max_circle_dist": float(
            np.max(np.abs(np.abs(dense_eigs - r) - r))
        ),
    })
    rep.add_row(0, norm_error=deviation, bound_rhs=cfg["tol.circle"],
                verdict=deviation <= cfg["tol.circle"])
    # xi = 0 gives z = 1/nu: on-circle identity |1/nu - r| = r, bit exact
    z0 = 1.0 / nu
    rep.add_row(1, norm_error=abs(abs(z0 - r) - r), bound_rhs=1e-15,
                verdict=abs(abs(z0 - r) - r) <= 1e-15)
    # norm bound |J| <= 1/nu + slack on the long window
    long_grid = TimeGrid(0.0, 0.01, 3001, nu)
    est = op_norm(CausalOp.antiderivative_op(long_grid))
    bound = 1.0 / nu + cfg["tol.norm_slack"]
    rep.add_row(2, norm_error=est, bound_rhs=bound, verdict=est <= bound)
    return rep


def _random_accretive(rng, dim, base=1.0, spread=0.4):
    k = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    skew = 0.5 * (k - k.conj().T)
    return base * np.eye(dim) + spread * skew / max(np.linalg.norm(skew, 2), 1e-12)


def _random_bounded(rng, dim, norm=1.0):
    k = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    return k * (norm / np.linalg.norm(k, 2))


def run_ode_block(cfg: dict) -> ConvergenceReport:
    """Two-route agreement and the quantitative residual estimate."""
    rng = np.random.default_rng(cfg["seed"])
    rep = ConvergenceReport("ode-block", metadata={"seed": cfg["seed"]})

    # scalar closed form: du + u = 1_{[0,inf)} -> 1 - exp(-t)
    grid1 = TimeGrid(0.0, 0.01, 3001, 2.5)
    sys1 = OdeBlockSystem(M=Coefficient.constant([[1.0]], 1.0),
                          N00=Coefficient.constant([[1.0]]), c=1.0)
    F1 = Signal.indicator(grid1, 0.0, 1e9)
    u1 = Signal(grid1, _solve_ode_block_stepping(sys1, F1, grid1))
    oracle = 1.0 - np.exp(-np.maximum(grid1.times, 0.0))
    err = float(np.max(np.abs(u1.values[:, 0] - oracle)))
    bound = cfg["tol.oracle_dt_mult"] * grid1.dt
    rep.add_row(0, norm_error=err, bound_rhs=bound, verdict=err <= bound)

    # random bounded blocks at nu = 20, c = 1: route gap and theta bound
    nu = cfg["nu"]
    grid = TimeGrid(0.0, cfg["dt"], int(cfg["n"]), nu)
    m0 = m1 = 2
    sysb = OdeBlockSystem(
        M=Coefficient.constant(_random_accretive(rng, m0), 1.0),
        N00=Coefficient.constant(_random_bounded(rng, m0)),
        N01=Coefficient.constant(_random_bounded(rng, m0)),
        N10=Coefficient.constant(_random_bounded(rng, m1)),
        N11=Coefficient.constant(_random_accretive(rng, m1), 1.0),
        c=1.0,
    )
    F = Signal(grid, rng.standard_normal((grid.n, m0 + m1))
               + 1j * rng.standard_normal((grid.n, m0 + m1)))
    u_step = _solve_ode_block_stepping(sysb, F, grid)
    u_neum = _solve_ode_block_neumann(sysb, F, grid, nu, tol=cfg["tol.routes"])
    gap = norm_nu(Signal(grid, u_step - u_neum)) / max(
        norm_nu(Signal(grid, u_step)), NORM_FLOOR
    )
    rep.add_row(1, norm_error=gap, bound_rhs=cfg["tol.routes"],
                verdict=gap <= cfg["tol.routes"])

    # residual estimate: |B^-1 diag(d,1) - [[M^-1,0],[-N11^-1 N10 M^-1, N11^-1]]|
    ns = sysb.block_norms(grid)
    c0 = c1 = 1.0
    theta = (c1 * ns["N00"] + ns["N01"] * ns["N10"]) / (nu * c0 * c1)
    rhs_bound = (c1 * ns["N01"] + ns["N01"] * ns["N10"]) / (c0 * c1**2 * nu) + (
        theta / (1 - theta)
    ) * (
        1 / c0 + ns["N01"] / (c0 * c1 * nu) + ns["N10"] / (c0 * c1)
        + ns["N01"] * ns["N10"] / (c0 * c1**2 * nu)
    )
    M_mats = sysb.M.sample_all(grid)
    N10_m = sysb.N10.sample_all(grid)
    N11_m = sysb.N11.sample_all(grid)
    M_inv = np.linalg.inv(M_mats)
    N11_inv = np.linalg.inv(N11_m)
    probes = ProbeSet(grid, dim=m0 + m1, seed=cfg["seed"])
    observed = 0.0
    for phi in probes:
        lead = phi.values.copy()
        d0 = np.empty_like(lead[:, :m0])
        d0[0] = lead[0, :m0] / grid.dt
        d0[1:] = (lead[1:, :m0] - lead[:-1, :m0]) / grid.dt
        rhs_vals = np.concatenate([d0, lead[:, m0:]], axis=1)
        lhs_u = Signal(grid, _solve_ode_block_stepping(sysb, Signal(grid, rhs_vals), grid))
        top = np.einsum("kab,kb->ka", M_inv, phi.values[:, :m0])
        bot = np.einsum("kab,kb->ka", N11_inv, phi.values[:, m0:]) - np.einsum(
            "kab,kbc,kc->ka", N11_inv, np.einsum("kab,kbc->kac", N10_m, M_inv),
            phi.values[:, :m0],
        )
        ref = Signal(grid, np.concatenate([top, bot], axis=1))
        observed = max(
            observed,
            norm_nu(lhs_u - ref) / max(norm_nu(phi), NORM_FLOOR),
        )
    slack_bound = rhs_bound * (1 + cfg["tol.bound_slack"])
    rep.metadata["theta"] = theta
    rep.add_row(2, norm_error=observed, bound_rhs=slack_bound,
                verdict=observed <= slack_bound)
    return rep


def run_picard(cfg: dict) -> ConvergenceReport:
    """Fixed-point integrator against a staggered-lattice RK4 reference.

    The contraction solution lives on staggered cell midpoints (its
    cumulative sum is midpoint-exact there), so the fourth-order reference
    is evaluated at t_k + dt/2.
    """
    dt = cfg["dt"]
    grid = TimeGrid(0.0, dt, int(round(cfg["t_end"] / dt)) + 1, 1.0)
    t = grid.times
    amp, c0, s0 = 1.0, 0.75, 0.2

    def pulse(s):
        return amp * np.exp(-(((s - c0) / s0) ** 2))

    f_sig = Signal(grid, pulse(t))
    u = picard_solve(np.sin, 1.0, f_sig, tol=1e-12)
    y, s = 0.0, 0.0
    ref = np.empty(grid.n)
    for k in range(grid.n):
        target = t[k] + dt / 2
        h = target - s
        k1 = np.sin(y) + pulse(s)
        k2 = np.sin(y + h / 2 * k1) + pulse(s + h / 2)
        k3 = np.sin(y + h / 2 * k2) + pulse(s + h / 2)
        k4 = np.sin(y + h * k3) + pulse(s + h)
        y += h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        s = target
        ref[k] = y
    ref_sig = Signal(grid, ref)
    rel = norm_nu(Signal(grid, u.values) - ref_sig, nu=2.0) / norm_nu(ref_sig, nu=2.0)
    rep = ConvergenceReport("picard", metadata={"seed": cfg["seed"]})
    rep.add_row(0, norm_error=rel, bound_rhs=cfg["tol.rel"],
                verdict=rel <= cfg["tol.rel"])
    return rep


def run_transfer(cfg: dict) -> ConvergenceReport:
    """Symbol extraction for identity, causal integration, and delay."""
    grid = TimeGrid(0.0, cfg["dt"], int(round(cfg["t_end"] / cfg["dt"])) + 1, cfg["nu"])
    z_samples = [1.0 + 0.0j, 1.0 + 1.0j, 2.0 + 0.0j]
    cases = [
        ("identity", CausalOp.identity(grid), lambda z: 1.0),
        ("antiderivative", CausalOp.antiderivative_op(grid), lambda z: 1.0 / z),
        ("delay-1", CausalOp.shift_op(grid, -1.0), lambda z: np.exp(-z)),
    ]
    rep = ConvergenceReport("transfer", metadata={"z_samples": [str(z) for z in z_samples]})
    for idx, (name, S, truth) in enumerate(cases):
        ms = transfer_function(S, z_samples)
        err = max(abs(ms[i][0, 0] - truth(z)) for i, z in enumerate(z_samples))
        rep.add_row(idx, norm_error=err, bound_rhs=cfg["tol.abs"],
                    verdict=err <= cfg["tol.abs"])
        rep.metadata[name] = err
    return rep


def run_causality_suite(cfg: dict) -> ConvergenceReport:
    """All-cuts causality audit of every solution operator, the anti-causal
    control, and the weight-independence defects of the solver builders."""
    nu = cfg["nu"]
    seed = cfg["seed"]
    grid = TimeGrid(0.0, cfg["dt"], int(cfg["n"]), nu)
    m_x = int(cfg["m_x"])
    rng = np.random.default_rng(seed)
    t = grid.times
    rep = ConvergenceReport("causality-suite", metadata={"seed": seed})
    tol = cfg["tol.defect"]
    row = 0

    # ODE block with random constant blocks
    sysb = OdeBlockSystem(
        M=Coefficient.constant(_random_accretive(rng, 2), 1.0),
        N00=Coefficient.constant(_random_bounded(rng, 2)), c=1.0,
    )
    F2 = Signal(grid, np.column_stack([
        np.exp(-(((t - 3.0) / 0.8) ** 2)), np.exp(-(((t - 5.0) / 1.2) ** 2))
    ]))
    d = audit.audit_ode_block(sysb, F2, grid)
    rep.add_row(row, norm_error=d, bound_rhs=tol, verdict=d <= tol)
    rep.metadata["ode-block"] = d
    row += 1

    # heat, maxwell, wave on the reference window
    xi = np.linspace(0.0, 1.0, m_x + 2)[1:-1]
    xe = np.linspace(0.0, 1.0, m_x + 1)
    mode = np.sin(np.pi * xi)
    drive = np.exp(-(((t - 2.0) / 0.6) ** 2))
    F_state = np.zeros((grid.n, 2 * m_x + 1), dtype=complex)
    F_state[:, :m_x] = np.outer(drive, mode)
    a_edge = 1.0 + 0.5 * np.sin(2 * np.pi * xe)

    sys_heat = PdeSystem.heat(a_edge, nu=nu)
    d = audit.audit_pde(sys_heat, Signal(grid, F_state), grid)
    rep.add_row(row, norm_error=d, bound_rhs=tol, verdict=d <= tol)
    rep.metadata["heat"] = d
    row += 1

    eps = Coefficient.scalar_profile(lambda s: 1.0 + 0.25 * np.cos(s),
                                     deriv=lambda s: -0.25 * np.sin(s))
    one = Coefficient.scalar_profile(lambda s: 1.0, deriv=lambda s: 0.0)
    sys_max = PdeSystem.maxwell(eps, one, one, m_x)
    d = audit.audit_pde(sys_max, Signal(grid, F_state), grid)
    rep.add_row(row, norm_error=d, bound_rhs=tol, verdict=d <= tol)
    rep.metadata["maxwell"] = d
    row += 1

    sys_wave = PdeSystem.wave(2.0 + np.sin(2 * np.pi * xe), nu=nu)
    d = audit.audit_pde(sys_wave, Signal(grid, F_state), grid)
    rep.add_row(row, norm_error=d, bound_rhs=tol, verdict=d <= tol)
    rep.metadata["wave"] = d
    row += 1

    skew = np.array([[0.0, -1.0], [1.0, 0.0]])
    sys_skew = PdeSystem.dense_small(
        Coefficient.constant(np.eye(2), 1.0),
        Coefficient.constant(0.2 * np.eye(2)),
        SpatialOperator.skew_matrix(skew), c=1.0,
    )
    d = audit._audit_skew(sys_skew, Signal(grid, F2.values), grid)
    rep.add_row(row, norm_error=d, bound_rhs=tol, verdict=d <= tol)
    rep.metadata["skew-dbf"] = d
    row += 1

    d = audit.audit_picard(np.sin, 1.0, Signal(grid, drive))
    rep.add_row(row, norm_error=d, bound_rhs=tol, verdict=d <= tol)
    rep.metadata["picard"] = d
    row += 1

    # anti-causal control: shift by +5 dt must violate causality loudly
    probes = ProbeSet(grid, dim=1, seed=seed)
    S_bad = CausalOp.shift_op(grid, +5 * grid.dt)
    bad = causality_defect(S_bad, grid.t0 + 0.1 * (grid.t_end - grid.t0), probes)
    rep.add_row(row, norm_error=bad, bound_rhs=cfg["tol.anticausal_min"],
                verdict=bad > cfg["tol.anticausal_min"])
    rep.metadata["anticausal-control"] = bad
    row += 1

    # weight independence of the solver builders on compactly supported data.
    # Stepping engines are compared on the reference grid; the series and
    # multiplier routes use a window with nu * T moderate, because their
    # weighted-norm truncation tails blow up by exp(2 nu T) when re-measured
    # in the unweighted norm of a long window.
    nu_tol = cfg["tol.nu_indep_dt_mult"] * grid.dt
    probes_nu = ProbeSet(grid, dim=1, seed=seed)
    grid_short = TimeGrid(0.0, grid.dt, min(grid.n, 1001), nu)
    probes_short = ProbeSet(grid_short, dim=1, seed=seed)

    def stepping_builder(nu_b: float):
        sysn = OdeBlockSystem(M=Coefficient.constant([[1.0]], 1.0),
                              N00=Coefficient.constant([[0.5]]), c=1.0)

        def act(f: Signal) -> Signal:
            g = grid.with_nu(nu_b)
            return Signal(grid, _solve_ode_block_stepping(sysn, Signal(g, f.values), g))

        return CausalOp(grid=grid, action=act)

    def heat_builder(nu_b: float):
        sysh = PdeSystem.heat(a_edge, nu=nu_b)
        sol = evo_pde_solution_map(sysh, grid.with_nu(nu_b))

        def act(f: Signal) -> Signal:
            F = np.zeros((grid.n, 2 * m_x + 1), dtype=complex)
            F[:, :m_x] = np.outer(f.values[:, 0], mode)
            out = sol(Signal(grid.with_nu(nu_b), F))
            return Signal(grid, out.values[:, :1])

        return CausalOp(grid=grid, action=act)

    def neumann_builder(nu_b: float):
        g = grid_short.with_nu(nu_b)
        # N00 = 1/2 keeps the series contraction at both weights nu and 2 nu
        sys1 = OdeBlockSystem(M=Coefficient.constant([[1.0]], 1.0),
                              N00=Coefficient.constant([[0.5]]), c=1.0)

        def act(f: Signal) -> Signal:
            return Signal(grid_short,
                          _solve_ode_block_neumann(sys1, Signal(g, f.values), g, nu_b, 1e-10))

        return CausalOp(grid=grid_short, action=act)

    def multiplier_builder(nu_b: float):
        def act(f: Signal) -> Signal:
            g = Signal(grid_short.with_nu(nu_b), f.values)
            out = apply_multiplier(MultiplierFunction.scalar(lambda z: z), g)
            return Signal(grid_short, out.values)

        return CausalOp(grid=grid_short, action=act)

    # the multiplier route is certified on smooth interior probes only: the
    # exp(+nu t) undamping amplifies the spectral tail of non-smooth inputs
    cases = (
        ("stepping", stepping_builder, probes_nu),
        ("heat", heat_builder, probes_nu),
        ("neumann", neumann_builder, probes_short),
        ("multiplier", multiplier_builder, probes_short.smooth_only()),
    )
    for name, builder, pset in cases:
        defect = nu_independence_defect(builder, nu, 2 * nu, pset)
        rep.add_row(row, norm_error=defect, bound_rhs=nu_tol, verdict=defect <= nu_tol)
        rep.metadata[f"nu-indep-{name}"] = defect
        row += 1
    return rep


def run_timprod(cfg: dict) -> ConvergenceReport:
    profile = lambda y: np.sin(2 * np.pi * np.asarray(y))
    return product_mean_limit(
        [profile, profile], list(cfg["scales"]), nu=cfg["nu"], seed=cfg["seed"],
        tol=cfg["tol.pairing"], slope_max=cfg["tol.slope"],
    )


def run_dbf(cfg: dict) -> ConvergenceReport:
    eps = lambda y: 2.0 + np.sin(2 * np.pi * np.asarray(y))
    mu = lambda y: 2.0 + np.sin(2 * np.pi * np.asarray(y) + 1.0)
    A = np.array([[0.0, -1.0], [1.0, 0.0]])
    limit = None
    if cfg.get("control") == "arithmetic":
        limit = (2.0, 2.0)  # straw man: arithmetic means, must fail
    return dbf_experiment(
        eps, mu, A, list(cfg["scales"]), nu=cfg["nu"], seed=cfg["seed"],
        tol=cfg["tol.pairing"], slope_max=cfg["tol.slope"],
        limit_coefficients=limit,
    )


def run_memory_kernel(cfg: dict) -> ConvergenceReport:
    return memory_kernel_experiment(
        list(cfg["scales"]), nu=cfg["nu"], seed=cfg["seed"],
        tol=cfg["tol.pairing"], slope_max=cfg["tol.slope"],
    )


def run_eddy(cfg: dict) -> ConvergenceReport:
    def mk(n):
        c = Coefficient.scalar_profile(
            lambda t, n=n: (1.0 + 0.5 * np.cos(t)) / n,
            deriv=lambda t, n=n: -0.5 * np.sin(t) / n,
        )
        return (n, c, 1.5 / n, 0.5 / n)

    rep = eddy_current_experiment(
        [mk(n) for n in cfg["scales"]], eta_list=list(cfg["eta_list"]),
        seed=cfg["seed"], slack=cfg["tol.slack"],
    )
    slope = rep.slope("pairing_error")
    rep.metadata["slope"] = slope
    if rep.rows:
        rep.rows[-1]["verdict"] = bool(rep.rows[-1]["verdict"] and slope <= cfg["tol.slope"])
    return rep


def run_heat(cfg: dict) -> ConvergenceReport:
    m_x = int(cfg["m_x"])
    xe = np.linspace(0.0, 1.0, m_x + 1)
    base = 1.0 + 0.25 * np.sin(2 * np.pi * xe)
    family = [(k, base + (1.0 / k) * 0.5 * np.cos(2 * np.pi * xe)) for k in cfg["scales"]]
    rep = heat_strong_continuity_experiment(
        family, base, nu=cfg["nu"], seed=cfg["seed"], tol=cfg["tol.final"],
    )
    # Lemma-style constant of the inverted coefficient on sampled matrices
    rng = np.random.default_rng(cfg["seed"])
    worst_gap = 0.0
    for _ in range(20):
        k = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
        a = 1.0 * np.eye(3) + 0.4 * (k - k.conj().T) / np.linalg.norm(k, 2) \
            + 0.3 * (k + k.conj().T) / np.linalg.norm(k, 2)
        herm = 0.5 * (a + a.conj().T)
        c_a = float(np.linalg.eigvalsh(herm)[0])
        if c_a <= 0:
            continue
        norm_a = float(np.linalg.norm(a, 2))
        inv_herm = 0.5 * (np.linalg.inv(a) + np.linalg.inv(a).conj().T)
        low = float(np.linalg.eigvalsh(inv_herm)[0])
        worst_gap = max(worst_gap, (c_a / norm_a**2) - low)
    rep.metadata["ainv_constant_gap"] = worst_gap
    ok = worst_gap <= cfg["tol.ainv"]
    rep.add_row(999, norm_error=max(worst_gap, 0.0), bound_rhs=cfg["tol.ainv"], verdict=ok)
    return rep


def run_wave(cfg: dict) -> ConvergenceReport:
    profile = lambda y: 2.0 + np.sin(2 * np.pi * np.asarray(y))
    return wave_g_convergence_experiment(
        profile, list(cfg["scales"]), nu=cfg["nu"], seed=cfg["seed"],
        tol=cfg["tol.pairing"], slope_max=cfg["tol.slope"],
    )


def run_funid(cfg: dict) -> ConvergenceReport:
    rng = np.random.default_rng(cfg["seed"])
    nu = cfg["nu"]
    grid = TimeGrid(0.0, cfg["dt"], int(cfg["n"]), nu)
    t = grid.times
    A = SpatialOperator.skew_matrix(np.array([[0.0, -1.0], [1.0, 0.0]]))
    f = Signal(grid, np.column_stack([
        np.exp(-(((t - 2.0) / 0.5) ** 2)), np.exp(-(((t - 3.0) / 0.7) ** 2))
    ]))
    rep = ConvergenceReport("funid", metadata={"seed": cfg["seed"]})

    M = Coefficient.constant(_random_accretive(rng, 2, base=1.0), 0.7)
    N = Coefficient.constant(0.3 * _random_bounded(rng, 2))
    r0 = funid_residual(M, N, M, N, A, f, nu, c=0.5)
    rep.add_row(0, norm_error=r0, bound_rhs=cfg["tol.trivial"],
                verdict=r0 <= cfg["tol.trivial"])

    worst = 0.0
    systems = []
    for _ in range(3):
        Mi = Coefficient.constant(_random_accretive(rng, 2, base=1.0), 0.7)
        Ni = Coefficient.constant(0.3 * _random_bounded(rng, 2))
        Oi = Coefficient.constant(_random_accretive(rng, 2, base=1.0), 0.7)
        Pi = Coefficient.constant(0.3 * _random_bounded(rng, 2))
        worst = max(worst, funid_residual(Mi, Ni, Oi, Pi, A, f, nu, c=0.5))
        systems.append((Mi, Ni, Oi, Pi))
    rep.add_row(1, norm_error=worst, bound_rhs=cfg["tol.residual"],
                verdict=worst <= cfg["tol.residual"])

    # quantitative continuity estimate on probes with declared slack
    Mi, Ni, Oi, Pi = systems[0]
    c_pos = 0.6  # Re(nu M + N) >= 1 - 0.4/... conservative certified floor
    sys_mn = PdeSystem.dense_small(Mi, Ni, A, c_pos)
    sys_op = PdeSystem.dense_small(Oi, Pi, A, c_pos)
    sol_mn = evo_pde_solution_map(sys_mn, grid)
    sol_op = evo_pde_solution_map(sys_op, grid)
    O_m = Oi.sample_all(grid)
    P_m = Pi.sample_all(grid)
    M_m = Mi.sample_all(grid)
    N_m = Ni.sample_all(grid)
    A_d = A.dense()
    probes = ProbeSet(grid, dim=2, seed=cfg["seed"])

    def b_op(w: Signal) -> Signal:
        o_w = Signal(grid, np.einsum("kab,kb->ka", O_m, w.values))
        return derivative(o_w) + Signal(grid, np.einsum("kab,kb->ka", P_m, w.values)) \
            + Signal(grid, w.values @ A_d.T)

    lhs_best = rhs_m = rhs_n = 0.0
    for phi in probes:
        nphi = max(norm_nu(phi), NORM_FLOOR)
        u = sol_op(phi)
        ju = antiderivative(u)
        v = sol_mn(b_op(ju)) - ju
        lhs_best = max(lhs_best, norm_nu(v) / nphi)
        rhs_m = max(rhs_m, norm_nu(Signal(grid, np.einsum("kab,kb->ka", M_m - O_m, u.values))) / nphi)
        rhs_n = max(rhs_n, norm_nu(Signal(grid, np.einsum("kab,kb->ka", N_m - P_m, ju.values))) / nphi)
    bound = (1.0 / c_pos) * (rhs_m + rhs_n) * (1 + cfg["tol.bound_slack"])
    rep.add_row(2, norm_error=lhs_best, bound_rhs=bound, verdict=lhs_best <= bound)
    return rep


RUNNERS = {
    "spectrum": run_spectrum,
    "ode-block": run_ode_block,
    "picard": run_picard,
    "transfer": run_transfer,
    "causality-suite": run_causality_suite,
    "timprod": run_timprod,
    "dbf": run_dbf,
    "memory-kernel": run_memory_kernel,
    "eddy": run_eddy,
    "heat": run_heat,
    "wave": run_wave,
    "funid": run_funid,
}

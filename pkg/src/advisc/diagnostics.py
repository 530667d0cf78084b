"""Post-hoc analyses: error norms, entropy budget, total variation,
viscosity sign statistics, and the conservative/dissipative flux split.

Everything here is read-only over immutable trajectories, so analyses can
run concurrently on shared data.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grid import CellField, ExactProvider, FaceViscosity, HatProfile, SpaceTimeViscosity
from .schemes import SchemeConfig, Trajectory


def mse(field: CellField, exact: CellField) -> float:
    """Mean squared pointwise difference (1/N) * sum (u_i - e_i)^2."""
    if field.values.shape != exact.values.shape:
        raise ValueError("fields have mismatched shapes")
    diff = field.values - exact.values
    return float(np.mean(diff * diff))


def error_field(traj: Trajectory, exact_provider: ExactProvider) -> np.ndarray:
    """Pointwise errors u_i^n - u_exact(x_i, t^n), shape (n_steps + 1, n_cells)."""
    dt = traj.config.dt
    return np.stack(
        [s.values - exact_provider(n * dt).values for n, s in enumerate(traj.states)]
    )


@dataclass(frozen=True)
class EntropyReport:
    """Discrete quadratic-entropy series of a trajectory.

    total_entropy holds S^n = (1/2) * sum_i (u_i^n)^2 * dx for every recorded
    state; per_step_delta holds S^{n+1} - S^n. spatial_dissipation, when
    viscosity data is available, holds the face-viscosity channel

        D^n = sum_faces mu^n_{i+1/2} * ((u^n_{i+1} - u^n_i)/dx)^2 * dx,

    evaluated at the pre-step state. The temporal/truncation channel is not
    computed; it is derivable as delta + dissipation residual.
    """

    total_entropy: np.ndarray
    per_step_delta: np.ndarray
    spatial_dissipation: np.ndarray | None


def total_entropy(field: CellField) -> float:
    return 0.5 * float(np.sum(field.values**2)) * field.grid.dx


def entropy_report(traj: Trajectory, include_dissipation: bool | None = None) -> EntropyReport:
    """Entropy series of a trajectory; dissipation requires viscosity_history.

    ``include_dissipation = None`` includes the dissipation series exactly
    when the trajectory recorded its viscosities; forcing True without a
    recorded history is an error.
    """
    dx = traj.config.grid.dx
    arr = traj.array
    s = 0.5 * np.sum(arr * arr, axis=1) * dx
    deltas = np.diff(s)

    if include_dissipation is None:
        include_dissipation = traj.viscosity_history is not None
    dissipation = None
    if include_dissipation:
        if traj.viscosity_history is None:
            raise ValueError("trajectory has no viscosity_history; cannot compute dissipation")
        mu = traj.viscosity_history.values
        jumps = (np.roll(arr[:-1], -1, axis=1) - arr[:-1]) / dx
        dissipation = np.sum(mu * jumps * jumps, axis=1) * dx
    return EntropyReport(total_entropy=s, per_step_delta=deltas, spatial_dissipation=dissipation)


def total_variation(field: CellField) -> float:
    """Sum of |u_{i+1} - u_i| with periodic wrap; growth flags oscillation."""
    v = field.values
    return float(np.sum(np.abs(np.roll(v, -1) - v)))


@dataclass(frozen=True)
class MuStats:
    """Sign and localization statistics of a learned space-time viscosity."""

    min: float
    max: float
    fraction_negative: float
    negative_mass_near_discontinuity: float


def mu_stats(
    mu_st: SpaceTimeViscosity,
    traj: Trajectory,
    profile: HatProfile,
    radius: float,
) -> MuStats:
    """Extremes, negative fraction, and localization of negative viscosity.

    The localization score restricts attention to negative entries: per step,
    the |mu| mass of negative faces lying within ``radius`` of either moving
    hat edge (positions lo + c*t and hi + c*t mod length at the pre-step
    time) divided by the total negative |mu| mass; steps without negative
    entries are skipped, and the score is the average over the remaining
    steps (0.0 if no step has a negative entry).
    """
    if radius <= 0:
        raise ValueError("radius must be positive")
    cfg = traj.config
    length = cfg.grid.length
    faces = cfg.grid.face_positions
    values = mu_st.values

    ratios = []
    for n in range(mu_st.n_steps):
        row = values[n]
        neg = row < 0
        neg_mass = float(np.sum(np.abs(row[neg])))
        if neg_mass == 0.0:
            continue
        t = n * cfg.dt
        near = np.zeros(len(faces), dtype=bool)
        for edge in ((profile.lo + cfg.c * t) % length, (profile.hi + cfg.c * t) % length):
            d = np.abs(faces - edge) % length
            d = np.minimum(d, length - d)
            near |= d <= radius
        ratios.append(float(np.sum(np.abs(row[neg & near]))) / neg_mass)

    return MuStats(
        min=float(np.min(values)),
        max=float(np.max(values)),
        fraction_negative=float(np.mean(values < 0)),
        negative_mass_near_discontinuity=float(np.mean(ratios)) if ratios else 0.0,
    )


def ec_es_split(
    u: CellField, mu: FaceViscosity, cfg: SchemeConfig
) -> tuple[np.ndarray, np.ndarray]:
    """Split the numerical flux into conservative and dissipative parts.

    Per face: ec = c*(u_i + u_{i+1})/2 (the entropy-neutral central flux for
    a linear scalar) and es = (mu_{i+1/2}/dx)*(u_{i+1} - u_i), the scalar
    degenerate dissipative correction. The identity ec - es = ftcs_flux
    holds entrywise.
    """
    uv = u.values
    up = np.roll(uv, -1)
    ec = cfg.c * 0.5 * (uv + up)
    es = (mu.values / cfg.grid.dx) * (up - uv)
    return ec, es

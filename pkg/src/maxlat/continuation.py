"""Numerical continuation of a lone GH mode into a finite mechanism.

For a Maxwell lattice with a one-dimensional GH space and full-rank effective
tensor, the second-order strain and corrector are unique; Newton continuation
on the exactly rescaled length constraints then follows the mechanism through
finite deformations.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import HypothesesUnmet, NewtonDiverged, RangeExceeded, SingularSystem
from .lattice import PeriodicLattice
from .effective import SymStrain, effective_tensor, strain_basis, strain_extension_vector
from .mechanisms import MechanismPath, nonlinear_energy
from .rigidity import (
    assemble_compatibility,
    gh_modes,
    is_maxwell,
    self_stresses,
    translation_fields,
)
from .secondorder import quadratic_extension, strain_quadratic_term

DEFAULT_NEWTON_TOL = 1e-12
MAX_NEWTON_ITERS = 50


def _require_hypotheses(lat: PeriodicLattice, tol: float) -> None:
    maxwell, counts = is_maxwell(lat)
    if not maxwell:
        raise HypothesesUnmet(f"not a Maxwell lattice: {counts}")
    dim = gh_modes(lat, tol).dimension
    rank = effective_tensor(lat, tol).rank
    if dim != 1 or rank != 3:
        raise HypothesesUnmet(
            f"need GH dimension 1 and effective rank 3, got dimension {dim} "
            f"and rank {rank}"
        )


def solve_second_order_unique(
    lat: PeriodicLattice, phi1: np.ndarray, tol: float = 1e-9
) -> tuple[SymStrain, np.ndarray]:
    """Unique second-order strain and corrector continuing the mode phi1.

    The strain solves the 3x3 system pairing the length-weighted quadratic
    terms against a self-stress basis; the corrector is the minimum-norm
    second-order oscillation, orthogonal to translations and to phi1.
    Both scale quadratically with the normalization of phi1.
    """
    _require_hypotheses(lat, tol)
    phi1 = np.asarray(phi1, dtype=float).reshape(-1, 2)
    e = quadratic_extension(lat, phi1)
    stresses = self_stresses(lat, tol).stacked()
    lengths = lat.rest_lengths()
    sw = stresses / lengths[None, :]
    basis = strain_basis()
    m = np.column_stack(
        [2.0 * (stresses @ strain_extension_vector(lat, b)) for b in basis]
    )
    sing = np.linalg.svd(m, compute_uv=False)
    if sing[-1] < 1e-10 * max(sing[0], 1.0):
        raise SingularSystem(
            f"strain system is rank deficient (singular values {sing})"
        )
    coef = np.linalg.solve(m, -(sw @ e))
    xi2 = SymStrain.from_coords(
        coef[0] * basis[0].coords() + coef[1] * basis[1].coords()
        + coef[2] * basis[2].coords()
    )
    c = assemble_compatibility(lat).matrix
    lc = lengths[:, None] * c
    target = -(e + strain_quadratic_term(lat, xi2))
    phi2 = (np.linalg.pinv(lc, rcond=1e-12) @ (0.5 * target)).reshape(-1, 2)
    return xi2, phi2


class _SecondOrderSystem:
    """Rescaled length constraints plus gauge rows, and their Jacobian."""

    def __init__(self, lat: PeriodicLattice, phi1: np.ndarray):
        self.lat = lat
        self.n = lat.n_vertices
        self.phi1 = phi1
        self.dx = lat.edge_vectors()
        self.dphi1 = np.array([phi1[e.i] - phi1[e.j] for e in lat.edges])
        self.e = np.einsum("ri,ri->r", self.dphi1, self.dphi1)
        self.basis = [b.matrix() for b in strain_basis()]
        self.iidx = np.array([e.i for e in lat.edges])
        self.jidx = np.array([e.j for e in lat.edges])
        trans = translation_fields(self.n)
        self.gauge = np.vstack([trans, phi1.reshape(1, -1) / np.linalg.norm(phi1)])

    def _unpack(self, x):
        xi = sum(a * b for a, b in zip(x[:3], self.basis))
        phi2 = x[3:].reshape(-1, 2)
        dphi2 = phi2[self.iidx] - phi2[self.jidx]
        return xi, phi2, dphi2

    def residual(self, x, t):
        xi, phi2, dphi2 = self._unpack(x)
        xidx = self.dx @ xi.T
        w = xidx + dphi2
        g = (
            self.e
            + 2.0 * np.einsum("ri,ri->r", self.dx, xidx)
            + 2.0 * np.einsum("ri,ri->r", self.dx, dphi2)
            + 2.0 * t * np.einsum("ri,ri->r", self.dphi1, w)
            + t * t * np.einsum("ri,ri->r", w, w)
        )
        if t != 0.0:
            g = g + 2.0 / t * np.einsum("ri,ri->r", self.dx, self.dphi1)
        return np.concatenate([g, self.gauge @ x[3:]])

    def jacobian(self, x, t):
        xi, _, dphi2 = self._unpack(x)
        d = self.lat.n_edges
        w = self.dx @ xi.T + dphi2
        jac = np.zeros((d + 3, 3 + 2 * self.n))
        for m, em in enumerate(self.basis):
            dxe = self.dx @ em.T
            jac[:d, m] = 2.0 * (
                np.einsum("ri,ri->r", self.dx, dxe)
                + t * np.einsum("ri,ri->r", self.dphi1, dxe)
                + t * t * np.einsum("ri,ri->r", w, dxe)
            )
        grad = 2.0 * (self.dx + t * self.dphi1 + t * t * w)
        for r in range(d):
            i, j = self.iidx[r], self.jidx[r]
            jac[r, 3 + 2 * i : 5 + 2 * i] += grad[r]
            jac[r, 3 + 2 * j : 5 + 2 * j] -= grad[r]
        jac[d:, 3:] = self.gauge
        return jac


def _newton(system, x0, t, tol):
    x = x0.copy()
    res = system.residual(x, t)
    norm = float(np.max(np.abs(res)))
    for it in range(MAX_NEWTON_ITERS):
        if norm < tol:
            return x, norm, it
        try:
            step = np.linalg.solve(system.jacobian(x, t), -res)
        except np.linalg.LinAlgError as exc:
            raise NewtonDiverged(f"singular Jacobian at t={t}: {exc}") from None
        lam = 1.0
        for _ in range(12):
            trial = x + lam * step
            tres = system.residual(trial, t)
            tnorm = float(np.max(np.abs(tres)))
            if tnorm < norm or tnorm < tol:
                x, res, norm = trial, tres, tnorm
                break
            lam *= 0.5
        else:
            raise NewtonDiverged(f"no descent at t={t}, residual {norm}")
    if norm < tol:
        return x, norm, MAX_NEWTON_ITERS
    raise NewtonDiverged(f"residual {norm} after {MAX_NEWTON_ITERS} iterations at t={t}")


@dataclass(frozen=True)
class ContinuationResult:
    path: MechanismPath
    ts: np.ndarray
    xi2_of_t: tuple[SymStrain, ...]
    phi2_of_t: tuple[np.ndarray, ...]
    newton_iterations: tuple[int, ...]
    converged: bool
    max_energy: float


def continue_mechanism(
    lat: PeriodicLattice,
    phi1: np.ndarray,
    t_max: float,
    steps: int,
    tol: float = DEFAULT_NEWTON_TOL,
    force: bool = False,
) -> ContinuationResult:
    """Follow the mechanism started by phi1 over a symmetric t grid.

    phi1 is normalized to unit Euclidean norm; continuation marches outward
    from 0 in both directions, each Newton solve seeded by the previous
    state.  Accepted states satisfy every rescaled length constraint to tol.
    """
    if not force:
        _require_hypotheses(lat, 1e-9)
    phi1 = np.asarray(phi1, dtype=float).reshape(-1, 2)
    scale = float(np.linalg.norm(phi1))
    if scale == 0.0:
        raise HypothesesUnmet("phi1 vanishes")
    phi1 = phi1 / scale
    if t_max <= 0 or steps < 1:
        raise ValueError("need t_max > 0 and steps >= 1")
    xi2, phi2 = solve_second_order_unique(lat, phi1) if not force else _forced_seed(
        lat, phi1
    )
    system = _SecondOrderSystem(lat, phi1)
    x0 = np.concatenate([_strain_coeffs(xi2), phi2.reshape(-1)])

    states: dict[float, tuple[np.ndarray, float, int]] = {}
    res0 = system.residual(x0, 0.0)
    states[0.0] = (x0, float(np.max(np.abs(res0))), 0)
    grid = np.linspace(0.0, t_max, steps + 1)[1:]
    for direction in (+1.0, -1.0):
        x = x0
        for t in direction * grid:
            x, norm, iters = _newton(system, x, t, tol)
            states[float(t)] = (x, norm, iters)

    ts = np.array(sorted(states))
    xi2s, phi2s, iters_list = [], [], []
    frames = {}
    max_energy = 0.0
    ref = lat.vertices
    for t in ts:
        x, _, iters = states[float(t)]
        xi = sum(a * b.matrix() for a, b in zip(x[:3], strain_basis()))
        p2 = x[3:].reshape(-1, 2)
        xi2s.append(SymStrain.from_matrix(xi))
        phi2s.append(p2)
        iters_list.append(iters)
        f = np.eye(2) + t * t * xi
        pos = ref + t * phi1 + t * t * (ref @ xi.T + p2)
        frames[float(t)] = (f, pos)
        energy, _ = nonlinear_energy(lat, pos, f)
        max_energy = max(max_energy, energy)

    def frame(t):
        key = float(t)
        if key not in frames:
            match = [k for k in frames if math.isclose(k, key, abs_tol=1e-12)]
            if not match:
                raise RangeExceeded(f"t={t} is not a tabulated grid point")
            key = match[0]
        return frames[key]

    path = MechanismPath(
        "continued",
        {"t_max": t_max, "steps": steps},
        lat,
        (-t_max, t_max),
        t_max,
        frame,
    )
    return ContinuationResult(
        path, ts, tuple(xi2s), tuple(phi2s), tuple(iters_list), True, max_energy
    )


def _strain_coeffs(xi: SymStrain) -> np.ndarray:
    return np.array([xi.xx, xi.yy, math.sqrt(2.0) * xi.xy])


def _forced_seed(lat, phi1):
    try:
        return solve_second_order_unique(lat, phi1)
    except (HypothesesUnmet, SingularSystem):
        from .secondorder import necessary_condition_test

        verdict = necessary_condition_test(lat, phi1)
        phi2 = verdict.phi2 if verdict.phi2 is not None else np.zeros_like(phi1)
        return verdict.xi2, phi2


@dataclass(frozen=True)
class JacobianReport:
    sigma_min: float
    sigma_max: float
    condition: float
    invertible: bool


def jacobian_check(lat: PeriodicLattice, phi1: np.ndarray) -> JacobianReport:
    """Spectral report of the continuation Jacobian at the reference state."""
    _require_hypotheses(lat, 1e-9)
    phi1 = np.asarray(phi1, dtype=float).reshape(-1, 2)
    phi1 = phi1 / np.linalg.norm(phi1)
    xi2, phi2 = solve_second_order_unique(lat, phi1)
    system = _SecondOrderSystem(lat, phi1)
    x = np.concatenate([_strain_coeffs(xi2), phi2.reshape(-1)])
    jac = system.jacobian(x, 0.0)
    sing = np.linalg.svd(jac, compute_uv=False)
    smin, smax = float(sing[-1]), float(sing[0])
    return JacobianReport(smin, smax, smax / smin if smin > 0 else math.inf, smin > 1e-8 * smax)

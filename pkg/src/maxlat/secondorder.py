"""Second-order necessary condition: which GH modes can begin a mechanism.

A mode extends to second order iff its quadratic spring terms, corrected by
an affine second-order strain, land in the image of the compatibility map.
On standard-Kagome supercells this reduces to the consistency condition:
the quadratic part must sum to the same amount on every straight lattice
line within each of the three directions.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from functools import lru_cache

from .errors import ConsistencyFailed, NotAGHMode
from .lattice import PeriodicLattice, build_standard_kagome
from .rigidity import assemble_compatibility, kagome_lines, self_stresses
from .effective import SymStrain, strain_basis, strain_extension_vector
from .mechanisms import (
    one_periodic_infinitesimal_mode,
    two_periodic_infinitesimal_modes,
)

DEFAULT_PASS_TOL = 1e-8


def quadratic_extension(lat: PeriodicLattice, phi: np.ndarray) -> np.ndarray:
    """Per-edge quadratic terms |phi_i - phi_j|^2 of a periodic displacement."""
    phi = np.asarray(phi, dtype=float).reshape(-1, 2)
    out = np.empty(lat.n_edges)
    for r, e in enumerate(lat.edges):
        d = phi[e.i] - phi[e.j]
        out[r] = d @ d
    return out


def strain_quadratic_term(lat: PeriodicLattice, xi: SymStrain) -> np.ndarray:
    """Per-edge affine quadratic terms 2 l^2 b^T xi b."""
    return 2.0 * lat.rest_lengths() * strain_extension_vector(lat, xi)


@dataclass(frozen=True)
class SecondOrderVerdict:
    passes: bool
    xi2: SymStrain | None
    phi2: np.ndarray | None
    residual: float
    tol: float

    def to_dict(self) -> dict:
        d = {"passes": self.passes, "residual": self.residual, "tol": self.tol}
        d["xi2"] = None if self.xi2 is None else [self.xi2.xx, self.xi2.yy, self.xi2.xy]
        return d


def _check_gh(lat: PeriodicLattice, phi: np.ndarray, tol: float) -> np.ndarray:
    phi = np.asarray(phi, dtype=float).reshape(-1, 2)
    c = assemble_compatibility(lat).matrix
    ext = c @ phi.reshape(-1)
    scale = max(float(np.linalg.norm(phi)), 1e-300)
    if float(np.max(np.abs(ext))) > max(tol, 1e-6) * scale:
        raise NotAGHMode(
            f"first-order extensions reach {np.max(np.abs(ext))}, input is not "
            "in the kernel of the compatibility matrix"
        )
    return phi


def necessary_condition_test(
    lat: PeriodicLattice, phi1: np.ndarray, tol: float = DEFAULT_PASS_TOL
) -> SecondOrderVerdict:
    """Second-order extension test for a GH mode on any periodic lattice.

    Solves least-squares for the 3 components of the second-order strain so
    that the quadratic terms are orthogonal to every self-stress (weighted by
    inverse rest length); passes iff the residual is below tol * |e|.  On a
    pass, also returns the minimum-norm second-order corrector.
    """
    phi1 = _check_gh(lat, phi1, tol)
    e = quadratic_extension(lat, phi1)
    stresses = self_stresses(lat).stacked()
    lengths = lat.rest_lengths()
    sw = stresses / lengths[None, :]  # rows s_k^T L^{-1}
    basis = strain_basis()
    m = np.column_stack(
        [2.0 * (stresses @ strain_extension_vector(lat, b)) for b in basis]
    )
    rhs = -(sw @ e)
    coef, *_ = np.linalg.lstsq(m, rhs, rcond=None)
    residual = float(np.linalg.norm(m @ coef - rhs))
    scale = max(float(np.linalg.norm(e)), 1e-300)
    passes = residual <= tol * scale
    xi2 = SymStrain.from_coords(
        coef[0] * basis[0].coords() + coef[1] * basis[1].coords()
        + coef[2] * basis[2].coords()
    )
    phi2 = None
    if passes:
        c = assemble_compatibility(lat).matrix
        lc = lengths[:, None] * c
        target = -(e + strain_quadratic_term(lat, xi2))
        phi2 = (np.linalg.pinv(lc, rcond=1e-12) @ (0.5 * target)).reshape(-1, 2)
    return SecondOrderVerdict(passes, xi2, phi2, residual / scale, tol)


def consistency_condition_kagome(
    lat: PeriodicLattice, phi1: np.ndarray, tol: float = DEFAULT_PASS_TOL
) -> tuple[bool, dict]:
    """Line-sum form of the second-order test on a standard-Kagome supercell.

    Returns (passes, per-line sums keyed by direction).  Passes iff, in each
    of the three lattice directions, the quadratic part of the mode sums to
    the same amount on every line (spread below tol * |e|).
    """
    phi1 = _check_gh(lat, phi1, tol)
    e = quadratic_extension(lat, phi1)
    lines = kagome_lines(lat).lines
    scale = max(float(np.linalg.norm(e)), 1e-300)
    sums: dict[str, list[float]] = {}
    passes = True
    for key, groups in lines.items():
        vals = [float(np.sum(e[g])) for g in groups]
        sums[key] = vals
        if max(vals) - min(vals) > tol * scale:
            passes = False
    return passes, sums


def solve_xi2_from_line_sums(phi1: np.ndarray, lat: PeriodicLattice) -> SymStrain:
    """Second-order strain from the three directional sums of the quadratic part.

    Requires the consistency condition; the three directional averages pin
    b^T xi b along the three lattice directions, which determines xi.
    """
    passes, _ = consistency_condition_kagome(lat, phi1)
    if not passes:
        raise ConsistencyFailed("mode fails the consistency condition")
    e = quadratic_extension(lat, phi1)
    lines = kagome_lines(lat).lines
    rays = {}
    for key, groups in lines.items():
        idx = [r for g in groups for r in g]
        rays[key] = -float(np.sum(e[idx])) / (2.0 * len(idx))
    m0, m60, m120 = rays["0"], rays["60"], rays["120"]
    xx = m0
    yy = (2.0 * (m60 + m120) - xx) / 3.0
    xy = (m60 - m120) / np.sqrt(3.0)
    return SymStrain(xx, yy, xy)


def tangent_cone_matrix() -> np.ndarray:
    """Cross-term system coupling the one-periodic mode to the two-periodic axes.

    Row per lattice direction; the entry for axis mode m is the difference of
    the two line sums of <d psi1, d mode_m> in that direction.  A combination
    psi1 + sum a_m mode_m stays consistent only where the system vanishes.
    """
    lat_ref = _standard_2x2()
    lines = kagome_lines(lat_ref).lines
    psi1 = one_periodic_infinitesimal_mode(2, 2)
    axes = two_periodic_infinitesimal_modes()
    rows = []
    for key in ("0", "60", "120"):
        g0, g1 = lines[key]
        row = []
        for mode in axes:
            cross = _edge_cross_terms(lat_ref, psi1, mode)
            row.append(float(np.sum(cross[g0]) - np.sum(cross[g1])))
        rows.append(row)
    return np.array(rows)


def two_periodic_tangent_cone_test(a1: float, a2: float, a3: float) -> tuple[bool, np.ndarray]:
    """Does psi1 + a1 m1 + a2 m2 + a3 m3 keep the consistency condition?"""
    m = tangent_cone_matrix()
    ok = bool(np.max(np.abs(m @ np.array([a1, a2, a3]))) < 1e-9)
    return ok, m


def _edge_cross_terms(lat, u, v) -> np.ndarray:
    out = np.empty(lat.n_edges)
    for r, e in enumerate(lat.edges):
        out[r] = (u[e.i] - u[e.j]) @ (v[e.i] - v[e.j])
    return out


@lru_cache(maxsize=1)
def _standard_2x2():
    return build_standard_kagome(2, 2)

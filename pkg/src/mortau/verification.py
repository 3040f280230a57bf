"""Executable checks of the structural identities behind the reducers.

Four check families, each returning a ``TheoremCheckResult``:

* moment identities — quadrature vs closed form for the three rank-one
  inner-product identities of the horizon norm;
* tangential error formulas — direct vs closed-form interpolation
  deviations (right, left, and both bi-tangential decompositions);
* subspace equivalence — principal angles between the converged
  fixed-point spans and the spans of the finite-horizon Sylvester
  solutions, solved here by an independent dense method;
* residual trend — converged optimality residuals shrink when the
  horizon does.
"""

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from .linalg import matrix_exponential
from .metrics import (
    optimality_residuals,
    prop1_derivative_identity,
    prop1_inner_product_identity,
    prop1_norm_identity,
)
from .projection import (
    InterpolationData,
    build_time_limited_spaces,
    petrov_galerkin,
    verify_interpolation_errors,
)
from .reducers import lt_irka
from .systems import StateSpaceSystem

__all__ = [
    "TheoremCheckResult",
    "check_moment_identities",
    "check_residual_trend",
    "check_subspace_equivalence",
    "check_tangential_error_formulas",
    "random_conjugate_data",
    "random_stable_system",
    "synthetic_suite",
]


@dataclass(frozen=True)
class TheoremCheckResult:
    """Outcome of one structural check."""

    theorem_id: str
    instance_description: str
    max_relative_discrepancy: float
    tolerance_used: float

    @property
    def passed(self):
        return self.max_relative_discrepancy <= self.tolerance_used

    def __str__(self):
        word = "pass" if self.passed else "FAIL"
        return (
            f"[{word}] {self.theorem_id}: {self.instance_description} "
            f"(max discrepancy {self.max_relative_discrepancy:.3e}, "
            f"tolerance {self.tolerance_used:.1e})"
        )


def random_stable_system(n, m=1, p=1, seed=0, margin=0.5, label=""):
    """Dense random system shifted to have spectral abscissa -margin."""
    rng = np.random.default_rng(seed)
    a = rng.standard_normal((n, n))
    a -= (np.max(np.linalg.eigvals(a).real) + margin) * np.eye(n)
    b = rng.standard_normal((n, m))
    c = rng.standard_normal((p, n))
    return StateSpaceSystem(a, b, c, label=label or f"random[{n},{m},{p},seed={seed}]")


def synthetic_suite(seed=0, sizes=(8, 12, 16, 20, 24, 28, 32)):
    """Fixed seeded systems, alternating SISO and 2x2 MIMO, plus extras."""
    systems = []
    for k, n in enumerate(sizes):
        mp = 1 if k % 2 == 0 else 2
        systems.append(random_stable_system(n, mp, mp, seed=seed + k))
    for k, n in enumerate((10, 18, 26)):
        systems.append(random_stable_system(n, 2, 2, seed=seed + 100 + k))
    return systems[:10]


def check_moment_identities(system, mu, b, c, tau, tol=1e-7):
    """Quadrature vs closed form for all three rank-one identities."""
    discrepancies = []
    lhs, rhs = prop1_inner_product_identity(system, mu, b, c, tau)
    discrepancies.append(abs(lhs - rhs) / (1.0 + abs(lhs)))
    lhs_n, rhs_n = prop1_norm_identity(b, c, mu, tau)
    discrepancies.append(abs(lhs_n - rhs_n) / (1.0 + abs(lhs_n)))
    lhs_d, rhs_d = prop1_derivative_identity(system, mu, b, c, tau)
    discrepancies.append(abs(lhs_d - rhs_d) / (1.0 + abs(lhs_d)))
    return TheoremCheckResult(
        theorem_id="moment-identities",
        instance_description=f"{system.label or 'system'}, mu={mu:.3g}, tau={tau:g}",
        max_relative_discrepancy=float(max(discrepancies)),
        tolerance_used=tol,
    )


def check_tangential_error_formulas(system, data, tau, tol=1e-8):
    """Closed-form interpolation-error expressions vs direct differences."""
    pair = build_time_limited_spaces(system, data, tau)
    model = petrov_galerkin(system, pair)
    checks = verify_interpolation_errors(system, model, pair, data, tau)
    worst = max(chk.max_discrepancy() for chk in checks)
    return TheoremCheckResult(
        theorem_id="tangential-error-formulas",
        instance_description=(
            f"{system.label or 'system'}, r={data.order}, tau={tau:g}"
        ),
        max_relative_discrepancy=float(worst),
        tolerance_used=tol,
    )


def _span(matrix):
    q, _ = np.linalg.qr(matrix)
    return q


def check_subspace_equivalence(system, order, tau, tol_angle=1e-6, seed=None,
                               tol=1e-8, max_iter=200):
    """Principal angles between converged Krylov spans and Sylvester spans.

    The fixed-point reduction is run to convergence; the Sylvester
    equations for its final reduced matrices are then solved with a dense
    Bartels-Stewart method (an independent route), and the spans are
    compared through principal angles.
    """
    model, _ = lt_irka(system, order, tau, tol=tol, max_iter=max_iter, seed=seed)
    data = InterpolationData.from_reduced_model(model)
    pair = build_time_limited_spaces(system, data, tau)

    a, b, c = system.a, system.b, system.c
    ah, bh, ch = model.a, model.b, model.c
    exp_at = matrix_exponential(a * tau)
    exp_aht = matrix_exponential(ah * tau)
    rhs_p = exp_at @ b @ bh.T @ exp_aht.T - b @ bh.T
    p = sla.solve_sylvester(a, ah.T, rhs_p)
    rhs_q = exp_at.T @ c.T @ ch @ exp_aht - c.T @ ch
    q = sla.solve_sylvester(a.T, ah, rhs_q)

    if order == system.order:
        angles = np.zeros(1)
    else:
        angles = np.concatenate(
            [
                sla.subspace_angles(pair.v, _span(p)),
                sla.subspace_angles(pair.w, _span(q)),
            ]
        )
    return TheoremCheckResult(
        theorem_id="subspace-equivalence",
        instance_description=f"{system.label or 'system'}, r={order}, tau={tau:g}",
        max_relative_discrepancy=float(np.max(angles)),
        tolerance_used=tol_angle,
    )


def check_residual_trend(system, order, tau_small, tau_large, seed=None,
                         tol=1e-5, max_iter=200, margin=10.0):
    """Converged residuals at a short horizon sit well below a long one.

    Passes when the worst optimality residual of the short-horizon model is
    at least ``margin`` times smaller than that of the long-horizon model;
    identical horizons pass vacuously.
    """
    description = f"{system.label or 'system'}, r={order}, tau {tau_small:g} vs {tau_large:g}"
    if tau_small == tau_large:
        return TheoremCheckResult(
            theorem_id="residual-trend",
            instance_description=description + " (identical horizons)",
            max_relative_discrepancy=0.0,
            tolerance_used=1.0 / margin,
        )
    model_s, _ = lt_irka(system, order, tau_small, tol=tol, max_iter=max_iter, seed=seed)
    model_l, _ = lt_irka(system, order, tau_large, tol=tol, max_iter=max_iter, seed=seed)
    worst_s = max(optimality_residuals(system, model_s, tau_small).summary())
    worst_l = max(optimality_residuals(system, model_l, tau_large).summary())
    ratio = worst_s / worst_l if worst_l > 0 else np.inf
    return TheoremCheckResult(
        theorem_id="residual-trend",
        instance_description=description,
        max_relative_discrepancy=float(ratio),
        tolerance_used=1.0 / margin,
    )


def random_conjugate_data(order, n_inputs, n_outputs, seed=0, modulus_range=(0.3, 3.0)):
    """Conjugate-closed interpolation data with moderate shift magnitudes.

    Unlike driver initialization this draws complex directions, exercising
    the general realification path; magnitudes are kept moderate so the
    interpolation deviations stay far above roundoff.
    """
    rng = np.random.default_rng(seed)
    n_pairs, n_real = divmod(order, 2)
    lo, hi = modulus_range
    shifts, right, left = [], [], []
    for _ in range(n_pairs):
        sigma = rng.uniform(lo, hi) * np.exp(1j * rng.uniform(0.15, 1.2))
        b_dir = rng.standard_normal(n_inputs) + 1j * rng.standard_normal(n_inputs)
        c_dir = rng.standard_normal(n_outputs) + 1j * rng.standard_normal(n_outputs)
        shifts += [sigma, sigma.conjugate()]
        right += [b_dir, b_dir.conjugate()]
        left += [c_dir, c_dir.conjugate()]
    for _ in range(n_real):
        shifts.append(complex(rng.uniform(lo, hi)))
        right.append(rng.standard_normal(n_inputs).astype(complex))
        left.append(rng.standard_normal(n_outputs).astype(complex))
    return InterpolationData(np.array(shifts), np.array(right), np.array(left))

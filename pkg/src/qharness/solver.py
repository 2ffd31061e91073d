"""Inverse problem: construct a process family with prescribed harness parameters.

Four-parameter track (sigma = tau, gamma = 1 - 2 sigma): the signs of
eta**2 - 4 sigma and theta**2 - 4 sigma select one of three closed-form
solutions (two conjugate pairs, one pair, all real). Each leaves one real
parameter free; it corresponds to a translation of the time domain and does
not change the standardized process.

Infeasibility is reported relative to the sufficient conditions under which
these closed forms are valid; it does not assert that no harness exists.
"""
from dataclasses import dataclass, field
import math

from .densities import ParameterError
from .processes import Dirichlet, FourParam, ThreeParam, TwoParam
from .standardize import HarnessParams, harness_params

__all__ = [
    "InfeasibleError",
    "SignConventionError",
    "SolveRequest",
    "SolveResult",
    "solve",
    "solve_four",
    "solve_three",
    "solve_two",
    "solve_dirichlet",
    "four_constraint_residuals",
    "round_trip_residual",
]

DEFAULT_IMAG_CAP = 1e8
TRACKS = ("four", "three", "two", "dirichlet")


class InfeasibleError(ValueError):
    """No construction under the stated sufficient condition.

    ``condition`` holds the violated condition as text.
    """

    def __init__(self, message, condition):
        super().__init__(message)
        self.condition = condition


class SignConventionError(InfeasibleError):
    """eta + theta <= 0: negate both (the harness -X_t) and solve again."""


@dataclass(frozen=True)
class SolveRequest:
    track: str
    eta: float = 0.0
    theta: float = 0.0
    sigma: float = 0.0

    def __post_init__(self):
        if self.track not in TRACKS:
            raise ParameterError(f"track must be one of {TRACKS}")

    def target(self):
        """Harness parameters the request asks for."""
        if self.track == "three":
            return HarnessParams(self.eta, self.theta, 0.0, 1.0, 1.0)
        s = self.sigma
        if self.track == "two":
            return HarnessParams(self.eta, -self.eta, s, s, 1 - 2 * s)
        if self.track == "dirichlet":
            return HarnessParams(-2 * math.sqrt(s), 2 * math.sqrt(s), s, s, 1 - 2 * s)
        return HarnessParams(self.eta, self.theta, s, s, 1 - 2 * s)


@dataclass(frozen=True)
class SolveResult:
    family: object
    case_label: str
    free_choice: dict = field(default_factory=dict)


def _check_sigma(sigma):
    if not 0 < sigma < 1:
        raise ParameterError(f"sigma in (0, 1) violated ({sigma:g})")


def solve_four(eta, theta, sigma, cap=DEFAULT_IMAG_CAP):
    """A, B, C, D with harness parameters (eta, theta, sigma, sigma, 1 - 2 sigma).

    The parameters grow like 1/(eta + theta); solutions with an entry larger
    than ``cap`` in modulus are reported as infeasible.
    """
    res = _solve_four(eta, theta, sigma)
    big = max(abs(v) for v in res.family.params().values())
    if big > cap:
        raise InfeasibleError(f"parameter modulus {big:g} exceeds the cap {cap:g} "
                              f"(eta + theta = {eta + theta:g} too close to 0)", "eta + theta > 0")
    return res


def _solve_four(eta, theta, sigma):
    _check_sigma(sigma)
    if not eta + theta > 0:
        raise SignConventionError(
            f"eta + theta = {eta + theta:g} <= 0; negate eta and theta (the process -X_t)",
            "eta + theta > 0")
    k = (1 - sigma) / ((eta + theta) * sigma)
    e = eta * eta - 4 * sigma
    f = theta * theta - 4 * sigma
    if e < 0 and f < 0:
        re_a = (1 - sigma) / (4 * sigma)
        im_a = k * math.sqrt(-e) / 2
        re_c = (1 - sigma) / (2 * sigma) - re_a
        im_c = k * math.sqrt(-f) / 2
        fam = FourParam(complex(re_a, im_a), complex(re_a, -im_a),
                        complex(re_c, im_c), complex(re_c, -im_c))
        return SolveResult(fam, "Hyperbolic", {"Re(A)": re_a})
    if e < 0 <= f:
        return _solve_mixed(eta, theta, sigma, k, swap=False)
    if f < 0 <= e:
        return _solve_mixed(theta, eta, sigma, k, swap=True)
    se, sf = math.sqrt(e), math.sqrt(f)
    if not eta + theta > se + sf:
        raise InfeasibleError(
            f"real case needs eta + theta > sqrt(eta^2 - 4 sigma) + sqrt(theta^2 - 4 sigma) "
            f"({eta + theta:g} <= {se + sf:g})",
            "eta + theta > sqrt(eta^2 - 4 sigma) + sqrt(theta^2 - 4 sigma)")
    sup = (eta + theta - se - sf) * k / 2
    a = sup / 2
    c = sup - a
    fam = FourParam(a, a + se * k, c, c + sf * k)
    return SolveResult(fam, "Real", {"A": a})


def _solve_mixed(eta, theta, sigma, k, swap):
    # one conjugate pair A = conj(B) built from eta; swap=True exchanges the
    # roles of (A, B) and (C, D), which exchanges eta and theta
    if not 4 * sigma + eta * eta + 2 * eta * theta > 0:
        if swap:
            cond = "4 sigma + theta^2 + 2 eta theta > 0"
        else:
            cond = "4 sigma + eta^2 + 2 eta theta > 0"
        raise InfeasibleError(f"mixed case needs {cond}", cond)
    sf = math.sqrt(theta * theta - 4 * sigma)
    sup = (eta + theta - sf) * k / 2
    re_a = sup / 2
    im_a = k * math.sqrt(4 * sigma - eta * eta) / 2
    c = sup - re_a
    d = c + sf * k
    pair = (complex(re_a, im_a), complex(re_a, -im_a))
    if swap:
        fam = FourParam(c, d, *pair)
        return SolveResult(fam, "Mixed", {"Re(C)": re_a})
    fam = FourParam(*pair, c, d)
    return SolveResult(fam, "Mixed", {"Re(A)": re_a})


def solve_three(eta, theta):
    """A, B, C with harness parameters (eta, theta, 0, 1, 1)."""
    if not (eta > 0 and theta > 0):
        raise InfeasibleError("three-parameter track needs eta > 0 and theta > 0 "
                              "(negate both for the process -X_t)", "eta > 0, theta > 0")
    # p = A + B and q = A + C are the roots of z^2 - (theta/eta) z + 1/eta^2
    half = theta / (2 * eta)
    disc = half * half - 1 / eta ** 2
    if disc >= 0:
        root = math.sqrt(disc)
        p, q = complex(half + root), complex(half - root)
    else:
        root = math.sqrt(-disc)
        p, q = complex(half, root), complex(half, -root)
    a = q.real / 2
    b, c = p - a, q - a
    if disc >= 0:
        b, c = b.real, c.real
    return SolveResult(ThreeParam(a, b, c), "ThreeParam", {"A": a})


def solve_two(eta, sigma, cap=DEFAULT_IMAG_CAP):
    """A, B with harness parameters (eta, -eta, sigma, sigma, 1 - 2 sigma)."""
    _check_sigma(sigma)
    if not eta * eta < 4 * sigma:
        raise InfeasibleError(f"eta in (-2 sqrt(sigma), 2 sqrt(sigma)) violated ({eta:g})",
                              "eta in (-2 sqrt(sigma), 2 sqrt(sigma))")
    r = (1 - sigma) / (2 * sigma)
    i = eta * r / math.sqrt(4 * sigma - eta * eta)
    if abs(i) > cap:
        raise InfeasibleError(f"Im(A - B) = {i:g} exceeds the cap {cap:g}",
                              "eta in (-2 sqrt(sigma), 2 sqrt(sigma))")
    fam = TwoParam(complex(r / 2, i / 2), complex(r / 2, -i / 2))
    return SolveResult(fam, "TwoParam", {"Re(A)": r / 2})


def solve_dirichlet(sigma):
    """A with sigma = tau = 1/(1 + A)."""
    _check_sigma(sigma)
    return SolveResult(Dirichlet(1 / sigma - 1), "Dirichlet", {})


def solve(req):
    if req.track == "four":
        return solve_four(req.eta, req.theta, req.sigma)
    if req.track == "three":
        return solve_three(req.eta, req.theta)
    if req.track == "two":
        return solve_two(req.eta, req.sigma)
    return solve_dirichlet(req.sigma)


def four_constraint_residuals(fam, eta, theta, sigma):
    """Residuals of the sum, product and difference equations.

    Each is relative to the size of the terms that are added, so the
    cancellation in (C - D)**2 - (A - B)**2 for large conjugate pairs is
    not counted as an error.
    """
    A, B, C, D = fam.A, fam.B, fam.C, fam.D
    prod = (A + C) * (B + C) * (A + D) * (B + D)
    rows = [
        (A + B + C + D, (1 - sigma) / sigma, sum(abs(v) for v in (A, B, C, D))),
        (prod, (1 - sigma) ** 4 / ((eta + theta) ** 2 * sigma ** 3), abs(prod)),
        ((C - D) ** 2 - (A - B) ** 2, (theta - eta) * (1 - sigma) ** 2 / ((eta + theta) * sigma ** 2),
         abs(C - D) ** 2 + abs(A - B) ** 2),
    ]
    return [abs(lhs - rhs) / max(1.0, abs(rhs), scale) for lhs, rhs, scale in rows]


def round_trip_residual(result, req):
    """Largest deviation between recomputed and requested harness parameters."""
    got = harness_params(result.family).as_tuple()
    want = req.target().as_tuple()
    return max(abs(g - w) / max(1.0, abs(w)) for g, w in zip(got, want))

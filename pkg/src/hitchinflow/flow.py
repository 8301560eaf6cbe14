"""Hitchin flow integration in invariant coefficient space.

Two flows are implemented on a registered homogeneous space:

* the generic cocalibrated flow  d/dt *phi_t = d phi_t  for an invariant
  G2/G2* structure, advanced by solving the star-coefficient Jacobian;

* the degenerate line-bundle flow for split data phi = f omega ^ e^phi
  + rho on the distribution Ann(e^phi), with the two equations

      (dw/dt) ^ omega = pi(d rho) + f omega ^ d e^phi
      d/dt (f J*rho)  = L_{e_phi} rho - pi(df) ^ omega - f pi(d omega)

  (df = 0 in the invariant setting).  The integrator advances the pair
  (omega, S) with S = f J*rho, which evolves by the second equation as a
  whole; the split of S into f and s = J*rho is re-derived at every
  evaluation from the structure normalization J*r ^ r = (2/3) omega^3
  applied to r = -J_S* S.  This keeps |s|_g constant by construction of
  the geometry rather than by fiat, and makes first-order seeding of the
  singular startup second-order accurate in the state variables.

The system is singular at f = 0; trajectories start from a small-time
Taylor seed at t = epsilon and a Richardson check over epsilon vs
epsilon/2 guards the seeding error.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from . import stable
from .errors import (
    NonpositiveF,
    NotProportional,
    PreconditionFailed,
    SingularJacobian,
    StepFailure,
    UnstableForm,
)
from .forms import KForm, embed, form_pairing, interior, pullback, restrict, wedge
from .g2spin7 import BundleSplitData, bundle_Phi, seven_structure
from .homogeneous import HomogeneousSpace, invariant_basis, space

__all__ = [
    "FlowConfig",
    "DegenerateProblem",
    "GenericProblem",
    "DegenerateFlowState",
    "GenericFlowState",
    "Trajectory",
    "SmoothnessResult",
    "n11_problem",
    "flat7_problem",
    "smoothness_check",
    "startup_seed",
    "mirror_seed",
    "degenerate_rhs",
    "generic_rhs",
    "cocal_residual",
    "integrate",
    "torsion_residual",
    "deform_state",
    "generic_problem",
    "generic_state_from_split",
    "richardson_deviation",
]

_BLOWUP_NORM = 1e8


# ----------------------------------------------------------------------
# problems
# ----------------------------------------------------------------------
@dataclass(frozen=True)
class DegenerateProblem:
    """Invariant line-bundle flow data on a homogeneous space.

    The fiber direction is e_phi = e_phi_scale * (m-basis vector at
    e_phi_index); its dual satisfies e^phi(e_phi) = 1.  omega0/rho0 are
    invariant horizontal forms on m giving the structure on the zero
    section.
    """

    space: HomogeneousSpace
    e_phi_index: int
    e_phi_scale: float
    omega0: KForm
    rho0: KForm
    _cache: dict = field(default_factory=dict, compare=False, repr=False)

    def __post_init__(self):
        nm = self.space.mdim
        if self.omega0.dim != nm or self.rho0.dim != nm:
            raise ValueError("omega0/rho0 must live on m")
        ev = np.zeros(nm)
        ev[self.e_phi_index] = 1.0
        for frm in (self.omega0, self.rho0):
            if interior(ev, frm).max_abs() > 1e-12 * max(frm.max_abs(), 1e-30):
                raise ValueError("omega0/rho0 must annihilate the fiber direction")

    # -- frame helpers --------------------------------------------------
    @property
    def mdim(self) -> int:
        return self.space.mdim

    @property
    def dist_axes(self) -> tuple[int, ...]:
        return tuple(i for i in range(self.mdim) if i != self.e_phi_index)

    def e_phi_vector(self) -> np.ndarray:
        v = np.zeros(self.mdim)
        v[self.e_phi_index] = self.e_phi_scale
        return v

    def e_phi_form(self) -> KForm:
        # dual normalized so that e^phi(e_phi) = 1
        return KForm.basis(self.mdim, [self.e_phi_index]) * (1.0 / self.e_phi_scale)

    def _basis(self, degree: int):
        key = ("hbasis", degree)
        if key not in self._cache:
            forms = [
                b.form
                for b in invariant_basis(self.space.algebra, self.space.split, degree)
                if all(self.e_phi_index not in t or c == 0
                       for t, c in zip(b.form.tuples(), b.form.coeffs))
            ]
            mat = np.stack([f.coeffs for f in forms], axis=1)
            self._cache[key] = (forms, mat, np.linalg.pinv(mat))
        return self._cache[key]

    def w_basis(self):
        return self._basis(2)

    def s_basis(self):
        return self._basis(3)

    def basis_labels(self, degree: int) -> list[str]:
        forms, _, _ = self._basis(degree)
        labels = []
        for f in forms:
            for t, c in zip(f.tuples(), f.coeffs):
                if abs(c) > 1e-12:
                    labels.append("e" + "".join(str(i + 1) for i in t))
                    break
        return labels

    def de_phi(self) -> KForm:
        if "de_phi" not in self._cache:
            self._cache["de_phi"] = self.space.d(self.e_phi_form())
        return self._cache["de_phi"]

    def lie_ephi_matrix(self, degree: int) -> np.ndarray:
        key = ("lie", degree)
        if key not in self._cache:
            self._cache[key] = self.e_phi_scale * self.space.lie_matrix(
                self.e_phi_index, degree
            )
        return self._cache[key]

    def pi(self, form: KForm) -> KForm:
        ev = np.zeros(self.mdim)
        ev[self.e_phi_index] = 1.0
        ephi = KForm.basis(self.mdim, [self.e_phi_index])
        return form - wedge(ephi, interior(ev, form))

    def to_dist(self, form: KForm) -> KForm:
        return restrict(form, self.dist_axes)

    def from_dist(self, form: KForm) -> KForm:
        return embed(form, self.mdim, list(self.dist_axes))

    def pack(self, w_coeffs: np.ndarray, S_coeffs: np.ndarray) -> np.ndarray:
        return np.concatenate([w_coeffs, S_coeffs])

    def unpack(self, y: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        nw = self.w_basis()[1].shape[1]
        return y[:nw], y[nw:]


@dataclass(frozen=True)
class GenericProblem:
    """Invariant generic-flow data: coefficients run over the invariant
    3-form basis of the space."""

    space: HomogeneousSpace
    _cache: dict = field(default_factory=dict, compare=False, repr=False)

    def basis(self, degree: int):
        key = ("basis", degree)
        if key not in self._cache:
            forms = [
                b.form for b in invariant_basis(self.space.algebra, self.space.split, degree)
            ]
            mat = np.stack([f.coeffs for f in forms], axis=1)
            self._cache[key] = (forms, mat, np.linalg.pinv(mat))
        return self._cache[key]

    def phi(self, x: np.ndarray) -> KForm:
        _, mat, _ = self.basis(3)
        return KForm(self.space.mdim, 3, mat @ x)


def generic_problem(space_name: str) -> GenericProblem:
    return GenericProblem(space(space_name))


# ----------------------------------------------------------------------
# states and trajectories
# ----------------------------------------------------------------------
@dataclass(frozen=True)
class DegenerateFlowState:
    """Split-coordinate state: fiber length f, omega and s = J*rho
    coefficients in the problem's invariant horizontal bases."""

    t: float
    f: float
    w: np.ndarray
    s: np.ndarray
    problem: DegenerateProblem

    def omega_form(self, on_distribution: bool = True) -> KForm:
        _, mat, _ = self.problem.w_basis()
        f7 = KForm(self.problem.mdim, 2, mat @ self.w)
        return self.problem.to_dist(f7) if on_distribution else f7

    def s_form(self, on_distribution: bool = True) -> KForm:
        _, mat, _ = self.problem.s_basis()
        f7 = KForm(self.problem.mdim, 3, mat @ self.s)
        return self.problem.to_dist(f7) if on_distribution else f7

    def rho_form(self, on_distribution: bool = True) -> KForm:
        om6, s6 = self.omega_form(), self.s_form()
        J, _, _ = stable._pair_J(om6, s6)
        rho6 = -1.0 * pullback(J, s6)
        return rho6 if on_distribution else self.problem.from_dist(rho6)


@dataclass(frozen=True)
class GenericFlowState:
    t: float
    x: np.ndarray
    problem: GenericProblem

    def phi_form(self) -> KForm:
        return self.problem.phi(self.x)


@dataclass(frozen=True)
class FlowConfig:
    """Integration parameters.

    integrator is 'rk4-fixed' or 'rk45-adaptive' (aliases 'rk4'/'rk45').
    step is the fixed step; tol the adaptive error tolerance.  Samples
    are recorded every sample_dt.
    """

    space: str = "n11"
    t_end: float = 0.5
    integrator: str = "rk45-adaptive"
    step: float = 1e-3
    tol: float = 1e-9
    startup_epsilon: float = 1e-4
    sample_dt: float = 0.01
    max_retries: int = 60

    def kind(self) -> str:
        name = self.integrator.lower()
        if name in ("rk4", "rk4-fixed"):
            return "rk4"
        if name in ("rk45", "rk45-adaptive"):
            return "rk45"
        raise ValueError(f"unknown integrator '{self.integrator}'")


@dataclass(frozen=True)
class Sample:
    t: float
    data: dict
    monitors: dict


@dataclass(frozen=True)
class Trajectory:
    kind: str  # "degenerate" | "generic"
    samples: tuple[Sample, ...]
    stop_reason: str
    config: FlowConfig
    problem: DegenerateProblem | GenericProblem

    def times(self) -> np.ndarray:
        return np.array([s.t for s in self.samples])

    def series(self, key: str) -> np.ndarray:
        return np.array([s.data[key] for s in self.samples])

    def monitor(self, key: str) -> np.ndarray:
        return np.array([s.monitors[key] for s in self.samples])

    def state_at(self, i: int):
        s = self.samples[i]
        if self.kind == "degenerate":
            return DegenerateFlowState(s.t, s.data["f"], s.data["w"], s.data["s"], self.problem)
        return GenericFlowState(s.t, s.data["x"], self.problem)


# ----------------------------------------------------------------------
# built-in problems
# ----------------------------------------------------------------------
def _family_forms(a: float, b: float, c_param: float, theta: float):
    e = lambda *idx: KForm.from_terms(7, len(idx), {tuple(i - 1 for i in idx): 1})
    omega0 = (a * a) * e(1, 2) + (b * b) * e(3, 4) - (c_param * c_param) * e(5, 6)
    x0 = -e(1, 3, 5) - e(1, 4, 6) - e(2, 3, 6) + e(2, 4, 5)
    y0 = -e(1, 3, 6) + e(1, 4, 5) + e(2, 3, 5) + e(2, 4, 6)
    rho0 = (a * b * c_param) * (math.cos(theta) * x0 + math.sin(theta) * y0)
    return omega0, rho0


def n11_problem(
    a: float = 1.0,
    b: float = 1.0,
    c_param: float = 1.0,
    theta: float = 0.0,
    bundle: str = "squared",
) -> DegenerateProblem:
    """The invariant family on the Aloff-Wallach space N^{1,1}.

    omega0 = a^2 e12 + b^2 e34 - c^2 e56 with the matching 3-form family
    (parameters must be nonzero).  'squared' uses the fiber generator of
    the squared line bundle with the orientation that makes the
    smoothness constant +1; 'unsquared' keeps the primitive fiber, whose
    constant -2 fails the smoothness test.
    """
    for name, val in (("a", a), ("b", b), ("c_param", c_param)):
        if val == 0:
            raise ValueError(f"family parameter {name} must be nonzero")
    omega0, rho0 = _family_forms(a, b, c_param, theta)
    if bundle == "squared":
        scale = -0.5
    elif bundle == "unsquared":
        scale = 1.0
    else:
        raise ValueError("bundle must be 'squared' or 'unsquared'")
    return DegenerateProblem(space("n11"), 6, scale, omega0, rho0)


def flat7_problem(structure: str = "su3") -> DegenerateProblem:
    """Flat model: R^6 x circle, fiber rotating one complex plane."""
    om6, rho6 = stable.model_pair(structure)
    return DegenerateProblem(space("flat7"), 6, 1.0, embed(om6, 7), embed(rho6, 7))


# ----------------------------------------------------------------------
# smoothness and startup
# ----------------------------------------------------------------------
@dataclass(frozen=True)
class SmoothnessResult:
    c: float
    ok: bool
    fit_residual: float
    lie_omega_residual: float

    @property
    def c_is_integer(self) -> bool:
        return abs(self.c - round(self.c)) < 1e-8


def smoothness_check(
    sp: HomogeneousSpace,
    omega0: KForm,
    rho0: KForm,
    e_phi_index: int,
    e_phi_scale: float,
) -> SmoothnessResult:
    """Fit c in L_{e_phi} rho0 = c J*rho0 and test L_{e_phi} omega0 = 0.

    ok requires |c| = 1 (the orbit-length condition for a smooth
    extension across the zero section).  Raises NotProportional when the
    fit residual exceeds 1e-10 relative.
    """
    dist = tuple(i for i in range(sp.mdim) if i != e_phi_index)
    om6, rho6 = restrict(omega0, dist), restrict(rho0, dist)
    J, _, _ = stable._pair_J(om6, rho6)
    jrho = embed(pullback(J, rho6), sp.mdim, list(dist))
    lie3 = e_phi_scale * sp.lie_matrix(e_phi_index, 3)
    lie2 = e_phi_scale * sp.lie_matrix(e_phi_index, 2)
    lrho = lie3 @ rho0.coeffs
    lom_res = float(np.max(np.abs(lie2 @ omega0.coeffs)))
    denom = float(jrho.coeffs @ jrho.coeffs)
    c = float(jrho.coeffs @ lrho) / denom
    resid = float(np.max(np.abs(lrho - c * jrho.coeffs)))
    scale = max(float(np.max(np.abs(lrho))), 1e-30)
    if resid > 1e-10 * max(scale, 1.0):
        raise NotProportional(
            f"L_ephi rho is not proportional to J*rho (residual {resid:.2e})"
        )
    ok = abs(abs(c) - 1.0) < 1e-8 and lom_res < 1e-10
    return SmoothnessResult(c, ok, resid, lom_res)


def problem_smoothness(problem: DegenerateProblem) -> SmoothnessResult:
    return smoothness_check(
        problem.space, problem.omega0, problem.rho0, problem.e_phi_index, problem.e_phi_scale
    )


def startup_seed(problem: DegenerateProblem, c: float, epsilon: float) -> DegenerateFlowState:
    """First-order Taylor seed at t = epsilon for the singular startup.

    f = c epsilon, s = J*rho0 (its time derivative vanishes at t = 0 in
    these variables), and w = omega0 + epsilon wdot0 with
    wdot0 ^ omega0 = pi(d rho0).
    """
    if epsilon <= 0:
        raise PreconditionFailed("positive_epsilon", f"epsilon = {epsilon}")
    if c <= 0:
        raise PreconditionFailed("positive_c", f"c = {c}")
    om6 = problem.to_dist(problem.omega0)
    rho6 = problem.to_dist(problem.rho0)
    cls = stable.classify_pair(om6, rho6)
    if cls.tag not in (stable.StructureClass.SU3, stable.StructureClass.SU12):
        raise PreconditionFailed("classification", f"{cls.tag.value}: {cls.diagnostics}")
    dom = problem.space.d(problem.omega0)
    dww = wedge(dom, problem.omega0)
    if dww.max_abs() > 1e-10 * max(problem.omega0.max_abs() ** 2, 1.0):
        raise PreconditionFailed("cocalibration", "d omega0 ^ omega0 != 0")
    try:
        sm = problem_smoothness(problem)
    except NotProportional as exc:
        raise PreconditionFailed("smoothness_proportionality", str(exc)) from exc
    if abs(sm.c - c) > 1e-8 * max(abs(c), 1.0):
        raise PreconditionFailed(
            "smoothness_constant", f"required c = {c}, data gives c = {sm.c}"
        )
    if abs(abs(c) - 1.0) > 1e-8:
        raise PreconditionFailed(
            "smoothness_norm", f"|c| = {abs(c)} != 1: no smooth extension"
        )
    jrho6 = pullback(cls.J, rho6)
    drho = problem.space.d(problem.rho0)
    tau6 = problem.to_dist(problem.pi(drho))
    wdot0 = stable.solve_wedge_omega(om6, tau6)
    _, wmat, wpinv = problem.w_basis()
    _, smat, spinv = problem.s_basis()
    w_form7 = problem.omega0 + epsilon * problem.from_dist(wdot0)
    w = wpinv @ w_form7.coeffs
    s = spinv @ problem.from_dist(jrho6).coeffs
    _check_projection(wmat, w, w_form7.coeffs, "omega seed")
    _check_projection(smat, s, problem.from_dist(jrho6).coeffs, "s seed")
    return DegenerateFlowState(t=epsilon, f=c * epsilon, w=w, s=s, problem=problem)


def mirror_seed(problem: DegenerateProblem, c: float, epsilon: float) -> DegenerateFlowState:
    """Seed of the analytic continuation branch at t = -epsilon.

    The continuation through the singular time has f odd, so the
    backward branch starts with f = -c epsilon; geometric quantities
    depend on |f|.
    """
    fwd = startup_seed(problem, c, epsilon)
    _, wmat, wpinv = problem.w_basis()
    w_form7 = KForm(problem.mdim, 2, wmat @ fwd.w)
    mirrored = 2.0 * problem.omega0 - w_form7  # omega0 - eps*wdot0
    return DegenerateFlowState(
        t=-epsilon, f=-c * epsilon, w=wpinv @ mirrored.coeffs, s=fwd.s, problem=problem
    )


def _check_projection(mat, coeffs, target, what: str):
    resid = float(np.max(np.abs(mat @ coeffs - target)))
    if resid > 1e-9 * max(float(np.max(np.abs(target))), 1.0):
        raise ValueError(f"{what} leaves the invariant subspace (residual {resid:.2e})")


# ----------------------------------------------------------------------
# degenerate flow right-hand side
# ----------------------------------------------------------------------
@dataclass(frozen=True)
class _Derived:
    om6: KForm
    om7: KForm
    rho6: KForm
    s6: KForm
    f: float
    g6: object
    J: np.ndarray


def _derive_split(problem: DegenerateProblem, y: np.ndarray, branch: float) -> _Derived:
    w, S = problem.unpack(y)
    _, wmat, _ = problem.w_basis()
    _, smat, _ = problem.s_basis()
    om7 = KForm(problem.mdim, 2, wmat @ w)
    S7 = KForm(problem.mdim, 3, smat @ S)
    om6 = problem.to_dist(om7)
    S6 = problem.to_dist(S7)
    J, g6, _ = stable._pair_J(om6, S6)
    rho_hat = -1.0 * pullback(J, S6)
    num = wedge(pullback(J, rho_hat), rho_hat).coeffs[0]
    den = wedge(wedge(om6, om6), om6).coeffs[0] * (2.0 / 3.0)
    ratio = num / den
    if not np.isfinite(ratio) or ratio <= 0:
        raise UnstableForm(f"normalization ratio {ratio} is not positive")
    f = branch * math.sqrt(ratio)
    return _Derived(om6, om7, rho_hat * (1.0 / f), S6 * (1.0 / f), f, g6, J)


def _rhs_packed(problem: DegenerateProblem, y: np.ndarray, branch: float) -> np.ndarray:
    d = _derive_split(problem, y, branch)
    rho7 = problem.from_dist(d.rho6)
    drho = problem.space.d(rho7)
    tau7 = problem.pi(drho + d.f * wedge(d.om7, problem.de_phi()))
    wdot6 = stable.solve_wedge_omega(d.om6, problem.to_dist(tau7))
    lrho = KForm(problem.mdim, 3, problem.lie_ephi_matrix(3) @ rho7.coeffs)
    pdom = problem.pi(problem.space.d(d.om7))
    Sdot7 = lrho - d.f * pdom
    _, wmat, wpinv = problem.w_basis()
    _, smat, spinv = problem.s_basis()
    wdot7 = problem.from_dist(wdot6)
    wdot = wpinv @ wdot7.coeffs
    Sdot = spinv @ Sdot7.coeffs
    _check_projection(wmat, wdot, wdot7.coeffs, "omega velocity")
    _check_projection(smat, Sdot, Sdot7.coeffs, "s velocity")
    return problem.pack(wdot, Sdot)


def degenerate_rhs(state: DegenerateFlowState) -> tuple[float, KForm, KForm]:
    """Split right-hand side (df/dt, dw/dt, ds/dt) at a state.

    Implements the two flow equations with df = 0 on the slice: the
    2-form velocity solves  wdot ^ omega = pi(d rho) + f omega ^ de^phi,
    fdot is the g-orthogonal coefficient of RHS2 = L_{e_phi} rho
    - f pi(d omega) along s, and sdot = (RHS2 - fdot s)/f.  At f = 0 the
    right-hand side is purely along s and sdot = 0.
    """
    problem = state.problem
    if state.f < 0:
        raise NonpositiveF("state has negative fiber length")
    om6 = state.omega_form()
    s6 = state.s_form()
    J, g6, _ = stable._pair_J(om6, s6)
    rho6 = -1.0 * pullback(J, s6)
    rho7 = problem.from_dist(rho6)
    om7 = state.omega_form(on_distribution=False)
    drho = problem.space.d(rho7)
    tau7 = problem.pi(drho + state.f * wedge(om7, problem.de_phi()))
    wdot6 = stable.solve_wedge_omega(om6, problem.to_dist(tau7))
    lrho7 = KForm(problem.mdim, 3, problem.lie_ephi_matrix(3) @ rho7.coeffs)
    pdom = problem.pi(problem.space.d(om7))
    rhs2_6 = problem.to_dist(lrho7 - state.f * pdom)
    fdot = float(form_pairing(g6, rhs2_6, s6) / form_pairing(g6, s6, s6))
    residual = rhs2_6 - fdot * s6
    if state.f == 0:
        if residual.max_abs() > 1e-8 * max(rhs2_6.max_abs(), 1.0):
            raise UnstableForm("right-hand side is not parallel to s at f = 0")
        sdot6 = KForm.zero(6, 3)
    else:
        sdot6 = residual * (1.0 / state.f)
    return fdot, wdot6, sdot6


# ----------------------------------------------------------------------
# generic flow right-hand side
# ----------------------------------------------------------------------
def _star_coeffs(problem: GenericProblem, x: np.ndarray) -> np.ndarray:
    phi = problem.phi(x)
    s = seven_structure(phi)
    if not s.ok:
        raise UnstableForm("phi left the stable orbit")
    return s.star_phi.coeffs


def generic_rhs(state: GenericFlowState) -> np.ndarray:
    """Coefficient velocity solving J_*(x) xdot = coeffs(d phi(x)).

    J_* is the Jacobian of the star-coefficient map, computed by
    centered finite differences (relative step 1e-6); raises
    SingularJacobian when its condition number exceeds 1e12.
    """
    problem = state.problem
    x = np.asarray(state.x, dtype=float)
    _, mat3, _ = problem.basis(3)
    _, mat4, pinv4 = problem.basis(4)
    nx = len(x)
    h = 1e-6 * max(float(np.max(np.abs(x))), 1.0)
    jac = np.empty((nx, nx))
    for j in range(nx):
        xp, xm = x.copy(), x.copy()
        xp[j] += h
        xm[j] -= h
        jac[:, j] = pinv4 @ (_star_coeffs(problem, xp) - _star_coeffs(problem, xm)) / (2 * h)
    cond = np.linalg.cond(jac)
    if not np.isfinite(cond) or cond > 1e12:
        raise SingularJacobian(f"star-coefficient Jacobian condition number {cond:.2e}")
    phi = problem.phi(x)
    dphi = problem.space.d(phi)
    rhs = pinv4 @ dphi.coeffs
    _check_projection(mat4, rhs, dphi.coeffs, "d phi")
    return np.linalg.solve(jac, rhs)


def cocal_residual(state: GenericFlowState | DegenerateFlowState) -> float:
    """Sup-norm of the coefficients of d(*phi)."""
    if isinstance(state, GenericFlowState):
        problem = state.problem
        star = KForm(problem.space.mdim, 4, _star_coeffs(problem, state.x))
        return float(problem.space.d(star).max_abs())
    sigma = _degenerate_star(state)
    return float(state.problem.space.d(sigma).max_abs())


def _degenerate_star(state: DegenerateFlowState) -> KForm:
    """*phi = omega^2/2 + f e^phi ^ s for split states."""
    problem = state.problem
    om7 = state.omega_form(on_distribution=False)
    s7 = state.s_form(on_distribution=False)
    return 0.5 * wedge(om7, om7) + state.f * wedge(problem.e_phi_form(), s7)


def _degenerate_phi(state: DegenerateFlowState) -> KForm:
    problem = state.problem
    om7 = state.omega_form(on_distribution=False)
    rho7 = problem.from_dist(state.rho_form())
    return state.f * wedge(om7, problem.e_phi_form()) + rho7


# ----------------------------------------------------------------------
# integrators
# ----------------------------------------------------------------------
def _rk4_step(f, t, y, h):
    k1 = f(t, y)
    k2 = f(t + h / 2, y + h / 2 * k1)
    k3 = f(t + h / 2, y + h / 2 * k2)
    k4 = f(t + h, y + h * k3)
    return y + (h / 6) * (k1 + 2 * k2 + 2 * k3 + k4)


# Dormand-Prince 5(4) tableau
_DP_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_DP_A = [
    [],
    [1 / 5],
    [3 / 40, 9 / 40],
    [44 / 45, -56 / 15, 32 / 9],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656],
    [35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84],
]
_DP_B5 = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
_DP_B4 = np.array(
    [5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40]
)


def _dp_step(f, t, y, h):
    k = [f(t, y)]
    for i in range(1, 7):
        yi = y + h * sum(a * kk for a, kk in zip(_DP_A[i], k))
        k.append(f(t + _DP_C[i] * h, yi))
    karr = np.stack(k)
    y5 = y + h * (_DP_B5 @ karr)
    err = h * ((_DP_B5 - _DP_B4) @ karr)
    return y5, err


def _advance_rk4(f, t0, y0, t1, step, validity, max_retries):
    n = max(1, int(round(abs(t1 - t0) / step)))
    h = (t1 - t0) / n
    t, y = t0, y0
    for _ in range(n):
        try:
            ynew = _rk4_step(f, t, y, h)
        except (UnstableForm, ValueError, np.linalg.LinAlgError, SingularJacobian) as exc:
            raise StepFailure(f"right-hand side failed at t = {t:.6g}: {exc}") from exc
        if not validity(ynew):
            raise StepFailure(f"fixed-step state check failed at t = {t + h:.6g}")
        t, y = t + h, ynew
    return y


def _advance_rk45(f, t0, y0, t1, tol, state, validity, max_retries):
    t, y = t0, y0
    direction = 1.0 if t1 >= t0 else -1.0
    h = state.get("h", direction * min(abs(t1 - t0), 1e-2))
    if h * direction <= 0:
        h = direction * abs(h)
    retries = 0
    while (t1 - t) * direction > 1e-15:
        h = direction * min(abs(h), abs(t1 - t))
        try:
            ynew, err = _dp_step(f, t, y, h)
            scale = tol + tol * np.maximum(np.abs(y), np.abs(ynew))
            enorm = float(np.sqrt(np.mean((err / scale) ** 2)))
            ok = np.all(np.isfinite(ynew)) and enorm <= 1.0 and validity(ynew)
        except (UnstableForm, ValueError, np.linalg.LinAlgError, SingularJacobian):
            ok, enorm = False, np.inf
        if ok:
            t, y = t + h, ynew
            retries = 0
            grow = 0.9 * enorm ** (-0.2) if enorm > 0 else 5.0
            h = h * min(5.0, max(0.2, grow))
        else:
            retries += 1
            if retries > max_retries:
                raise StepFailure(f"no acceptable step at t = {t:.6g}")
            h = h / 2
    state["h"] = h
    return y


# ----------------------------------------------------------------------
# integrate
# ----------------------------------------------------------------------
def _degenerate_monitors(state: DegenerateFlowState) -> dict:
    problem = state.problem
    om6, s6 = state.omega_form(), state.s_form()
    cls = stable.classify_pair(om6, state.rho_form())
    norm_resid = abs(float(form_pairing(cls.metric, s6, s6)) - 4.0) if cls.ok else np.inf
    sig8 = None
    if cls.ok and abs(state.f) > 0:
        try:
            split = BundleSplitData.from_distribution(abs(state.f), om6, state.rho_form())
            _, g8 = bundle_Phi(split)
            sig8 = g8.signature()
        except (ValueError, UnstableForm):
            sig8 = None
    return {
        "cocal_residual": cocal_residual(state),
        "normalization_residual": norm_resid,
        "class": cls.tag.value,
        "g8_signature": sig8,
    }


def _generic_monitors(state: GenericFlowState) -> dict:
    s = seven_structure(state.phi_form())
    return {
        "cocal_residual": cocal_residual(state) if s.ok else np.inf,
        "class": s.klass.value,
    }


def integrate(config: FlowConfig, seed) -> Trajectory:
    """Advance a seed to config.t_end, sampling every config.sample_dt.

    Stops early with stop_reason 'blow_up' when the coefficient norm
    exceeds 1e8; raises StepFailure when no acceptable step exists.
    """
    if isinstance(seed, DegenerateFlowState):
        return _integrate_degenerate(config, seed)
    if isinstance(seed, GenericFlowState):
        return _integrate_generic(config, seed)
    raise TypeError(f"unknown seed type {type(seed)}")


def _sample_times(t0: float, t1: float, dt: float) -> np.ndarray:
    n = int(math.floor(abs(t1 - t0) / dt + 1e-9))
    sign = 1.0 if t1 >= t0 else -1.0
    ts = [t0 + sign * dt * k for k in range(n + 1)]
    if abs(ts[-1] - t1) > 1e-12:
        ts.append(t1)
    return np.array(ts)


def _integrate_degenerate(config: FlowConfig, seed: DegenerateFlowState) -> Trajectory:
    problem = seed.problem
    branch = 1.0 if seed.f >= 0 else -1.0
    y = problem.pack(seed.w, seed.f * seed.s)
    seed_tag = stable.classify_pair(seed.omega_form(), seed.rho_form()).tag

    def rhs(t, yv):
        return _rhs_packed(problem, yv, branch)

    def validity(yv):
        if float(np.max(np.abs(yv))) > _BLOWUP_NORM:
            return True  # handled as blow-up at the next sample
        try:
            d = _derive_split(problem, yv, branch)
        except (UnstableForm, ValueError):
            return False
        return stable.classify_pair(d.om6, d.rho6).tag is seed_tag

    def to_state(t, yv) -> DegenerateFlowState:
        d = _derive_split(problem, yv, branch)
        w, S = problem.unpack(yv)
        return DegenerateFlowState(t, d.f, w, S / d.f, problem)

    times = _sample_times(seed.t, config.t_end, config.sample_dt)
    samples = []
    stop = "completed"
    adapt_state: dict = {}
    state = to_state(times[0], y)
    samples.append(_record_degenerate(state))
    for t_prev, t_next in zip(times[:-1], times[1:]):
        try:
            if config.kind() == "rk4":
                y = _advance_rk4(rhs, t_prev, y, t_next, config.step, validity, config.max_retries)
            else:
                y = _advance_rk45(
                    rhs, t_prev, y, t_next, config.tol, adapt_state, validity, config.max_retries
                )
        except StepFailure:
            stop = "step_failure"
            break
        if float(np.max(np.abs(y))) > _BLOWUP_NORM:
            stop = "blow_up"
            break
        state = to_state(t_next, y)
        samples.append(_record_degenerate(state))
    return Trajectory("degenerate", tuple(samples), stop, config, problem)


def _record_degenerate(state: DegenerateFlowState) -> Sample:
    return Sample(
        t=state.t,
        data={"f": state.f, "w": state.w.copy(), "s": state.s.copy()},
        monitors=_degenerate_monitors(state),
    )


def _integrate_generic(config: FlowConfig, seed: GenericFlowState) -> Trajectory:
    problem = seed.problem
    y = np.asarray(seed.x, dtype=float)
    s0 = seven_structure(seed.phi_form())
    if not s0.ok:
        raise UnstableForm("seed is not a stable 3-form")
    seed_class = s0.klass

    def rhs(t, yv):
        return generic_rhs(GenericFlowState(t, yv, problem))

    def validity(yv):
        if float(np.max(np.abs(yv))) > _BLOWUP_NORM:
            return True
        s = seven_structure(problem.phi(yv))
        return s.klass is seed_class

    times = _sample_times(seed.t, config.t_end, config.sample_dt)
    samples = [Sample(times[0], {"x": y.copy()}, _generic_monitors(seed))]
    stop = "completed"
    adapt_state: dict = {}
    for t_prev, t_next in zip(times[:-1], times[1:]):
        try:
            if config.kind() == "rk4":
                y = _advance_rk4(rhs, t_prev, y, t_next, config.step, validity, config.max_retries)
            else:
                y = _advance_rk45(
                    rhs, t_prev, y, t_next, config.tol, adapt_state, validity, config.max_retries
                )
        except StepFailure:
            stop = "step_failure"
            break
        if float(np.max(np.abs(y))) > _BLOWUP_NORM:
            stop = "blow_up"
            break
        samples.append(
            Sample(t_next, {"x": y.copy()}, _generic_monitors(GenericFlowState(t_next, y, problem)))
        )
    return Trajectory("generic", tuple(samples), stop, config, problem)


# ----------------------------------------------------------------------
# torsion residual and helpers
# ----------------------------------------------------------------------
def torsion_residual(traj: Trajectory) -> np.ndarray:
    """Per-sample residual |d/dt(*phi) - d phi| + |d(*phi)| on the stored
    grid (centered differences inside, one-sided second order at ends)."""
    n = len(traj.samples)
    if n < 3:
        raise ValueError("need at least 3 samples")
    ts = traj.times()
    if traj.kind == "degenerate":
        # honest dual: recompute *phi through the 7-dimensional Hodge
        # machinery, independently of the split evolution variables
        phis = [_degenerate_phi(traj.state_at(i)) for i in range(n)]
        stars = []
        for phi in phis:
            s = seven_structure(phi)
            if not s.ok:
                raise UnstableForm("trajectory sample is not a stable 3-form")
            stars.append(s.star_phi)
        sp = traj.problem.space
    else:
        stars = [
            KForm(traj.problem.space.mdim, 4, _star_coeffs(traj.problem, traj.samples[i].data["x"]))
            for i in range(n)
        ]
        phis = [traj.state_at(i).phi_form() for i in range(n)]
        sp = traj.problem.space
    star_mat = np.stack([s.coeffs for s in stars])
    out = np.empty(n)
    for i in range(n):
        if 0 < i < n - 1:
            dt_m, dt_p = ts[i] - ts[i - 1], ts[i + 1] - ts[i]
            # centered difference on a possibly nonuniform grid
            deriv = (
                star_mat[i + 1] * dt_m / (dt_p * (dt_m + dt_p))
                - star_mat[i - 1] * dt_p / (dt_m * (dt_m + dt_p))
                + star_mat[i] * (dt_p - dt_m) / (dt_m * dt_p)
            )
        elif i == 0:
            h1, h2 = ts[1] - ts[0], ts[2] - ts[0]
            deriv = (
                -star_mat[0] * (h1 + h2) / (h1 * h2)
                + star_mat[1] * h2 / (h1 * (h2 - h1))
                - star_mat[2] * h1 / (h2 * (h2 - h1))
            )
        else:
            h1, h2 = ts[-1] - ts[-2], ts[-1] - ts[-3]
            deriv = (
                star_mat[-1] * (h1 + h2) / (h1 * h2)
                - star_mat[-2] * h2 / (h1 * (h2 - h1))
                + star_mat[-3] * h1 / (h2 * (h2 - h1))
            )
        dphi = sp.d(phis[i])
        flow_res = float(np.max(np.abs(deriv - dphi.coeffs)))
        cocal = float(sp.d(stars[i]).max_abs())
        out[i] = flow_res + cocal
    return out


def deform_state(state: DegenerateFlowState, theta: float) -> DegenerateFlowState:
    """Theta-deformation of a split state via the fiber-rotation action.

    Implemented as the pullback exp(-theta/2 L_{e7}) on both coefficient
    blocks (the angle convention matches L_{e7} rho0 = -2 J*rho0, so the
    seed's 3-form moves along the family with parameter +theta while the
    fiber length is unchanged).  On the seed this reduces to
    s -> cos(theta) s - sin(theta) rho.
    """
    from . import linalg

    problem = state.problem
    alpha = -theta / 2.0
    t2 = linalg.expm(alpha * problem.space.lie_matrix(problem.e_phi_index, 2))
    t3 = linalg.expm(alpha * problem.space.lie_matrix(problem.e_phi_index, 3))
    _, wmat, wpinv = problem.w_basis()
    _, smat, spinv = problem.s_basis()
    w_target = t2 @ (wmat @ state.w)
    s_target = t3 @ (smat @ state.s)
    w = wpinv @ w_target
    s = spinv @ s_target
    _check_projection(wmat, w, w_target, "deformed omega")
    _check_projection(smat, s, s_target, "deformed s")
    return replace(state, w=w, s=s)


def generic_state_from_split(
    gproblem: GenericProblem, dproblem: DegenerateProblem, f: float, t: float = 0.0
) -> GenericFlowState:
    """Invariant generic seed phi = f omega0 ^ e^phi + rho0 from split data."""
    phi = f * wedge(dproblem.omega0, dproblem.e_phi_form()) + dproblem.rho0
    _, mat3, pinv3 = gproblem.basis(3)
    x = pinv3 @ phi.coeffs
    _check_projection(mat3, x, phi.coeffs, "generic seed")
    return GenericFlowState(t, x, gproblem)


def richardson_deviation(
    problem: DegenerateProblem, c: float, config: FlowConfig, t_check: float
) -> float:
    """Max deviation at t_check between runs seeded at epsilon and
    epsilon/2 (the startup-accuracy guard)."""
    out = []
    for eps in (config.startup_epsilon, config.startup_epsilon / 2):
        seed = startup_seed(problem, c, eps)
        cfg = replace(config, t_end=t_check)
        traj = integrate(cfg, seed)
        last = traj.state_at(len(traj.samples) - 1)
        out.append(np.concatenate([[last.f], last.w, last.f * last.s]))
    return float(np.max(np.abs(out[0] - out[1])))

"""7-dimensional G2/G2* structures and 8-dimensional Spin(7)/Spin0(3,4)
structures built from stable forms.

A stable 3-form phi on R^7 determines a bilinear form through

    B(v, w) vol_ref = (1/6) (v . phi) ^ (w . phi) ^ phi

(the sign is fixed by requiring the standard compact model to have the
Euclidean metric together with the positively oriented volume, with the
contraction acting in the first slot) and the associated metric and
volume are recovered by the normalization
g7 = B det(B)^{-1/9}, vol7 = det(B)^{1/9} vol_ref (signed ninth root);
the exponent is the unique one scaling correctly under rescalings of phi.

The associated 4-form of an 8-dimensional structure Phi = e8 ^ phi + *phi
has volume vol8 := (1/14) Phi ^ Phi = e8 ^ vol7.  Recognition of
8-dimensional structures is constructive only: they are built from a
SevenStructure or from bundle-split data, never classified from a raw
4-form.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from fractions import Fraction

import numpy as np

from . import linalg, stable
from .errors import NonpositiveF, UnstableForm
from .forms import KForm, SymBilinear, embed, hodge, interior, restrict, volume_form, wedge

__all__ = [
    "SevenClass",
    "EightClass",
    "SevenStructure",
    "EightStructure",
    "BundleSplitData",
    "build_phi",
    "metric_vol_from_phi",
    "assoc_4form",
    "build_Phi",
    "bundle_Phi",
    "model_phi",
    "model_seven",
]


class SevenClass(Enum):
    G2 = "G2"
    G2_STAR = "G2star"
    NOT_STABLE = "NotStable"


class EightClass(Enum):
    SPIN7 = "Spin7"
    SPIN034 = "Spin034"


@dataclass(frozen=True)
class SevenStructure:
    phi: KForm
    g7: SymBilinear | None
    vol7: KForm | None
    star_phi: KForm | None
    klass: SevenClass

    @property
    def ok(self) -> bool:
        return self.klass is not SevenClass.NOT_STABLE


@dataclass(frozen=True)
class EightStructure:
    Phi: KForm
    vol8: KForm
    klass: EightClass


def metric_vol_from_phi(phi: KForm) -> tuple[SymBilinear | None, KForm | None, SevenClass]:
    """Associated metric, volume and class of a 3-form on R^7.

    Returns (None, None, NOT_STABLE) when the quadratic form degenerates.
    """
    if phi.dim != 7 or phi.degree != 3:
        raise ValueError("expected a 3-form on R^7")
    exact = phi.exact
    one = Fraction(1) if exact else 1.0
    contractions = []
    for i in range(7):
        v = np.zeros(7, dtype=object if exact else float)
        v[i] = one
        contractions.append(interior(v, phi))
    B = np.zeros((7, 7), dtype=object if exact else float)
    for i in range(7):
        for j in range(i, 7):
            top = wedge(wedge(contractions[i], contractions[j]), phi)
            val = top.coeffs[0] / (6 * one)
            B[i, j] = val
            B[j, i] = val
    d = linalg.det(B)
    scale = max(float(max(abs(x) for x in B.reshape(-1))), 1e-30)
    if (exact and d == 0) or (not exact and abs(d) <= 1e-12 * scale**7):
        return None, None, SevenClass.NOT_STABLE
    s9 = linalg.nth_root_signed(d, 9)
    g7 = SymBilinear(B / s9)
    vol7 = volume_form(7, s9, exact=exact)
    try:
        sig = g7.signature()
    except ValueError:
        return None, None, SevenClass.NOT_STABLE
    if sig == (7, 0):
        klass = SevenClass.G2
    elif sig == (3, 4):
        klass = SevenClass.G2_STAR
    else:
        return None, None, SevenClass.NOT_STABLE
    return g7, vol7, klass


def seven_structure(phi: KForm) -> SevenStructure:
    """Assemble the full SevenStructure (metric, volume, dual 4-form)."""
    g7, vol7, klass = metric_vol_from_phi(phi)
    if klass is SevenClass.NOT_STABLE:
        return SevenStructure(phi, None, None, None, klass)
    return SevenStructure(phi, g7, vol7, hodge(g7, vol7, phi), klass)


def build_phi(omega: KForm, rho: KForm, eta: KForm) -> SevenStructure:
    """phi = omega ^ eta + rho on R^7.

    omega and rho may be given on R^6 (embedded into the first six axes)
    or directly on R^7; eta must be a 1-form on R^7.
    """
    if eta.dim != 7 or eta.degree != 1:
        raise ValueError("eta must be a 1-form on R^7")
    if eta.is_zero():
        raise ValueError("eta vanishes")
    if omega.dim == 6:
        omega = embed(omega, 7)
    if rho.dim == 6:
        rho = embed(rho, 7)
    phi = wedge(omega, eta) + rho
    s = seven_structure(phi)
    if not s.ok:
        raise UnstableForm("omega ^ eta + rho is not a stable 3-form")
    return s


def assoc_4form(s: SevenStructure) -> KForm:
    """The dual 4-form *phi of a seven-dimensional structure."""
    if not s.ok:
        raise UnstableForm("structure is not stable")
    return s.star_phi


def build_Phi(s: SevenStructure, e8_dual: KForm | None = None) -> EightStructure:
    """Phi = e8 ^ phi + *phi with vol8 = (1/14) Phi ^ Phi."""
    if not s.ok:
        raise UnstableForm("structure is not stable")
    exact = s.phi.exact
    if e8_dual is None:
        e8_dual = KForm.basis(8, [7], exact=exact)
    if e8_dual.dim != 8 or e8_dual.degree != 1:
        raise ValueError("e8_dual must be a 1-form on R^8")
    Phi = wedge(e8_dual, embed(s.phi, 8)) + embed(s.star_phi, 8)
    scale = Fraction(1, 14) if (exact or e8_dual.exact) else (1.0 / 14.0)
    vol8 = wedge(Phi, Phi) * scale
    if vol8.is_zero():
        raise UnstableForm("Phi ^ Phi vanishes")
    klass = EightClass.SPIN7 if s.klass is SevenClass.G2 else EightClass.SPIN034
    return EightStructure(Phi, vol8, klass)


@dataclass(frozen=True)
class BundleSplitData:
    """Split data (f, omega, rho) of a structure on a line-bundle frame.

    omega and rho live on R^8, annihilate the fiber direction e_phi and
    the radial direction e_r, and f > 0 is the fiber length.  The duals
    satisfy e^phi(e_phi) = 1 and e^phi(e_r) = 0.
    """

    f: float
    omega: KForm
    rho: KForm
    e_phi_dual: KForm
    e_r_dual: KForm

    def __post_init__(self):
        if self.omega.dim != 8 or self.rho.dim != 8:
            raise ValueError("split data must live on R^8")

    @staticmethod
    def from_distribution(f: float, omega6: KForm, rho6: KForm) -> "BundleSplitData":
        """Standard frame: distribution on axes 1..6, e_phi = e7, e_r = e8."""
        exact = omega6.exact
        return BundleSplitData(
            f=f,
            omega=embed(omega6, 8),
            rho=embed(rho6, 8),
            e_phi_dual=KForm.basis(8, [6], exact=exact),
            e_r_dual=KForm.basis(8, [7], exact=exact),
        )


def bundle_Phi(d: BundleSplitData) -> tuple[KForm, SymBilinear]:
    """Assemble the 8-dimensional structure form and metric from split data.

    Phi = omega^2/2 + f e^phi ^ J*rho + e^r ^ rho + f e^r ^ e^phi ^ omega,
    g8  = g6 + e^r (x) e^r + f^2 e^phi (x) e^phi.
    """
    if d.f <= 0:
        raise NonpositiveF(f"fiber length must be positive, got {d.f}")
    # the interesting part of the data lives on the 6-dim distribution
    dist_axes = [i for i in range(8) if d.e_phi_dual.term([i]) == 0 and d.e_r_dual.term([i]) == 0]
    if len(dist_axes) != 6:
        raise ValueError("frame is not split into distribution + fiber + radial axes")
    om6 = restrict(d.omega, dist_axes)
    rho6 = restrict(d.rho, dist_axes)
    cls = stable.classify_pair(om6, rho6)
    if cls.tag not in (stable.StructureClass.SU3, stable.StructureClass.SU12):
        raise UnstableForm(f"split data does not define a structure: {cls.diagnostics}")
    from .forms import pullback

    jrho6 = pullback(cls.J, rho6)
    jrho = embed(jrho6, 8, dist_axes)
    f = d.f
    Phi = (
        wedge(d.omega, d.omega) * (Fraction(1, 2) if d.omega.exact else 0.5)
        + f * wedge(d.e_phi_dual, jrho)
        + wedge(d.e_r_dual, d.rho)
        + f * wedge(wedge(d.e_r_dual, d.e_phi_dual), d.omega)
    )
    g6 = cls.metric.matrix
    g8 = np.zeros((8, 8), dtype=g6.dtype)
    g8[np.ix_(dist_axes, dist_axes)] = g6
    ephi = np.array([d.e_phi_dual.term([i]) for i in range(8)])
    er = np.array([d.e_r_dual.term([i]) for i in range(8)])
    g8 = g8 + (f * f) * np.outer(ephi, ephi) + np.outer(er, er)
    return Phi, SymBilinear(g8)


# -- convenience model constructors ------------------------------------
def model_phi(name: str, exact: bool = False) -> KForm:
    """phi_G2 ('su3'), phi_{G2*,i} ('su12') or phi_{G2*,ii} ('sl3r')."""
    om, rho = stable.model_pair(name, exact=exact)
    e7 = KForm.basis(7, [6], exact=exact)
    return wedge(embed(om, 7), e7) + embed(rho, 7)


def model_seven(name: str, exact: bool = False) -> SevenStructure:
    return seven_structure(model_phi(name, exact=exact))

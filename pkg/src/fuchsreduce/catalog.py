"""Registry of integrable 2x2 systems at algebraic Painleve solutions.

Each entry specializes a standard isomonodromic linearization (Miwa-Jimbo
for P_II/P_III/P_IV/P_V, Kitaev for the degenerate P_V) at an algebraic
solution of the underlying Painleve flow, with every time-dependent
coefficient substituted in closed form.  Entries record, alongside the
matrices:

* the nonlinear flow system whose residuals certify the closed forms,
* probe boxes and basepoints used by every numeric check downstream,
* the documented closed forms of the reduction data (f, h, R, M, tau,
  gauge) and the expected classical target, used as oracles and for
  human-readable manifests.

The catalog is constructed once and never mutated afterwards; concurrent
reads are safe.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Mapping

from . import expr as fe
from .expr import Binding, Expr, T, X
from .scalarize import ScalarPair
from .targets import ClassicalTarget

__all__ = [
    "ComplexRect",
    "LaxPair",
    "CatalogEntry",
    "EntryNotFoundError",
    "list_entries",
    "list_negative_entries",
    "lookup",
    "instantiate",
    "flow_residual",
    "manifest",
    "manifest_json",
]

F = Fraction


class EntryNotFoundError(KeyError):
    pass


@dataclass(frozen=True)
class ComplexRect:
    """Axis-aligned rectangle in the complex plane."""

    re_lo: float
    re_hi: float
    im_lo: float
    im_hi: float

    @property
    def center(self) -> complex:
        return complex(0.5 * (self.re_lo + self.re_hi), 0.5 * (self.im_lo + self.im_hi))

    def contains(self, z: complex, pad: float = 0.0) -> bool:
        return (self.re_lo - pad <= z.real <= self.re_hi + pad
                and self.im_lo - pad <= z.imag <= self.im_hi + pad)

    def inflated(self, factor: float) -> "ComplexRect":
        c = self.center
        hre = 0.5 * (self.re_hi - self.re_lo) * factor
        him = 0.5 * (self.im_hi - self.im_lo) * factor
        return ComplexRect(c.real - hre, c.real + hre, c.imag - him, c.imag + him)

    def diagonal(self, n: int) -> list[complex]:
        """n deterministic points from corner to corner."""
        if n == 1:
            return [self.center]
        return [
            complex(
                self.re_lo + (self.re_hi - self.re_lo) * k / (n - 1),
                self.im_lo + (self.im_hi - self.im_lo) * k / (n - 1),
            )
            for k in range(n)
        ]

    def random(self, rng) -> complex:
        return complex(
            rng.uniform(self.re_lo, self.re_hi),
            rng.uniform(self.im_lo, self.im_hi),
        )


DEFAULT_X_BOX = ComplexRect(1.1, 2.5, -0.2, 0.2)
DEFAULT_T_BOX = ComplexRect(0.5, 1.5, -0.2, 0.2)


@dataclass(frozen=True)
class LaxPair:
    """Coefficient matrices A(x,t), B(x,t) of the two linear systems.

    Both matrices are traceless, and every entry is a finite sum of
    products of one-variable factors (guaranteed by construction from the
    family templates).  ``singular_x``/``singular_t`` list the points every
    probe, path and grid must avoid (poles of entries plus zeros of the
    off-diagonal entries used for scalarization)."""

    a: tuple[tuple[Expr, Expr], tuple[Expr, Expr]]
    b: tuple[tuple[Expr, Expr], tuple[Expr, Expr]]
    params: Mapping[str, complex] = field(default_factory=dict)
    singular_x: tuple[complex, ...] = ()
    singular_t: tuple[complex, ...] = ()


@dataclass
class CatalogEntry:
    """One shipped reduction case.  Immutable after construction."""

    id: str
    family: str
    component: str                      # which solution component scalarizes
    params: dict[str, complex]
    params_exact: dict[str, Fraction | complex]
    closed_forms: dict[str, Expr]       # y, z, u/w as functions of t
    lax: LaxPair | None
    scalar: ScalarPair | None           # direct scalar pair (Kitaev route)
    flow_exprs: tuple[Expr, ...]
    basepoint_x: complex
    box_x: ComplexRect
    box_t: ComplexRect
    expected_target: ClassicalTarget
    expected_case: str
    expected_exponent_a: complex | None
    reduction_closed_forms: dict[str, Expr]   # f, h, R, M, tau, gauge
    pre_substitution: str | None = None
    metadata: dict[str, str] = field(default_factory=dict)
    documented_target_scale: str | None = None

    @property
    def singular_x(self) -> tuple[complex, ...]:
        if self.lax is not None:
            return self.lax.singular_x
        return self.metadata_singular_x

    @property
    def singular_t(self) -> tuple[complex, ...]:
        if self.lax is not None:
            return self.lax.singular_t
        return self.metadata_singular_t

    metadata_singular_x: tuple[complex, ...] = ()
    metadata_singular_t: tuple[complex, ...] = ()

    @property
    def is_negative(self) -> bool:
        return self.id.startswith("negative.")

    def binding(self, x: complex | None = None, t: complex | None = None) -> Binding:
        return Binding(x=x, t=t, params=self.params)

    def probe_bindings(self, n: int = 12) -> list[Binding]:
        """Deterministic joint (x, t) probes; the two diagonals run in
        opposite directions so x and t do not stay proportional."""
        xs = self.box_x.diagonal(n)
        ts = list(reversed(self.box_t.diagonal(n)))
        return [self.binding(x=x, t=t) for x, t in zip(xs, ts)]

    def grid_points(self, n: int = 5) -> list[tuple[complex, complex]]:
        xs = self.box_x.diagonal(n)
        ts = self.box_t.diagonal(n)
        return [(x, t) for x in xs for t in ts]


def _c(v) -> Expr:
    return fe.const(complex(v))


def _pow(base: Expr, k) -> Expr:
    return fe.pow_any(base, k)


def _as_complex(v) -> complex:
    return complex(v)


# ---------------------------------------------------------------------------
# Family templates.  Each takes the closed forms (expressions in t) plus the
# exact parameter values and returns (A, B, flow residual expressions).

def _pii_template(y: Expr, z: Expr, u: Expr, theta) -> tuple:
    th = _c(theta)
    a11 = X**2 + z + T / 2
    a12 = u * X - u * y
    a21 = -2 * z * X / u - 2 * (th + y * z) / u
    a = ((a11, a12), (a21, fe.neg(a11)))
    b11 = X / 2
    b12 = u / 2
    b21 = fe.neg(z / u)
    b = ((b11, b12), (b21, fe.neg(b11)))
    dy = fe.differentiate(y, "t")
    dz = fe.differentiate(z, "t")
    du = fe.differentiate(u, "t")
    flows = (
        dy - (z + y * y + T / 2),
        dz - (-2 * y * z - th),
        du / u + y,
    )
    return a, b, flows


def _piii_template(y: Expr, z: Expr, w: Expr, theta0, theta_inf) -> tuple:
    th0 = _c(theta0)
    thi = _c(theta_inf)
    k = (z - T) * y + (thi + th0) / 2 * ((z - T) / z) + (thi - th0) / 2
    a11 = T / 2 - thi / (2 * X) + (z - T / 2) / X**2
    a12 = fe.neg(y * w * z / X) - w * z / X**2
    a21 = fe.neg(k / (w * X)) + (z - T) / (w * X**2)
    a = ((a11, a12), (a21, fe.neg(a11)))
    b11 = X / 2 + (T / 2 - z) / (X * T)
    b12 = fe.neg(y * w * z / T) + w * z / (X * T)
    b21 = fe.neg(k / (w * T)) - (z - T) / (w * X * T)
    b = ((b11, b12), (b21, fe.neg(b11)))
    dy = fe.differentiate(y, "t")
    dz = fe.differentiate(z, "t")
    dw = fe.differentiate(w, "t")
    flows = (
        T * dy - (4 * z * y**2 - 2 * T * y**2 + (2 * thi - 1) * y + 2 * T),
        T * dz - (-4 * y * z**2 + (4 * T * y - 2 * thi + 1) * z + (th0 + thi) * T),
        T * dw / w - (fe.neg((th0 + thi) * T / z) - 2 * T * y + thi),
    )
    return a, b, flows


def _piv_template(y: Expr, z: Expr, u: Expr, theta0, theta_inf) -> tuple:
    th0 = _c(theta0)
    thi = _c(theta_inf)
    a11 = X + T + (th0 - z) / X
    a12 = u - u * y / (2 * X)
    a21 = 2 * (z - th0 - thi) / u + 2 * z * (z - 2 * th0) / (u * y * X)
    a = ((a11, a12), (a21, fe.neg(a11)))
    b11 = X
    b12 = u
    b21 = 2 * (z - th0 - thi) / u
    b = ((b11, b12), (b21, fe.neg(b11)))
    dy = fe.differentiate(y, "t")
    dz = fe.differentiate(z, "t")
    du = fe.differentiate(u, "t")
    flows = (
        dy - (-4 * z + y**2 + 2 * T * y + 4 * th0),
        dz - (-2 * z**2 / y + (fe.neg(y) + 4 * th0 / y) * z + (th0 + thi) * y),
        du / u + y + 2 * T,
    )
    return a, b, flows


def _piv_template_y_const_minus2t(z: Expr, u: Expr, theta0, theta_inf) -> tuple:
    # y = -2t makes a couple of flow terms 0/0-free only after substitution;
    # the generic template handles it fine since y never vanishes on the
    # probe boxes (t is bounded away from 0).
    y = -2 * T
    return _piv_template(y, z, u, theta0, theta_inf)


def _pv_template(y: Expr, z: Expr, u: Expr, theta0, theta1, theta_inf) -> tuple:
    th0 = _c(theta0)
    th1 = _c(theta1)
    thi = _c(theta_inf)
    s1 = (th0 - th1 + thi) / 2   # coefficient in the (x-1) residue
    s2 = (th0 + th1 + thi) / 2
    a11 = T / 2 + (z + th0 / 2) / X - (z + (th0 + thi) / 2) / (X - 1)
    a12 = fe.neg(u * (z + th0) / X) + u * y * (z + s1) / (X - 1)
    a21 = z / (u * X) - (z + s2) / (u * y * (X - 1))
    a = ((a11, a12), (a21, fe.neg(a11)))
    b11 = X / 2
    b12 = fe.neg(u * (z + th0 - y * (z + s1)) / T)
    b21 = (z - (z + s2) / y) / (u * T)
    b = ((b11, b12), (b21, fe.neg(b11)))
    dy = fe.differentiate(y, "t")
    dz = fe.differentiate(z, "t")
    du = fe.differentiate(u, "t")
    flows = (
        T * dy - (T * y - 2 * z * (y - 1) ** 2 - (y - 1) * (s1 * y - (3 * th0 + th1 + thi) / 2)),
        T * dz - (y * z * (z + s1) - ((z + th0) / y) * (z + s2)),
        T * du / u - (-2 * z - th0 + y * (z + s1) + (z + s2) / y),
    )
    return a, b, flows


# ---------------------------------------------------------------------------
# Entry builders

_DEFAULT_PARAMS: dict[str, dict[str, Fraction]] = {
    "PII.y0": {"theta": F(1, 2)},
    "PII.y_inv_t": {"theta": F(-1, 2)},
    "PIII.y1": {"theta_inf": F(5, 2)},
    "PIV.y_m2t": {"theta0": F(1, 2), "theta_inf": F(1, 2)},
    "PIV.y_m2t3": {"theta0": F(-1, 6), "theta_inf": F(1, 2)},
    "PV.y_lin": {"theta1": F(3)},
    "PV.y_m1": {"theta_inf": F(1, 2)},
    "PVdeg.kitaev_sqrt": {"kappa": F(1), "mu": F(1, 2)},
    "negative.PII_bad_y1": {"theta": F(1, 2)},
}


def _merge_params(entry_id: str, overrides: Mapping | None) -> dict:
    params = dict(_DEFAULT_PARAMS[entry_id])
    if overrides:
        for key, val in overrides.items():
            if key not in params:
                raise EntryNotFoundError(
                    f"entry {entry_id!r} has no parameter {key!r}")
            params[key] = val
    return params


def _build_pii_y0(p) -> CatalogEntry:
    theta = p["theta"]
    y = _c(0)
    z = fe.neg(T / 2)
    u = _c(1)
    a, b, flows = _pii_template(y, z, u, theta)
    lax = LaxPair(a, b, params={}, singular_x=(0j,), singular_t=())
    red = {
        "f": 2 * X,
        "h": _c(0),
        "R": _c(0),
        "M": _c(0),
        "tau": X**2 + T,
        "gauge": _c(1),
    }
    return CatalogEntry(
        id="PII.y0", family="PII", component="first",
        params={k: _as_complex(v) for k, v in p.items()}, params_exact=dict(p),
        closed_forms={"y": y, "z": z, "u": u},
        lax=lax, scalar=None, flow_exprs=flows,
        basepoint_x=1.0 + 0j, box_x=DEFAULT_X_BOX, box_t=DEFAULT_T_BOX,
        expected_target=ClassicalTarget.airy(4 ** (1 / 3)),
        documented_target_scale="4^(1/3)",
        expected_case="EQ3", expected_exponent_a=0j,
        reduction_closed_forms=red,
        metadata={"solution": "y = 0 at alpha = 0"},
    )


def _build_pii_y_inv_t(p) -> CatalogEntry:
    theta = p["theta"]
    y = fe.neg(1 / T)
    z = fe.neg(T / 2)
    u = T
    a, b, flows = _pii_template(y, z, u, theta)
    lax = LaxPair(a, b, params={}, singular_x=(0j,), singular_t=(0j,))
    red = {
        "f": 2 * X,
        "h": _c(0),
        "R": _c(0),
        "M": _c(0),
        "tau": X**2 + T,
        "gauge": _c(1),
    }
    return CatalogEntry(
        id="PII.y_inv_t", family="PII", component="second",
        params={k: _as_complex(v) for k, v in p.items()}, params_exact=dict(p),
        closed_forms={"y": y, "z": z, "u": u},
        lax=lax, scalar=None, flow_exprs=flows,
        basepoint_x=1.0 + 0j, box_x=DEFAULT_X_BOX, box_t=DEFAULT_T_BOX,
        expected_target=ClassicalTarget.airy(4 ** (1 / 3)),
        documented_target_scale="4^(1/3)",
        expected_case="EQ3", expected_exponent_a=0j,
        reduction_closed_forms=red,
        metadata={"solution": "y = -1/t at alpha = 1; second component"},
    )


def _build_piii_y1(p) -> CatalogEntry:
    thi = p["theta_inf"]
    th0 = thi - 1
    y = _c(1)
    z = _c((1 - 2 * F(thi)) / 4) if isinstance(thi, (int, Fraction)) else _c((1 - 2 * thi) / 4)
    w = fe.exp(2 * T) * _pow(T, thi)
    a, b, flows = _piii_template(y, z, w, th0, thi)
    lax = LaxPair(a, b, params={}, singular_x=(0j, 1 + 0j, -1 + 0j), singular_t=(0j,))
    thi_c = _as_complex(thi)
    red = {
        "f": _c(0),
        "h": (X + 1) / (X * (X - 1)),
        "R": _c((thi_c - 1) / 2) / X - _c((2 * thi_c - 1) / 2) / (X - 1),
        "M": _c(-1),
        "tau": (X - 1) ** 2 * T / X,
        "gauge": _pow(X, _half_of(thi, -1)) * _pow(X - 1, _half_of(1, -2 * F(thi)) if isinstance(thi, (int, Fraction)) else (1 - 2 * thi) / 2),
    }
    return CatalogEntry(
        id="PIII.y1", family="PIII", component="first",
        params={"theta_inf": thi_c, "theta0": _as_complex(th0)},
        params_exact={"theta_inf": thi},
        closed_forms={"y": y, "z": z, "w": w},
        lax=lax, scalar=None, flow_exprs=flows,
        basepoint_x=2.0 + 0j, box_x=DEFAULT_X_BOX, box_t=DEFAULT_T_BOX,
        expected_target=ClassicalTarget.whittaker((thi_c - 1) / 2, 1 / 16),
        expected_case="EQ2", expected_exponent_a=thi_c - 1,
        reduction_closed_forms=red,
        metadata={"solution": "y = 1 with theta0 = theta_inf - 1"},
    )


def _half_of(a, b) -> Fraction | complex:
    """(a + b)/2 keeping exactness when both inputs are rational."""
    if isinstance(a, (int, Fraction)) and isinstance(b, (int, Fraction)):
        return (F(a) + F(b)) / 2
    return (complex(a) + complex(b)) / 2


def _build_piv_y_m2t(p) -> CatalogEntry:
    th0, thi = p["theta0"], p["theta_inf"]
    z = _c(1)
    u = _c(1)
    a, b, flows = _piv_template_y_const_minus2t(z, u, th0, thi)
    lax = LaxPair(a, b, params={}, singular_x=(0j,), singular_t=())
    red = {
        "f": _c(1),
        "h": 1 / X,
        "R": fe.neg(1 / (2 * X)),
        "M": _c(0),
        "tau": T * X + X**2 / 2,
        "gauge": _pow(X, F(-1, 2)),
    }
    return CatalogEntry(
        id="PIV.y_m2t", family="PIV", component="first",
        params={k: _as_complex(v) for k, v in p.items()}, params_exact=dict(p),
        closed_forms={"y": -2 * T, "z": z, "u": u},
        lax=lax, scalar=None, flow_exprs=flows,
        basepoint_x=1.0 + 0j, box_x=DEFAULT_X_BOX, box_t=DEFAULT_T_BOX,
        expected_target=ClassicalTarget.constant(1),
        expected_case="mixed", expected_exponent_a=0j,
        reduction_closed_forms=red,
        metadata={
            "solution": "y = -2t at theta0 = theta_inf = 1/2",
            "other_variant": "theta0 = -theta_inf = -1/2 (z = 0) yields the same scalar pair",
        },
    )


def _build_piv_y_m2t3(p) -> CatalogEntry:
    th0, thi = p["theta0"], p["theta_inf"]
    y = -2 * T / 3
    z = -2 * T**2 / 9
    u = fe.exp(-2 * T**2 / 3)
    a, b, flows = _piv_template(y, z, u, th0, thi)
    lax = LaxPair(a, b, params={}, singular_x=(0j,), singular_t=(0j,))
    red = {
        "f": _c(1),
        "h": 1 / (3 * X),
        "R": fe.neg(1 / (6 * X)),
        "M": 2 * T / 3,
        "tau": T * _pow(X, F(1, 3)) + F(3, 4) * _pow(X, F(4, 3)),
        "gauge": _pow(X, F(-1, 6)),
    }
    return CatalogEntry(
        id="PIV.y_m2t3", family="PIV", component="first",
        params={k: _as_complex(v) for k, v in p.items()}, params_exact=dict(p),
        closed_forms={"y": y, "z": z, "u": u},
        lax=lax, scalar=None, flow_exprs=flows,
        basepoint_x=1.0 + 0j, box_x=DEFAULT_X_BOX, box_t=DEFAULT_T_BOX,
        expected_target=ClassicalTarget.airy((3 / 4) ** (1 / 3)),
        documented_target_scale="(3/4)^(1/3)",
        expected_case="generic_EQ", expected_exponent_a=None,
        reduction_closed_forms=red,
        metadata={
            "solution": "y = -2t/3 at theta_inf = 1/2, theta0 = -1/6",
            "other_variant": "theta0 = 1/6 (z = -2t^2/9 + 1/3) yields the same scalar pair",
        },
    )


def _build_pv_y_lin(p) -> CatalogEntry:
    th1 = p["theta1"]
    if complex(th1) == 1:
        raise ValueError("theta1 = 1 degenerates the solution y = 1 - t/(theta1 - 1)")
    th0 = F(0) if isinstance(th1, (int, Fraction)) else 0.0
    thi = (F(2) - F(th1)) if isinstance(th1, (int, Fraction)) else 2 - th1
    th1_c = _as_complex(th1)
    y = 1 - T / _c(th1_c - 1)
    z = _c(0)
    # The flow for u forces exp(+t); checked against the integrability
    # condition directly.
    u = _pow(T, (F(2) - F(th1)) if isinstance(th1, (int, Fraction)) else 2 - th1) \
        * fe.exp(T) / (_c(th1_c - 1) - T)
    a, b, flows = _pv_template(y, z, u, th0, th1, thi)
    lax = LaxPair(a, b, params={},
                  singular_x=(0j, 1 + 0j),
                  singular_t=(0j, th1_c - 1))
    red = {
        "f": _c(0),
        "h": 1 / (X - 1),
        "R": _c((th1_c - 2) / 2) / (X - 1),
        "M": _c(-0.5),
        "tau": T * (X - 1),
        "gauge": _pow(X - 1, (F(th1) - 2) / 2 if isinstance(th1, (int, Fraction)) else (th1 - 2) / 2),
    }
    return CatalogEntry(
        id="PV.y_lin", family="PV", component="first",
        params={"theta1": th1_c, "theta0": 0j, "theta_inf": _as_complex(thi)},
        params_exact={"theta1": th1},
        closed_forms={"y": y, "z": z, "u": u},
        lax=lax, scalar=None, flow_exprs=flows,
        basepoint_x=2.0 + 0j, box_x=DEFAULT_X_BOX, box_t=DEFAULT_T_BOX,
        expected_target=ClassicalTarget.whittaker((1 - th1_c) / 2, th1_c**2 / 4),
        expected_case="EQ2", expected_exponent_a=1 - th1_c,
        reduction_closed_forms=red,
        metadata={"solution": "y = 1 - t/(theta1 - 1) at theta0 = 0, theta1 + theta_inf = 2"},
    )


def _build_pv_y_m1(p) -> CatalogEntry:
    thi = p["theta_inf"]
    th0 = F(1, 2)
    th1 = F(1, 2)
    thi_c = _as_complex(thi)
    y = _c(-1)
    z = fe.neg((T + 2 + 2 * _c(thi_c)) / 8)
    u = fe.exp(T / 2)
    a, b, flows = _pv_template(y, z, u, th0, th1, thi)
    lax = LaxPair(a, b, params={},
                  singular_x=(0j, 1 + 0j),
                  singular_t=(0j,))
    red = {
        "f": _c(1 - thi_c) / (X * (X - 1)),
        "h": (1 / X + 1 / (X - 1)) / 2,
        "R": fe.neg(1 / (4 * X)) - 1 / (4 * (X - 1)),
        "M": _c(-0.25),
        "tau": T * fe.sqrt(X * (X - 1))
        - _c(1 - thi_c) * fe.log((fe.sqrt(X) - fe.sqrt(X - 1)) / (fe.sqrt(X) + fe.sqrt(X - 1))),
        "gauge": _pow(X * (X - 1), F(-1, 4)),
    }
    return CatalogEntry(
        id="PV.y_m1", family="PV", component="first",
        params={"theta_inf": thi_c, "theta0": 0.5 + 0j, "theta1": 0.5 + 0j},
        params_exact={"theta_inf": thi},
        closed_forms={"y": y, "z": z, "u": u},
        lax=lax, scalar=None, flow_exprs=flows,
        basepoint_x=2.0 + 0j, box_x=DEFAULT_X_BOX, box_t=DEFAULT_T_BOX,
        expected_target=ClassicalTarget.constant(0.25),
        expected_case="generic_EQ", expected_exponent_a=0j,
        reduction_closed_forms=red,
        metadata={"solution": "y = -1 at theta0 = theta1 = 1/2, theta_inf free"},
    )


def _build_pvdeg_kitaev(p) -> CatalogEntry:
    kap = p["kappa"]
    mu = p["mu"]
    kap_c, mu_c = _as_complex(kap), _as_complex(mu)
    k_ = _c(kap_c)
    m_ = _c(mu_c)
    # Scalar pair in the square-root deformation variable z (stored in the
    # t slot; the original deformation parameter is t_orig = z^2).
    p1 = 1 / X + 1 / (X - 1) - k_ * T / (k_ * T * X + 1)
    q1 = (
        m_ / (2 * X**2)
        - 1 / (16 * (X - 1) ** 2)
        + (4 * m_ * k_ * T + 2 * m_ - 1) / (4 * X)
        + k_**2 * T**2 / (4 * (k_ * T + 1) * (1 + k_ * T * X))
        - (2 * m_ * k_**3 * T**3 + 6 * m_ * k_**2 * T**2 + 6 * m_ * k_ * T + 2 * m_ - 1)
        / (4 * (k_ * T + 1) * (X - 1))
    )
    p2 = 1 / (2 * k_ * X * (X - 1)) + T / (2 * (X - 1))
    q2 = fe.neg(1 / (4 * (X - 1))) + (1 / (2 * T)) * p2
    sp = ScalarPair(p1=p1, q1=q1, p2=p2, q2=q2, component="first",
                    params={"kappa": kap_c, "mu": mu_c})

    # Closed forms of the matrix residue data at y = 1 + kappa*z; the first
    # coefficient ODE certifies them (the a1 relation with the free constant
    # pinned to 0 is definitional).
    theta_inf = -mu_c * kap_c**2
    a2 = fe.neg(m_ * k_ / (2 * T))
    a1 = (fe.neg(2 * T / k_) - T**2) * a2
    ratio = a1 / a2
    dlog_a2 = fe.differentiate(a2, "t") / a2
    term1 = (T / 2) * dlog_a2
    flow = (
        fe.differentiate(term1, "t") / (2 * T)
        - _c(theta_inf) * fe.differentiate(ratio, "t") / (2 * T)
        - 2 * a2 - _c(theta_inf)
    )

    red = {
        "f": 1 / (2 * k_ * X * (X - 1)),
        "h": 1 / (2 * (X - 1)),
        "R": fe.neg(1 / (4 * (X - 1))),
        "M": 1 / (2 * T),
        "tau": T * _pow(X - 1, F(1, 2))
        - (_c(1j) / (2 * k_)) * fe.log((fe.sqrt(X - 1) - _c(1j)) / (fe.sqrt(X - 1) + _c(1j))),
        "gauge": _pow(X - 1, F(-1, 4)),
    }
    return CatalogEntry(
        id="PVdeg.kitaev_sqrt", family="PV_Kitaev", component="first",
        params={"kappa": kap_c, "mu": mu_c, "theta_inf": theta_inf},
        params_exact=dict(p),
        closed_forms={"a2": a2, "a1": a1},
        lax=None, scalar=sp, flow_exprs=(flow,),
        basepoint_x=2.0 + 0j, box_x=DEFAULT_X_BOX, box_t=DEFAULT_T_BOX,
        expected_target=ClassicalTarget.constant(2 * mu_c * kap_c**2),
        expected_case="generic_EQ", expected_exponent_a=None,
        reduction_closed_forms=red,
        pre_substitution="t = z^2",
        metadata={"solution": "y = 1 + kappa*sqrt(t), degenerate fifth flow (delta = 0)"},
        metadata_singular_x=(0j, 1 + 0j),
        metadata_singular_t=(0j,),
    )


def _build_negative_pii_bad_y1(p) -> CatalogEntry:
    # Deliberately corrupted: y = 1 is not a valid solution at theta = 1/2,
    # so the integrability condition fails at order one.
    theta = p["theta"]
    y = _c(1)
    z = fe.neg(T / 2)
    u = _c(1)
    a, b, flows = _pii_template(y, z, u, theta)
    lax = LaxPair(a, b, params={}, singular_x=(0j, 1 + 0j), singular_t=())
    red = {
        "f": 2 * X - 2,
        "h": _c(0),
        "R": X,
        "M": _c(0),
        "tau": X**2 - 2 * X + T,
        "gauge": fe.exp(X**2 / 2),
    }
    return CatalogEntry(
        id="negative.PII_bad_y1", family="PII", component="first",
        params={k: _as_complex(v) for k, v in p.items()}, params_exact=dict(p),
        closed_forms={"y": y, "z": z, "u": u},
        lax=lax, scalar=None, flow_exprs=flows,
        basepoint_x=2.0 + 0j, box_x=DEFAULT_X_BOX, box_t=DEFAULT_T_BOX,
        expected_target=ClassicalTarget.none(),
        expected_case="EQ3", expected_exponent_a=None,
        reduction_closed_forms=red,
        metadata={"corrupted": "y = 1 does not solve the flow at theta = 1/2"},
    )


_BUILDERS: dict[str, Callable[[Mapping], CatalogEntry]] = {
    "PII.y0": _build_pii_y0,
    "PII.y_inv_t": _build_pii_y_inv_t,
    "PIII.y1": _build_piii_y1,
    "PIV.y_m2t": _build_piv_y_m2t,
    "PIV.y_m2t3": _build_piv_y_m2t3,
    "PV.y_lin": _build_pv_y_lin,
    "PV.y_m1": _build_pv_y_m1,
    "PVdeg.kitaev_sqrt": _build_pvdeg_kitaev,
    "negative.PII_bad_y1": _build_negative_pii_bad_y1,
}

_POSITIVE_IDS = (
    "PII.y0",
    "PII.y_inv_t",
    "PIII.y1",
    "PIV.y_m2t",
    "PIV.y_m2t3",
    "PV.y_lin",
    "PV.y_m1",
    "PVdeg.kitaev_sqrt",
)

_NEGATIVE_IDS = ("negative.PII_bad_y1",)

_DEFAULT_CACHE: dict[str, CatalogEntry] = {}


def list_entries() -> list[str]:
    """The shipped positive entry ids, in stable order."""
    return list(_POSITIVE_IDS)


def list_negative_entries() -> list[str]:
    return list(_NEGATIVE_IDS)


def lookup(entry_id: str, overrides: Mapping | None = None) -> CatalogEntry:
    """Fetch an entry, optionally overriding its exact parameters."""
    if entry_id not in _BUILDERS:
        raise EntryNotFoundError(f"no catalog entry named {entry_id!r}")
    if overrides:
        params = _merge_params(entry_id, overrides)
        return _BUILDERS[entry_id](params)
    got = _DEFAULT_CACHE.get(entry_id)
    if got is None:
        got = _BUILDERS[entry_id](dict(_DEFAULT_PARAMS[entry_id]))
        _DEFAULT_CACHE[entry_id] = got
    return got


def instantiate(entry_id: str, overrides: Mapping | None = None):
    """Return (LaxPair or ScalarPair, entry) with all closed forms substituted."""
    entry = lookup(entry_id, overrides)
    return (entry.lax if entry.lax is not None else entry.scalar), entry


# Keyed by identity; the entry itself is pinned in the value so a recycled
# id can never serve another entry's compiled flows.
_FLOW_CACHE: dict[int, tuple[CatalogEntry, list[Callable[[complex, complex], complex]]]] = {}


def flow_residual(entry_or_id, t_probe: complex) -> float:
    """Max modulus of the nonlinear flow residuals at one deformation value.

    Vanishes (to rounding) when the entry's closed forms really solve the
    family's compatibility flow."""
    entry = entry_or_id if isinstance(entry_or_id, CatalogEntry) else lookup(entry_or_id)
    cached = _FLOW_CACHE.get(id(entry))
    if cached is not None and cached[0] is entry:
        fns = cached[1]
    else:
        fns = [fe.compile_expr(e, entry.params) for e in entry.flow_exprs]
        _FLOW_CACHE[id(entry)] = (entry, fns)
    t = complex(t_probe)
    return max(abs(f(0j, t)) for f in fns)


# ---------------------------------------------------------------------------
# Manifests

def _complex_json(z: complex) -> dict:
    return {"re": z.real, "im": z.imag}


def _param_json(v) -> object:
    if isinstance(v, Fraction):
        return str(v)
    if isinstance(v, int):
        return str(v)
    return _complex_json(complex(v))


def manifest(entry: CatalogEntry) -> dict:
    """Human-readable description of an entry (stable key order)."""
    doc: dict = {
        "schema": "fuchs-reduce/1",
        "id": entry.id,
        "family": entry.family,
        "component": entry.component,
        "negative_control": entry.is_negative,
        "parameters": {k: _param_json(v) for k, v in sorted(entry.params_exact.items())},
        "closed_forms": {k: fe.to_string(v) for k, v in sorted(entry.closed_forms.items())},
        "reduction": {k: fe.to_string(v) for k, v in sorted(entry.reduction_closed_forms.items())},
        "case": entry.expected_case,
        "target": entry.expected_target.to_json(),
        "basepoint_x": _complex_json(entry.basepoint_x),
        "box_x": [entry.box_x.re_lo, entry.box_x.re_hi, entry.box_x.im_lo, entry.box_x.im_hi],
        "box_t": [entry.box_t.re_lo, entry.box_t.re_hi, entry.box_t.im_lo, entry.box_t.im_hi],
        "singular_x": [_complex_json(z) for z in entry.singular_x],
        "singular_t": [_complex_json(z) for z in entry.singular_t],
        "metadata": dict(sorted(entry.metadata.items())),
    }
    if entry.documented_target_scale is not None:
        doc["target"]["scale_closed_form"] = entry.documented_target_scale
    if entry.expected_exponent_a is not None:
        doc["exponent_a"] = _complex_json(entry.expected_exponent_a)
    if entry.pre_substitution is not None:
        doc["pre_substitution"] = entry.pre_substitution
    return doc


def manifest_json(entry: CatalogEntry) -> str:
    return json.dumps(manifest(entry), indent=2, sort_keys=False) + "\n"


def write_manifests(directory) -> list[str]:
    """Write one manifest file per entry; returns the paths written."""
    from pathlib import Path as _P

    outdir = _P(directory)
    outdir.mkdir(parents=True, exist_ok=True)
    written = []
    for entry_id in (*_POSITIVE_IDS, *_NEGATIVE_IDS):
        path = outdir / f"{entry_id}.json"
        path.write_text(manifest_json(lookup(entry_id)))
        written.append(str(path))
    return written

"""Theory engine: case classification, Hurst exponents, variance constants and V(t)."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from enum import Enum
from typing import TYPE_CHECKING, Any, NamedTuple

import numpy as np
from scipy import integrate

from .const import (
    BOUNDARY_TOLERANCE,
    DEFAULT_C_HORIZON,
    DEFAULT_TAIL_HORIZON,
    LOGGER,
    MAX_TAIL_FRACTION,
)
from .exceptions import (
    DomainError,
    InvalidParameterError,
    NonConvergenceError,
    TailFitError,
    UnsupportedCaseError,
)
from .heavytail import LifetimeLaw, ParetoDist
from .helpers import write_csv, write_json_atomic
from .onoff import AutocovTable, OnOffParams, TailFit, r_tail_asymptote, solve_pi11

if TYPE_CHECKING:
    import os
    from collections.abc import Sequence
    from pathlib import Path

    from numpy.typing import ArrayLike

    from .sessions import SessionParams

SIGN_CONVENTION_NOTE = "C(k) = mu_W * B(k) - A(k), the negative of A - mu_W * B; variances and H are unaffected"


class CaseId(str, Enum):
    """Region of the (alpha_min, alpha_sess) plane."""

    CASE3 = "Case3"  # fBm limit
    CASE4 = "Case4"  # Brownian motion limit
    BOUNDARY34 = "Boundary34"
    UNSUPPORTED = "Case1/Case2"  # no limit law implemented


@dataclass(frozen=True)
class CaseClassification:
    """Case of a pair of tail indices."""

    case_id: CaseId
    alpha_min: float
    alpha_sess: float
    supported: bool


def classify(alpha_min: float, alpha_sess: float) -> CaseClassification:
    """
    Classify a pair of tail indices.

    Case3: alpha_sess > 1 and 2 < alpha_min + alpha_sess < 3.
    Case4: alpha_sess < 2 and 3 < alpha_min + alpha_sess < 4.
    Boundary34: alpha_min + alpha_sess = 3 (within 1e-9).
    Every other point is reported as the unsupported Case1/Case2 region.

    Raises:
        DomainError: If alpha_min is outside (1, 2) or alpha_sess <= 0

    """
    if not 1 < alpha_min < 2:
        msg = f"alpha_min must lie in (1, 2), got {alpha_min}"
        raise DomainError(msg)
    if not alpha_sess > 0:
        msg = f"alpha_sess must be positive, got {alpha_sess}"
        raise DomainError(msg)
    total = alpha_min + alpha_sess
    if math.isclose(total, 3.0, rel_tol=0.0, abs_tol=BOUNDARY_TOLERANCE):
        case_id = CaseId.BOUNDARY34
    elif alpha_sess > 1 and 2 < total < 3:
        case_id = CaseId.CASE3
    elif alpha_sess < 2 and 3 < total < 4:
        case_id = CaseId.CASE4
    else:
        case_id = CaseId.UNSUPPORTED
    return CaseClassification(
        case_id=case_id,
        alpha_min=alpha_min,
        alpha_sess=alpha_sess,
        supported=case_id is not CaseId.UNSUPPORTED,
    )


class LimitVariance(NamedTuple):
    """Limit variance scale with a flag for equal on/off indices."""

    value: float
    outside_scope: bool


def sigma_lim_sq(oo: OnOffParams) -> LimitVariance:
    """
    Return sigma_lim**2 = 2 mu_max**2 / (mu_W**3 (a - 1)(3 - a)(2 - a)), a = alpha_min.

    The closed form is stated for distinct on and off indices; with equal
    indices it is evaluated with mu_max = max(mu_on, mu_off) and flagged.
    """
    value = oo.sigma_lim_sq
    if oo.equal_indices:
        LOGGER.debug("sigma_lim^2 evaluated for equal on/off indices %.3g (flagged)", oo.alpha_min)
    return LimitVariance(value=value, outside_scope=oo.equal_indices)


def sigma_sq(alpha_min: float, alpha_sess: float, limit_variance: float) -> float:
    """Case 3 variance scale of the fBm limit."""
    a, s = alpha_min, alpha_sess
    return limit_variance * (3 - a) * (2 - a) / ((s - 1) * (3 - a - s) * (4 - a - s))


class IntegralConstant(NamedTuple):
    """Value of c with the parts that make it up."""

    value: float
    head: float
    tail: float
    horizon: float


def c_constant(
    oo: OnOffParams,
    lifetime: LifetimeLaw,
    dt: float | None = None,
    horizon: float = DEFAULT_C_HORIZON,
    *,
    table: AutocovTable | None = None,
    tail: tuple[float, float] | None = None,
    max_tail_fraction: float = MAX_TAIL_FRACTION,
) -> IntegralConstant:
    """
    Integrate c = int_0^inf r(x) Hbar_I(x) dx.

    The head over [0, T] is a trapezoid rule on the renewal grid. Beyond T,
    r(x) is replaced by amplitude * x**power and the product is integrated
    in closed form.

    Args:
        oo: On-off parameters
        lifetime: Session lifetime law
        dt: Renewal grid step
        horizon: Head integration limit T
        table: Precomputed autocovariance (its horizon is used as T)
        tail: (amplitude, power) of r beyond T; fitted from the table when omitted
        max_tail_fraction: Largest tolerated tail / head ratio

    Returns:
        IntegralConstant(value, head, tail, horizon)

    Raises:
        NonConvergenceError: If the tail diverges or exceeds max_tail_fraction of the head

    """
    if table is None:
        table = solve_pi11(oo, dt, horizon)
    if tail is None:
        fit = r_tail_asymptote(oo, table)
        tail = (fit.c_r, fit.exponent)
    amplitude, power = tail
    t = table.t
    end = table.horizon
    head = float(integrate.trapezoid(table.values * np.asarray(lifetime.integrated_tail(t), dtype=float), t))
    tail_value = amplitude * lifetime.integrated_tail_power_moment(end, power)
    if not math.isfinite(tail_value):
        msg = f"c diverges: r(x) Hbar_I(x) decays too slowly beyond {end:.4g}"
        raise NonConvergenceError(msg)
    if abs(tail_value) > max_tail_fraction * abs(head):
        msg = (
            f"Tail correction {tail_value:.6g} is {abs(tail_value) / abs(head):.1%} of the head "
            f"{head:.6g} at horizon {end:.4g} (limit {max_tail_fraction:.0%})"
        )
        raise NonConvergenceError(msg)
    LOGGER.debug("c = %.6g (head %.6g, tail %.6g, T=%.4g)", head + tail_value, head, tail_value, end)
    return IntegralConstant(value=head + tail_value, head=head, tail=tail_value, horizon=end)


@dataclass(frozen=True, eq=False)
class VarianceIntegrals:
    """
    J(y) = int_0^y g and W(t) = int_0^t J for g = r * Hbar_I, with a power-law closure.

    V(t) = 2 W(t). Beyond the grid, g(x) = amplitude * x**power.
    """

    t: np.ndarray
    j: np.ndarray
    w: np.ndarray
    amplitude: float | None = None
    power: float | None = None

    @property
    def horizon(self) -> float:
        """Last grid time."""
        return float(self.t[-1])

    def _closure(self) -> tuple[float, float]:
        if self.amplitude is None or self.power is None:
            msg = f"No tail closure available beyond {self.horizon:.4g}"
            raise InvalidParameterError(msg)
        return self.amplitude, self.power

    def j_at(self, t: np.ndarray) -> np.ndarray:
        """Evaluate J, using the closure beyond the grid."""
        out = np.interp(t, self.t, self.j)
        beyond = t > self.horizon
        if np.any(beyond):
            amp, p = self._closure()
            big_t, y = self.horizon, t[beyond]
            if math.isclose(p, -1.0):
                extra = amp * np.log(y / big_t)
            else:
                extra = amp * (y ** (p + 1) - big_t ** (p + 1)) / (p + 1)
            out[beyond] = self.j[-1] + extra
        return out

    def w_at(self, t: np.ndarray) -> np.ndarray:
        """Evaluate W, using the closure beyond the grid."""
        out = np.interp(t, self.t, self.w)
        beyond = t > self.horizon
        if np.any(beyond):
            amp, p = self._closure()
            big_t, y = self.horizon, t[beyond]
            span = y - big_t
            if math.isclose(p, -1.0):
                extra = amp * (y * np.log(y / big_t) - span)
            elif math.isclose(p, -2.0):
                extra = amp * (-np.log(y / big_t) + span / big_t)
            else:
                extra = amp / (p + 1) * ((y ** (p + 2) - big_t ** (p + 2)) / (p + 2) - big_t ** (p + 1) * span)
            out[beyond] = self.w[-1] + self.j[-1] * span + extra
        return out


def variance_integrals(
    oo: OnOffParams,
    lifetime: LifetimeLaw,
    *,
    dt: float | None = None,
    horizon: float = DEFAULT_TAIL_HORIZON,
    table: AutocovTable | None = None,
    tail_fit: TailFit | None = None,
) -> VarianceIntegrals:
    """Build the cumulative integrals behind V(t) on the renewal grid."""
    if table is None:
        table = solve_pi11(oo, dt, horizon)
    t = table.t
    g = table.values * np.asarray(lifetime.integrated_tail(t), dtype=float)
    j = integrate.cumulative_trapezoid(g, t, initial=0.0)
    w = integrate.cumulative_trapezoid(j, t, initial=0.0)
    amplitude = power = None
    if isinstance(lifetime, ParetoDist) and table.horizon >= lifetime.x_m:
        try:
            fit = tail_fit or r_tail_asymptote(oo, table)
        except (DomainError, TailFitError) as err:
            LOGGER.debug("No power-law closure for V(t): %s", err)
        else:
            s = lifetime.alpha
            amplitude = fit.c_r * lifetime.slowly_varying_constant / (s - 1)
            power = fit.exponent + 1 - s
    return VarianceIntegrals(t=t, j=j, w=w, amplitude=amplitude, power=power)


def variance_profile(
    oo: OnOffParams,
    lifetime: LifetimeLaw,
    t_grid: ArrayLike,
    *,
    dt: float | None = None,
    horizon: float = DEFAULT_TAIL_HORIZON,
    table: AutocovTable | None = None,
    tail_fit: TailFit | None = None,
) -> np.ndarray:
    """
    Evaluate V(t) = 2 int_0^t int_0^y r(x) Hbar_I(x) dx dy.

    Times inside the renewal horizon use a double cumulative trapezoid;
    later times use the closed-form power-law tail of r(x) Hbar_I(x).
    """
    t_grid = np.asarray(t_grid, dtype=float)
    if np.any(t_grid < 0):
        msg = "Variance profile times must be non-negative"
        raise InvalidParameterError(msg)
    integrals = variance_integrals(oo, lifetime, dt=dt, horizon=horizon, table=table, tail_fit=tail_fit)
    return 2.0 * integrals.w_at(t_grid)


def variance_split(
    integrals: VarianceIntegrals,
    x_cut: float,
    t_grid: ArrayLike,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Split V(t) = I1 + I2 + I3 at a cut point X <= t.

    I1 = 2 int_0^X J, I2 = 2 J(X) (t - X), I3 = 2 int_X^t (J(y) - J(X)) dy.
    """
    t_grid = np.asarray(t_grid, dtype=float)
    if x_cut < 0 or np.any(t_grid < x_cut):
        msg = f"Times must not precede the cut point {x_cut}"
        raise InvalidParameterError(msg)
    cut = np.array([x_cut])
    w_cut = float(integrals.w_at(cut)[0])
    c_cut = float(integrals.j_at(cut)[0])
    i1 = np.full(t_grid.shape, 2.0 * w_cut)
    i2 = 2.0 * c_cut * (t_grid - x_cut)
    i3 = 2.0 * integrals.w_at(t_grid) - i1 - i2
    return i1, i2, i3


def variance_asymptote(
    oo: OnOffParams,
    lifetime: ParetoDist,
    t: ArrayLike,
    tail_fit: TailFit,
    *,
    c: float | None = None,
    second_order: bool = False,
) -> np.ndarray:
    """
    Return the large-t form of V(t).

    Case 3: sigma**2 L_V L_r t**(4 - a - s). Case 4 and the boundary:
    2 c t, plus (second_order) the same power term, whose coefficient is
    negative there.
    """
    t = np.asarray(t, dtype=float)
    a, s = oo.alpha_min, lifetime.alpha
    cls = classify(a, s)
    power_term = None
    if cls.case_id is not CaseId.BOUNDARY34:
        scale = sigma_sq(a, s, tail_fit.sigma_lim_sq) * lifetime.slowly_varying_constant * tail_fit.l_r
        power_term = scale * t ** (4 - a - s)
    if cls.case_id is CaseId.CASE3:
        return power_term
    if cls.case_id is CaseId.UNSUPPORTED:
        msg = f"No variance asymptote for {cls.case_id.value}"
        raise UnsupportedCaseError(msg)
    if c is None:
        msg = "The linear asymptote needs the constant c"
        raise InvalidParameterError(msg)
    linear = 2.0 * c * t
    if second_order and power_term is not None:
        return linear + power_term
    return linear


def write_profile_csv(path: str | os.PathLike[str], t: np.ndarray, v: np.ndarray) -> Path:
    """Write columns t,V."""
    return write_csv(path, {"t": np.asarray(t, dtype=float), "V": np.asarray(v, dtype=float)})


@dataclass(frozen=True)
class TheoryReport:
    """Limit quantities for one parameter point."""

    h_hybrid: float | None
    h_isp: float
    h_onoff: float
    classification: CaseClassification
    sigma_lim_sq: float | None = None
    sigma_lim_sq_outside_scope: bool = False
    sigma_sq: float | None = None
    c: float | None = None
    c_tail: float | None = None
    notes: list[str] = field(default_factory=list)

    def as_dict(self) -> dict[str, Any]:
        """Return the flat JSON form."""
        data = asdict(self)
        classification = data.pop("classification")
        data["case_id"] = self.classification.case_id.value
        data["alpha_min"] = classification["alpha_min"]
        data["alpha_sess"] = classification["alpha_sess"]
        data["supported"] = classification["supported"]
        return data

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> TheoryReport:
        """Rebuild a report from its flat JSON form."""
        classification = CaseClassification(
            case_id=CaseId(data["case_id"]),
            alpha_min=data["alpha_min"],
            alpha_sess=data["alpha_sess"],
            supported=data["supported"],
        )
        return cls(
            h_hybrid=data["h_hybrid"],
            h_isp=data["h_isp"],
            h_onoff=data["h_onoff"],
            classification=classification,
            sigma_lim_sq=data.get("sigma_lim_sq"),
            sigma_lim_sq_outside_scope=data.get("sigma_lim_sq_outside_scope", False),
            sigma_sq=data.get("sigma_sq"),
            c=data.get("c"),
            c_tail=data.get("c_tail"),
            notes=list(data.get("notes", [])),
        )

    def to_json(self, path: str | os.PathLike[str]) -> Path:
        """Atomically write the report as JSON."""
        return write_json_atomic(path, self.as_dict())


def _hurst_triple(cls: CaseClassification) -> tuple[float | None, float, float]:
    a, s = cls.alpha_min, cls.alpha_sess
    if cls.case_id is CaseId.CASE3:
        h_hybrid = (4 - a - s) / 2
    elif cls.supported:
        h_hybrid = 0.5
    else:
        h_hybrid = None
    return h_hybrid, (3 - s) / 2, (3 - a) / 2


def theory_report_from_indices(alpha_min: float, alpha_sess: float, notes: Sequence[str] = ()) -> TheoryReport:
    """Classify a raw index pair and fill in the Hurst exponents only."""
    cls = classify(alpha_min, alpha_sess)
    h_hybrid, h_isp, h_onoff = _hurst_triple(cls)
    notes = list(notes)
    if not cls.supported:
        notes.append("No limit law is implemented for this region")
    return TheoryReport(h_hybrid=h_hybrid, h_isp=h_isp, h_onoff=h_onoff, classification=cls, notes=notes)


def hurst_formulas(
    oo: OnOffParams,
    sess: SessionParams,
    *,
    dt: float | None = None,
    c_horizon: float = DEFAULT_C_HORIZON,
    max_tail_fraction: float = MAX_TAIL_FRACTION,
) -> TheoryReport:
    """
    Compute the full theory report for a supported parameter point.

    Args:
        oo: On-off parameters
        sess: Session parameters
        dt: Renewal grid step for c
        c_horizon: Head integration limit for c
        max_tail_fraction: Convergence guard for c

    Returns:
        TheoryReport with sigma_sq (Case 3) or c (Case 4 and the boundary)

    Raises:
        UnsupportedCaseError: For the Case1/Case2 region

    """
    cls = classify(oo.alpha_min, sess.lifetime.alpha)
    if not cls.supported:
        msg = f"No limit law for alpha_min={cls.alpha_min}, alpha_sess={cls.alpha_sess} ({cls.case_id.value})"
        raise UnsupportedCaseError(msg)
    h_hybrid, h_isp, h_onoff = _hurst_triple(cls)
    limit = sigma_lim_sq(oo)
    notes = [SIGN_CONVENTION_NOTE]
    if limit.outside_scope:
        notes.append("Equal on/off tail indices: sigma_lim^2 evaluated outside its stated scope")

    variance_scale = c_value = c_tail = None
    if cls.case_id is CaseId.CASE3:
        variance_scale = sigma_sq(cls.alpha_min, cls.alpha_sess, limit.value)
    else:
        try:
            constant = c_constant(oo, sess.lifetime, dt, c_horizon, max_tail_fraction=max_tail_fraction)
        except NonConvergenceError as err:
            LOGGER.warning("Constant c not reported: %s", err)
            notes.append(f"c not reported: {err}")
        else:
            c_value, c_tail = constant.value, constant.tail

    return TheoryReport(
        h_hybrid=h_hybrid,
        h_isp=h_isp,
        h_onoff=h_onoff,
        classification=cls,
        sigma_lim_sq=limit.value,
        sigma_lim_sq_outside_scope=limit.outside_scope,
        sigma_sq=variance_scale,
        c=c_value,
        c_tail=c_tail,
        notes=notes,
    )

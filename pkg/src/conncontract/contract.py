"""Optimal salary + unit-bonus menus for ordered device types.

Pipeline: the first-order bonus for every type, ironing to restore a
nondecreasing bonus schedule, salaries from the binding local downward
incentive constraints, and the implied effort. Feasibility is certified
independently by checking every IR and IC inequality.

Notation: types are sorted by ``lam``; ``q`` are masses and
``S_i = sum_{t >= i} q_t`` the upper tail mass. With salaries substituted,
the developer's objective separates into per-type terms

    Z * (2 * eps * w_i * b_i - d_i * b_i**2),
    w_i = q_i * lam_i,
    d_i = 2 * q_i * lam_i + (lam_i * S_i - lam_{i+1} * S_{i+1}) / (theta - 1),

with ``lam_{L+1} * S_{L+1} = 0``. ``d_i`` can be nonpositive when the next
type is much stronger; such a term grows without bound in ``b_i`` and the
type has to be pooled with its successor.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .params import EconParams
from .profiles import TypeProfile, profiles_from_lambdas
from .validation import ValidationError, check_1d

FEAS_TOL = 1e-9


@dataclass(frozen=True)
class ContractItem:
    salary: float
    unit_bonus: float
    block_count: float
    total_reward: float


@dataclass(frozen=True, eq=False)
class ContractMenu:
    items: tuple[ContractItem, ...]
    types: tuple[TypeProfile, ...]
    blockchain_utility: float
    pools: tuple[tuple[int, int], ...]
    flagged: tuple[int, ...]
    theta: float
    epsilon: float
    z: int

    @property
    def salaries(self) -> np.ndarray:
        return np.array([it.salary for it in self.items])

    @property
    def bonuses(self) -> np.ndarray:
        return np.array([it.unit_bonus for it in self.items])

    def device_utilities(self) -> np.ndarray:
        lam = np.array([t.lam for t in self.types])
        return lam * self.bonuses**2 - (self.theta - 1.0) * self.salaries


def _type_arrays(types):
    if len(types) == 0:
        raise ValidationError("types", "need at least one type")
    lam = np.array([t.lam for t in types], dtype=float)
    q = np.array([t.q for t in types], dtype=float)
    if np.any(np.diff(lam) < 0):
        raise ValidationError("types", "types must be sorted by nondecreasing lam")
    return lam, q


def bonus_coefficients(types, econ: EconParams):
    """Per-type linear (``w``) and quadratic (``d``) coefficients of the reduced objective."""
    lam, q = _type_arrays(types)
    tail = np.cumsum(q[::-1])[::-1]
    lam_tail = lam * tail
    nxt = np.append(lam_tail[1:], 0.0)
    w = q * lam
    d = 2.0 * w + (lam_tail - nxt) / (econ.theta - 1.0)
    return w, d


def unconstrained_bonus(types, econ: EconParams) -> np.ndarray:
    """Stationary unit bonus per type, ignoring monotonicity.

    Entries whose quadratic coefficient is nonpositive have no interior
    maximiser; they come back as NaN and must be pooled by :func:`iron`.
    """
    w, d = bonus_coefficients(types, econ)
    out = np.full(len(w), np.nan)
    ok = d > 0
    out[ok] = econ.epsilon * w[ok] / d[ok]
    return out


def _pooled_argmax(w_sum: float, d_sum: float, eps: float) -> float:
    # maximiser of 2*eps*w*b - d*b^2 over [0, eps]; w_sum > 0
    if d_sum <= 0:
        return eps
    return min(eps, max(0.0, eps * w_sum / d_sum))


def _iron_blocks(bonuses, w, d, eps):
    blocks = []  # [start, end, w_sum, d_sum, value]
    for i, b in enumerate(bonuses):
        value = eps if np.isnan(b) else float(b)
        blocks.append([i, i, w[i], d[i], value])
        while len(blocks) > 1 and blocks[-2][4] > blocks[-1][4]:
            s2, e2, w2, d2, _ = blocks.pop()
            top = blocks[-1]
            top[1] = e2
            top[2] += w2
            top[3] += d2
            top[4] = _pooled_argmax(top[2], top[3], eps)
    return blocks


def iron(bonuses, types, econ: EconParams) -> np.ndarray:
    """Restore ``b_1 <= ... <= b_L`` by pooling adjacent violators.

    A violating run of types is replaced by the single bonus that maximises
    their summed objective terms over ``[0, epsilon]``; runs keep merging
    until the sequence is nondecreasing. NaN entries (non-concave
    coordinates) act as maximal values and so always pool upward.
    """
    b = np.asarray(bonuses, dtype=float)
    w, d = bonus_coefficients(types, econ)
    if len(b) != len(w):
        raise ValidationError("bonuses", f"expected {len(w)} entries, got {len(b)}")
    out = np.empty_like(b)
    for start, end, _, _, value in _iron_blocks(b, w, d, econ.epsilon):
        out[start : end + 1] = value
    return out


def salaries(bonuses, types, econ: EconParams) -> np.ndarray:
    """Salaries that bind type 1's participation and every local downward IC.

    ``s_i = sum_{t <= i} lam_t (b_t^2 - b_{t-1}^2) / (theta - 1)`` with ``b_0 = 0``.
    """
    lam, _ = _type_arrays(types)
    b = np.asarray(bonuses, dtype=float)
    if np.any(np.diff(b) < 0):
        raise ValidationError("bonuses", "salaries need a nondecreasing bonus schedule")
    b_sq = b**2
    steps = lam * np.diff(b_sq, prepend=0.0) / (econ.theta - 1.0)
    return np.cumsum(steps)


def utility_converted(b, s, types, econ: EconParams, z: float) -> float:
    """Developer utility ``sum Z q (2 eps lam b - s - 2 lam b^2)``."""
    lam, q = _type_arrays(types)
    b = np.asarray(b, dtype=float)
    s = np.asarray(s, dtype=float)
    return float(z * np.sum(q * (2 * econ.epsilon * lam * b - s - 2 * lam * b**2)))


def utility_raw(b, s, types, econ: EconParams, z: float) -> float:
    """Developer utility ``sum Z q (eps G e - s - G b e)`` at the devices' optimal effort."""
    _, q = _type_arrays(types)
    g = np.array([t.g for t in types])
    f = np.array([t.f for t in types])
    b = np.asarray(b, dtype=float)
    s = np.asarray(s, dtype=float)
    e = g * b / f
    return float(z * np.sum(q * (econ.epsilon * g * e - s - g * b * e)))


def blockchain_utility(menu: ContractMenu, types, econ: EconParams, z: float) -> float:
    b, s = menu.bonuses, menu.salaries
    converted = utility_converted(b, s, types, econ, z)
    raw = utility_raw(b, s, types, econ, z)
    if abs(converted - raw) > FEAS_TOL * max(1.0, abs(converted)):
        raise RuntimeError(f"utility forms disagree: {converted!r} vs {raw!r}")
    return converted


def build_menu(b, s, types, econ: EconParams, z: int, pools=(), flagged=()) -> ContractMenu:
    items = []
    for t, bi, si in zip(types, b, s):
        e = t.g * bi / t.f
        items.append(ContractItem(float(si), float(bi), float(e), float(si + bi * e * t.g)))
    return ContractMenu(
        tuple(items),
        tuple(types),
        utility_converted(b, s, types, econ, z),
        tuple(pools),
        tuple(flagged),
        econ.theta,
        econ.epsilon,
        z,
    )


def solve(types, econ: EconParams, z: int = 100) -> ContractMenu:
    """Design the utility-maximising feasible menu for sorted ``types``."""
    raw = unconstrained_bonus(types, econ)
    w, d = bonus_coefficients(types, econ)
    blocks = _iron_blocks(raw, w, d, econ.epsilon)
    b = np.empty_like(raw)
    for start, end, _, _, value in blocks:
        b[start : end + 1] = value
    s = salaries(b, types, econ)
    pools = [(int(st) + 1, int(en) + 1) for st, en, *_ in blocks if en > st]
    flagged = [int(i) + 1 for i in np.flatnonzero(np.isnan(raw))]
    menu = build_menu(b, s, types, econ, z, pools, flagged)
    blockchain_utility(menu, types, econ, z)  # cross-checks the two utility forms
    return menu


@dataclass(frozen=True)
class VerificationReport:
    passed: bool
    ir_ok: bool
    ic_ok: bool
    monotone_ok: bool
    base_ir_binding: bool
    worst_violation: float
    worst_constraint: str
    ldic_gap: float

    def summary(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return (
            f"{status}: IR={self.ir_ok} IC={self.ic_ok} monotone={self.monotone_ok} "
            f"U1=0:{self.base_ir_binding} worst={self.worst_violation:.3e} "
            f"({self.worst_constraint})"
        )


def utility_matrix(menu_or_b, s=None, types=None, theta=None) -> np.ndarray:
    """``U[i, j]``: utility of type ``i`` taking item ``j``."""
    if isinstance(menu_or_b, ContractMenu):
        b, s = menu_or_b.bonuses, menu_or_b.salaries
        lam = np.array([t.lam for t in menu_or_b.types])
        theta = menu_or_b.theta
    else:
        b = np.asarray(menu_or_b, dtype=float)
        lam = np.array([t.lam for t in types])
    return lam[:, None] * b[None, :] ** 2 - (theta - 1.0) * np.asarray(s)[None, :]


def verify_menu(menu: ContractMenu, types, econ: EconParams, tol: float = FEAS_TOL):
    """Exhaustively check IR, IC, monotonicity and the zero-rent bottom type."""
    lam, _ = _type_arrays(types)
    b, s = menu.bonuses, menu.salaries
    if len(b) != len(lam):
        raise ValidationError("menu", f"menu has {len(b)} items for {len(lam)} types")
    u = lam[:, None] * b[None, :] ** 2 - (econ.theta - 1.0) * s[None, :]
    own = np.diag(u)
    checks = []  # (violation amount, label)

    ir = -own
    k = int(np.argmax(ir))
    checks.append((ir[k], f"IR type {k + 1}"))

    gap = u - own[:, None]
    np.fill_diagonal(gap, -np.inf)
    if len(lam) > 1:
        i, j = np.unravel_index(int(np.argmax(gap)), gap.shape)
        checks.append((gap[i, j], f"IC type {i + 1} prefers item {j + 1}"))
        db, ds = -np.diff(b), -np.diff(s)
        kb, ks = int(np.argmax(db)), int(np.argmax(ds))
        checks.append((db[kb], f"b decreases at {kb + 1}->{kb + 2}"))
        checks.append((ds[ks], f"s decreases at {ks + 1}->{ks + 2}"))
        ldic = float(np.max(np.abs(own[1:] - u[np.arange(1, len(lam)), np.arange(len(lam) - 1)])))
    else:
        ldic = 0.0
    checks.append((abs(own[0]), "type 1 utility != 0"))

    worst, label = max(checks, key=lambda c: c[0])
    ir_ok = bool(checks[0][0] <= tol)
    ic_ok = bool(len(lam) == 1 or checks[1][0] <= tol)
    mono_ok = bool(len(lam) == 1 or (checks[2][0] <= 0 and checks[3][0] <= tol))
    base_ok = bool(abs(own[0]) <= tol)
    return VerificationReport(
        passed=ir_ok and ic_ok and mono_ok and base_ok,
        ir_ok=ir_ok,
        ic_ok=ic_ok,
        monotone_ok=mono_ok,
        base_ir_binding=base_ok,
        worst_violation=float(max(0.0, worst)),
        worst_constraint=label if worst > 0 else "none",
        ldic_gap=ldic,
    )


class ContractDesigner(BaseEstimator):
    """Estimator-style front end to :func:`solve`.

    ``fit`` takes one ``lam`` per device (or per type, with masses passed as
    ``sample_weight``); equal values are merged into one type. ``predict``
    returns the 1-based index of the item each ``lam`` would self-select.

    Parameters
    ----------
    theta : float, default=1.5
        Time-cost coefficient, must exceed 1.
    epsilon : float, default=400.0
        Yield coefficient.
    z : int, default=100
        Network size multiplying the developer's utility.
    """

    def __init__(self, theta=1.5, epsilon=400.0, z=100):
        self.theta = theta
        self.epsilon = epsilon
        self.z = z

    def fit(self, X, y=None, sample_weight=None):
        lam = check_1d("X", X)
        weight = np.ones_like(lam) if sample_weight is None else check_1d("sample_weight", sample_weight)
        econ = EconParams(theta=self.theta, epsilon=self.epsilon)
        self.types_ = profiles_from_lambdas(lam, weight)
        self.menu_ = solve(self.types_, econ, self.z)
        self.blockchain_utility_ = self.menu_.blockchain_utility
        self.n_features_in_ = 1
        return self

    def predict(self, X):
        check_is_fitted(self, "menu_")
        lam = check_1d("X", X)
        b, s = self.menu_.bonuses, self.menu_.salaries
        u = lam[:, None] * b[None, :] ** 2 - (self.theta - 1.0) * s[None, :]
        best = u.max(axis=1, keepdims=True)
        near = u >= best - FEAS_TOL * np.maximum(1.0, np.abs(best))
        # Near-ties (binding LDIC, pooled items) go to the item of the strongest
        # type not stronger than the device, so a listed type gets its own item.
        type_lam = np.array([t.lam for t in self.types_])
        below = near & (type_lam[None, :] <= lam[:, None])
        last_below = len(b) - np.argmax(below[:, ::-1], axis=1)
        first_near = np.argmax(near, axis=1) + 1
        return np.where(below.any(axis=1), last_below, first_near)

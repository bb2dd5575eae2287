"""Dataset-repair and sensor-calibration numerics.

Covers the pseudo-ground-truth workflow (inverse gamma, polynomial color
mapping, gray-world illuminant, constrained CCM fit) and the heteroscedastic
noise model (per-ISO/channel shot + read regression, interpolation,
synthesis).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.optimize import minimize

from .errors import ConfigError, NumericError

SATURATION_THRESHOLD = 0.99
CM_DEGREE = 2


def gray_world_illuminant(raw_rgb: np.ndarray) -> np.ndarray:
    if raw_rgb.size == 0:
        raise ConfigError("empty image")
    return raw_rgb.reshape(-1, 3).mean(axis=0)


def make_pseudo_linear(srgb: np.ndarray) -> np.ndarray:
    """Inverse 2.2 gamma estimate of the linear image."""
    return np.power(np.clip(srgb, 0.0, 1.0), 2.2)


def fit_ccm_constrained(wb_raw: np.ndarray, srgb_lin: np.ndarray) -> np.ndarray:
    """Least-squares 3x3 matrix C minimizing ||r' C^T - s||^2 with each row
    of C summing to 1 and all entries non-negative (solved row-wise with
    SLSQP, then polished to exact feasibility)."""
    r = np.asarray(wb_raw, dtype=float).reshape(-1, 3)
    s = np.asarray(srgb_lin, dtype=float).reshape(-1, 3)
    if r.shape[0] < 9:
        raise ConfigError("need at least 9 pixel pairs")
    if r.shape != s.shape:
        raise ConfigError("pixel sets must pair up")
    if np.linalg.matrix_rank(r) < 3:
        raise NumericError("raw pixels are rank-deficient")
    gram = r.T @ r
    rows = []
    for c in range(3):
        target = r.T @ s[:, c]

        def objective(x, gram=gram, target=target):
            return float(x @ gram @ x - 2.0 * target @ x)

        def grad(x, gram=gram, target=target):
            return 2.0 * (gram @ x - target)

        x0 = np.full(3, 1.0 / 3.0)
        res = minimize(objective, x0, jac=grad, method="SLSQP",
                       bounds=[(0.0, None)] * 3,
                       constraints=[{"type": "eq", "fun": lambda x: x.sum() - 1.0,
                                     "jac": lambda x: np.ones(3)}],
                       options={"maxiter": 200, "ftol": 1e-14})
        if not res.success and res.status != 0:
            raise NumericError(f"CCM row {c} fit failed: {res.message}")
        x = np.maximum(res.x, 0.0)
        rows.append(x / x.sum())
    return np.vstack(rows)


def _cm_basis(rgb: np.ndarray, degree: int) -> np.ndarray:
    r, g, b = rgb[:, 0], rgb[:, 1], rgb[:, 2]
    cols = [r, g, b]
    if degree >= 2:
        cols += [r * r, g * g, b * b, r * g, r * b, g * b]
    if degree >= 3:
        raise ConfigError("polynomial color mapping supports degree <= 2")
    return np.stack(cols, axis=1)


@dataclass
class ColorMapping:
    """Polynomial map f: R^3 -> R^3 over the monomial expansion."""

    coeffs: np.ndarray  # (n_terms, 3)
    degree: int

    def __call__(self, rgb: np.ndarray) -> np.ndarray:
        flat = np.asarray(rgb, dtype=float).reshape(-1, 3)
        out = _cm_basis(flat, self.degree) @ self.coeffs
        return out.reshape(np.shape(rgb))


def fit_color_mapping(lin_est: np.ndarray, raw: np.ndarray,
                      degree: int = CM_DEGREE) -> ColorMapping:
    """Least-squares polynomial map from the linearized estimate to the raw
    domain, after discarding saturated pixels (any channel >= 0.99)."""
    x = np.asarray(lin_est, dtype=float).reshape(-1, 3)
    y = np.asarray(raw, dtype=float).reshape(-1, 3)
    keep = np.all(x < SATURATION_THRESHOLD, axis=1) & np.all(y < SATURATION_THRESHOLD, axis=1)
    x, y = x[keep], y[keep]
    basis = _cm_basis(x, degree)
    if x.shape[0] < basis.shape[1]:
        raise NumericError("not enough unsaturated samples for the basis size")
    coeffs, *_ = np.linalg.lstsq(basis, y, rcond=None)
    return ColorMapping(coeffs=coeffs, degree=degree)


@dataclass
class NoiseModel:
    """Per-(ISO, channel) shot/read parameters: variance = b1 * mean + b2."""

    isos: list[float] = field(default_factory=list)
    beta1: dict[tuple[float, int], float] = field(default_factory=dict)
    beta2: dict[tuple[float, int], float] = field(default_factory=dict)

    def params_table(self) -> dict:
        return {
            "isos": list(self.isos),
            "beta1": {f"{iso:g}/{ch}": v for (iso, ch), v in sorted(self.beta1.items())},
            "beta2": {f"{iso:g}/{ch}": v for (iso, ch), v in sorted(self.beta2.items())},
        }


def fit_noise_model(patch_stats) -> NoiseModel:
    """OLS per (ISO, channel) over (patch mean, patch variance) pairs.

    `patch_stats` is an iterable of (mean, variance, iso, channel).
    """
    groups: dict[tuple[float, int], list[tuple[float, float]]] = {}
    for mean, var, iso, ch in patch_stats:
        groups.setdefault((float(iso), int(ch)), []).append((float(mean), float(var)))
    if not groups:
        raise ConfigError("no patch statistics provided")
    model = NoiseModel()
    isos = sorted({iso for iso, _ in groups})
    model.isos = isos
    for key, pairs in groups.items():
        m = np.array([p[0] for p in pairs])
        v = np.array([p[1] for p in pairs])
        if np.allclose(v, 0.0):
            model.beta1[key] = 0.0
            model.beta2[key] = 0.0
            continue
        if len(pairs) < 2 or np.allclose(m, m[0]):
            raise NumericError(f"need >= 2 distinct means for iso/channel {key}")
        slope, intercept = np.polyfit(m, v, 1)
        model.beta1[key] = float(slope)
        model.beta2[key] = float(intercept)
    return model


def interpolate_noise_params(model: NoiseModel, iso: float,
                             channel: int = 0) -> tuple[float, float]:
    """Linear interpolation for beta1, natural cubic spline for beta2;
    clamped outside the calibrated ISO range."""
    isos = [i for i in model.isos if (i, channel) in model.beta1]
    if not isos:
        raise ConfigError(f"noise model has no entries for channel {channel}")
    isos = np.array(sorted(isos))
    b1 = np.array([model.beta1[(i, channel)] for i in isos])
    b2 = np.array([model.beta2[(i, channel)] for i in isos])
    iso = float(np.clip(iso, isos[0], isos[-1]))
    beta1 = float(np.interp(iso, isos, b1))
    if len(isos) == 1:
        return beta1, float(b2[0])
    if len(isos) < 3:
        beta2 = float(np.interp(iso, isos, b2))
    else:
        beta2 = float(CubicSpline(isos, b2, bc_type="natural")(iso))
    return beta1, beta2


def synthesize_noise(clean: np.ndarray, iso: float, model: NoiseModel,
                     seed: int, channel: int = 0) -> np.ndarray:
    """Heteroscedastic Gaussian noise: variance beta1*x + beta2, clamped at 0;
    output clamped to [0, 1]; deterministic per seed."""
    beta1, beta2 = interpolate_noise_params(model, iso, channel)
    var = np.maximum(beta1 * clean + beta2, 0.0)
    rng = np.random.default_rng(seed)
    noisy = clean + rng.standard_normal(clean.shape) * np.sqrt(var)
    return np.clip(noisy, 0.0, 1.0)

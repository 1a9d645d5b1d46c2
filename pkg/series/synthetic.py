# series/synthetic.py
"""
Performative feedback-loop generator with a planted lag.

    x_{t+1} = c·x_t − g·y_{t−d1} + A·sin(2πt/period) + u_t + η_t
    y_{t+1} = a·y_t + b_t·κ·tanh(x_{t+1−d2}/κ) + ε_t

d1 is the delay from a published forecast (proxied by the target level) to the
behaviour change in the performative feature x, d2 the delay from behaviour to
target. u is an exogenous intervention cycle, a stationary AR(2) process drawn
from its own random stream, so it keeps the future of x uncertain even when
η and ε are switched off. κ saturates the behaviour response; response_scale
None makes it linear. b_t = b before flip_at and −b from flip_at on. History
before the first simulated step is zero; burn_in steps are simulated and
dropped.

With snr set, the noise levels are calibrated from a noiseless run of the
same seed: σ_x = std(x)/√snr and σ_y = std(y)/√snr.
"""

import logging
import math
from pathlib import Path
from typing import Optional, Tuple

import numpy as np
import pandas as pd
from pydantic import BaseModel, ConfigDict, Field, model_validator

from fps_lab.errors import DataError
from fps_lab.serialization import read_json, write_json
from series.config import DatasetConfig, write_dataset_config
from series.datasets import Dataset

logger = logging.getLogger(__name__)

DIVERGENCE_LIMIT = 1e9


class SyntheticSpec(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    T: int = Field(default=2000, ge=2)
    lag_response: int = Field(default=2, ge=0, description="d1: forecast -> behaviour change")
    lag_effect: int = Field(default=3, ge=0, description="d2: behaviour -> target change")
    a: float = 0.3
    b: float = 1.0
    c: float = 0.3
    # bounded response: the loop stays bounded for |a| < 1 and |c| < 1
    g: float = Field(default=0.1, description="target -> feature feedback")
    response_scale: Optional[float] = Field(default=1.0, gt=0.0, description="κ; None for a linear response")
    sigma_y: float = Field(default=0.1, ge=0.0)
    sigma_x: float = Field(default=0.1, ge=0.0)
    snr: Optional[float] = Field(default=None, gt=0.0, description="overrides sigma_x and sigma_y")
    intervention_amplitude: float = Field(default=1.0, ge=0.0, description="stationary std of u")
    intervention_period: float = Field(default=8.0, gt=2.0)
    intervention_damping: float = Field(default=0.9, ge=0.0, lt=1.0)
    forcing_amplitude: float = 0.0
    forcing_period: float = Field(default=25.0, gt=0.0)
    flip_at: Optional[int] = Field(default=None, ge=0)
    horizon: int = Field(default=8, ge=1)
    burn_in: int = Field(default=200, ge=0)
    seed: int = 0

    @model_validator(mode="after")
    def _planted_loop_fits(self):
        if self.lag_response + self.lag_effect > self.horizon:
            raise ValueError("lag_response + lag_effect must not exceed the horizon")
        return self

    @property
    def expected_tau(self) -> int:
        return self.horizon - self.lag_effect


def intervention_process(spec: SyntheticSpec, n: int) -> np.ndarray:
    """AR(2) cycle u: complex roots of modulus intervention_damping, stationary std intervention_amplitude."""
    if spec.intervention_amplitude == 0.0:
        return np.zeros(n)
    r = spec.intervention_damping
    phi1 = 2.0 * r * math.cos(2.0 * math.pi / spec.intervention_period)
    phi2 = -r * r
    gain = (1.0 - phi2) / ((1.0 + phi2) * ((1.0 - phi2) ** 2 - phi1 ** 2))
    shocks = np.random.default_rng([spec.seed, 1]).normal(0.0, spec.intervention_amplitude / math.sqrt(gain), n)
    u = np.zeros(n)
    for t in range(n):
        u[t] = shocks[t]
        if t >= 1:
            u[t] += phi1 * u[t - 1]
        if t >= 2:
            u[t] += phi2 * u[t - 2]
    return u


def calibrate_noise(spec: SyntheticSpec) -> SyntheticSpec:
    """Resolve snr into explicit sigma_x and sigma_y; specs without snr pass through."""
    if spec.snr is None:
        return spec
    x, y = simulate(spec.model_copy(update={"snr": None, "sigma_x": 0.0, "sigma_y": 0.0}))
    scale = 1.0 / math.sqrt(spec.snr)
    return spec.model_copy(update={"snr": None, "sigma_x": float(np.std(x)) * scale, "sigma_y": float(np.std(y)) * scale})


def _response(spec: SyntheticSpec, value: float) -> float:
    if spec.response_scale is None:
        return value
    return spec.response_scale * math.tanh(value / spec.response_scale)


def simulate(spec: SyntheticSpec) -> Tuple[np.ndarray, np.ndarray]:
    """Run the coupled recursion; returns (x, y) of length spec.T after burn-in."""
    spec = calibrate_noise(spec)
    d1, d2 = spec.lag_response, spec.lag_effect
    n = spec.T + spec.burn_in
    rng = np.random.default_rng(spec.seed)
    eta = rng.normal(0.0, spec.sigma_x, n) if spec.sigma_x > 0 else np.zeros(n)
    eps = rng.normal(0.0, spec.sigma_y, n) if spec.sigma_y > 0 else np.zeros(n)
    u = intervention_process(spec, n)

    x = np.zeros(n)
    y = np.zeros(n)
    flip = None if spec.flip_at is None else spec.flip_at + spec.burn_in
    for t in range(n - 1):
        y_lag = y[t - d1] if t - d1 >= 0 else 0.0
        forcing = spec.forcing_amplitude * np.sin(2.0 * np.pi * t / spec.forcing_period)
        x[t + 1] = spec.c * x[t] - spec.g * y_lag + forcing + u[t] + eta[t]

        b = -spec.b if flip is not None and t + 1 >= flip else spec.b
        x_lag = x[t + 1 - d2] if t + 1 - d2 >= 0 else 0.0
        y[t + 1] = spec.a * y[t] + b * _response(spec, x_lag) + eps[t]

        if abs(x[t + 1]) > DIVERGENCE_LIMIT or abs(y[t + 1]) > DIVERGENCE_LIMIT:
            raise DataError(f"unstable spec: values exceed {DIVERGENCE_LIMIT:g} at step {t + 1}")
    return x[spec.burn_in:], y[spec.burn_in:]


def generate_synthetic(spec: SyntheticSpec) -> Dataset:
    effective = calibrate_noise(spec)
    x, y = simulate(effective)
    noise = {"sigma_x": effective.sigma_x, "sigma_y": effective.sigma_y}
    ds = Dataset(
        target=y,
        features=x.reshape(-1, 1),
        feature_names=("x",),
        performative_mask=(True,),
        time_index=tuple(range(spec.T)),
        target_name="y",
        metadata={
            "synthetic": spec.model_dump(mode="json"),
            "noise": noise,
            "planted_lead": spec.lag_effect,
            "expected_tau": spec.expected_tau,
        },
    )
    logger.info("generated synthetic series T=%d planted lead=%d (expected tau=%d) sigma_x=%.4g sigma_y=%.4g",
                spec.T, spec.lag_effect, spec.expected_tau, noise["sigma_x"], noise["sigma_y"])
    return ds


def write_synthetic(ds: Dataset, spec: SyntheticSpec, out_dir: Path, name: str = "synthetic", lookback: int = 16) -> dict:
    """
    Persist as <name>.csv (t, y, x), a <name>.meta.json sidecar with the generator settings
    and planted lag, and a <name>.yaml dataset config.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    csv_path = out_dir / f"{name}.csv"
    frame = pd.DataFrame({"t": list(ds.time_index), ds.target_name: ds.target})
    for j, feature in enumerate(ds.feature_names):
        frame[feature] = ds.features[:, j]
    frame.to_csv(csv_path, index=False, float_format="%.17g")

    meta_path = write_json(out_dir / f"{name}.meta.json", {
        "spec": spec.model_dump(mode="json"),
        "noise": ds.metadata.get("noise"),
        "planted_lead": spec.lag_effect,
        "expected_tau": spec.expected_tau,
        "rows": ds.T,
    })
    config_path = write_dataset_config(out_dir / f"{name}.yaml", DatasetConfig(
        target=ds.target_name,
        time_column="t",
        performative=list(ds.performative_names),
        non_performative=list(ds.nonperformative_names),
        lookback=lookback,
        horizon=spec.horizon,
    ))
    return {"csv": csv_path, "meta": meta_path, "config": config_path}


def read_metadata(csv_path: Path) -> Optional[dict]:
    meta = Path(csv_path).with_suffix(".meta.json")
    return read_json(meta) if meta.is_file() else None

# fps/training.py
"""
Trainers for FPS (joint or two-phase), the ERM baseline and the oracle
forecaster that reads true delayed windows.

Model selection keeps the snapshot with the best validation forecasting loss
(L_TS on the estimated path); without validation data the last epoch wins.
"""

import logging
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from fps_lab.errors import TrainingError
from alignment.search import AlignmentResult
from fps.batches import WindowBatch
from fps.config import ModelConfig, Schedule, TrainConfig
from fps.losses import combined_loss, erm_input, forecast_loss, forecaster_input, translate, translation_loss
from fps.predictors import ErmModel, FpsModel
from seqmodel.networks import forecast_graph
from seqmodel.optim import OptimState, step_groups
from seqmodel.params import Architecture, Gradients, Kind, ParamSet
from seqmodel.tensor import Tensor, backward
from series.datasets import Dataset, check_taus
from series.scaling import Scaler
from series.windows import eval_range, make_windows

logger = logging.getLogger(__name__)

Range = Tuple[int, int]


@dataclass(frozen=True)
class EpochLoss:
    epoch: int
    phase: str
    train_total: float
    train_dt: float
    train_ts: float
    val_ts: Optional[float]


@dataclass(frozen=True)
class StepLoss:
    total: float
    dt: float
    ts: float
    lambda1: float
    lambda2: float


@dataclass
class LossReport:
    epochs: List[EpochLoss] = field(default_factory=list)
    steps: List[StepLoss] = field(default_factory=list)
    chosen_epoch: int = 0
    # epochs of the final (selecting) phase up to and including chosen_epoch
    selected_phase_epochs: int = 0
    stopped_early: bool = False

    def as_dict(self) -> dict:
        return {
            "chosen_epoch": self.chosen_epoch,
            "selected_phase_epochs": self.selected_phase_epochs,
            "stopped_early": self.stopped_early,
            "epochs": [e.__dict__ for e in self.epochs],
        }


@dataclass
class _Snapshot:
    groups: Dict[str, ParamSet]
    epoch: int
    score: float = np.inf


def _optimizer(cfg: TrainConfig) -> OptimState:
    return OptimState(kind=cfg.optimizer, learning_rate=cfg.learning_rate, clip=cfg.clip or None)


def _forecaster(model_cfg: ModelConfig, input_dim: int, horizon: int) -> Architecture:
    return Architecture(Kind.FORECASTER, input_dim, model_cfg.forecaster_hidden, 1, horizon, model_cfg.forecaster_cell)


def _architectures(model_cfg: ModelConfig, ds: Dataset, lookback: int, horizon: int) -> Tuple[Architecture, Architecture]:
    translator = Architecture(Kind.SEQ2SEQ, ds.P, model_cfg.translator_hidden, ds.P, lookback)
    width = ds.D + 1 + (ds.P if model_cfg.forecaster_reads_lookback else 0)
    return translator, _forecaster(model_cfg, width, horizon)


def _prepare(ds: Dataset, lookback: int, horizon: int, tau, train_range: Range, val_range: Optional[Range]):
    scaler = Scaler.fit(ds, train_range[1])
    scaled = scaler.apply(ds)
    train = make_windows(scaled, lookback, horizon, tau, train_range)
    if not train:
        raise TrainingError(f"empty training set: range {train_range} cannot hold L={lookback}, H={horizon}")
    val = make_windows(scaled, lookback, horizon, tau, eval_range(val_range, lookback)) if val_range else []
    val_batch = WindowBatch.from_samples(val, ds.P) if val else None
    return scaler, WindowBatch.from_samples(train, ds.P), val_batch


def _run_epochs(
    *,
    phase: str,
    epochs: int,
    train: WindowBatch,
    val: Optional[WindowBatch],
    groups: Dict[str, ParamSet],
    trainable: Sequence[str],
    step_loss: Callable[[Dict[str, ParamSet], Dict[str, Dict[str, Tensor]], WindowBatch], Tuple[Tensor, Tensor, Tensor]],
    val_loss: Callable[[Dict[str, ParamSet], WindowBatch], float],
    cfg: TrainConfig,
    rng: np.random.Generator,
    report: LossReport,
    select: bool,
) -> Dict[str, ParamSet]:
    opt = _optimizer(cfg)
    phase_start = len(report.epochs)
    best = _Snapshot(dict(groups), epoch=phase_start)
    stale = 0
    for _ in range(epochs):
        sums = np.zeros(3)
        for batch in train.minibatches(cfg.batch_size, rng):
            leaves = {k: (p.track() if k in trainable else {n: Tensor(v) for n, v in p.values.items()}) for k, p in groups.items()}
            total, dt, ts = step_loss(groups, leaves, batch)
            tracked = [t for k in trainable for t in leaves[k].values()]
            backward(total, tracked)
            grads = {k: Gradients.collect(leaves[k]) for k in trainable}
            groups.update(step_groups({k: groups[k] for k in trainable}, grads, opt))
            report.steps.append(StepLoss(float(total.value), float(dt.value), float(ts.value), cfg.lambda1, cfg.lambda2))
            sums += len(batch) * np.array([float(total.value), float(dt.value), float(ts.value)])
        means = sums / len(train)
        epoch_val = val_loss(groups, val) if val is not None else None
        epoch_no = len(report.epochs) + 1
        report.epochs.append(EpochLoss(epoch_no, phase, *means.tolist(), epoch_val))
        logger.debug("%s epoch %d: total=%.5f dt=%.5f ts=%.5f val=%s", phase, epoch_no, *means, epoch_val)

        if not select or epoch_val is None:
            best = _Snapshot(dict(groups), epoch_no)
            continue
        if epoch_val < best.score:
            best, stale = _Snapshot(dict(groups), epoch_no, epoch_val), 0
        else:
            stale += 1
            if stale >= cfg.patience:
                report.stopped_early = True
                logger.info("%s: early stop after epoch %d (best epoch %d)", phase, epoch_no, best.epoch)
                break
    report.chosen_epoch = best.epoch
    report.selected_phase_epochs = best.epoch - phase_start
    return dict(best.groups)


# ----------------------------------------------------------------------
# FPS
# ----------------------------------------------------------------------
def _fps_losses(tau, cfg: TrainConfig, use_truth: bool = False, with_lookback: bool = False):
    lambda1, lambda2 = cfg.lambda1, cfg.lambda2

    def step_loss(groups, leaves, batch):
        estimated = translate(groups["f"], leaves["f"], batch, tau)
        dt, _ = translation_loss(estimated, batch)
        delayed = Tensor(batch.x_dr) if use_truth else estimated
        predicted = forecast_graph(groups["g"].arch, leaves["g"], forecaster_input(delayed, batch, with_lookback))
        ts = forecast_loss(predicted, batch)
        return combined_loss(dt, ts, lambda1, lambda2), dt, ts

    def val_loss(groups, batch):
        constants = {k: {n: Tensor(v) for n, v in p.values.items()} for k, p in groups.items()}
        delayed = Tensor(batch.x_dr) if use_truth else translate(groups["f"], constants["f"], batch, tau)
        predicted = forecast_graph(groups["g"].arch, constants["g"], forecaster_input(delayed, batch, with_lookback))
        return float(forecast_loss(predicted, batch).value)

    return step_loss, val_loss


def _translation_only(tau):
    def step_loss(groups, leaves, batch):
        dt, _ = translation_loss(translate(groups["f"], leaves["f"], batch, tau), batch)
        return dt, dt, Tensor(0.0)

    def val_loss(groups, batch):
        constants = {n: Tensor(v) for n, v in groups["f"].values.items()}
        dt, _ = translation_loss(translate(groups["f"], constants, batch, tau), batch)
        return float(dt.value)

    return step_loss, val_loss


def train_fps(
    ds: Dataset,
    alignment: AlignmentResult,
    cfg: TrainConfig,
    *,
    model_cfg: ModelConfig = ModelConfig(),
    lookback: int,
    horizon: int,
    train_range: Optional[Range] = None,
    val_range: Optional[Range] = None,
    init: Optional[FpsModel] = None,
    config_hash: str = "",
    oracle: bool = False,
) -> Tuple[FpsModel, LossReport]:
    """
    Joint schedule: every step minimizes λ1·L_DT + λ2·L_TS over both networks,
    the forecaster reading the estimated X̂^DR. Two-phase schedule: f on L_DT
    for pretrain_epochs, then g on L_TS with f frozen. oracle=True trains g on
    the true delayed windows (always two-phase).
    """
    ds.require_performative()
    tau = check_taus(alignment.taus, horizon, ds.P)
    train_range = train_range or (0, ds.T)
    scaler, train, val = _prepare(ds, lookback, horizon, tau, train_range, val_range)

    rng = np.random.default_rng(cfg.seed)
    f_arch, g_arch = _architectures(model_cfg, ds, lookback, horizon)
    groups = {"f": ParamSet.initialize(f_arch, rng), "g": ParamSet.initialize(g_arch, rng)}
    if init is not None:
        if init.f_params.arch != f_arch or init.g_params.arch != g_arch:
            raise TrainingError("warm-start model has a different architecture")
        groups = {"f": init.f_params, "g": init.g_params}

    report = LossReport()
    if cfg.schedule is Schedule.TWO_PHASE or oracle:
        step_loss, val_loss = _translation_only(tau)
        pretrain = cfg.pretrain_epochs if not oracle else max(cfg.pretrain_epochs, 1)
        if pretrain:
            groups = _run_epochs(phase="translate", epochs=pretrain, train=train, val=val, groups=groups,
                                 trainable=["f"], step_loss=step_loss, val_loss=val_loss, cfg=cfg, rng=rng,
                                 report=report, select=False)
        step_loss, val_loss = _fps_losses(tau, cfg, use_truth=oracle, with_lookback=model_cfg.forecaster_reads_lookback)
        groups = _run_epochs(phase="forecast", epochs=cfg.epochs, train=train, val=val, groups=groups,
                             trainable=["g"], step_loss=step_loss, val_loss=val_loss, cfg=cfg, rng=rng,
                             report=report, select=True)
    else:
        step_loss, val_loss = _fps_losses(tau, cfg, with_lookback=model_cfg.forecaster_reads_lookback)
        groups = _run_epochs(phase="joint", epochs=cfg.epochs, train=train, val=val, groups=groups,
                             trainable=["f", "g"], step_loss=step_loss, val_loss=val_loss, cfg=cfg, rng=rng,
                             report=report, select=True)

    model = FpsModel(
        tau=tau,
        f_params=groups["f"],
        g_params=groups["g"],
        scaler=scaler,
        lookback=lookback,
        horizon=horizon,
        n_performative=ds.P,
        config_hash=config_hash,
        seed=cfg.seed,
        method="oracle" if oracle else "fps",
        chosen_epoch=report.chosen_epoch,
        notes=alignment.warnings,
        reads_lookback=model_cfg.forecaster_reads_lookback,
    )
    logger.info("trained %s (tau=%s, seed=%d): chosen epoch %d of %d", model.method, list(tau), cfg.seed,
                report.chosen_epoch, len(report.epochs))
    return model, report


def train_oracle(ds: Dataset, alignment: AlignmentResult, cfg: TrainConfig, **kwargs) -> Tuple[FpsModel, LossReport]:
    """FPS networks whose forecaster is trained on the TRUE delayed windows."""
    return train_fps(ds, alignment, cfg, oracle=True, **kwargs)


# ----------------------------------------------------------------------
# ERM
# ----------------------------------------------------------------------
def train_erm(
    ds: Dataset,
    cfg: TrainConfig,
    *,
    model_cfg: ModelConfig = ModelConfig(),
    lookback: int,
    horizon: int,
    train_range: Optional[Range] = None,
    val_range: Optional[Range] = None,
    init: Optional[ErmModel] = None,
    config_hash: str = "",
) -> Tuple[ErmModel, LossReport]:
    """Single forecaster on (X^L, Y^L) -> Y^H with MSE and the same optimizer surface as FPS."""
    train_range = train_range or (0, ds.T)
    scaler, train, val = _prepare(ds, lookback, horizon, None, train_range, val_range)

    rng = np.random.default_rng(cfg.seed)
    g_arch = _forecaster(model_cfg, ds.D + 1, horizon)
    groups = {"g": ParamSet.initialize(g_arch, rng)}
    if init is not None:
        if init.g_params.arch != g_arch:
            raise TrainingError("warm-start model has a different architecture")
        groups = {"g": init.g_params}

    def step_loss(groups, leaves, batch):
        ts = forecast_loss(forecast_graph(g_arch, leaves["g"], erm_input(batch)), batch)
        return ts, Tensor(0.0), ts

    def val_loss(groups, batch):
        constants = {n: Tensor(v) for n, v in groups["g"].values.items()}
        return float(forecast_loss(forecast_graph(g_arch, constants, erm_input(batch)), batch).value)

    report = LossReport()
    groups = _run_epochs(phase="erm", epochs=cfg.epochs, train=train, val=val, groups=groups, trainable=["g"],
                         step_loss=step_loss, val_loss=val_loss, cfg=cfg, rng=rng, report=report, select=True)
    model = ErmModel(
        g_params=groups["g"],
        scaler=scaler,
        lookback=lookback,
        horizon=horizon,
        n_performative=ds.P,
        config_hash=config_hash,
        seed=cfg.seed,
        chosen_epoch=report.chosen_epoch,
    )
    logger.info("trained erm (seed=%d): chosen epoch %d of %d", cfg.seed, report.chosen_epoch, len(report.epochs))
    return model, report

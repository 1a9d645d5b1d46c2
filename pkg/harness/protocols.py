# harness/protocols.py
"""
Evaluation protocols.

  standard  60/20/20 split: tune on train -> validation, retrain on
            train+validation with the chosen hyperparameters and epoch count,
            score the test range.
  realtime  rolling origin: at every scheduled anchor t0 retrain on rows
            [0, t0] (warm or cold), re-estimate τ, forecast t0+1..t0+H.
  oracle    ERM, FPS and the true-X^DR forecaster on identical test anchors.

Every protocol scores seed members individually and their mean ("ensemble").
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from django.conf import settings
from tqdm import tqdm

from alignment.search import AlignmentResult, align_all
from fps.predictors import FpsModel, Model, ensemble_predict_many, predict_many, predict_oracle_many
from fps.training import LossReport, train_erm, train_fps, train_oracle
from fps_lab.errors import ConfigError, DataError, EvaluationError, InvariantError
from harness.access import AccessTrackedDataset
from harness.config import ExperimentConfig, Method
from harness.grid import Candidate, expand_grid
from metrics.reports import EvalReport
from metrics.scores import nmae
from seqmodel.params import ParamSet
from series.datasets import Dataset, WindowSample
from series.windows import eval_range, forecast_sample, make_windows, split_standard

logger = logging.getLogger(__name__)

ORACLE = "oracle"
Range = Tuple[int, int]


@dataclass
class RunResult:
    report: Optional[EvalReport]
    models: Dict[str, List[Model]]
    alignment: Optional[AlignmentResult]
    losses: Dict[str, List[LossReport]] = field(default_factory=dict)
    checkpoints: Dict[str, Dict[str, ParamSet]] = field(default_factory=dict)
    manifest: dict = field(default_factory=dict)


def dataset_summary(ds: Dataset) -> dict:
    return {
        "T": ds.T,
        "D": ds.D,
        "P": ds.P,
        "target": ds.target_name,
        "performative": list(ds.performative_names),
        "non_performative": list(ds.nonperformative_names),
        "first_time": ds.time_index[0],
        "last_time": ds.time_index[-1],
        "metadata": ds.metadata,
    }


def param_groups(model: Model) -> Dict[str, ParamSet]:
    if isinstance(model, FpsModel):
        return {"f": model.f_params, "g": model.g_params}
    return {"g": model.g_params}


def check_alignment(alignment: AlignmentResult, ds: Dataset, horizon: int) -> AlignmentResult:
    """A stored alignment is usable only for the same performative columns and horizon."""
    if tuple(alignment.feature_names) != tuple(ds.performative_names):
        raise ConfigError(f"alignment covers {list(alignment.feature_names)}, dataset has {list(ds.performative_names)}")
    if alignment.horizon != horizon:
        raise ConfigError(f"alignment was estimated for H={alignment.horizon}, run uses H={horizon}")
    return alignment


def initial_member(init: Optional[Dict[str, List[Model]]], method: str, seed: int, cfg: ExperimentConfig) -> Optional[Model]:
    if init is None:
        return None
    for model in init.get(method, ()):
        if model.seed == seed:
            if (model.lookback, model.horizon) != (cfg.lookback, cfg.horizon):
                raise ConfigError(f"initial {method} model has L={model.lookback}, H={model.horizon}; "
                                  f"run uses L={cfg.lookback}, H={cfg.horizon}")
            return model
    raise ConfigError(f"initial checkpoints hold no {method} model for seed {seed}")


def _tau_source(given: Optional[AlignmentResult]) -> str:
    return "given" if given is not None else "estimated"


def _checkpoint_index(models: Dict[str, List[Model]], prefix: str = "") -> Dict[str, List[str]]:
    """Checkpoint path, relative to checkpoints/, of every final member."""
    return {method: [f"{prefix}{method}-seed{m.seed}.ckpt" for m in members] for method, members in models.items()}


def fit_method(
    method: str,
    ds: Dataset,
    alignment: Optional[AlignmentResult],
    train_cfg,
    model_cfg,
    cfg: ExperimentConfig,
    train_range: Range,
    val_range: Optional[Range],
    config_hash: str,
    init: Optional[Model] = None,
) -> Tuple[Model, LossReport]:
    common = dict(
        model_cfg=model_cfg,
        lookback=cfg.lookback,
        horizon=cfg.horizon,
        train_range=train_range,
        val_range=val_range,
        config_hash=config_hash,
    )
    if method == Method.FPS.value:
        return train_fps(ds, alignment, train_cfg, init=init, **common)
    if method == ORACLE:
        return train_oracle(ds, alignment, train_cfg, init=init, **common)
    if method == Method.ERM.value:
        return train_erm(ds, train_cfg, init=init, **common)
    raise ConfigError(f"unknown method {method!r}")


def _score_members(
    report: EvalReport,
    method: str,
    members: Sequence[Model],
    samples: Sequence[WindowSample],
    phase: str = "test",
    oracle: bool = False,
) -> None:
    anchors = [s.t for s in samples]
    truth = np.stack([s.y_hor for s in samples])
    run = predict_oracle_many if oracle else predict_many
    for m in members:
        report.add_forecasts(method, f"seed-{m.seed}", m.seed, anchors, truth, run(m, samples), phase)
    ensemble = ensemble_predict_many(members, samples, oracle=oracle)
    report.add_forecasts(method, "ensemble", members[0].seed, anchors, truth, ensemble, phase)


def _base_provenance(cfg: ExperimentConfig, protocol: str) -> dict:
    return {
        "protocol": protocol,
        "config_hash": cfg.config_hash(),
        "seeds": cfg.seeds,
        "lookback": cfg.lookback,
        "horizon": cfg.horizon,
        "metric": cfg.metric.value,
    }


# ----------------------------------------------------------------------
# standard
# ----------------------------------------------------------------------
def run_standard(ds: Dataset, cfg: ExperimentConfig, alignment: Optional[AlignmentResult] = None) -> RunResult:
    methods = [m.value for m in cfg.methods]
    if Method.FPS.value in methods:
        ds.require_performative()
    L, H = cfg.lookback, cfg.horizon
    train_r, val_r, test_r = split_standard(ds, cfg.split_ratios)
    refit_r = (0, val_r[1])

    val_samples = make_windows(ds, L, H, None, eval_range(val_r, L))
    test_samples = make_windows(ds, L, H, None, eval_range(test_r, L))
    if not make_windows(ds, L, H, None, train_r) or not val_samples or not test_samples:
        raise DataError(f"insufficient data: T={ds.T} cannot fill train, validation and test windows with L={L}, H={H}")
    val_truth = np.stack([s.y_hor for s in val_samples])

    config_hash = cfg.config_hash()
    seeds = cfg.seeds
    tune_alignment = refit_alignment = None
    if Method.FPS.value in methods and alignment is not None:
        tune_alignment = refit_alignment = check_alignment(alignment, ds, H)
    elif Method.FPS.value in methods:
        tune_alignment = align_all(ds, train_r, H, cfg.metric)
        refit_alignment = align_all(ds, refit_r, H, cfg.metric)

    report = EvalReport("standard", provenance={
        **_base_provenance(cfg, "standard"),
        "splits": {"train": train_r, "validation": val_r, "test": test_r},
    })
    if refit_alignment is not None:
        report.warnings.extend(refit_alignment.warnings)
        report.provenance["tau"] = list(refit_alignment.taus)
        report.provenance["tau_tuning"] = list(tune_alignment.taus)
        report.provenance["tau_source"] = _tau_source(alignment)

    candidates = expand_grid(cfg.train, cfg.model, cfg.grid)
    models: Dict[str, List[Model]] = {}
    losses: Dict[str, List[LossReport]] = {}
    checkpoints: Dict[str, Dict[str, ParamSet]] = {}
    tuning: List[dict] = []
    chosen_by_method: Dict[str, dict] = {}

    for method in methods:
        best: Optional[Tuple[float, Candidate, LossReport]] = None
        for cand in candidates:
            model, loss = fit_method(method, ds, tune_alignment, cand.train.model_copy(update={"seed": seeds[0]}),
                                     cand.model, cfg, train_r, val_r, config_hash)
            score = nmae(val_truth, predict_many(model, val_samples))
            tuning.append({"method": method, "candidate": cand.label, "val_nmae": score,
                           "chosen_epoch": loss.chosen_epoch, "stopped_early": loss.stopped_early})
            logger.info("%s [%s]: validation NMAE %.5f", method, cand.label, score)
            if best is None or score < best[0]:
                best = (score, cand, loss)
        _, chosen, tuned = best
        epochs = max(1, tuned.selected_phase_epochs)
        chosen_by_method[method] = {"candidate": chosen.label, "overrides": chosen.overrides, "epochs": epochs}

        members, member_losses = [], []
        for seed in seeds:
            model, loss = fit_method(method, ds, refit_alignment, chosen.train.model_copy(update={"seed": seed, "epochs": epochs}),
                                     chosen.model, cfg, refit_r, None, config_hash)
            members.append(model)
            member_losses.append(loss)
            checkpoints[f"{method}-seed{seed}.ckpt"] = param_groups(model)
        models[method], losses[method] = members, member_losses
        report.parameters[method] = members[0].parameter_count
        _score_members(report, method, members, test_samples)

    report.provenance["chosen"] = chosen_by_method
    manifest = {
        "protocol": "standard",
        "config": cfg.model_dump(mode="json"),
        "config_hash": config_hash,
        "seeds": seeds,
        "dataset": dataset_summary(ds),
        "splits": report.provenance["splits"],
        "alignment": refit_alignment.as_dict() if refit_alignment is not None else None,
        "tuning": tuning,
        "chosen": chosen_by_method,
        "tau_source": _tau_source(alignment),
        "checkpoints": _checkpoint_index(models),
        "models": {m: [x.manifest() for x in ms] for m, ms in models.items()},
        "losses": {m: [x.as_dict() for x in ls] for m, ls in losses.items()},
    }
    return RunResult(report, models, refit_alignment, losses, checkpoints, manifest)


# ----------------------------------------------------------------------
# training only
# ----------------------------------------------------------------------
def run_training(
    ds: Dataset,
    cfg: ExperimentConfig,
    alignment: Optional[AlignmentResult] = None,
    init: Optional[Dict[str, List[Model]]] = None,
) -> RunResult:
    """
    Fit every configured method and seed on the training split, selecting
    epochs on validation. init maps method -> models (matched by seed) to
    continue from instead of a fresh initialization.
    """
    given = alignment
    methods = [m.value for m in cfg.methods]
    if Method.FPS.value in methods:
        ds.require_performative()
    train_r, val_r, _ = split_standard(ds, cfg.split_ratios)
    if Method.FPS.value not in methods:
        alignment = None
    elif given is not None:
        alignment = check_alignment(given, ds, cfg.horizon)
    else:
        alignment = align_all(ds, train_r, cfg.horizon, cfg.metric)
    config_hash = cfg.config_hash()

    models: Dict[str, List[Model]] = {}
    losses: Dict[str, List[LossReport]] = {}
    checkpoints: Dict[str, Dict[str, ParamSet]] = {}
    for method in methods:
        models[method], losses[method] = [], []
        for seed in cfg.seeds:
            model, loss = fit_method(method, ds, alignment, cfg.train_for(seed), cfg.model, cfg, train_r, val_r, config_hash,
                                     init=initial_member(init, method, seed, cfg))
            models[method].append(model)
            losses[method].append(loss)
            checkpoints[f"{method}-seed{seed}.ckpt"] = param_groups(model)

    manifest = {
        "protocol": "train",
        "config": cfg.model_dump(mode="json"),
        "config_hash": config_hash,
        "seeds": cfg.seeds,
        "dataset": dataset_summary(ds),
        "splits": {"train": train_r, "validation": val_r},
        "alignment": alignment.as_dict() if alignment is not None else None,
        "tau_source": _tau_source(given),
        "initialized_from_checkpoints": init is not None,
        "checkpoints": _checkpoint_index(models),
        "models": {m: [x.manifest() for x in ms] for m, ms in models.items()},
        "losses": {m: [x.as_dict() for x in ls] for m, ls in losses.items()},
    }
    return RunResult(None, models, alignment, losses, checkpoints, manifest)


# ----------------------------------------------------------------------
# oracle
# ----------------------------------------------------------------------
def run_oracle(ds: Dataset, cfg: ExperimentConfig, alignment: Optional[AlignmentResult] = None) -> RunResult:
    """ERM, FPS (estimated X̂^DR) and the oracle (true X^DR) on the test anchors that carry x_dr."""
    ds.require_performative()
    L, H = cfg.lookback, cfg.horizon
    train_r, val_r, test_r = split_standard(ds, cfg.split_ratios)
    given = alignment
    alignment = check_alignment(given, ds, H) if given is not None else align_all(ds, train_r, H, cfg.metric)
    samples = [s for s in make_windows(ds, L, H, alignment.taus, eval_range(test_r, L)) if s.has_delayed]
    if not samples:
        raise EvaluationError(f"no eligible anchors: no test window carries x_dr for tau={list(alignment.taus)}")

    config_hash = cfg.config_hash()
    seeds = cfg.seeds
    report = EvalReport(ORACLE, provenance={
        **_base_provenance(cfg, ORACLE),
        "splits": {"train": train_r, "validation": val_r, "test": test_r},
        "tau": list(alignment.taus),
        "tau_source": _tau_source(given),
    }, warnings=list(alignment.warnings))

    models: Dict[str, List[Model]] = {}
    losses: Dict[str, List[LossReport]] = {}
    checkpoints: Dict[str, Dict[str, ParamSet]] = {}
    for method in (Method.ERM.value, Method.FPS.value, ORACLE):
        members, member_losses = [], []
        for seed in seeds:
            model, loss = fit_method(method, ds, alignment, cfg.train_for(seed), cfg.model, cfg, train_r, val_r, config_hash)
            members.append(model)
            member_losses.append(loss)
            checkpoints[f"{method}-seed{seed}.ckpt"] = param_groups(model)
        models[method], losses[method] = members, member_losses
        report.parameters[method] = members[0].parameter_count
        _score_members(report, method, members, samples, oracle=method == ORACLE)

    manifest = {
        "protocol": ORACLE,
        "config": cfg.model_dump(mode="json"),
        "config_hash": config_hash,
        "seeds": seeds,
        "dataset": dataset_summary(ds),
        "alignment": alignment.as_dict(),
        "anchors": [s.t for s in samples],
        "tau_source": _tau_source(given),
        "checkpoints": _checkpoint_index(models),
        "models": {m: [x.manifest() for x in ms] for m, ms in models.items()},
        "losses": {m: [x.as_dict() for x in ls] for m, ls in losses.items()},
    }
    return RunResult(report, models, alignment, losses, checkpoints, manifest)


# ----------------------------------------------------------------------
# realtime
# ----------------------------------------------------------------------
@dataclass
class _Pass:
    anchors: List[int] = field(default_factory=list)
    truth: List[np.ndarray] = field(default_factory=list)
    members: Dict[int, List[np.ndarray]] = field(default_factory=dict)
    ensemble: List[np.ndarray] = field(default_factory=list)
    final: List[Model] = field(default_factory=list)
    losses: List[LossReport] = field(default_factory=list)
    checkpoints: Dict[str, Dict[str, ParamSet]] = field(default_factory=dict)


def realtime_schedule(T: int, cfg: ExperimentConfig) -> List[int]:
    """Anchors t0 = start, start+stride, ... whose horizon is observed."""
    L, H = cfg.lookback, cfg.horizon
    start = cfg.protocol.start if cfg.protocol.start is not None else math.floor(0.6 * T)
    if start < L + H:
        raise ConfigError(f"protocol start {start} leaves less than L+H={L + H} steps of history")
    steps = list(range(start, T - H, cfg.protocol.stride))
    if not steps:
        raise EvaluationError(f"schedule empty: no anchor in [{start}, {T - H}) with stride {cfg.protocol.stride}")
    return steps


def _retrain(
    method: str,
    view: Dataset,
    alignment: Optional[AlignmentResult],
    prev: Optional[Model],
    seed: int,
    cand: Candidate,
    cfg: ExperimentConfig,
    config_hash: str,
) -> Tuple[Model, Optional[LossReport]]:
    proto = cfg.protocol
    if prev is not None and proto.warm_start and proto.retrain_epochs == 0:
        return prev, None
    if prev is None:
        train_cfg = cand.train.model_copy(update={"seed": seed})
    else:
        epochs = proto.retrain_epochs if proto.warm_start else (proto.retrain_epochs or cand.train.epochs)
        train_cfg = cand.train.model_copy(update={
            "seed": seed,
            "epochs": epochs,
            "pretrain_epochs": min(cand.train.pretrain_epochs, epochs),
        })
    init = prev if proto.warm_start else None
    return fit_method(method, view, alignment, train_cfg, cand.model, cfg, (0, view.T), None, config_hash, init=init)


def _realtime_pass(
    tracked: AccessTrackedDataset,
    steps: Sequence[int],
    method: str,
    cand: Candidate,
    cfg: ExperimentConfig,
    alignment_at: Callable[[int], AlignmentResult],
    config_hash: str,
    keep_checkpoints: bool = False,
    init: Optional[Dict[str, List[Model]]] = None,
) -> _Pass:
    seeds = cfg.seeds
    state: Dict[int, Optional[Model]] = {seed: initial_member(init, method, seed, cfg) for seed in seeds}
    out = _Pass(members={seed: [] for seed in seeds})
    for t0 in tqdm(steps, desc=f"{method} [{cand.label}]", disable=not settings.FPS_PROGRESS):
        alignment = alignment_at(t0) if method == Method.FPS.value else None
        view = tracked.observed(t0, "train")
        for seed in seeds:
            model, loss = _retrain(method, view, alignment, state[seed], seed, cand, cfg, config_hash)
            state[seed] = model
            if loss is not None:
                out.losses.append(loss)
            if keep_checkpoints:
                out.checkpoints[f"step-{t0:06d}/{method}-seed{seed}.ckpt"] = param_groups(model)

        sample = forecast_sample(tracked.observed(t0, "forecast"), t0, cfg.lookback)
        members = [state[seed] for seed in seeds]
        for seed, model in zip(seeds, members):
            out.members[seed].append(predict_many(model, [sample])[0])
        out.ensemble.append(ensemble_predict_many(members, [sample])[0])
        out.anchors.append(t0)
        out.truth.append(tracked.truth(t0, cfg.horizon))
    out.final = [state[seed] for seed in seeds]
    return out


def run_realtime(
    data: Union[Dataset, AccessTrackedDataset],
    cfg: ExperimentConfig,
    alignment: Optional[AlignmentResult] = None,
    init: Optional[Dict[str, List[Model]]] = None,
) -> RunResult:
    """
    A given alignment fixes τ for every step. init supplies the models of the
    first step (matched by seed), which then retrain like any warm start.
    """
    tracked = data if isinstance(data, AccessTrackedDataset) else AccessTrackedDataset(data)
    methods = [m.value for m in cfg.methods]
    if Method.FPS.value in methods:
        tracked.dataset.require_performative()
    proto = cfg.protocol
    steps = realtime_schedule(tracked.T, cfg)
    if init is not None and not proto.warm_start:
        raise ConfigError("initial checkpoints need a warm-start protocol")
    if alignment is not None and Method.FPS.value in methods:
        check_alignment(alignment, tracked.dataset, cfg.horizon)
    n_val = math.floor(proto.validation_fraction * len(steps))
    config_hash = cfg.config_hash()

    alignments: Dict[int, AlignmentResult] = {}

    def alignment_at(t0: int) -> AlignmentResult:
        if alignment is not None:
            return alignment
        key = t0 if proto.reestimate_tau else steps[0]
        if key not in alignments:
            view = tracked.observed(key, "align")
            alignments[key] = align_all(view, (0, view.T), cfg.horizon, cfg.metric)
        return alignments[key]

    report = EvalReport("realtime", provenance={
        **_base_provenance(cfg, "realtime"),
        "schedule": {"start": steps[0], "stop": steps[-1], "stride": proto.stride, "steps": len(steps),
                     "validation_steps": n_val},
        "warm_start": proto.warm_start,
        "retrain_epochs": proto.retrain_epochs,
        "reestimate_tau": proto.reestimate_tau and alignment is None,
        "tau_source": _tau_source(alignment),
        "initialized_from_checkpoints": init is not None,
    })

    candidates = expand_grid(cfg.train, cfg.model, cfg.grid)
    models: Dict[str, List[Model]] = {}
    losses: Dict[str, List[LossReport]] = {}
    checkpoints: Dict[str, Dict[str, ParamSet]] = {}
    chosen_by_method: Dict[str, str] = {}

    for method in methods:
        chosen = candidates[0]
        if len(candidates) > 1 and n_val == 0:
            report.warnings.append(f"{method}: grid given but no validation steps; using {chosen.label}")
        elif len(candidates) > 1:
            scored = []
            for cand in candidates:
                trial = _realtime_pass(tracked, steps[:n_val], method, cand, cfg, alignment_at, config_hash, init=init)
                scored.append((nmae(np.stack(trial.truth), np.stack(trial.ensemble)), cand))
                logger.info("%s [%s]: validation NMAE %.5f", method, cand.label, scored[-1][0])
            chosen = min(scored, key=lambda pair: pair[0])[1]
        chosen_by_method[method] = chosen.label

        run = _realtime_pass(tracked, steps, method, chosen, cfg, alignment_at, config_hash, keep_checkpoints=True,
                             init=init)
        truth = np.stack(run.truth)
        for phase, part in (("validation", slice(0, n_val)), ("test", slice(n_val, None))):
            anchors = run.anchors[part]
            if not anchors:
                continue
            for seed in cfg.seeds:
                report.add_forecasts(method, f"seed-{seed}", seed, anchors, truth[part], np.stack(run.members[seed])[part], phase)
            report.add_forecasts(method, "ensemble", cfg.seeds[0], anchors, truth[part], np.stack(run.ensemble)[part], phase)
        models[method], losses[method] = run.final, run.losses
        checkpoints.update(run.checkpoints)
        report.parameters[method] = run.final[0].parameter_count

    audit = tracked.audit()
    if audit["violations"]:
        raise InvariantError(f"leakage: {audit['violations']} read(s) past the anchor")
    report.provenance["chosen"] = chosen_by_method
    report.provenance["access_audit"] = audit
    tau_history = {str(t0): list(a.taus) for t0, a in sorted(alignments.items())}
    if alignments:
        report.warnings.extend(sorted({w for a in alignments.values() for w in a.warnings}))

    if alignment is not None and Method.FPS.value in methods:
        final_alignment = alignment
        report.warnings.extend([w for w in alignment.warnings if w not in report.warnings])
    else:
        final_alignment = alignments[max(alignments)] if alignments else None
    manifest = {
        "protocol": "realtime",
        "config": cfg.model_dump(mode="json"),
        "config_hash": config_hash,
        "seeds": cfg.seeds,
        "dataset": dataset_summary(tracked.dataset),
        "schedule": report.provenance["schedule"],
        "chosen": chosen_by_method,
        "tau_history": tau_history,
        "access_audit": audit,
        "tau_source": _tau_source(alignment),
        "checkpoints": _checkpoint_index(models, prefix=f"step-{steps[-1]:06d}/"),
        "models": {m: [x.manifest() for x in ms] for m, ms in models.items()},
    }
    return RunResult(report, models, final_alignment, losses, checkpoints, manifest)

"""
Write a synthetic performative dataset: <name>.csv, <name>.meta.json and a
<name>.yaml dataset config next to it.
"""

from pathlib import Path

from django.conf import settings

from cli.base import FpsCommand
from cli.config import apply_overrides
from series.config import load_yaml
from series.synthetic import SyntheticSpec, generate_synthetic, write_synthetic

SPEC_FLAGS = {
    "T": "T",
    "d1": "lag_response",
    "d2": "lag_effect",
    "a": "a",
    "b": "b",
    "c": "c",
    "g": "g",
    "sigma_x": "sigma_x",
    "sigma_y": "sigma_y",
    "snr": "snr",
    "response_scale": "response_scale",
    "intervention_amplitude": "intervention_amplitude",
    "intervention_period": "intervention_period",
    "intervention_damping": "intervention_damping",
    "forcing_amplitude": "forcing_amplitude",
    "forcing_period": "forcing_period",
    "flip_at": "flip_at",
    "horizon": "horizon",
    "burn_in": "burn_in",
    "seed": "seed",
}


class Command(FpsCommand):
    help = "Generate a synthetic feedback-loop dataset with a planted lag."

    def add_arguments(self, parser):
        parser.add_argument("--config", help="YAML file; its 'synthetic' mapping (or the whole file) holds the generator settings")
        parser.add_argument("--T", type=int, help="series length (default 2000)")
        parser.add_argument("--d1", type=int, help="lag from forecast to behaviour change (default 2)")
        parser.add_argument("--d2", type=int, help="lag from behaviour to target change, the planted lead (default 3)")
        parser.add_argument("--a", type=float, help="target autoregression (default 0.3)")
        parser.add_argument("--b", type=float, help="feature -> target coupling (default 1.0)")
        parser.add_argument("--c", type=float, help="feature autoregression (default 0.3)")
        parser.add_argument("--g", type=float, help="target -> feature feedback (default 0.1)")
        parser.add_argument("--sigma", type=float, help="noise level for both series")
        parser.add_argument("--sigma-x", type=float, help="feature noise level (default 0.1)")
        parser.add_argument("--sigma-y", type=float, help="target noise level (default 0.1)")
        parser.add_argument("--snr", type=float, help="signal-to-noise ratio; calibrates both noise levels from a noiseless run")
        parser.add_argument("--response-scale", type=float, help="saturation scale of the behaviour response (default 1.0)")
        parser.add_argument("--linear-response", action="store_true", help="unsaturated behaviour response")
        parser.add_argument("--intervention-amplitude", type=float, help="std of the exogenous intervention cycle (default 1.0)")
        parser.add_argument("--intervention-period", type=float, help="period of the intervention cycle (default 8)")
        parser.add_argument("--intervention-damping", type=float, help="root modulus of the intervention cycle, below 1 (default 0.9)")
        parser.add_argument("--forcing-amplitude", type=float, help="seasonal forcing amplitude (default 0)")
        parser.add_argument("--forcing-period", type=float, help="seasonal forcing period (default 25)")
        parser.add_argument("--flip-at", type=int, help="index from which the coupling b changes sign")
        parser.add_argument("--horizon", type=int, help="horizon H the planted loop must fit (default 8)")
        parser.add_argument("--burn-in", type=int, help="discarded warm-up steps (default 200)")
        parser.add_argument("--lookback", type=int, default=16, help="lookback written to the dataset config (default 16)")
        parser.add_argument("--seed", type=int, help="noise seed (default FPS_DEFAULT_SEED)")
        parser.add_argument("--name", default="synthetic", help="file stem (default synthetic)")
        parser.add_argument("-o", "--output-dir", help="destination directory (default FPS_RUNS_DIR/data)")

    def run(self, **options):
        data = {}
        if options["config"]:
            loaded = load_yaml(Path(options["config"]))
            data = loaded.get("synthetic", loaded)
        data.setdefault("seed", settings.FPS_DEFAULT_SEED)
        if options["sigma"] is not None:
            data["sigma_x"] = data["sigma_y"] = options["sigma"]
        data = apply_overrides(data, {key: options.get(dest) for dest, key in SPEC_FLAGS.items()})
        if options["linear_response"]:
            data["response_scale"] = None
        spec = SyntheticSpec(**data)

        out_dir = Path(options["output_dir"]) if options["output_dir"] else Path(settings.FPS_RUNS_DIR) / "data"
        ds = generate_synthetic(spec)
        paths = write_synthetic(ds, spec, out_dir, name=options["name"], lookback=options["lookback"])
        for label, path in paths.items():
            self.stdout.write(f"{label}: {path}")
        self.stdout.write(self.style.SUCCESS(
            f"wrote T={ds.T} planted_lead={spec.lag_effect} expected_tau={spec.expected_tau} "
            f"sigma_x={ds.metadata['noise']['sigma_x']:.4g} sigma_y={ds.metadata['noise']['sigma_y']:.4g}"
        ))

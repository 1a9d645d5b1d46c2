from cli.base import FpsCommand
from fps_lab.errors import InvariantError
from seqmodel.gradcheck import gradient_check


class Command(FpsCommand):
    help = "Compare reverse-mode gradients with central finite differences on random small networks."

    def add_arguments(self, parser):
        parser.add_argument("--configs", type=int, default=50, help="number of random configurations (default 50)")
        parser.add_argument("--seed", type=int, default=0, help="seed of the configuration draw (default 0)")
        parser.add_argument("--tolerance", type=float, default=1e-4, help="maximum allowed relative error (default 1e-4)")
        parser.add_argument("--eps", type=float, default=1e-5, help="finite-difference step (default 1e-5)")

    def run(self, **options):
        report = gradient_check(n_configs=options["configs"], seed=options["seed"],
                                tolerance=options["tolerance"], eps=options["eps"])
        if options["verbosity"] > 1:
            for case in report.cases:
                self.stdout.write(f"{case.kind:<9} L={case.steps} K={case.channels} hidden={case.hidden}  {case.max_rel_error:.3e}  {case.worst_param}")
        self.stdout.write(f"max relative error: {report.max_rel_error:.3e} over {len(report.cases)} configurations")
        if not report.passed:
            worst = max(report.cases, key=lambda c: c.max_rel_error)
            raise InvariantError(
                f"gradient check failed: {report.max_rel_error:.3e} >= {options['tolerance']:g} ({worst.kind}, {worst.worst_param})"
            )
        self.stdout.write(self.style.SUCCESS("gradient check passed"))

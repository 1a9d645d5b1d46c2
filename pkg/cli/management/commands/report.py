"""
Recompute aggregates from a records CSV and compare them with the stored
summary; a mismatch exits with the invariant code.
"""

from pathlib import Path

from cli.base import FpsCommand
from fps_lab.errors import ConfigError
from metrics.reports import RECORDS_FILE, SUMMARY_FILE, verify_summary


class Command(FpsCommand):
    help = "Recompute and verify the aggregates of a finished run."

    def add_arguments(self, parser):
        parser.add_argument("run_dir", nargs="?", help="run directory holding records.csv and summary.json")
        parser.add_argument("--records", help="records CSV (overrides run_dir/records.csv)")
        parser.add_argument("--summary", help="summary JSON (overrides run_dir/summary.json)")

    def run(self, **options):
        if not options["run_dir"] and not (options["records"] and options["summary"]):
            raise ConfigError("give a run directory or both --records and --summary")
        base = Path(options["run_dir"]) if options["run_dir"] else None
        records = Path(options["records"]) if options["records"] else base / RECORDS_FILE
        summary = Path(options["summary"]) if options["summary"] else base / SUMMARY_FILE
        aggregates = verify_summary(records, summary)
        self.write_aggregates(aggregates)
        self.stdout.write(self.style.SUCCESS(f"{len(aggregates)} aggregates match {summary}"))

"""Shared plumbing of the scenario management commands."""

import logging
from pathlib import Path

from django.conf import settings
from django.core.exceptions import ValidationError
from django.core.management.base import BaseCommand, CommandError

from apps.mesh_core.exceptions import ShoreOptError
from apps.scenarios.config import parse_config

logger = logging.getLogger(__name__)


def describe(error):
    if isinstance(error, ValidationError) and hasattr(error, "error_dict"):
        return "; ".join(
            f"{key}: {' '.join(messages)}" for key, messages in sorted(error.message_dict.items())
        )
    if isinstance(error, ValidationError):
        return " ".join(error.messages)
    return str(error)


class ScenarioCommand(BaseCommand):
    """Parse --config, apply the command-line overrides and run the scenario."""

    def add_arguments(self, parser):
        parser.add_argument("--config", required=True, help="Scenario JSON file")
        parser.add_argument(
            "--out", help="Output directory, default output.directory or SHOREOPT_OUTPUT_ROOT"
        )
        parser.add_argument("--threads", type=int, help="Worker threads")
        parser.add_argument(
            "--snapshot-stride",
            type=int,
            dest="snapshot_stride",
            help="Write a VTK snapshot every N steps or iterations, 0 for none",
        )
        parser.add_argument(
            "--max-iters", type=int, dest="max_iterations", help="Optimizer iteration limit"
        )
        parser.add_argument("--seed", type=int, help="Seed of the random test fields")

    def run(self, config):
        raise NotImplementedError

    def handle(self, *args, **options):
        try:
            config = parse_config(options["config"])
            directory = (
                options["out"] or config.output.directory or settings.SHOREOPT["OUTPUT_ROOT"]
            )
            config = config.with_overrides(
                directory=Path(directory).resolve(),
                threads=options["threads"],
                snapshot_stride=options["snapshot_stride"],
                seed=options["seed"],
                max_iterations=options["max_iterations"],
            )
            message = self.run(config)
        except (ShoreOptError, ValidationError) as error:
            logger.debug("Scenario command failed", exc_info=True)
            raise CommandError(describe(error)) from error
        self.stdout.write(self.style.SUCCESS(message))

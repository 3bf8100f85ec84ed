"""
Main entry point for the third-grade fluid simulator and verification harness.
"""
import argparse
import logging
import sys
from pathlib import Path

from config.settings import settings
from src.cli.experiments import EXIT_CONFIG, run
from src.cli.manifest import EXPERIMENT_KINDS, build_manifest

# Configure logging
logging.basicConfig(
    level=getattr(logging, settings.LOG_LEVEL.upper(), logging.INFO),
    format='%(asctime)s - %(name)s - %(levelname)s - %(message)s'
)
logger = logging.getLogger(__name__)


def parse_args(argv=None) -> argparse.Namespace:
    parser = argparse.ArgumentParser(
        description="Galerkin simulation and verification runs for the stochastic third-grade fluid equations"
    )
    parser.add_argument("--config", type=Path, required=True, help="experiment config (INI)")
    parser.add_argument("--kind", choices=EXPERIMENT_KINDS, default="simulate", help="experiment to run")
    parser.add_argument("--seed", type=int, default=settings.SEED, help="master seed (overrides [noise] seed)")
    parser.add_argument("--paths", type=int, default=settings.PATHS, help="ensemble size")
    parser.add_argument("--workers", type=int, default=settings.WORKERS, help="worker processes")
    parser.add_argument("--out", type=Path, default=Path(settings.OUT_DIR), help="output directory")
    return parser.parse_args(argv)


def main(argv=None) -> int:
    """
    Run one experiment and return its exit status.
    """
    args = parse_args(argv)
    print("=" * 60)
    print(f"Third-grade fluid harness - {args.kind}")
    print("=" * 60)

    settings.validate()

    print("\n[1/3] Validating configuration...")
    manifest, errors = build_manifest(
        config_path=args.config,
        kind=args.kind,
        seed=args.seed,
        n_paths=args.paths,
        workers=args.workers,
        out_dir=args.out,
        prefix=settings.ENV_PREFIX,
    )
    if errors:
        for error in errors:
            logger.error(f"Config error: {error}")
            print(f"❌ {error}")
        return EXIT_CONFIG
    print(f"✓ Config {args.config} (hash {manifest.config_hash[:12]}, seed {manifest.seed})")

    print(f"\n[2/3] Running {manifest.kind} with {manifest.n_paths} paths on {manifest.workers} worker(s)...")
    try:
        outcome = run(manifest)
    except Exception as e:
        logger.error(f"Run failed: {e}", exc_info=True)
        print(f"\n❌ Run failed: {e}")
        return EXIT_CONFIG

    print("\n[3/3] Writing report...")
    for path in outcome.artifacts[-2:]:
        print(f"✓ {path}")

    marker = "✓" if outcome.exit_code == 0 else "⚠"
    print(f"\n{marker} {outcome.summary} (exit {outcome.exit_code})")
    return outcome.exit_code


if __name__ == "__main__":
    sys.exit(main())

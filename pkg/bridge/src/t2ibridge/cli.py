"""Bridge command line: prompts in, validated record file out."""

from __future__ import annotations

import argparse
import sys

from .backends import BackendUnavailable
from .config import BridgeConfig, ConfigError, load_config
from .detectors import DetectorUnavailable
from .pipeline import PromptFileError, run_bridge
from .wire import WireError


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="t2i-bridge",
        description="Generate images for a prompt manifest, detect concepts, "
                    "and emit a record file for the auditing workbench.",
    )
    parser.add_argument("--prompts", required=True,
                        help="prompt JSONL (expand-prompts output)")
    parser.add_argument("--config", help="bridge config file (YAML/JSON)")
    parser.add_argument("--out", required=True, help="record file destination")
    parser.add_argument("--media-out", help="directory for generated images")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = load_config(args.config) if args.config else BridgeConfig()
        batch = run_bridge(args.prompts, config, args.out, args.media_out)
    except (ConfigError, PromptFileError, BackendUnavailable,
            DetectorUnavailable) as exc:
        print(f"t2i-bridge: error: {exc}", file=sys.stderr)
        return 1
    except WireError as exc:
        print(f"t2i-bridge: emitted records failed self-check: {exc}",
              file=sys.stderr)
        return 2
    generated = sum(1 for e in batch.entries if e.error is None)
    print(f"t2i-bridge: wrote {len(batch.entries)} image records "
          f"({generated} ok, {batch.failures} failed) to {args.out}",
          file=sys.stderr)
    return 0


if __name__ == "__main__":
    sys.exit(main())

"""``txfault`` command-line entry point."""
from __future__ import annotations

import argparse
import json
import sys

from .pipeline import COMMANDS, PipelineError, RunConfig, run


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="txfault",
        description="Transformer internal-fault dataset, features and classifiers.")
    p.add_argument("verb", choices=sorted(COMMANDS))
    p.add_argument("--config", help="JSON run configuration")
    p.add_argument("--seed", type=int, help="override master_seed")
    p.add_argument("--out", help="override the output directory")
    p.add_argument("--catalog", help="override the feature catalog id")
    p.add_argument("--classifier", choices=("dt", "rf", "gb"),
                   help="override the classifier kind")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        base = RunConfig.load(args.config).to_dict() if args.config else {}
        for key, value in (("master_seed", args.seed), ("out_dir", args.out),
                           ("catalog", args.catalog), ("classifier", args.classifier)):
            if value is not None:
                base[key] = value
        cfg = RunConfig.from_dict(base)
        result = run(args.verb, cfg)
    except PipelineError as exc:
        print(json.dumps({"error": str(exc), "verb": args.verb}), file=sys.stderr)
        return 2
    except (OSError, ValueError, KeyError) as exc:
        print(json.dumps({"error": f"{type(exc).__name__}: {exc}", "verb": args.verb}),
              file=sys.stderr)
        return 1
    print(json.dumps({"verb": args.verb, **result}, sort_keys=True))
    return 0


if __name__ == "__main__":
    sys.exit(main())

"""`model-server serve` command line entry point."""

from __future__ import annotations

import argparse
import sys
from typing import List, Optional

import uvicorn

from .app import DEFAULT_MAX_BATCH, create_app
from .models import load_model


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="model-server",
        description="Serve a classification or fill-mask model over the tweetact backend protocol.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    serve = sub.add_parser("serve", help="start the HTTP service")
    serve.add_argument("--model", required=True, help="hash:<name> or transformers:<checkpoint>")
    serve.add_argument("--task", choices=("classify", "fill-mask"), default="classify")
    serve.add_argument("--port", type=int, default=8100)
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--classes", required=True, help="comma-separated class order")
    serve.add_argument("--max-batch", type=int, default=DEFAULT_MAX_BATCH)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    classes = [c.strip() for c in args.classes.split(",") if c.strip()]
    if not classes:
        print("error: --classes must name at least one class", file=sys.stderr)
        return 2
    try:
        model = load_model(args.model, args.task, len(classes))
        app = create_app(model, classes, args.task, args.max_batch)
    except Exception as exc:  # unresolvable checkpoint, bad spec: fail before binding
        print(f"error: {exc}", file=sys.stderr)
        return 1
    uvicorn.run(app, host=args.host, port=args.port)
    return 0


if __name__ == "__main__":
    sys.exit(main())

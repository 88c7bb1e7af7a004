"""Command line: qfridge-plot --kind K --in FILE [--out FILE] [--logy]."""
import argparse
import sys

from .reader import SchemaError
from .render import KINDS, FigureSpec, render

EXIT_OK = 0
EXIT_SCHEMA = 2


def build_parser():
    parser = argparse.ArgumentParser(
        prog="qfridge-plot",
        description="Render qfridge CSV output into figures.")
    parser.add_argument("--kind", required=True, choices=KINDS)
    parser.add_argument("--in", dest="input", required=True,
                        help="input CSV written by qfridge")
    parser.add_argument("--out", help="output image path (default: KIND.png)")
    parser.add_argument("--logy", action="store_true",
                        help="logarithmic y axis")
    parser.add_argument("--no-annotate", action="store_true",
                        help="suppress peak and symmetry markers")
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    spec = FigureSpec(input_path=args.input, kind=args.kind,
                      output_path=args.out, logy=args.logy,
                      annotate=not args.no_annotate)
    try:
        print(render(spec))
    except (SchemaError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SCHEMA
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())

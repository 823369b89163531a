"""Run every reproduction target and write artifacts under results/ (or --out)."""

import sys

from entropic_bell.cli import main

if __name__ == "__main__":
    sys.exit(main(["reproduce", "all", *sys.argv[1:]]))

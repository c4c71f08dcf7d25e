"""
Regenerate the bundled fixture surfaces.

This script writes genus2.srf, torus.srf and cylinder.srf, then the quad
system of the genus-2 surface as genus2.quads, into fixtures/ (or the
directory given as first argument).
"""

import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent))

from src.cli import write_fixtures  # noqa: E402

if __name__ == "__main__":
    default = Path(__file__).parent.parent / "fixtures"
    output_dir = Path(sys.argv[1]) if len(sys.argv) > 1 else default

    print("Generating fixture surfaces...")
    for path in write_fixtures(output_dir):
        print(f"Created: {path}")
    print("\nDone! Fixtures written to:", output_dir)

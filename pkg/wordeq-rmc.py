#!/usr/bin/env python3
"""
Word Equation RMC - Main Launcher

Runs the solver CLI straight from a source checkout.
"""

import sys
from pathlib import Path


def main():
    """Main entry point that runs the application."""
    src_path = Path(__file__).parent / "src"
    sys.path.insert(0, str(src_path))

    try:
        from wordeq_rmc.cli import main as app_main
        return app_main()
    except ImportError as e:
        print(f"Import error: {e}", file=sys.stderr)
        print("Make sure you're running from the project root directory.", file=sys.stderr)
        return 1
    except KeyboardInterrupt:
        print("\nInterrupted by user", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

"""Module entry point so `python -m ascca` runs the CLI."""

from .cli import main

raise SystemExit(main())

from enercoop.cli import run

raise SystemExit(run())

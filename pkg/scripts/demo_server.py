#!/usr/bin/env python3
"""Run the service against the demo fixture, creating it if needed.

Usage: python scripts/demo_server.py [fixture_dir] [--port 8000]
"""

from __future__ import annotations

import subprocess
import sys
from pathlib import Path

import uvicorn

from dingdate.config import load_config
from dingdate.service import build_state, create_app


def main() -> None:
    args = [a for a in sys.argv[1:] if not a.startswith("--")]
    target = Path(args[0]) if args else Path("demo")
    port = 8000
    for arg in sys.argv[1:]:
        if arg.startswith("--port"):
            port = int(arg.split("=", 1)[1] if "=" in arg else sys.argv[sys.argv.index(arg) + 1])

    if not (target / "service.conf").exists():
        subprocess.run(
            [sys.executable, str(Path(__file__).parent / "make_fixture.py"), str(target)],
            check=True,
        )
    config = load_config(target / "service.conf")
    state = build_state(config)
    static_dir = Path(__file__).parent.parent / "frontend" / "dist"
    app = create_app(state, static_dir=static_dir if static_dir.is_dir() else None)
    print(f"serving on http://127.0.0.1:{port}  (catalog: {len(state.catalog)} artifacts)")
    uvicorn.run(app, host="127.0.0.1", port=port)


if __name__ == "__main__":
    main()

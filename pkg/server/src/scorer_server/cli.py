"""Entry point: bind, load the backend, then serve until interrupted."""

from __future__ import annotations

import argparse
import sys

from .backends import BackendError, build_backend
from .server import DEFAULT_MAX_PREFIX, ServerConfig, make_server


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="scorer-server", description=__doc__)
    parser.add_argument(
        "--model",
        required=True,
        help="backend spec: stub:<vocab file> or hf:<model name> (e.g. hf:gpt2)",
    )
    parser.add_argument("--host", default="127.0.0.1")
    parser.add_argument("--port", type=int, default=8000)
    parser.add_argument("--device", default="cpu", help="hf backend device")
    parser.add_argument("--max-prefix", type=int, default=DEFAULT_MAX_PREFIX)
    args = parser.parse_args(argv)

    config = ServerConfig(
        backend_spec=args.model,
        host=args.host,
        port=args.port,
        device=args.device,
        max_prefix=args.max_prefix,
    )
    server = make_server(config)
    print(
        f"listening on http://{config.host}:{server.server_port} "
        f"(loading {config.backend_spec})",
        file=sys.stderr,
    )
    try:
        backend = build_backend(config.backend_spec, device=config.device)
    except (BackendError, OSError) as exc:
        print(f"scorer-server: {exc}", file=sys.stderr)
        return 1
    server.install_backend(backend)
    print("ready", file=sys.stderr)
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.server_close()
    return 0


if __name__ == "__main__":
    sys.exit(main())

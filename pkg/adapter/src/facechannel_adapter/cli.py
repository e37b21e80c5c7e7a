import argparse
import sys
from pathlib import Path

from .model import AdapterConfig, ModelLoadError
from .serve import serve


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="facechannel-adapter",
        description="Serve a FaceChannel-style model over the affect-predict/1 protocol.",
    )
    parser.add_argument("--model", required=True, type=Path, help="weights file or model source")
    parser.add_argument("--device", default="cpu", choices=["cpu", "accelerator"])
    parser.add_argument(
        "--input-size", type=int, default=None, help="face-crop side length fed to the model"
    )
    args = parser.parse_args(argv)
    try:
        config = AdapterConfig(args.model, args.device, args.input_size)
    except ModelLoadError as e:
        print(f"facechannel-adapter: {e}", file=sys.stderr)
        return 1
    return serve(config)


if __name__ == "__main__":
    sys.exit(main())

"""Run manifests: versions, seeds, config, and hashes of emitted files."""

import hashlib
import json
import os
import platform

import numpy as np

import pnc


def _sha256(path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            digest.update(chunk)
    return digest.hexdigest()


def write_manifest(out_dir, command: str, seed, config: dict,
                   outputs: list) -> str:
    doc = {
        "command": command,
        "seed": seed,
        "config": config,
        "versions": {
            "pnc": pnc.__version__,
            "numpy": np.__version__,
            "python": platform.python_version(),
        },
        "outputs": {
            os.path.basename(p): _sha256(p) for p in sorted(outputs)
        },
    }
    path = os.path.join(out_dir, "manifest.json")
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
    return path

"""File-format adapter between image files and the hashing core.

Lives at the CLI boundary so the core stays dependency-free: this is the
only module that imports Pillow.  Luminance uses the integer-rounded
BT.601 weights so decoding is reproducible across Pillow versions.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from PIL import Image

from .errors import ValidationError
from .imagehash import GrayImage, dhash, format_hash, parse_hash
from .jsonl import iter_json_lines
from .records import validate_address

IMAGE_SUFFIXES = (".png", ".jpg", ".jpeg")


def luminance(r: int, g: int, b: int) -> int:
    # round-half-up of 0.299R + 0.587G + 0.114B in integer arithmetic
    return (299 * r + 587 * g + 114 * b + 500) // 1000


def load_gray_image(path: str | Path) -> GrayImage:
    with Image.open(path) as img:
        rgb = img.convert("RGB")
        width, height = rgb.size
        raw = rgb.tobytes()
    pixels = tuple(luminance(raw[i], raw[i + 1], raw[i + 2]) for i in range(0, len(raw), 3))
    return GrayImage(width=width, height=height, pixels=pixels)


def hash_image_tree(images_dir: str | Path, threads: int = 1) -> list[dict]:
    """Hash every <contract>/<token_id>.<ext> image under *images_dir*.

    Returns hash-cache rows sorted by (contract, token_id); the final sort
    keeps output deterministic regardless of worker count."""
    images_dir = Path(images_dir)
    if not images_dir.is_dir():
        raise ValidationError(f"images directory not found: {images_dir}")
    jobs: list[tuple[str, int, Path]] = []
    for contract_dir in sorted(p for p in images_dir.iterdir() if p.is_dir()):
        contract = validate_address(contract_dir.name, "image directory")
        for image_path in sorted(contract_dir.iterdir()):
            if image_path.suffix.lower() not in IMAGE_SUFFIXES:
                continue
            try:
                token_id = int(image_path.stem)
            except ValueError:
                raise ValidationError(f"image file name must be a token id: {image_path}") from None
            jobs.append((contract, token_id, image_path))

    def hash_one(job: tuple[str, int, Path]) -> dict:
        contract, token_id, path = job
        bits = dhash(load_gray_image(path))
        return {"contract": contract, "token_id": token_id, "dhash": format_hash(bits)}

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            rows = list(pool.map(hash_one, jobs))
    else:
        rows = [hash_one(job) for job in jobs]
    rows.sort(key=lambda r: (r["contract"], r["token_id"]))
    return rows


def load_hash_cache(path: str | Path) -> dict[str, dict[int, int]]:
    """Read a hash-cache file into contract -> token_id -> hash."""
    out: dict[str, dict[int, int]] = {}
    for lineno, obj in iter_json_lines(path):
        try:
            contract = validate_address(obj["contract"], "hash cache contract")
            token_id = int(obj["token_id"])
            bits = parse_hash(obj["dhash"])
        except (KeyError, TypeError, ValueError, ValidationError) as exc:
            raise ValidationError(f"{Path(path)}:{lineno}: bad hash record: {exc}") from None
        out.setdefault(contract, {})[token_id] = bits
    return out

import hashlib


def derive_seed(*parts) -> int:
    """Stable 64-bit seed from arbitrary parts; independent of PYTHONHASHSEED and platform."""
    text = "\x1f".join(str(p) for p in parts)
    return int.from_bytes(hashlib.sha256(text.encode("utf-8")).digest()[:8], "big")

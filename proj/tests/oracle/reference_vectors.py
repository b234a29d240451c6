#!/usr/bin/env python3
"""Reference vectors for the signing code, computed with an independent
Ed25519/SHA-256 implementation (python-cryptography, OpenSSL-backed).

Run this script to regenerate the constants frozen into test_crypto.cpp.
"""
import hashlib
import struct

from cryptography.hazmat.primitives.asymmetric.ed25519 import Ed25519PrivateKey


def signing_payload(rtype: str, name: str, path: str, digest: bytes) -> bytes:
    out = b"meshguard-v1\x00"
    for field in (rtype.encode(), name.encode(), path.encode(), digest):
        out += struct.pack(">I", len(field)) + field
    return out


def main() -> None:
    seed = bytes(32)
    sk = Ed25519PrivateKey.from_private_bytes(seed)
    pub = sk.public_key().public_bytes_raw()
    key_id = hashlib.sha256(pub).hexdigest()[:16]
    print("seed-zero public key :", pub.hex())
    print("seed-zero key id     :", key_id)

    fragment_bytes = b'{"host":"shadow.svc"}'
    digest = hashlib.sha256(fragment_bytes).digest()
    print("fragment digest      :", digest.hex())

    payload = signing_payload("RouteConfiguration", "vs/app", "routes[0].mirror", digest)
    print("payload hex          :", payload.hex())
    print("signature            :", sk.sign(payload).hex())

    ts_payload = signing_payload("RouteConfiguration", "vs/app", "\x00tombstone\x001", bytes(32))
    print("tombstone signature  :", sk.sign(ts_payload).hex())


if __name__ == "__main__":
    main()

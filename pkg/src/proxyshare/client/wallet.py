"""Encrypted local wallet.

Everything a user holds — their key pair, unwrapped distribution keys,
cached blinded responses, collected shares, circle keys — lives in one
JSON document encrypted with AES-GCM under a scrypt-derived key. Private
material leaves the wallet only in the forms the protocol defines
(wrapped key tuples and decryption shares).
"""

from __future__ import annotations

import base64
import hashlib
import json
import os
import secrets
from typing import Any

from cryptography.exceptions import InvalidTag
from cryptography.hazmat.primitives.ciphers.aead import AESGCM

_SCRYPT = {"n": 2**14, "r": 8, "p": 1}
_SALT_BYTES = 16
_NONCE_BYTES = 12


class WalletLocked(Exception):
    """Wrong passphrase or damaged wallet file."""


def _derive(passphrase: str, salt: bytes) -> bytes:
    return hashlib.scrypt(
        passphrase.encode(), salt=salt, dklen=32, maxmem=64 * 1024 * 1024, **_SCRYPT
    )


class Wallet:
    def __init__(self, path: str, passphrase: str, data: dict[str, Any]):
        self.path = path
        self.passphrase = passphrase
        self.data = data

    @classmethod
    def create(
        cls,
        path: str,
        passphrase: str,
        *,
        user_id: str,
        display_name: str,
        server_url: str,
        group_label: str,
        token: str,
        private_hex: str,
        public_hex: str,
    ) -> "Wallet":
        data = {
            "user_id": user_id,
            "display_name": display_name,
            "server_url": server_url,
            "group_label": group_label,
            "token": token,
            "keypair": {"private": private_hex, "public": public_hex},
            "proxy_keys": {},
            "blinded_cache": {},
            "share_state": {},
            "circle_keys": {},
            "denied_requests": [],
        }
        wallet = cls(path, passphrase, data)
        wallet.save()
        return wallet

    @classmethod
    def load(cls, path: str, passphrase: str) -> "Wallet":
        with open(path, "rb") as fh:
            envelope = json.loads(fh.read().decode())
        salt = base64.b64decode(envelope["salt"])
        nonce = base64.b64decode(envelope["nonce"])
        blob = base64.b64decode(envelope["ciphertext"])
        try:
            plain = AESGCM(_derive(passphrase, salt)).decrypt(nonce, blob, b"wallet")
        except InvalidTag:
            raise WalletLocked(f"cannot unlock wallet at {path}") from None
        return cls(path, passphrase, json.loads(plain.decode()))

    def save(self) -> None:
        salt = secrets.token_bytes(_SALT_BYTES)
        nonce = secrets.token_bytes(_NONCE_BYTES)
        blob = AESGCM(_derive(self.passphrase, salt)).encrypt(
            nonce, json.dumps(self.data).encode(), b"wallet"
        )
        envelope = {
            "kdf": "scrypt",
            "salt": base64.b64encode(salt).decode(),
            "nonce": base64.b64encode(nonce).decode(),
            "ciphertext": base64.b64encode(blob).decode(),
        }
        tmp = self.path + ".tmp"
        with open(tmp, "w", encoding="utf-8") as fh:
            fh.write(json.dumps(envelope))
        os.replace(tmp, self.path)

    # convenience accessors -------------------------------------------------

    @property
    def user_id(self) -> str:
        return self.data["user_id"]

    @property
    def token(self) -> str:
        return self.data["token"]

    @property
    def server_url(self) -> str:
        return self.data["server_url"]

    @property
    def group_label(self) -> str:
        return self.data["group_label"]

    def held_key_ids(self) -> set[str]:
        """Distribution keys this wallet can make shares for: every
        unwrapped key plus the user's own key pair (alias form)."""
        return set(self.data["proxy_keys"]) | {self.user_id}

    def private_for_key(self, key_id: str) -> int:
        if key_id == self.user_id:
            return int(self.data["keypair"]["private"], 16)
        return int(self.data["proxy_keys"][key_id]["private"], 16)

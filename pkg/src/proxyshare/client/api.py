"""Thin typed wrapper over the relay's REST API."""

from __future__ import annotations

import uuid
from typing import Any

import httpx


class ServerError(Exception):
    def __init__(self, status: int, code: str, message: str):
        super().__init__(f"{code}: {message}")
        self.status = status
        self.code = code
        self.message = message


class ServerApi:
    def __init__(
        self,
        base_url: str,
        token: str | None = None,
        transport: httpx.BaseTransport | None = None,
        timeout: float = 10.0,
    ):
        self._client = httpx.Client(base_url=base_url, transport=transport, timeout=timeout)
        self.token = token

    def close(self) -> None:
        self._client.close()

    def _headers(self, request_key: str | None = None) -> dict[str, str]:
        headers = {}
        if self.token:
            headers["Authorization"] = f"Bearer {self.token}"
        if request_key:
            headers["Idempotency-Key"] = request_key
        return headers

    def _check(self, response: httpx.Response) -> Any:
        if response.status_code >= 400:
            try:
                body = response.json()
                raise ServerError(response.status_code, body["code"], body["message"])
            except (ValueError, KeyError):
                raise ServerError(response.status_code, "http_error", response.text) from None
        return response.json()

    def _get(self, path: str, **kwargs) -> Any:
        return self._check(self._client.get(path, headers=self._headers(), **kwargs))

    def _post(self, path: str, body: dict, request_key: str | None = None) -> Any:
        if request_key is None:
            request_key = uuid.uuid4().hex  # retries are idempotent by default
        return self._check(
            self._client.post(path, json=body, headers=self._headers(request_key))
        )

    # ---- endpoints ----------------------------------------------------------

    def meta(self) -> dict:
        return self._get("/v1/meta")

    def register(self, display_name: str, public_key: str) -> dict:
        return self._post("/v1/register", {"display_name": display_name, "public_key": public_key})

    def directory(self) -> list[dict]:
        return self._get("/v1/directory")["users"]

    def get_user(self, user_id: str) -> dict:
        return self._get(f"/v1/users/{user_id}")

    def publish(self, item_wire: dict, request_key: str | None = None) -> str:
        return self._post("/v1/content", {"item": item_wire}, request_key)["content_id"]

    def feed(self) -> list[dict]:
        return self._get("/v1/feed")["items"]

    def get_content(self, content_id: str) -> dict:
        return self._get(f"/v1/content/{content_id}")

    def fetch_blinded(self, content_id: str) -> dict:
        return self._post(f"/v1/content/{content_id}/blinded", {})

    def revoke(self, content_id: str, viewer_id: str) -> bool:
        return self._post(f"/v1/content/{content_id}/revoke", {"viewer_id": viewer_id})["deleted"]

    def register_proxy_key(self, key_id: str, public: str, wraps: list[dict]) -> dict:
        return self._post(
            "/v1/proxy-keys", {"key_id": key_id, "public": public, "wraps": wraps}
        )

    def get_proxy_key(self, key_id: str) -> dict:
        return self._get(f"/v1/proxy-keys/{key_id}")

    def add_wraps(self, key_id: str, wraps: list[dict]) -> dict:
        return self._post(f"/v1/proxy-keys/{key_id}/wraps", {"wraps": wraps})

    def wrapped_keys(self) -> list[dict]:
        return self._get("/v1/wrapped-keys")["wraps"]

    def create_share_request(self, content_id: str, g_r: str, g_s: str) -> dict:
        return self._post(
            "/v1/share-requests", {"content_id": content_id, "g_r": g_r, "g_s": g_s}
        )

    def inbox(self) -> list[dict]:
        return self._get("/v1/share-requests/inbox")["requests"]

    def get_share_request(self, request_id: str) -> dict:
        return self._get(f"/v1/share-requests/{request_id}")

    def respond_share_request(self, request_id: str, shares: dict[str, dict]) -> dict:
        return self._post(f"/v1/share-requests/{request_id}/respond", {"shares": shares})

    def create_circle(self, circle_wire: dict) -> dict:
        return self._post("/v1/circles", {"circle": circle_wire})

    def list_circles(self) -> list[dict]:
        return self._get("/v1/circles")["circles"]

    def get_circle(self, circle_id: str) -> dict:
        return self._get(f"/v1/circles/{circle_id}")

    def join_circle(self, circle_id: str) -> dict:
        return self._post(f"/v1/circles/{circle_id}/join", {})

    def rotate_circle(self, circle_id: str, expected_epoch: int, epoch_key_ct: dict) -> dict:
        return self._post(
            f"/v1/circles/{circle_id}/rotate",
            {"expected_epoch": expected_epoch, "epoch_key_ct": epoch_key_ct},
        )

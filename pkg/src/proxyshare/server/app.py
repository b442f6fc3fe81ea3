"""HTTP face of the relay service: JSON over REST, versioned under /v1.

All big integers travel as lowercase hex without leading zeros; errors are
{code, message}. Authentication is a bearer token issued at registration;
mutating endpoints honor an Idempotency-Key header.
"""

from __future__ import annotations

import random

from fastapi import Depends, FastAPI, Header, Request
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field

from ..groups import GroupParams, standard_params
from .service import ApiError, SocialService
from .store import open_store


class RegisterBody(BaseModel):
    display_name: str
    public_key: str


class ContentBody(BaseModel):
    item: dict


class RevokeBody(BaseModel):
    viewer_id: str


class ProxyKeyBody(BaseModel):
    key_id: str
    public: str
    wraps: list[dict] = Field(default_factory=list)


class WrapsBody(BaseModel):
    wraps: list[dict]


class ShareRequestBody(BaseModel):
    content_id: str
    g_r: str
    g_s: str


class ShareRespondBody(BaseModel):
    shares: dict[str, dict]


class CircleBody(BaseModel):
    circle: dict


class RotateBody(BaseModel):
    expected_epoch: int
    epoch_key_ct: dict


def create_app(service: SocialService) -> FastAPI:
    app = FastAPI(title="proxyshare relay", version="1")
    app.state.service = service

    @app.exception_handler(ApiError)
    async def _api_error(_: Request, exc: ApiError):
        return JSONResponse(
            status_code=exc.status, content={"code": exc.code, "message": exc.message}
        )

    def auth(authorization: str | None = Header(default=None)) -> dict:
        token = None
        if authorization and authorization.lower().startswith("bearer "):
            token = authorization[7:]
        return service.authenticate(token)

    def maybe_auth(authorization: str | None = Header(default=None)) -> dict | None:
        if not authorization:
            return None
        return auth(authorization)

    def idem(idempotency_key: str | None = Header(default=None)) -> str | None:
        return idempotency_key

    @app.get("/v1/meta")
    def meta():
        return {"group_label": service.params.label, "api_version": "v1"}

    @app.post("/v1/register")
    def register(body: RegisterBody, request_key: str | None = Depends(idem)):
        return service.register(body.display_name, body.public_key, request_key)

    @app.get("/v1/directory")
    def directory():
        return {"users": service.directory()}

    @app.get("/v1/users/{user_id}")
    def get_user(user_id: str):
        return service.get_user(user_id)

    @app.post("/v1/content")
    def publish(
        body: ContentBody,
        caller: dict = Depends(auth),
        request_key: str | None = Depends(idem),
    ):
        return service.publish(caller, body.item, request_key)

    @app.get("/v1/feed")
    def feed(caller: dict | None = Depends(maybe_auth)):
        return {"items": service.feed(caller)}

    @app.get("/v1/content/{content_id}")
    def get_content(content_id: str, caller: dict | None = Depends(maybe_auth)):
        return service.get_content(caller, content_id)

    @app.post("/v1/content/{content_id}/blinded")
    def fetch_blinded(content_id: str, caller: dict = Depends(auth)):
        return service.fetch_blinded(caller, content_id)

    @app.post("/v1/content/{content_id}/revoke")
    def revoke(
        content_id: str,
        body: RevokeBody,
        caller: dict = Depends(auth),
        request_key: str | None = Depends(idem),
    ):
        return service.revoke(caller, content_id, body.viewer_id, request_key)

    @app.post("/v1/proxy-keys")
    def register_proxy_key(
        body: ProxyKeyBody,
        caller: dict = Depends(auth),
        request_key: str | None = Depends(idem),
    ):
        return service.register_proxy_key(caller, body.key_id, body.public, body.wraps, request_key)

    @app.get("/v1/proxy-keys/{key_id}")
    def get_proxy_key(key_id: str, caller: dict = Depends(auth)):
        return service.get_proxy_key(key_id)

    @app.post("/v1/proxy-keys/{key_id}/wraps")
    def add_wraps(
        key_id: str,
        body: WrapsBody,
        caller: dict = Depends(auth),
        request_key: str | None = Depends(idem),
    ):
        return service.add_wraps(caller, key_id, body.wraps, request_key)

    @app.get("/v1/wrapped-keys")
    def wrapped_keys(caller: dict = Depends(auth)):
        return {"wraps": service.wrapped_keys_for(caller)}

    @app.post("/v1/share-requests")
    def create_share_request(
        body: ShareRequestBody,
        caller: dict = Depends(auth),
        request_key: str | None = Depends(idem),
    ):
        return service.create_share_request(caller, body.content_id, body.g_r, body.g_s, request_key)

    @app.get("/v1/share-requests/inbox")
    def inbox(caller: dict = Depends(auth)):
        return {"requests": service.open_requests_for(caller)}

    @app.get("/v1/share-requests/{request_id}")
    def get_share_request(request_id: str, caller: dict = Depends(auth)):
        return service.get_share_request(caller, request_id)

    @app.post("/v1/share-requests/{request_id}/respond")
    def respond(
        request_id: str,
        body: ShareRespondBody,
        caller: dict = Depends(auth),
        request_key: str | None = Depends(idem),
    ):
        return service.respond_share_request(caller, request_id, body.shares, request_key)

    @app.post("/v1/circles")
    def create_circle(
        body: CircleBody,
        caller: dict = Depends(auth),
        request_key: str | None = Depends(idem),
    ):
        return service.create_circle(caller, body.circle, request_key)

    @app.get("/v1/circles")
    def list_circles(caller: dict = Depends(auth)):
        return {"circles": service.list_circles(caller)}

    @app.get("/v1/circles/{circle_id}")
    def get_circle(circle_id: str, caller: dict = Depends(auth)):
        return service.get_circle(caller, circle_id)

    @app.post("/v1/circles/{circle_id}/join")
    def join_circle(
        circle_id: str,
        caller: dict = Depends(auth),
        request_key: str | None = Depends(idem),
    ):
        return service.join_circle(caller, circle_id, request_key)

    @app.post("/v1/circles/{circle_id}/rotate")
    def rotate_circle(
        circle_id: str,
        body: RotateBody,
        caller: dict = Depends(auth),
        request_key: str | None = Depends(idem),
    ):
        return service.rotate_circle(
            caller, circle_id, body.expected_epoch, body.epoch_key_ct, request_key
        )

    return app


def build_app(
    group_label: str = "modp-2048",
    storage_path: str | None = None,
    rng: random.Random | None = None,
) -> FastAPI:
    params: GroupParams = standard_params(group_label)
    store = open_store(storage_path)
    return create_app(SocialService(store, params, rng))


def run_server(listen: str, group_label: str, storage_path: str | None) -> None:
    import uvicorn

    host, _, port = listen.rpartition(":")
    uvicorn.run(build_app(group_label, storage_path), host=host or "127.0.0.1", port=int(port))

"""Local gateway the web UI talks to.

The browser never performs group arithmetic or sees a private scalar: it
renders view state and calls these endpoints, and the gateway drives the
wallet. Share collection is incremental — each feed refresh advances any
pending requests, so the UI naturally unlocks entries once holders
approve.
"""

from __future__ import annotations

import os

from fastapi import FastAPI, Request
from fastapi.responses import FileResponse, JSONResponse
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel, Field

from ..errors import ProxyShareError
from .api import ServerError
from .workflows import SharesPending, UserSession


class ComposeBody(BaseModel):
    text: str
    visibility: str = "private"  # public | private | circle
    to_users: list[str] = Field(default_factory=list)
    via_keys: list[str] = Field(default_factory=list)
    new_key_holders: list[str] = Field(default_factory=list)
    circle_id: str | None = None


class RevokeBody(BaseModel):
    content_id: str
    viewer_id: str


class CircleCreateBody(BaseModel):
    name: str
    member_ids: list[str]
    keys: int | None = None
    keys_per_member: int = 1


def create_gateway(session: UserSession, static_dir: str | None = None) -> FastAPI:
    app = FastAPI(title="proxyshare gateway", version="1")
    app.state.session = session

    @app.exception_handler(ServerError)
    async def _server_error(_: Request, exc: ServerError):
        return JSONResponse(status_code=exc.status, content={"code": exc.code, "message": exc.message})

    @app.exception_handler(ProxyShareError)
    async def _protocol_error(_: Request, exc: ProxyShareError):
        return JSONResponse(status_code=409, content={"code": "protocol", "message": str(exc)})

    @app.get("/api/me")
    def me():
        return {
            "user_id": session.user_id,
            "display_name": session.wallet.data["display_name"],
            "server_url": session.wallet.server_url,
            "group_label": session.wallet.group_label,
            "held_keys": sorted(session.wallet.held_key_ids()),
        }

    @app.get("/api/directory")
    def directory():
        return {"users": session.api.directory()}

    @app.get("/api/feed")
    def feed():
        entries = []
        for item in session.api.feed():
            entry = {
                "content_id": item["content_id"],
                "owner_id": item["owner_id"],
                "visibility": item["visibility"],
                "circle_id": item.get("circle_id"),
                "epoch": item.get("epoch"),
                "protected": item.get("protected", False),
                "status": "locked",
                "text": None,
                "missing_keys": [],
                "mine": item["owner_id"] == session.user_id,
            }
            try:
                data = session.read(item["content_id"], poll_attempts=0)
                entry["status"] = "public" if not entry["protected"] else "decrypted"
                entry["text"] = data.decode(errors="replace")
            except SharesPending as pending:
                entry["status"] = "pending"
                entry["missing_keys"] = list(pending.missing)
            except (ProxyShareError, ServerError):
                entry["status"] = "locked"
            entries.append(entry)
        return {"entries": entries}

    @app.post("/api/compose")
    def compose(body: ComposeBody):
        data = body.text.encode()
        if body.visibility == "public":
            content_id = session.post_public(data)
        elif body.visibility == "circle":
            if not body.circle_id:
                return JSONResponse(status_code=400, content={"code": "bad_request", "message": "circle_id required"})
            content_id = session.post_circle(body.circle_id, data)
        else:
            content_id = session.post_private(
                data,
                to_users=body.to_users,
                via_keys=body.via_keys,
                new_key_holders=body.new_key_holders,
            )
        return {"content_id": content_id}

    @app.get("/api/inbox")
    def inbox():
        session.sync_wrapped_keys()
        return {"requests": session.inbox()}

    @app.post("/api/inbox/{request_id}/approve")
    def approve(request_id: str):
        for request in session.inbox():
            if request["request_id"] == request_id:
                return {"answered": session.approve_request(request)}
        return JSONResponse(status_code=404, content={"code": "unknown_request", "message": request_id})

    @app.post("/api/inbox/{request_id}/deny")
    def deny(request_id: str):
        for request in session.inbox():
            if request["request_id"] == request_id:
                session.deny_request(request)
                return {"denied": True}
        return JSONResponse(status_code=404, content={"code": "unknown_request", "message": request_id})

    @app.post("/api/revoke")
    def revoke(body: RevokeBody):
        return {"deleted": session.revoke(body.content_id, body.viewer_id)}

    @app.get("/api/circles")
    def circles():
        return {"circles": session.api.list_circles()}

    @app.post("/api/circles")
    def create_circle(body: CircleCreateBody):
        circle_id = session.create_circle(
            body.name, body.member_ids, keys=body.keys, keys_per_member=body.keys_per_member
        )
        return {"circle_id": circle_id}

    @app.post("/api/circles/{circle_id}/join")
    def join_circle(circle_id: str):
        return session.join_circle(circle_id)

    @app.post("/api/circles/{circle_id}/rotate")
    def rotate_circle(circle_id: str):
        return {"epoch": session.rotate_circle(circle_id)}

    if static_dir and os.path.isdir(static_dir):
        index = os.path.join(static_dir, "index.html")

        @app.get("/")
        def root():
            return FileResponse(index)

        app.mount("/", StaticFiles(directory=static_dir), name="static")

    return app

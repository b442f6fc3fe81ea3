"""Drive an ASGI app from the synchronous HTTP client, in-process.

Lets tests and demos wire a client session straight to a service instance
with no socket: pass ``InProcessTransport(app)`` wherever a transport is
accepted. Each request runs the app on a private event loop.
"""

from __future__ import annotations

import asyncio

import httpx


class InProcessTransport(httpx.BaseTransport):
    def __init__(self, app):
        self.app = app

    def handle_request(self, request: httpx.Request) -> httpx.Response:
        content = request.read()

        async def call() -> httpx.Response:
            transport = httpx.ASGITransport(app=self.app)
            rebuilt = httpx.Request(
                request.method, request.url, headers=request.headers, content=content
            )
            response = await transport.handle_async_request(rebuilt)
            body = b"".join([chunk async for chunk in response.stream])
            return httpx.Response(response.status_code, headers=response.headers, content=body)

        return asyncio.run(call())

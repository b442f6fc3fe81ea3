import random

import httpx
import pytest

from proxyshare import groups
from proxyshare.client.workflows import UserSession
from proxyshare.inprocess import InProcessTransport
from proxyshare.server.app import create_app
from proxyshare.server.service import SocialService
from proxyshare.server.store import MemoryStore

TINY = groups.standard_params("tiny")
STD = groups.standard_params("standard")

# the order-11 subgroup of Z_23*, computed by direct enumeration
TINY_SUBGROUP = sorted(pow(TINY.g, i, TINY.p) for i in range(TINY.q))


@pytest.fixture
def tiny():
    return TINY


@pytest.fixture
def std():
    return STD


class FirstScalarForced:
    """random.Random facade forcing the first scalar draw; on the tiny
    group (only 10 possible key pairs) this keeps user keys collision-free
    while everything after the registration keygen stays seed-driven."""

    def __init__(self, forced: int, inner: random.Random):
        self._forced = forced
        self._inner = inner

    def randrange(self, *args):
        if self._forced is not None:
            value, self._forced = self._forced, None
            return value
        return self._inner.randrange(*args)

    def __getattr__(self, name):
        return getattr(self._inner, name)


class Relay:
    """An in-process service + helpers to spin up user sessions."""

    def __init__(self, tmp_path, group_label="tiny-23", seed=1234):
        self.store = MemoryStore()
        self.params = groups.standard_params(group_label)
        self.service = SocialService(self.store, self.params, rng=random.Random(seed))
        self.app = create_app(self.service)
        self.transport = InProcessTransport(self.app)
        self.tmp_path = tmp_path
        self._count = 0

    def session(self, name: str, seed: int) -> UserSession:
        self._count += 1
        rng: random.Random = random.Random(seed)
        if self.params.label == "tiny-23":
            rng = FirstScalarForced(self._count, rng)
        return UserSession.register(
            "http://relay.test",
            name,
            str(self.tmp_path / f"{name}-{self._count}.wallet"),
            passphrase="test-passphrase",
            transport=self.transport,
            rng=rng,
        )

    def raw_client(self, token: str | None = None) -> httpx.Client:
        headers = {"Authorization": f"Bearer {token}"} if token else {}
        return httpx.Client(
            base_url="http://relay.test", transport=self.transport, headers=headers
        )


@pytest.fixture
def relay(tmp_path):
    return Relay(tmp_path)


@pytest.fixture
def relay_std(tmp_path):
    return Relay(tmp_path, group_label="modp-2048")

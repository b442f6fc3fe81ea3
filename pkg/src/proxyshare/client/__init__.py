from .api import ServerApi, ServerError
from .wallet import Wallet
from .workflows import SharesPending, UserSession

__all__ = ["ServerApi", "ServerError", "Wallet", "UserSession", "SharesPending"]

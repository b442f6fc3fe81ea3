from .service import ApiError, SocialService
from .store import FileStore, MemoryStore

__all__ = ["ApiError", "SocialService", "MemoryStore", "FileStore"]

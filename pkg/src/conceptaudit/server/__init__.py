from .app import create_app
from .state import ServerState, SingleFlightCache

__all__ = ["create_app", "ServerState", "SingleFlightCache"]

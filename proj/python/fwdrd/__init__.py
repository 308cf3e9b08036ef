from ._fwdrd import *  # noqa: F401,F403
from ._fwdrd import INF, Error

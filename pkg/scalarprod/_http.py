from __future__ import annotations

import logging
import sys
from typing import Any, ClassVar, Optional, Tuple
from urllib.parse import quote as _uriquote

import aiohttp

from scalarprod import __version__
from scalarprod.errors import BFileError
from scalarprod.sequences import SequenceWindow, read_bfile
from scalarprod.utils import bfile_path, is_oeis_id

__all__: Tuple[str, ...] = ("HTTPClient", "Route")
_log = logging.getLogger(__name__)


class Route:
    BASE: ClassVar[str] = "https://oeis.org"

    def __init__(self, method: str, path: str, **parameters: Any) -> None:
        self.path: str = path
        self.method: str = method
        url = self.BASE + self.path
        if parameters:
            url = url.format_map(
                {k: _uriquote(v) if isinstance(v, str) else v for k, v in parameters.items()}
            )
        self.url: str = url

    @classmethod
    def bfile(cls, anumber: str) -> Route:
        if not is_oeis_id(anumber):
            raise ValueError(f"{anumber!r} is not an OEIS A-number")
        return cls("GET", bfile_path(anumber))


class HTTPClient:
    """A lazily opened session for the OEIS b-file pages.

    Use it as an async context manager so the session is closed on exit.
    """

    def __init__(
        self,
        connector: Optional[aiohttp.BaseConnector] = None,
        *,
        base: Optional[str] = None,
    ) -> None:
        self._connector = connector
        self.__session: Optional[aiohttp.ClientSession] = None
        self.base = base

        py_ver = sys.version_info
        self.user_agent = (
            f"scalarprod/{__version__} Python/{py_ver[0]}.{py_ver[1]} aiohttp/{aiohttp.__version__}"
        )

    async def __aenter__(self) -> HTTPClient:
        return self

    async def __aexit__(self, *args: Any) -> None:
        await self.close()

    async def create_session(self) -> None:
        self.__session = aiohttp.ClientSession(connector=self._connector)
        _log.debug("Session object created")

    async def close(self) -> None:
        if self.__session is not None:
            await self.__session.close()
            self.__session = None
            _log.debug("Session object closed")

    def _url(self, route: Route) -> str:
        if self.base is None:
            return route.url
        return self.base.rstrip("/") + route.path

    async def request(self, route: Route, **kwargs: Any) -> str:
        if self.__session is None:
            await self.create_session()

        headers = dict(kwargs.pop("headers", None) or {})
        headers["User-Agent"] = self.user_agent
        url = self._url(route)
        _log.debug("%s %s", route.method, url)
        async with self.__session.request(route.method, url, headers=headers, **kwargs) as response:  # type: ignore
            response.raise_for_status()
            return await response.text()

    async def get_bfile(self, anumber: str) -> SequenceWindow:
        try:
            text = await self.request(Route.bfile(anumber))
        except aiohttp.ClientResponseError as e:
            raise BFileError(f"could not download the b-file of {anumber}: {e.status}") from e
        return read_bfile(text)

import asyncio

import pytest
from aiohttp import web

from scalarprod._http import HTTPClient, Route
from scalarprod.errors import BFileError


def _serve(routes, scenario):
    async def go():
        app = web.Application()
        app.add_routes(routes)
        runner = web.AppRunner(app)
        await runner.setup()
        site = web.TCPSite(runner, "127.0.0.1", 0)
        await site.start()
        try:
            host, port = runner.addresses[0][:2]
            return await scenario(f"http://{host}:{port}")
        finally:
            await runner.cleanup()

    return asyncio.run(go())


def test_routes():
    assert Route.bfile("A000085").url == "https://oeis.org/A000085/b000085.txt"
    assert Route("GET", "/search?q={q}", q="1 2 5").url == "https://oeis.org/search?q=1%202%205"
    with pytest.raises(ValueError, match="not an OEIS A-number"):
        Route.bfile("A85")


def test_download_bfile():
    seen = {}

    async def bfile(request):
        seen["agent"] = request.headers["User-Agent"]
        return web.Response(text="# involutions\n0 1\n1 1\n2 2\n3 4\n")

    async def scenario(base):
        async with HTTPClient(base=base) as client:
            return await client.get_bfile("A000085")

    window = _serve([web.get("/A000085/b000085.txt", bfile)], scenario)
    assert window.values == (1, 1, 2, 4)
    assert seen["agent"].startswith("scalarprod/")


def test_missing_bfile():
    async def scenario(base):
        async with HTTPClient(base=base + "/") as client:
            await client.get_bfile("A999999")

    with pytest.raises(BFileError, match="A999999: 404"):
        _serve([], scenario)

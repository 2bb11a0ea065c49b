import pytest

from brmgame.model import GameConfig, MinerType, MiningParams, SystemType, parity_complete

F_VECTORS = [(0.0, 0.5, 0.3, 0.2), (0.0, 0.41, 0.33, 0.26), (0.0, 0.8, 0.1, 0.1)]
RHOS = [2, 3, 4]
M_RATIOS = [1e-3, 1e-4]

# small lambda keeps gamma_full near 1e-3, so the query-level samplers stay cheap
MINING = MiningParams(lambda_bits=16, t_full=64)


def make_cfg(f=F_VECTORS[0], rho=2, ratio=1e-3, a=1.0, b=1.0, c=0.0, mode="assumption1",
             t_ratio=100, partial_share=0.5, m1=100.0, **kw):
    fc = parity_complete(1.0, MINING.t_full, MINING.t_full * t_ratio, partial_share / t_ratio)
    return GameConfig(a=a, b=b, c=c, miner=MinerType(m1, rho), system=SystemType(m1 / ratio, f),
                      mining=MINING, fruitchain=fc, approximation_mode=mode, **kw)


def battery():
    for rho in RHOS:
        for f in F_VECTORS:
            for x in M_RATIOS:
                yield make_cfg(f=f, rho=rho, ratio=x)


@pytest.fixture
def cfg():
    return make_cfg()


_ACCEPTANCE: dict[int, tuple[bool, str]] = {}


def record_acceptance(n: int, ok: bool, detail: str) -> None:
    _ACCEPTANCE[n] = (ok, detail)


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_ACCEPTANCE):
        ok, detail = _ACCEPTANCE[n]
        terminalreporter.write_line(f"criterion {n}: {'PASS' if ok else 'FAIL'}  {detail}")

import os

import pytest
from hypothesis import HealthCheck, settings

settings.register_profile("default", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

CRITERIA = {
    1: "calibrated extinction reconstruction (58 MHz, 2.9 %)",
    2: "resonant equal-width split",
    3: "monochromatic perfect reflection",
    4: "numeric and analytic spectra agree",
    5: "norm conservation and free decay",
    6: "conversions and scalar calculators",
    7: "fit correctness and coverage",
    8: "campaign round trip, dark counts, recalibration",
    9: "determinism",
}
_outcomes = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("acceptance")
    if mark is None or not mark.args:
        return
    ok = rep.passed if rep.when == "call" else not rep.failed
    res = _outcomes.setdefault(mark.args[0], {"ok": True, "tests": 0})
    if rep.when == "call":
        res["tests"] += 1
    res["ok"] = res["ok"] and ok and not rep.skipped


def pytest_terminal_summary(terminalreporter):
    if not _outcomes:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for n in sorted(CRITERIA):
        res = _outcomes.get(n)
        if res is None:
            continue
        verdict = "PASS" if res["ok"] and res["tests"] else "FAIL"
        tr.write_line(f"criterion {n}: {verdict}  {CRITERIA[n]} [{res['tests']} tests]")


@pytest.fixture(scope="session")
def reconstruction():
    from photonprobe.pipeline import reconstruct
    return reconstruct()


@pytest.fixture(scope="session")
def resonant_run():
    """Default-grid scattering of a resonant photon, gamma_s = gamma_t = 20 MHz."""
    from photonprobe.quantities import fwhm_to_lifetime
    from photonprobe.scatter_analytic import EmitterParams
    from photonprobe.scatter_numeric import simulate_scattering
    from photonprobe.wavepacket import make_rising_exponential

    tau = fwhm_to_lifetime(20.0).tau
    em = EmitterParams(0.0, 20.0)
    photon = make_rising_exponential(0.0, tau)
    return simulate_scattering(em, photon, save_times=[-2 * tau, 0.0, 2 * tau, 8 * tau])


@pytest.fixture
def run_cli(tmp_path):
    from photonprobe.cli import main

    def run(*argv, out=None):
        out = out or tmp_path / "out"
        code = main([*argv, "--out", str(out)])
        return code, out

    return run


"""One test per acceptance criterion; each prints a pass/fail line.

The checks live in :mod:`uamo.checks` so that ``uamo verify`` reports the
same numbers. The summary of all lines is repeated at the end of the run.
"""
import pytest

from uamo import checks


def _run(name, record_line, note=""):
    r = checks.SUITES[name]()
    line = r.line() + (f"  {note(r)}" if note else "")
    print(line)
    record_line(line)
    return r


CRITERIA = [
    ("logcos", lambda r: f"max abs err {max(r.details['abs_errors'].values()):.2e}"),
    ("identities", lambda r: "det_M {det_M:.1e} det_N {det_N:.1e} N_vs_GZ {N_vs_GZ:.1e} comp {composition:.1e}".format(**r.details)),
    ("large_eps", lambda r: f"max |L - 6pi| {r.details['max_abs_dev']:.2e}"),
    ("n_to_m", lambda r: f"max gap {r.details['max_gap']:.2e} vs tol >= {r.details['min_tolerance']:.2e}"),
    ("criticality", lambda r: f"on-spectrum max dev {max(r.details['on_max_dev']):.3f}, off L0 min {min(r.details['off_L0']):.3f}"),
    ("quantization", lambda r: f"{r.details['resolved']}/{r.details['points']} resolved, max dev {r.details['max_dev']:.3g}"),
    ("measure_trend", lambda r: "strict nominal decrease {}, within uncertainty {}".format(
        r.details["strictly_decreasing_nominal"], r.details["decreasing_within_uncertainty"])),
    ("dominated_splitting", lambda r: "3/5 {agreement:.3f}".format(**r.details["3/5"])
        + " 5/8 {agreement:.3f}".format(**r.details["5/8"]) + f" z=2 {r.details['z=2']}"),
    ("duality", lambda r: "medians " + ", ".join(f"{v:.4g}" for v in r.details["median_up"])),
    ("symmetry", lambda r: f"{r.details['rows']} rows"),
    ("cos_product", lambda r: f"C0 = {r.details['C0']:.4f}"),
]


@pytest.mark.parametrize("name, note", CRITERIA, ids=[c[0] for c in CRITERIA])
def test_criterion(name, note, record_line):
    r = _run(name, record_line, note)
    assert r.passed, r.details
    assert r.seconds <= r.limit, f"{name} took {r.seconds:.1f}s (limit {r.limit:.0f}s)"

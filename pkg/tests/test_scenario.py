import itertools
import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from holoarima.errors import InputError
from holoarima.estimation import ArimaSpec
from holoarima.ingest import EnsembleTable
from holoarima.scenario import compare_ipcc, median_of_estimates, run_scenario, threshold_status

PRINTED = [0.932, -0.266, 0.999, -0.700, 0.996, -0.382]


def test_printed_six_values():
    assert round(median_of_estimates(PRINTED), 3) == 0.333
    assert median_of_estimates(PRINTED) == pytest.approx(0.333, abs=1e-12)


def test_median_permutation_invariant():
    ref = median_of_estimates(PRINTED)
    for perm in itertools.permutations(PRINTED):
        assert median_of_estimates(perm) == ref


@given(st.lists(st.floats(-5, 5, allow_nan=False), min_size=6, max_size=6), st.randoms())
def test_median_permutation_property(values, rnd):
    shuffled = list(values)
    rnd.shuffle(shuffled)
    assert median_of_estimates(shuffled) == median_of_estimates(values)


def test_threshold_status():
    assert threshold_status(0.333, 1.5) == "below threshold"
    assert threshold_status(1.5, 1.5) == "at threshold"
    assert threshold_status(2.0, 1.5) == "above threshold"


def test_compare_ipcc_line():
    line = compare_ipcc(0.333, {"median": 0.1})
    assert line.startswith("coefficient-median 0.333 degC: below threshold")
    assert "forecast median 0.100 degC: below threshold" in line
    with pytest.raises(InputError):
        compare_ipcc(float("nan"))


def test_identical_columns_give_identical_fits(fixture_table):
    m = fixture_table.median
    t = EnsembleTable(ages=fixture_table.ages, p5=m.copy(), median=m.copy(), p95=m.copy())
    rep = run_scenario(t)
    vals = rep.estimate_values
    assert len(vals) == 6
    assert vals[0] == vals[2] == vals[4] and vals[1] == vals[3] == vals[5]
    assert len(set(vals)) == 2
    a, b, c = (rep.fits[k] for k in ("median", "p5", "p95"))
    assert np.array_equal(a.params, b.params) and np.array_equal(a.params, c.params)


def test_scenario_shape_and_determinism(fixture_table):
    a = run_scenario(fixture_table, workers=1)
    b = run_scenario(fixture_table, workers=3)
    assert a.to_json() == b.to_json()
    d = json.loads(a.to_json())
    assert [(e["series"], e["term"]) for e in d["six_estimates"]] == [
        ("median", "AR Lag 1"), ("median", "MA Lag 1"), ("p5", "AR Lag 1"),
        ("p5", "MA Lag 1"), ("p95", "AR Lag 1"), ("p95", "MA Lag 1")]
    assert a.estimates_median == median_of_estimates(a.estimate_values)
    assert d["reference_bin"]["ages_bp"] == [200.0]


def test_scenario_needs_ar_and_ma(fixture_table):
    with pytest.raises(InputError):
        run_scenario(fixture_table, ArimaSpec(1, 0, 0))

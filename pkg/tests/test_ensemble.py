import numpy as np
import pytest

from robustcausal.ensemble import (
    EnsembleConfig,
    analyze_ensemble,
    draw_subsamples,
    link_frequencies,
    robust_graph,
)
from robustcausal.errors import (
    InvalidConfig,
    TooManyWindows,
    VariableMismatch,
    WindowTooLong,
)
from robustcausal.graph import CausalLink, LaggedCausalGraph
from robustcausal.significance import SurrogateConfig
from robustcausal.timeseries import Dataset, TimeSeries


def _series(name, values):
    return TimeSeries(name, np.asarray(values, dtype=float))


def _dataset(seed, names=("A", "B"), l=200):
    rng = np.random.default_rng(seed)
    return Dataset(tuple(_series(n, rng.normal(size=l)) for n in names))


def _fake_graphs(appearances, n, strength_by_run=None):
    """n two-variable graphs; ``appearances[key]`` says in which runs a link shows."""
    graphs = []
    for run in range(n):
        links = []
        for key, runs in appearances.items():
            if run in runs:
                s = strength_by_run[key][run] if strength_by_run else 0.5
                links.append(CausalLink(key[0], key[1], key[2], s))
        graphs.append(LaggedCausalGraph(("U", "V"), tuple(links), 4, "te"))
    return graphs


def test_fixed_overlap_window_starts():
    d = _dataset(0, l=200)
    cfg = EnsembleConfig(3, 100, rng_seed=1, mode="fixed-overlap")
    subs = draw_subsamples(d, cfg)
    assert len(subs) == 3
    np.testing.assert_array_equal(subs[0].get("A").values, d.get("A").values[0:100])
    np.testing.assert_array_equal(subs[1].get("A").values, d.get("A").values[50:150])
    np.testing.assert_array_equal(subs[2].get("A").values, d.get("A").values[100:200])


def test_fixed_overlap_requires_three_windows():
    with pytest.raises(InvalidConfig):
        EnsembleConfig(4, 100, rng_seed=1, mode="fixed-overlap")


def test_nonoverlapping_windows_pack_from_origin():
    d = _dataset(1, l=200)
    cfg = EnsembleConfig(4, 50, rng_seed=1, mode="nonoverlapping")
    subs = draw_subsamples(d, cfg)
    for j, w in enumerate(subs):
        np.testing.assert_array_equal(
            w.get("B").values, d.get("B").values[j * 50 : (j + 1) * 50]
        )
    with pytest.raises(TooManyWindows):
        draw_subsamples(d, EnsembleConfig(5, 50, rng_seed=1, mode="nonoverlapping"))


def test_random_windows_reproducible_and_in_range():
    d = _dataset(2, l=300)
    cfg = EnsembleConfig(20, 80, rng_seed=9)
    a = draw_subsamples(d, cfg)
    b = draw_subsamples(d, cfg)
    for wa, wb in zip(a, b):
        np.testing.assert_array_equal(wa.get("A").values, wb.get("A").values)
        assert wa.length == 80
    # windows must be contiguous slices of the parent
    parent = d.get("A").values
    for w in a:
        start = int(np.where(parent == w.get("A").values[0])[0][0])
        np.testing.assert_array_equal(w.get("A").values, parent[start : start + 80])


def test_window_too_long_rejected():
    d = _dataset(3, l=100)
    with pytest.raises(WindowTooLong):
        draw_subsamples(d, EnsembleConfig(3, 100, rng_seed=0))


def test_vote_keeps_exact_threshold_count():
    # 92 and 90 appearances survive a 0.9 vote over 100 runs, 89 does not
    appearances = {
        ("U", "V", 1): set(range(92)),
        ("U", "V", 2): set(range(90)),
        ("V", "U", 1): set(range(89)),
    }
    freq = link_frequencies(_fake_graphs(appearances, 100))
    robust = robust_graph(freq, threshold=0.9)
    assert robust.graph.link_keys() == {("U", "V", 1), ("U", "V", 2)}
    assert freq.fraction(("V", "U", 1)) == pytest.approx(0.89)


def test_vote_all_three_at_unit_threshold():
    appearances = {("U", "V", 1): {0, 1, 2}, ("V", "U", 2): {0, 2}}
    freq = link_frequencies(_fake_graphs(appearances, 3))
    robust = robust_graph(freq, threshold=1.0)
    assert robust.graph.link_keys() == {("U", "V", 1)}


def test_robust_strength_is_mean_over_appearances():
    key = ("U", "V", 3)
    strengths = {key: {0: 0.2, 2: 0.6}}
    freq = link_frequencies(_fake_graphs({key: {0, 2}}, 3, strengths))
    robust = robust_graph(freq, threshold=0.5)
    (link,) = robust.graph.links
    assert link.strength == pytest.approx(0.4)


def test_frequency_table_csv_lists_candidates():
    freq = link_frequencies(_fake_graphs({("U", "V", 1): {0, 1}}, 2))
    text = freq.to_csv()
    lines = text.strip().splitlines()
    assert lines[0].startswith("source,target,lag")
    assert any(line.startswith("U,V,1") for line in lines[1:])


def test_analyze_ensemble_deterministic_and_worker_independent():
    d = _dataset(4, names=("A", "B", "C"), l=400)
    cfg = EnsembleConfig(8, 120, rng_seed=3)
    sur = SurrogateConfig(rng_seed=17, n_surrogates=40)
    res1 = analyze_ensemble(d, cfg, max_lag=2, surrogate=sur, workers=1)
    res2 = analyze_ensemble(d, cfg, max_lag=2, surrogate=sur, workers=4)
    assert res1.full_graph.link_keys() == res2.full_graph.link_keys()
    assert res1.frequencies.counts == res2.frequencies.counts
    assert res1.robust.graph.link_keys() == res2.robust.graph.link_keys()
    res3 = analyze_ensemble(d, cfg, max_lag=2, surrogate=sur, workers=1)
    assert res3.frequencies.counts == res1.frequencies.counts


def test_analyze_ensemble_reuse_parent_bins_mode_runs():
    d = _dataset(5, names=("A", "B"), l=300)
    cfg = EnsembleConfig(5, 90, rng_seed=2)
    sur = SurrogateConfig(rng_seed=11, n_surrogates=30)
    res = analyze_ensemble(d, cfg, max_lag=2, surrogate=sur, reuse_parent_bins=True)
    assert len(res.subsample_graphs) == 5
    again = analyze_ensemble(d, cfg, max_lag=2, surrogate=sur, reuse_parent_bins=True)
    assert res.frequencies.counts == again.frequencies.counts


def test_analyze_ensemble_reports_all_parts():
    d = _dataset(6, names=("A", "B"), l=250)
    res = analyze_ensemble(
        d,
        EnsembleConfig(4, 80, rng_seed=0),
        max_lag=2,
        surrogate=SurrogateConfig(rng_seed=1, n_surrogates=30),
    )
    assert res.full_graph.variables == ("A", "B")
    assert len(res.subsample_graphs) == 4
    assert res.frequencies.n_subsamples == 4
    assert res.robust.threshold == pytest.approx(0.9)


def test_ensemble_config_validation():
    with pytest.raises(InvalidConfig):
        EnsembleConfig(0, 100, rng_seed=0)
    with pytest.raises(InvalidConfig):
        EnsembleConfig(3, 1, rng_seed=0)
    with pytest.raises(InvalidConfig):
        EnsembleConfig(3, 100, rng_seed=0, mode="bootstrap")
    with pytest.raises(InvalidConfig):
        EnsembleConfig(3, 100, rng_seed=0, threshold=0.0)
    with pytest.raises(InvalidConfig):
        EnsembleConfig(3, 100, rng_seed=0, threshold=1.2)


def test_frequency_tables_reject_mixed_graphs():
    a = LaggedCausalGraph(("U", "V"), (), 4, "te")
    b = LaggedCausalGraph(("U", "W"), (), 4, "te")
    with pytest.raises(VariableMismatch):
        link_frequencies([a, b])
    with pytest.raises(InvalidConfig):
        link_frequencies([])

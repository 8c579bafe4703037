"""Annealing driver: bookkeeping exactness, determinism, conservation laws.

The runs here are tiny on purpose; quality of the minima is exercised by the
acceptance suite, while these tests pin the mechanical contracts.
"""

import numpy as np
import pytest

from ldlab import (
    AnnealConfig,
    Kernel,
    anneal,
    anneal_energy,
    blend_perimeter,
    component_count,
    embed,
    facet_perimeter,
    fraenkel_to_ball,
    mesh_perimeter,
    nonlocal_energy,
    random_blob,
)
from ldlab.errors import LdlabError, MassMismatch

K31 = Kernel(3, 1.0)


def small_blob(seed=0):
    s = random_blob(3, 0.3, 1.0 / 6, seed=seed)
    return embed(s, (26, 26, 26))


def cfg_for(s, budget, seed=0, **kw):
    return AnnealConfig(
        kernel=K31, target_cells=s.count(), budget=budget, seed=seed, **kw
    )


def test_zero_budget_passthrough():
    s = small_blob()
    res = anneal(s, cfg_for(s, 0))
    assert np.array_equal(res.final.cells, s.cells)
    assert len(res.trace) == 1
    assert res.best_energy == pytest.approx(res.trace[0].E)
    assert res.accept_ratio == 0.0


def test_initial_breakdown_matches_public_estimators():
    # telescoped counters start from the same numbers the public
    # from-scratch routines produce
    s = small_blob(3)
    res = anneal(s, cfg_for(s, 0))
    t0 = res.trace[0]
    assert t0.P == pytest.approx(blend_perimeter(s), rel=1e-10)
    assert t0.V == pytest.approx(nonlocal_energy(s, K31, "direct"), rel=1e-10)
    eb = anneal_energy(s, K31)
    assert t0.E == pytest.approx(eb.E, rel=1e-10)


def test_counters_survive_a_run():
    # after thousands of incremental flips the running E still equals a
    # fresh evaluation of the final state
    s = small_blob(1)
    res = anneal(s, cfg_for(s, 40 * s.count(), seed=5))
    fresh = anneal_energy(res.final, K31)
    assert res.trace[-1].E == pytest.approx(fresh.E, rel=1e-9)
    assert res.trace[-1].V == pytest.approx(fresh.V, rel=1e-9)


def test_mass_conserved():
    s = small_blob(2)
    res = anneal(s, cfg_for(s, 25 * s.count(), seed=1))
    assert res.final.count() == s.count()
    for t in res.trace:
        assert t.m == pytest.approx(s.count() * s.h**3)


def test_deterministic_given_seed():
    s = small_blob(4)
    a = anneal(s, cfg_for(s, 20 * s.count(), seed=11))
    b = anneal(s, cfg_for(s, 20 * s.count(), seed=11))
    assert np.array_equal(a.final.cells, b.final.cells)
    assert a.best_energy == b.best_energy
    c = anneal(s, cfg_for(s, 20 * s.count(), seed=12))
    assert not np.array_equal(a.final.cells, c.final.cells)


def test_best_energy_is_lower_envelope():
    s = small_blob(5)
    res = anneal(s, cfg_for(s, 30 * s.count(), seed=3))
    assert res.best_energy <= res.trace[0].E + 1e-12
    assert res.best_energy <= min(t.E for t in res.trace) + 1e-9
    assert 0.0 <= res.accept_ratio <= 1.0


def test_rough_blob_improves():
    s = small_blob(6)
    res = anneal(s, cfg_for(s, 150 * s.count(), seed=2))
    assert res.best_energy < res.trace[0].E
    assert res.fraenkel == pytest.approx(fraenkel_to_ball(res.final))
    assert res.components == component_count(res.final)


def test_trace_snapshot_cadence():
    s = small_blob(7)
    res = anneal(
        s, cfg_for(s, 10 * s.count(), snapshot_every=2 * s.count())
    )
    assert len(res.trace) == 1 + 5


def test_config_validation():
    s = small_blob()
    with pytest.raises(LdlabError):
        AnnealConfig(kernel=K31, target_cells=10, budget=100, decay=1.2)
    with pytest.raises(LdlabError):
        AnnealConfig(kernel=K31, target_cells=10, budget=-1)
    with pytest.raises(LdlabError):
        AnnealConfig(kernel=K31, target_cells=0, budget=1)
    with pytest.raises(LdlabError):
        AnnealConfig(kernel=K31, target_cells=10, budget=1, w_boundary=-0.1)
    with pytest.raises(MassMismatch):
        anneal(s, AnnealConfig(kernel=K31, target_cells=s.count() + 5, budget=1))
    with pytest.raises(MassMismatch):
        anneal(s, AnnealConfig(kernel=Kernel(2, 1.0), target_cells=s.count(),
                               budget=1))


def test_two_dimensional_path():
    s = random_blob(2, 0.4, 1.0 / 10, seed=9)
    s = embed(s, (40, 40))
    k2 = Kernel(2, 1.0)
    res = anneal(s, AnnealConfig(kernel=k2, target_cells=s.count(),
                                 budget=50 * s.count(), seed=4))
    assert res.final.count() == s.count()
    assert res.final.n == 2
    assert np.isfinite(res.best_energy)
    fresh = anneal_energy(res.final, k2)
    assert res.trace[-1].E == pytest.approx(fresh.E, rel=1e-9)


def test_blend_perimeter_between_estimators_on_ball():
    from ldlab.competitors import make_ball

    s = make_ball(3, 4 * np.pi / 3, 1.0 / 10)
    b = blend_perimeter(s)
    assert b == pytest.approx(4 * np.pi, rel=0.08)
    assert mesh_perimeter(s) * 0.9 < b < facet_perimeter(s)

import numpy as np
import pytest
from sklearn.pipeline import make_pipeline

from conncontract import model
from conncontract.contract import ContractDesigner
from conncontract.params import Capability, reference_grid
from conncontract.profiles import (
    TypeConverter,
    TypeProfile,
    build_types,
    finalize_profiles,
    profiles_from_lambdas,
    sample_population,
)
from conncontract.validation import ValidationError


def _kw(env):
    net, ch, fit, econ = env
    return dict(net=net, channel=ch, fit=fit, econ=econ)


def check_profile_invariants(types):
    lam = np.array([t.lam for t in types])
    assert np.all(np.diff(lam) >= 0)
    assert abs(sum(t.q for t in types) - 1) <= 1e-12
    assert [t.index for t in types] == list(range(1, len(types) + 1))
    for t in types:
        assert t.lam == pytest.approx(t.g**2 / (2 * t.f), rel=1e-12)


@pytest.mark.parametrize("mode", ["grid", "quantile"])
def test_single_capability(env, mode):
    types = build_types([Capability(12, 10, 10)], 1, mode, **_kw(env))
    assert len(types) == 1
    assert types[0].q == 1.0


def test_reference_grid_gives_48_uniform_types(default_types):
    assert len(default_types) == 48
    assert all(t.q == pytest.approx(1 / 48, abs=1e-15) for t in default_types)
    check_profile_invariants(default_types)
    reps = {t.representative for t in default_types}
    assert reps == set(reference_grid())


def test_grid_types_match_direct_lambda(env, default_types):
    net, ch, fit, econ = env
    for t in default_types:
        assert t.lam == model.type_lambda(t.representative, net, ch, fit, econ)


def test_grid_mode_snaps_to_nearest_point(env):
    pop = [Capability(11.4, 4.0, 6.0), Capability(10.6, 2.0, 4.0), Capability(12.6, 19, 21)]
    types = build_types(pop, mode="grid", **_kw(env))
    masses = {t.representative: t.q for t in types}
    assert masses == {
        Capability(11, 3, 5): pytest.approx(2 / 3),
        Capability(13, 20, 20): pytest.approx(1 / 3),
    }


def test_quantile_masses_are_equal_frequency(env):
    pop = sample_population(10_000, seed=5)
    types = build_types(pop, 48, "quantile", **_kw(env))
    assert len(types) == 48
    check_profile_invariants(types)
    for t in types:
        assert abs(t.q - 1 / 48) <= 1 / 10_000


def test_quantile_group_uses_mean_lambda(env):
    pop = sample_population(200, seed=1)
    net, ch, fit, econ = env
    lams = np.sort([model.type_lambda(c, net, ch, fit, econ) for c in pop])
    types = build_types(pop, 4, "quantile", **_kw(env))
    for k, t in enumerate(types):
        assert t.lam == pytest.approx(lams[50 * k : 50 * (k + 1)].mean(), rel=1e-12)


def test_quantile_rejects_too_many_types(env):
    pop = [Capability(12, 10, 10)] * 5 + [Capability(11, 3, 5)] * 5
    with pytest.raises(ValidationError):
        build_types(pop, 3, "quantile", **_kw(env))


def test_build_types_rejects_bad_arguments(env):
    with pytest.raises(ValidationError):
        build_types([], 1, "grid", **_kw(env))
    with pytest.raises(ValidationError):
        build_types([Capability(12, 10, 10)], 0, "grid", **_kw(env))
    with pytest.raises(ValidationError):
        build_types([Capability(12, 10, 10)], 1, "kmeans", **_kw(env))


def test_equal_lambdas_merge_and_empty_types_drop():
    types = profiles_from_lambdas([0.5, 0.2, 0.5, 0.9], [1, 1, 2, 0])
    assert [t.lam for t in types] == [0.2, 0.5]
    assert [t.q for t in types] == pytest.approx([0.25, 0.75])
    check_profile_invariants(types)


def test_profiles_from_lambdas_validation():
    with pytest.raises(ValidationError):
        profiles_from_lambdas([0.1, -0.2], [1, 1])
    with pytest.raises(ValidationError):
        profiles_from_lambdas([0.1, 0.2], [0, 0])
    with pytest.raises(ValidationError):
        profiles_from_lambdas([0.1, 0.2], [1])


def test_finalize_sorts_and_normalizes():
    raw = [TypeProfile(0, 0.3, 3.0, 1.0, 1 / 0.6), TypeProfile(0, 0.1, 1.0, 1.0, 5.0)]
    out = finalize_profiles(raw)
    assert [(t.index, t.lam, t.q) for t in out] == [(1, 0.1, 0.25), (2, 0.3, 0.75)]


def test_type_converter_transform(env):
    net, ch, fit, econ = env
    X = np.array([[11, 3, 5], [13, 20, 20], [12, 10, 15]], dtype=float)
    conv = TypeConverter(net, ch, fit, econ).fit(X)
    lam = conv.transform(X)
    assert lam.shape == (3, 1)
    for row, value in zip(X, lam[:, 0]):
        assert value == model.type_lambda(Capability(*row), net, ch, fit, econ)
    assert conv.get_feature_names_out().tolist() == ["lambda"]
    with pytest.raises(ValidationError):
        TypeConverter().fit(X[:, :2])


def test_converter_feeds_designer(env):
    X = np.array([[c.h, c.c, c.p] for c in reference_grid()])
    lam = TypeConverter().fit_transform(X)[:, 0]
    designer = make_pipeline(TypeConverter(), ContractDesigner())
    designer.fit(X)
    chosen = designer.predict(X)
    order = np.argsort(np.argsort(lam, kind="stable"), kind="stable") + 1
    assert np.array_equal(chosen, order)

import numpy as np
import pytest

from aavr.behavior import (
    BetaBelief,
    DriverAgent,
    PreferenceModel,
    acceptance_probability,
    acceptance_probability_exact,
    fit_preference,
    load_decision_corpus,
    load_drivers,
    preference_distribution,
    sample_decision,
    standardize_features,
    update_belief,
)
from aavr.core import seeded_rng


def _sigmoid(s):
    return 1.0 / (1.0 + np.exp(-s))


def test_preference_model_validation():
    m = PreferenceModel(np.array([1.0, -2.0, 0.5]))
    assert m.feature_dim == 2
    with pytest.raises(ValueError):
        PreferenceModel(np.array([[1.0]]))
    with pytest.raises(ValueError):
        PreferenceModel(np.array([np.inf, 0.0]))


def test_preference_distribution_matches_manual():
    m = PreferenceModel(np.array([1.0, -0.5, 0.2]))
    X = np.array([[0.0, 0.0], [1.0, 1.0], [2.0, -1.0]])
    sig = _sigmoid(X @ m.weights[:-1] + m.weights[-1])
    expect = sig / sig.sum()
    got = preference_distribution(m, X)
    assert np.allclose(got, expect)
    assert abs(got.sum() - 1.0) < 1e-12


def test_preference_distribution_underflow_goes_uniform():
    m = PreferenceModel(np.array([1.0, 0.0]))
    X = np.full((3, 1), -1e6)
    assert np.allclose(preference_distribution(m, X), 1 / 3)


def test_preference_distribution_checks_dimensions():
    with pytest.raises(ValueError):
        preference_distribution(PreferenceModel(np.array([1.0, 0.0])),
                                np.ones((2, 3)))


def test_standardize_features():
    X = np.array([[1.0, 5.0], [3.0, 5.0], [5.0, 5.0]])
    Z = standardize_features(X)
    assert np.allclose(Z.mean(axis=0), 0.0)
    assert np.allclose(Z[:, 0].std(), 1.0)
    assert np.all(Z[:, 1] == 0.0)     # constant column zeroed, not NaN


def test_fit_preference_learns_a_separable_rule():
    rng = np.random.default_rng(5)
    w_true = np.array([3.0, -2.0])
    history = []
    for _ in range(60):
        X = rng.normal(size=(4, 2))
        history.append((int(np.argmax(X @ w_true)), X))
    model = fit_preference(history)
    hits = sum(int(np.argmax(preference_distribution(model, X)) == chosen)
               for chosen, X in history)
    assert hits / len(history) >= 0.9
    assert model.weights[0] > 0 > model.weights[1]


def test_fit_preference_degenerate_history_warns():
    X = np.ones((3, 2))
    with pytest.warns(UserWarning, match="degenerate"):
        model = fit_preference([(0, X), (1, X)])
    assert model.degenerate
    assert np.all(model.weights == 0.0)


def test_fit_preference_input_errors():
    with pytest.raises(ValueError):
        fit_preference([])
    with pytest.raises(ValueError):
        fit_preference([(5, np.ones((3, 2)))])
    with pytest.raises(ValueError):
        fit_preference([(0, np.ones((3, 2))), (0, np.ones((3, 4)))])


def test_beta_belief():
    b = BetaBelief(2.0, 6.0)
    assert b.mean == pytest.approx(0.25)
    with pytest.raises(ValueError):
        BetaBelief(0.0, 1.0)


def test_update_belief_steps():
    b = BetaBelief(1.0, 1.0)
    up = update_belief(b, 1, eps0=0.5, eps1=2.0)
    assert (up.alpha, up.beta) == (3.0, 1.0)
    down = update_belief(b, 0, eps0=0.5, eps1=2.0)
    assert (down.alpha, down.beta) == (1.0, 1.5)
    with pytest.raises(ValueError):
        update_belief(b, 2, 1.0, 1.0)


def test_acceptance_probability_exact_is_symmetric():
    r, p = BetaBelief(2.0, 1.0), BetaBelief(1.0, 2.0)
    v = acceptance_probability_exact(r, p)
    assert v + acceptance_probability_exact(p, r) == pytest.approx(1.0, abs=1e-9)
    assert acceptance_probability_exact(r, r) == pytest.approx(0.5, abs=1e-9)


def test_acceptance_probability_sampling_tracks_exact():
    r, p = BetaBelief(4.0, 2.0), BetaBelief(2.0, 4.0)
    exact = acceptance_probability_exact(r, p)
    est = acceptance_probability(r, p, 20000, seeded_rng(1, "acc"))
    assert abs(est - exact) < 0.02
    with pytest.raises(ValueError):
        acceptance_probability(r, p, 0, seeded_rng(1, "acc"))


def test_sample_decision_extremes():
    agent_rng = seeded_rng(0, "dec")
    L = np.array([0.0, 1.0])
    accepted, dest = sample_decision(None, 0, mu=1.0, L=L, rng=agent_rng)
    assert (accepted, dest) == (1, 0)
    accepted, dest = sample_decision(None, 0, mu=0.0, L=L, rng=agent_rng)
    assert (accepted, dest) == (0, 1)
    with pytest.raises(ValueError):
        sample_decision(None, 0, mu=0.5, L=np.array([0.4, 0.4]), rng=agent_rng)


def test_driver_agent_transitions():
    agent = DriverAgent(id=0, region=1,
                        preference=PreferenceModel(np.zeros(2)),
                        belief_system=BetaBelief(1, 1),
                        belief_self=BetaBelief(1, 1))
    agent.begin_repositioning(7.5)
    assert agent.status == "repositioning" and agent.arrival_time == 7.5
    with pytest.raises(ValueError):
        agent.begin_trip(9.0)
    agent.become_idle(0)
    assert agent.status == "idle" and agent.region == 0


def test_load_drivers_round_trip(tmp_path):
    path = tmp_path / "drivers.csv"
    path.write_text(
        "driver_id,region,alpha_r,beta_r,alpha_p,beta_p,w_0,w_1\n"
        "1,0,2,1,1,2,0.5,-0.25\n"
        "0,1,1,1,1,1,0.0,1.0\n")
    agents = load_drivers(path)
    assert [a.id for a in agents] == [0, 1]
    assert agents[1].belief_system.alpha == 2.0
    assert np.allclose(agents[1].preference.weights, [0.5, -0.25])


def test_load_drivers_errors(tmp_path):
    dup = tmp_path / "dup.csv"
    dup.write_text(
        "driver_id,region,alpha_r,beta_r,alpha_p,beta_p,w_0\n"
        "0,0,1,1,1,1,0\n0,1,1,1,1,1,0\n")
    with pytest.raises(ValueError, match="duplicate"):
        load_drivers(dup)
    short = tmp_path / "short.csv"
    short.write_text("driver_id,region\n0,0\n")
    with pytest.raises(ValueError, match="missing columns"):
        load_drivers(short)


def test_load_decision_corpus(tmp_path):
    path = tmp_path / "dec.csv"
    path.write_text(
        "driver_id,period,region,chosen_region,f0\n"
        "0,0,0,1,0.1\n"
        "0,0,1,1,0.9\n"
        "0,1,0,0,0.7\n"
        "0,1,1,0,0.2\n")
    corpus = load_decision_corpus(path)
    assert len(corpus) == 2
    driver, period, chosen, X = corpus[0]
    assert (driver, period, chosen) == (0, 0, 1)
    assert X.shape == (2, 1)


@pytest.mark.parametrize("body,msg", [
    ("0,0,0,1,0.1\n0,0,0,1,0.9\n", "twice"),
    ("0,0,0,1,0.1\n0,0,1,0,0.9\n", "conflicting"),
    ("0,0,1,1,0.1\n", "cover regions"),
])
def test_load_decision_corpus_errors(tmp_path, body, msg):
    path = tmp_path / "dec.csv"
    path.write_text("driver_id,period,region,chosen_region,f0\n" + body)
    with pytest.raises(ValueError, match=msg):
        load_decision_corpus(path)

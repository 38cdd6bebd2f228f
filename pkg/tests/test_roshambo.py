import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from nidkit.fixtures import RPS_PAYOFF
from nidkit.nid import compile_nid_to_maid, solve_nid
from nidkit.roshambo import (
    MODEL_BLOCKS,
    MixturePredictor,
    NashBot,
    NidAgent,
    OpponentModelState,
    Predictor,
    RotationBot,
    block_predictions,
    build_opponent_model_nid,
    choose_move,
    choose_move_nid,
    de_bruijn,
    floor_weights,
    make_bot,
    posterior_weights,
    predictor_predict,
    run_match,
    score,
    update_weights,
)
from nidkit.solver import verify_epsilon_nash

ROCK, PAPER, SCISSORS = 0, 1, 2


def state_predicting(move: int, weights) -> tuple[OpponentModelState, list]:
    st_ = OpponentModelState(weights=np.asarray(weights, float))
    h = [(ROCK, move)] * 6
    for t in range(len(h)):
        st_.predictor.observe(h[:t], h[t][1])
    return st_, h


def test_empty_history_predicts_uniform():
    np.testing.assert_allclose(predictor_predict(Predictor(1), []), np.full(3, 1 / 3))
    np.testing.assert_allclose(predictor_predict(MixturePredictor(), []), np.full(3, 1 / 3))


@pytest.mark.parametrize("n", [1, 4, 10])
def test_laplace_count_formula(n):
    h = [(PAPER, ROCK)] * (n + 1)
    p = Predictor.fit(1, h)
    # context (paper, rock) was followed by rock n times
    assert p.predict(h)[ROCK] == pytest.approx((n + 1) / (n + 3))


def test_cycle_is_learned():
    h = [(ROCK, i % 3) for i in range(60)]
    p = Predictor.fit(1, h[:58])
    assert h[57][1] == ROCK
    assert int(np.argmax(p.predict(h[:58]))) == PAPER


@given(st.lists(st.tuples(st.integers(0, 2), st.integers(0, 2)), max_size=40))
def test_mixture_prediction_is_normalized(h):
    p = MixturePredictor()
    for t in range(len(h)):
        p.observe(h[:t], h[t][1])
    out = p.predict(h)
    assert out.sum() == pytest.approx(1.0, abs=1e-9) and (out > 0).all()


def test_bayes_update_arithmetic():
    w = np.array([0.0, 0.5, 0.5, 0.0])
    pred = np.zeros((4, 3))
    pred[1, ROCK], pred[2, ROCK] = 0.8, 0.1
    pred[:, 1:] = (1 - pred[:, :1]) / 2
    post = posterior_weights(w, pred, ROCK)
    np.testing.assert_allclose(post[1:3], [0.4 / 0.45, 0.05 / 0.45])


def test_equal_likelihood_leaves_weights():
    w = np.array([0.1, 0.2, 0.3, 0.4])
    st_ = OpponentModelState(weights=w)
    out = update_weights(st_, np.full((4, 3), 1 / 3), PAPER)
    np.testing.assert_allclose(out.weights, w)


@given(st.lists(st.floats(0, 1), min_size=4, max_size=4).filter(lambda v: sum(v) > 0.01))
def test_floor_contract(v):
    w = floor_weights(np.array(v), 0.01)
    assert w.sum() == pytest.approx(1.0, abs=1e-9)
    assert (w >= 0.01 - 1e-12).all()


def test_zero_likelihood_stays_above_floor():
    st_ = OpponentModelState(weights=floor_weights(np.array([0.0, 1.0, 0.0, 0.0]), 0.01))
    pred = np.tile(np.eye(3)[PAPER], (4, 1))
    pred[0] = 1 / 3
    out = update_weights(st_, pred, ROCK)
    assert (out.weights >= 0.01 - 1e-12).all()


def test_automaton_block_leads_bob_to_paper():
    st_, h = state_predicting(ROCK, [0, 1, 0, 0])
    assert choose_move_nid(st_, h, 0) == PAPER
    assert choose_move(st_, h) == PAPER


def test_a1_block_models_scissors_and_bob_plays_rock():
    st_, h = state_predicting(ROCK, [0, 0, 1, 0])
    eq = solve_nid(build_opponent_model_nid(st_, h))
    assert int(np.argmax(eq.theta[("B1", "Bob")].table)) == PAPER
    assert int(np.argmax(eq.theta[("A1", "Alice")].table)) == SCISSORS
    assert int(np.argmax(eq.theta[("TL", "Bob")].table)) == ROCK


def test_a2_block_models_paper_and_bob_plays_scissors():
    st_, h = state_predicting(ROCK, [0, 0, 0, 1])
    eq = solve_nid(build_opponent_model_nid(st_, h))
    assert int(np.argmax(eq.theta[("A2", "Alice")].table)) == PAPER
    assert choose_move_nid(st_, h, 0) == SCISSORS == choose_move(st_, h)


def test_nash_block_gives_lowest_index_with_zero_regret():
    st_, h = state_predicting(ROCK, [1, 0, 0, 0])
    eq = solve_nid(build_opponent_model_nid(st_, h))
    assert eq.theta[("TL", "Bob")].table.tolist() == [1.0, 0.0, 0.0]
    assert eq.maid_report.max_regret <= 1e-9


@settings(max_examples=25)
@given(st.integers(0, 10**6))
def test_fast_path_matches_nid_and_brute_force(seed):
    rng = np.random.default_rng(seed)
    st_ = OpponentModelState(weights=floor_weights(rng.dirichlet(np.ones(4) * 0.5), 0.01))
    h = [(int(rng.integers(3)), int(rng.integers(3))) for _ in range(int(rng.integers(0, 25)))]
    for t in range(len(h)):
        st_.predictor.observe(h[:t], h[t][1])
    rows, _ = block_predictions(st_.predictor.predict(h))
    mix = st_.weights @ rows
    values = [sum(mix[a] * RPS_PAYOFF[b, a] for a in range(3)) for b in range(3)]
    brute = next(b for b in range(3) if values[b] >= max(values) - 1e-9)
    assert choose_move(st_, h) == brute == choose_move_nid(st_, h, seed)


@settings(max_examples=10)
@given(st.integers(0, 10**6))
def test_chosen_move_has_zero_regret_in_compiled_model(seed):
    rng = np.random.default_rng(seed)
    st_ = OpponentModelState(weights=floor_weights(rng.dirichlet(np.ones(4)), 0.01))
    n = build_opponent_model_nid(st_, [])
    eq = solve_nid(n)
    c = compile_nid_to_maid(n)
    assert verify_epsilon_nash(c.maid, eq.maid_report.profile, 1e-6).max_regret <= 1e-6


def test_round_scoring():
    assert score(ROCK, PAPER) == -1 and score(PAPER, ROCK) == 1 and score(ROCK, ROCK) == 0


def test_match_is_zero_sum_and_reproducible():
    a = run_match(NidAgent(), make_bot("frequency-br"), 300, 5)
    b = run_match(NidAgent(), make_bot("frequency-br"), 300, 5)
    assert a.to_csv() == b.to_csv()
    mirror = run_match(make_bot("frequency-br"), NidAgent(), 300, 5)
    assert abs(a.total_score) <= a.rounds
    assert mirror.log[0][3] == -score(*[["rock", "paper", "scissors"].index(x) for x in mirror.log[0][1:3]][::-1])


def test_nash_vs_nash_is_even():
    r = run_match(NashBot(), NashBot(), 3000, 1)
    assert abs(r.mean_score) <= 0.05


def test_csv_header_and_weights():
    r = run_match(NidAgent(), RotationBot(), 10, 0)
    lines = r.to_csv().splitlines()
    assert lines[0] == "round,move_a,move_b,score_a,cum_a,w_nash,w_automaton,w_a1,w_a2"
    ws = [float(x) for x in lines[-1].split(",")[5:]]
    assert sum(ws) == pytest.approx(1.0, abs=1e-5)


def test_de_bruijn_covers_every_triple():
    seq = de_bruijn(3, 3)
    assert len(seq) == 27
    triples = {tuple((seq + seq[:2])[i:i + 3]) for i in range(27)}
    assert len(triples) == 27


def test_weights_track_model_blocks():
    assert MODEL_BLOCKS == ("Nash", "Automaton", "A1", "A2")
    with pytest.raises(ValueError):
        make_bot("nobody")

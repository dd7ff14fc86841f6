import numpy as np
import pytest

from marl_lab.games import (
    BENCHMARK_NAMES,
    Game,
    GradientConstants,
    benchmark,
    best_response_gain,
    catalog_nash,
    expected_value,
    game_to_text,
    gradient_2x2,
    gradient_constants,
    nash_2x2,
    parse_game_text,
)


def test_catalog_payoff_cells():
    assert benchmark("matching-pennies").reward((0, 0)).tolist() == [1, -1]
    assert benchmark("biased").reward((0, 1)).tolist() == [1.85, 1.0]
    assert benchmark("shapleys").reward((0, 0)).tolist() == [0, 0]
    assert benchmark("coordination").reward((0, 0)).tolist() == [2, 1]
    assert benchmark("tricky").reward((0, 1)).tolist() == [3, 2]


def test_unknown_game_name():
    with pytest.raises(KeyError):
        benchmark("prisoners-dilemma")


def test_game_validation():
    with pytest.raises(ValueError):
        Game((2,), np.zeros((2, 1)))
    with pytest.raises(ValueError):
        Game((2, 2), np.zeros((2, 3, 2)))
    with pytest.raises(ValueError):
        Game((1, 2), np.zeros((1, 2, 2)))


def test_expected_value_examples():
    mp = benchmark("matching-pennies")
    assert expected_value(mp, 0, [[0.5, 0.5], [0.5, 0.5]]) == pytest.approx(0.0, abs=1e-12)
    coord = benchmark("coordination")
    assert expected_value(coord, 0, [[1, 0], [1, 0]]) == pytest.approx(2.0)
    tricky = benchmark("tricky")
    assert expected_value(tricky, 0, [[1, 0], [0, 1]]) == pytest.approx(3.0)


def test_expected_value_shape_error():
    mp = benchmark("matching-pennies")
    with pytest.raises(ValueError):
        expected_value(mp, 0, [[0.5, 0.5]])
    with pytest.raises(ValueError):
        expected_value(mp, 0, [[0.5, 0.3, 0.2], [1, 0]])


def test_expected_value_multilinear():
    rng = np.random.default_rng(0)
    games = [benchmark(n) for n in BENCHMARK_NAMES]
    for _ in range(100):
        game = games[rng.integers(len(games))]
        player = int(rng.integers(game.num_players))
        pols = []
        for k in game.actions_per_player:
            v = rng.random(k)
            pols.append(v / v.sum())
        a = rng.random()
        k = game.actions_per_player[player]
        p1 = rng.random(k)
        p1 /= p1.sum()
        p2 = rng.random(k)
        p2 /= p2.sum()
        mixed = list(pols)
        mixed[player] = a * p1 + (1 - a) * p2
        lhs = expected_value(game, player, mixed)
        one = list(pols)
        one[player] = p1
        two = list(pols)
        two[player] = p2
        rhs = a * expected_value(game, player, one) + (1 - a) * expected_value(game, player, two)
        assert lhs == pytest.approx(rhs, abs=1e-12)


def test_gradient_constants_values():
    assert gradient_constants(benchmark("matching-pennies")).as_tuple() == (4, -2, -4, 2)
    assert gradient_constants(benchmark("coordination")).as_tuple() == (3, -1, 3, -2)
    u = gradient_constants(benchmark("tricky"))
    assert u.as_tuple() == (-2, 1, 2, -1)
    # consistency with the known mixed NE of the tricky game
    assert u.mixed_point() == pytest.approx((0.5, 0.5))


def test_gradient_constants_formulas_random():
    rng = np.random.default_rng(1)
    for _ in range(100):
        payoffs = rng.uniform(-5, 5, (2, 2, 2))
        game = Game((2, 2), payoffs)
        u = gradient_constants(game)
        r = payoffs[..., 0]
        c = payoffs[..., 1]
        assert u.u1 == pytest.approx(r[0, 0] - r[0, 1] - r[1, 0] + r[1, 1])
        assert u.u2 == pytest.approx(r[0, 1] - r[1, 1])
        assert u.u3 == pytest.approx(c[0, 0] - c[0, 1] - c[1, 0] + c[1, 1])
        assert u.u4 == pytest.approx(c[1, 0] - c[1, 1])


def test_gradient_constants_requires_2x2():
    with pytest.raises(ValueError):
        gradient_constants(benchmark("shapleys"))


def test_gradient_2x2_examples():
    mp = benchmark("matching-pennies")
    assert gradient_2x2(mp, 0, 0.5) == pytest.approx(0.0)
    assert gradient_2x2(mp, 0, 1.0) == pytest.approx(2.0)
    assert gradient_2x2(benchmark("coordination"), 0, 0.0) == pytest.approx(-1.0)
    with pytest.raises(ValueError):
        gradient_2x2(mp, 0, 1.5)


def test_gradient_2x2_equals_value_difference():
    rng = np.random.default_rng(2)
    for name in ("matching-pennies", "coordination", "tricky", "biased"):
        game = benchmark(name)
        for _ in range(100):
            w = float(rng.random())
            opp = [w, 1 - w]
            d_row = expected_value(game, 0, [[1, 0], opp]) - expected_value(game, 0, [[0, 1], opp])
            assert gradient_2x2(game, 0, w) == pytest.approx(d_row, abs=1e-12)
            d_col = expected_value(game, 1, [opp, [1, 0]]) - expected_value(game, 1, [opp, [0, 1]])
            assert gradient_2x2(game, 1, w) == pytest.approx(d_col, abs=1e-12)


def test_nash_2x2_examples():
    mp = nash_2x2(benchmark("matching-pennies"))
    assert len(mp) == 1 and mp[0].kind == "mixed"
    assert mp[0].policies[0] == pytest.approx((0.5, 0.5))

    coord = nash_2x2(benchmark("coordination"))
    assert sorted(pt.kind for pt in coord) == ["pure", "pure"]
    corners = {tuple(round(v) for pol in pt.policies for v in pol) for pt in coord}
    assert corners == {(1, 0, 1, 0), (0, 1, 0, 1)}

    biased = nash_2x2(benchmark("biased"))
    assert len(biased) == 1
    assert biased[0].policies[0] == pytest.approx((0.15, 0.85))
    assert biased[0].policies[1] == pytest.approx((0.85, 0.15))


def test_nash_points_pass_best_response_sweep():
    for name in BENCHMARK_NAMES:
        for point in catalog_nash(name):
            game = benchmark(name)
            assert best_response_gain(game, point.policies, grid=101) <= 1e-9, (name, point)


def test_nash_distance():
    pt = catalog_nash("matching-pennies")[0]
    assert pt.distance([[0.6, 0.4], [0.5, 0.5]]) == pytest.approx(0.1)


def test_game_file_round_trip():
    for name in BENCHMARK_NAMES:
        game = benchmark(name)
        again = parse_game_text(game_to_text(game), name=name)
        assert again.actions_per_player == game.actions_per_player
        assert np.array_equal(again.payoffs, game.payoffs)


def test_game_file_errors():
    with pytest.raises(ValueError, match="line 2"):
        parse_game_text("players 2\nactions two two\n")
    with pytest.raises(ValueError, match="incomplete"):
        parse_game_text("players 2\nactions 2 2\npayoff 0 0 = 1 2\n")
    with pytest.raises(ValueError, match="declare"):
        parse_game_text("payoff 0 0 = 1 2\n")
    with pytest.raises(ValueError, match="unknown keyword"):
        parse_game_text("player 2\n")

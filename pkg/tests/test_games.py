import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from noiseless import (
    Constant,
    GameConfig,
    Identity,
    PreconditionError,
    ProfilePanel,
    ingest_csv,
    play_game,
    policy_decide,
    synthesize_panel,
)
from noiseless.games import PanelFormatError, game_mechanism, relative_peaks

PANEL = synthesize_panel(60, 24, seed=3)


class TestPolicies:
    def test_exact_match(self):
        a, b = [1, 2, 3], [3, 2, 1]
        for policy in ("correlation", "mse"):
            assert policy_decide(policy, a, b, a).guess == 0
            assert policy_decide(policy, a, b, b).guess == 1

    def test_correlation_ignores_shift(self):
        a, b = [1, 2, 3], [10, 11, 12]
        d = policy_decide("correlation", a, b, [1, 2, 3])
        assert d.tie and d.guess == 0

    def test_correlation_falls_back_on_constant_series(self):
        d = policy_decide("correlation", [1, 1, 1], [5, 5, 5], [5, 5, 5])
        assert d.fallback and d.guess == 1

    def test_mse_tie_goes_to_first(self):
        d = policy_decide("mse", [0, 0], [2, 2], [1, 1])
        assert d.tie and d.guess == 0

    def test_flat_series_has_no_peaks(self):
        assert len(relative_peaks(np.ones(10))) == 0
        d = policy_decide("peaks", np.ones(10), np.ones(10), np.ones(10))
        assert d.tie and d.guess == 0

    def test_peaks(self):
        y = np.array([1, 1, 5, 1, 1, 1, 1, 1, 1])
        a = np.array([1, 1, 4, 1, 1, 1, 1, 1, 1])
        b = np.array([1, 1, 1, 1, 1, 1, 4, 1, 1])
        assert list(relative_peaks(y)) == [2]
        assert policy_decide("peaks", a, b, y).guess == 0
        assert policy_decide("peaks", b, a, y).guess == 1

    def test_unknown_policy(self):
        with pytest.raises(PreconditionError):
            policy_decide("oracle", [1], [1], [1])

    def test_shape_mismatch(self):
        with pytest.raises(PreconditionError):
            policy_decide("mse", [1, 2], [1, 2], [1])

    @given(st.sampled_from(["correlation", "mse", "peaks"]), st.integers(0, 2**32 - 1))
    def test_label_swap(self, policy, seed):
        rng = np.random.default_rng(seed)
        a, b, y = rng.integers(0, 5, size=(3, 8)).astype(float)
        d, e = policy_decide(policy, a, b, y), policy_decide(policy, b, a, y)
        assert d.tie == e.tie
        if not d.tie:
            assert d.guess == 1 - e.guess


class TestPanel:
    def test_synthetic_is_reproducible(self):
        a, b = synthesize_panel(10, 8, seed=1), synthesize_panel(10, 8, seed=1)
        assert np.array_equal(a.profiles, b.profiles) and a.ids == b.ids
        assert not np.array_equal(a.profiles, synthesize_panel(10, 8, seed=2).profiles)
        assert np.all(a.profiles >= 0)

    def test_csv_round_trip(self, tmp_path):
        path = tmp_path / "panel.csv"
        PANEL.to_csv(path)
        back = ingest_csv(path)
        assert np.array_equal(back.profiles, PANEL.profiles) and back.ids == PANEL.ids

    def test_small_file(self, tmp_path):
        path = tmp_path / "p.csv"
        path.write_text("time,a,b,c\n0,1,2,3\n1,4,5,6\n")
        panel = ingest_csv(path)
        assert panel.profiles.shape == (3, 2)
        assert panel.ids == ("a", "b", "c")
        assert panel.profiles[2].tolist() == [3, 6]

    def test_bad_cell_is_located(self, tmp_path):
        path = tmp_path / "p.csv"
        path.write_text("time,a,b\n0,1,2\n1,4,abc\n")
        with pytest.raises(PanelFormatError, match=r"'abc' at row 2, col 3"):
            ingest_csv(path)

    def test_empty_file(self, tmp_path):
        path = tmp_path / "p.csv"
        path.write_text("")
        with pytest.raises(PanelFormatError, match="empty"):
            ingest_csv(path)

    def test_ragged_rows(self, tmp_path):
        path = tmp_path / "p.csv"
        path.write_text("time,a,b\n0,1,2\n1,4\n")
        with pytest.raises(PanelFormatError, match="row 2"):
            ingest_csv(path)

    def test_negative_values(self, tmp_path):
        path = tmp_path / "p.csv"
        path.write_text("time,a\n0,-1\n")
        with pytest.raises(PanelFormatError, match="non-negative"):
            ingest_csv(path)

    def test_panel_rejects_negative(self):
        with pytest.raises(PreconditionError):
            ProfilePanel(np.array([[1.0, -1.0]]), ("a",))


class TestGame:
    def test_deterministic(self):
        cfg = GameConfig(n=4, epsilon=2, trials=200, seed=9)
        assert play_game(PANEL, cfg) == play_game(PANEL, cfg)

    def test_seeds_differ(self):
        a = play_game(PANEL, GameConfig(n=4, epsilon=8, trials=300, seed=1))
        b = play_game(PANEL, GameConfig(n=4, epsilon=8, trials=300, seed=2))
        assert a.wins != b.wins

    def test_single_member_identity_is_certain(self):
        for policy in ("correlation", "mse"):
            r = play_game(PANEL, GameConfig(n=1, epsilon=float("inf"), trials=300, seed=4, policy=policy))
            assert r.adv == 1.0

    def test_constant_release_is_blind(self):
        r = play_game(PANEL, GameConfig(n=4, epsilon=0, trials=2000, seed=4, policy="mse"))
        assert r.adv <= r.ci_halfwidth + 0.05

    def test_mechanism_override(self):
        cfg = GameConfig(n=2, epsilon=1, trials=100, seed=4, mechanism=Constant(1.0))
        assert play_game(PANEL, cfg).fallbacks == 100

    def test_panel_too_small(self):
        with pytest.raises(PreconditionError, match="at least 5"):
            play_game(synthesize_panel(4, 8, seed=0), GameConfig(n=4, epsilon=1, trials=10, seed=0))

    def test_horizon_too_long(self):
        with pytest.raises(PreconditionError):
            play_game(PANEL, GameConfig(n=2, epsilon=1, trials=10, seed=0, horizon=100))

    def test_bad_config(self):
        with pytest.raises(PreconditionError):
            GameConfig(n=0, epsilon=1, trials=1, seed=0)
        with pytest.raises(PreconditionError):
            GameConfig(n=1, epsilon=1, trials=0, seed=0)

    def test_csv_row(self):
        r = play_game(PANEL, GameConfig(n=4, epsilon=2, trials=50, seed=1))
        fields = r.csv_row().split(",")
        assert fields[:4] == ["correlation", "4", "2.0", "50"]
        assert float(fields[4]) == pytest.approx(r.adv, abs=1e-6)

    def test_mechanisms(self):
        assert isinstance(game_mechanism(PANEL, 3, float("inf")), Identity)
        assert isinstance(game_mechanism(PANEL, 3, 0), Constant)
        assert game_mechanism(PANEL, 4, 2).levels == 12

    @settings(max_examples=20, deadline=None)
    @given(st.integers(1, 6), st.floats(0.5, 8), st.integers(0, 1000), st.sampled_from(["correlation", "mse", "peaks"]))
    def test_advantage_in_unit_interval(self, n, eps, seed, policy):
        r = play_game(PANEL, GameConfig(n=n, epsilon=eps, trials=40, seed=seed, policy=policy))
        assert 0 <= r.adv <= 1
        assert r.ties <= r.trials

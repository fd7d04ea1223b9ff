import os
import pathlib

import numpy as np
import pytest

import sequnet

SOURCE = pathlib.Path(os.environ.get("SEQUNET_SOURCE_DIR", pathlib.Path(__file__).resolve().parents[2]))


def char_model(levels=2, seed=3):
    cfg = sequnet.config(
        levels=levels,
        hidden=6,
        io_mode=sequnet.IoMode.embedding_tied,
        vocab_size=11,
        embedding_dim=4,
    )
    return sequnet.build_model(cfg, seed)


def test_reference_receptive_field():
    cfg = sequnet.config(levels=3, filter_width=3)
    assert sequnet.receptive_field(cfg) == 73
    assert sequnet.min_input_length(cfg) == 73


def test_config_errors():
    with pytest.raises(sequnet.ConfigError):
        sequnet.config(stride=1)
    with pytest.raises(sequnet.ConfigError):
        sequnet.config(levles=3)
    c = sequnet.ModelConfig()
    c.set("model.hidden", "7")
    assert c.hidden == 7
    assert sequnet.ModelConfig.from_text(c.to_text()) == c


def test_predict_shapes():
    m = char_model()
    n = m.min_input_length + 5
    logits = m.predict([i % 11 for i in range(n)])
    assert logits.shape[0] == 11
    assert logits.shape[1] >= 1

    lin = sequnet.build_model(sequnet.config(levels=2, in_channels=2, out_channels=3), 1)
    x = np.random.default_rng(0).standard_normal((2, lin.min_input_length + 4)).astype(np.float32)
    assert lin.predict(x).shape[0] == 3
    with pytest.raises(sequnet.ShapeError):
        lin.predict(x[:, :3])


def test_stream_matches_predict():
    m = char_model()
    rng = np.random.default_rng(1)
    hist = [int(v) for v in rng.integers(0, 11, m.min_input_length + 2)]
    s = sequnet.Stream(m, hist)
    np.testing.assert_array_equal(s.first_logits, m.predict(hist)[:, -1])
    for _ in range(12):
        hist.append(int(rng.integers(0, 11)))
        got = s.step(hist[-1])
        np.testing.assert_allclose(got, m.predict(hist)[:, -1], atol=1e-5)
    assert s.steps == 12


def test_generation_paths_agree():
    m = char_model(levels=3)
    seed = [i % 11 for i in range(m.min_input_length)]
    a = sequnet.generate_symbols(m, seed, 30, rng_seed=5)
    b = sequnet.generate_symbols(m, seed, 30, rng_seed=5, naive=True)
    assert a == b
    assert a[: len(seed)] == seed
    assert sequnet.generate_symbols(m, seed, 0) == seed


def test_activation_anchor():
    m = sequnet.build_model(sequnet.config(levels=2, filter_width=1, hidden=2), 1)
    counts = sequnet.count_activations(m, 16)
    assert counts["total"] == 88
    series = sequnet.activation_series(2, 2, 16)
    assert series["series"] == 88.0
    assert series["cap"] == 128.0


def test_update_rate():
    m = sequnet.build_model(sequnet.config(levels=4, filter_width=2, hidden=2), 1)
    u = sequnet.measure_updates(m, 160)
    assert abs(u["amortized"] - 1.875) / 1.875 <= 0.05


def test_mu_law_endpoints():
    assert sequnet.mu_law_encode(-1.0) == 0
    assert sequnet.mu_law_encode(1.0) == 255
    assert abs(sequnet.mu_law_decode(sequnet.mu_law_encode(0.3)) - 0.3) < 0.02


def test_gradcheck():
    rows = sequnet.gradcheck(instances=2)
    assert rows
    assert all(ok for _, _, ok in rows)


def test_checkpoint_round_trip(tmp_path):
    m = char_model()
    path = str(tmp_path / "m.ckpt")
    m.save(path)
    back = sequnet.load_model(path)
    seq = [i % 11 for i in range(m.min_input_length + 3)]
    np.testing.assert_array_equal(back.predict(seq), m.predict(seq))
    assert back.parameter_names() == m.parameter_names()


def test_cli_profile(tmp_path):
    cfg = tmp_path / "toy.cfg"
    cfg.write_text("model.levels = 2\nmodel.filter_width = 1\nmodel.hidden = 2\nprofile.input_length = 16\n")
    code, out, err = sequnet.run_cli(["profile", "--config", str(cfg), "--out-dir", str(tmp_path / "out")])
    assert code == 0, err
    assert (tmp_path / "out" / "cost_report.csv").exists()
    code, _, err = sequnet.run_cli(["profile", "--set", "model.bogus=1"])
    assert code == 2
    assert "model.bogus" in err


def test_presets_build():
    presets = sorted((SOURCE / "presets").glob("*.cfg"))
    assert len(presets) == 12
    for p in presets:
        lines = [ln for ln in p.read_text().splitlines() if ln.startswith("model.")]
        m = sequnet.build_model(sequnet.ModelConfig.from_text("\n".join(lines)), 1)
        assert m.parameter_count > 100_000
        assert m.min_input_length == m.receptive_field

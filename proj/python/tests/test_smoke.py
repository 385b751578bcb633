import os

import numpy as np
import pytest

import scmix


@pytest.fixture(scope="module")
def bench():
    return scmix.make_benchmark(height=16, width=16, samples_per_split=4, seed=3)


def one_hot_probs(labels, num_classes, confident=0.98):
    rest = (1.0 - confident) / (num_classes - 1)
    probs = np.full(labels.shape + (num_classes,), rest)
    np.put_along_axis(probs, labels[..., None].astype(np.int64), confident, axis=-1)
    return probs


def test_benchmark_shapes(bench):
    assert set(bench) == {"source", "target_1", "target_2", "target_3", "open"}
    images, labels = bench["source"]
    assert images.shape == (4, 16, 16, 3) and images.dtype == np.float32
    assert labels.shape == (4, 16, 16) and labels.dtype == np.uint16
    assert images.min() >= 0.0 and images.max() <= 1.0


def test_benchmark_is_deterministic(bench):
    again = scmix.make_benchmark(height=16, width=16, samples_per_split=4, seed=3)
    for name in bench:
        assert np.array_equal(bench[name][0], again[name][0])
        assert np.array_equal(bench[name][1], again[name][1])


@pytest.mark.parametrize("method", ["scmix", "classmix", "cutmix"])
def test_mix_provenance_is_sound(bench, method):
    src_img, src_lab = bench["source"][0][0], bench["source"][1][0]
    names = ["target_1", "target_2", "target_3"]
    tgt_imgs = [bench[n][0][0] for n in names]
    tgt_probs = [one_hot_probs(bench[n][1][0], 4) for n in names]
    out = scmix.mix(method, src_img, src_lab, 4, tgt_imgs, tgt_probs, seed=5)
    prov = out["provenance"]
    from_source = prov == 0
    assert np.array_equal(out["image"][from_source], src_img[from_source])
    assert np.all(out["weights"][from_source] == 1.0)
    for k, img in enumerate(tgt_imgs, start=1):
        mask = prov == k
        assert np.array_equal(out["image"][mask], img[mask])
        assert np.all(out["weights"][mask] == np.float32(1.0))
    assert prov.max() <= (3 if method == "scmix" else 1)


def test_confidence_and_pseudo_label():
    probs = np.array([[[0.99, 0.01], [0.4, 0.6]]])
    assert scmix.confidence_weight(probs, 0.968) == pytest.approx(0.5)
    assert scmix.pseudo_label(probs).tolist() == [[0, 1]]


def test_proxy_distance_separates():
    rng = np.random.default_rng(0)
    a = rng.normal(-4.0, 0.5, size=(80, 6))
    b = rng.normal(4.0, 0.5, size=(80, 6))
    assert scmix.proxy_distance(a, b) >= 1.6
    assert scmix.proxy_distance(a, b) == scmix.proxy_distance(a, b)


def test_errors_map_to_python():
    with pytest.raises(ValueError, match="unknown key"):
        scmix.config_hash("mixing.colour = 3\n")
    with pytest.raises(ValueError):
        scmix.mix("dacs", np.zeros((4, 4, 3)), np.zeros((4, 4)), 2,
                  [np.zeros((4, 4, 3))], [np.full((4, 4, 2), 0.5)])


def test_cli_roundtrip(tmp_path):
    cfg = tmp_path / "small.cfg"
    cfg.write_text("[enumerate]\ninstances = 3\n")
    out = tmp_path / "enum"
    assert scmix.run_cli(["enumerate-reachable", "--config", str(cfg), "--out", str(out)]) == 0
    assert os.listdir(out)
    assert scmix.run_cli(["bogus"]) == 1
    assert len(scmix.config_hash("")) == 16

import os
import struct

import numpy as np
import pytest

from tscorr import FormatError, TimeSeriesMatrix, ValidationError, pearson
from tscorr.dataio import (
    ClassBlueprint,
    LatentGroup,
    PeriodicComponent,
    SynthSpec,
    TsfWriter,
    demo_spec,
    read_descriptor_cache,
    read_manifest,
    read_tsf,
    synth_generate,
    write_descriptor_cache,
    write_manifest,
    write_synth_corpus,
    write_tsf,
)
from tscorr.encoder import TcfLayout
from tscorr.evaluation import baseline_pool


class TestTsfFormat:
    def test_exact_size(self, tmp_path):
        path = tmp_path / "m.tsf"
        write_tsf(TimeSeriesMatrix([[1, 2, 3], [4, 5, 6]]), path)
        assert os.path.getsize(path) == 12 + 4 * 6

    def test_round_trip(self, tmp_path):
        rng = np.random.default_rng(0)
        m = TimeSeriesMatrix(rng.normal(size=(5, 9)) * 100)
        path = tmp_path / "m.tsf"
        write_tsf(m, path)
        back = read_tsf(path)
        np.testing.assert_allclose(back.data, m.data.astype(np.float32), rtol=1e-7)

    def test_frame_major_layout(self, tmp_path):
        path = tmp_path / "m.tsf"
        write_tsf(TimeSeriesMatrix([[1, 2], [3, 4]]), path)
        blob = path.read_bytes()
        assert blob[:4] == b"TSF1"
        n, k = struct.unpack("<II", blob[4:12])
        assert (n, k) == (2, 2)
        vals = np.frombuffer(blob, dtype="<f4", offset=12)
        # frame 1 is (1, 3), frame 2 is (2, 4)
        np.testing.assert_array_equal(vals, [1, 3, 2, 4])

    def test_bad_magic_named(self, tmp_path):
        path = tmp_path / "x.tsf"
        path.write_bytes(b"XXXX" + struct.pack("<II", 1, 2) + b"\0" * 8)
        with pytest.raises(FormatError, match="XXXX"):
            read_tsf(path)

    def test_truncated_payload(self, tmp_path):
        path = tmp_path / "t.tsf"
        write_tsf(TimeSeriesMatrix([[1, 2, 3], [4, 5, 6]]), path)
        blob = path.read_bytes()
        path.write_bytes(blob[:-4])
        with pytest.raises(FormatError, match="size mismatch"):
            read_tsf(path)

    def test_non_finite_payload(self, tmp_path):
        path = tmp_path / "nf.tsf"
        payload = struct.pack("<4f", 1.0, float("inf"), 2.0, 3.0)
        path.write_bytes(b"TSF1" + struct.pack("<II", 2, 2) + payload)
        with pytest.raises(FormatError, match="non-finite"):
            read_tsf(path)

    def test_value_overflowing_f32_rejected(self, tmp_path):
        m = TimeSeriesMatrix([[1e60, 0.0], [0.0, 0.0]])
        with pytest.raises(ValidationError):
            write_tsf(m, tmp_path / "o.tsf")

    def test_streaming_writer_patches_header(self, tmp_path):
        path = tmp_path / "s.tsf"
        with TsfWriter(path, n=3) as w:
            for t in range(5):
                w.append_frame([t, t + 1.0, t + 2.0])
        m = read_tsf(path)
        assert (m.n, m.k) == (3, 5)
        np.testing.assert_allclose(m.data[:, 0], [0, 1, 2])

    def test_streaming_writer_rejects_bad_frame(self, tmp_path):
        w = TsfWriter(tmp_path / "b.tsf", n=2)
        with pytest.raises(ValidationError):
            w.append_frame([1.0, 2.0, 3.0])
        w.close()


class TestManifest:
    def write_corpus(self, tmp_path, records):
        rng = np.random.default_rng(1)
        for _, rel in records:
            write_tsf(
                TimeSeriesMatrix(rng.normal(size=(3, 4))), tmp_path / rel
            )
        manifest = tmp_path / "manifest.tsv"
        write_manifest(manifest, records)
        return manifest

    def test_basic_parse(self, tmp_path):
        manifest = self.write_corpus(
            tmp_path, [("walk", "a.tsf"), ("walk", "b.tsf"), ("run", "c.tsf")]
        )
        ds = read_manifest(manifest)
        assert len(ds) == 3
        assert ds.class_set == ["run", "walk"]
        assert ds.items[0].get_matrix().n == 3

    def test_comments_and_blank_lines_ignored(self, tmp_path):
        manifest = self.write_corpus(tmp_path, [("x", "a.tsf")])
        manifest.write_text("# header\n\nx\ta.tsf\n")
        assert len(read_manifest(manifest)) == 1

    def test_duplicate_path_cites_both_lines(self, tmp_path):
        manifest = self.write_corpus(tmp_path, [("x", "a.tsf")])
        manifest.write_text("x\ta.tsf\ny\tb.tsf\nz\ta.tsf\n")
        with pytest.raises(FormatError, match="lines 1 and 3"):
            read_manifest(manifest)

    def test_missing_file_names_line(self, tmp_path):
        manifest = tmp_path / "m.tsv"
        manifest.write_text("x\tghost.tsf\n")
        ds = read_manifest(manifest)
        with pytest.raises(FormatError, match=":1"):
            ds.items[0].get_matrix()

    def test_missing_tab_rejected(self, tmp_path):
        manifest = tmp_path / "m.tsv"
        manifest.write_text("label-without-path\n")
        with pytest.raises(FormatError):
            read_manifest(manifest)


class TestDescriptorCache:
    def test_round_trip_bit_exact(self, tmp_path):
        rng = np.random.default_rng(2)
        entries = [(f"v{i}", rng.normal(size=17)) for i in range(4)]
        layout = TcfLayout(
            n=4, k=10, scheme="group", series_count=2, windows=1, lags=3,
            stride=1, ccf_length=1, acf_length=12,
        )
        path = tmp_path / "d.tcfc"
        write_descriptor_cache(path, entries, layout)
        cache, layout_dict = read_descriptor_cache(path)
        assert list(cache) == [f"v{i}" for i in range(4)]
        for (vid, vec) in entries:
            assert cache[vid].tobytes() == np.asarray(vec).tobytes()
        assert layout_dict["lags"] == 3

    def test_byte_deterministic(self, tmp_path):
        entries = [("a", np.arange(5.0)), ("b", np.ones(5))]
        p1, p2 = tmp_path / "1.tcfc", tmp_path / "2.tcfc"
        write_descriptor_cache(p1, entries)
        write_descriptor_cache(p2, entries)
        assert p1.read_bytes() == p2.read_bytes()

    def test_rejects_garbage(self, tmp_path):
        path = tmp_path / "g.tcfc"
        path.write_bytes(b"nope")
        with pytest.raises(FormatError):
            read_descriptor_cache(path)


class TestSynthGenerator:
    def test_counts_and_determinism(self, tmp_path):
        spec = demo_spec(videos_per_class=3, k_min=20, k_max=30)
        ds = synth_generate(spec)
        assert len(ds) == 9
        out1, out2 = tmp_path / "c1", tmp_path / "c2"
        write_synth_corpus(spec, out1)
        write_synth_corpus(spec, out2)
        for name in sorted(os.listdir(out1)):
            assert (out1 / name).read_bytes() == (out2 / name).read_bytes()

    def test_latent_template_exact_signs_at_zero_noise(self):
        spec = SynthSpec(
            classes=[
                ClassBlueprint(
                    name="only",
                    channels=3,
                    frames=(30, 30),
                    correlation=[LatentGroup(channels=[0, 2], signs=[1, -1])],
                    periodicity=[PeriodicComponent(channel=1, period=5.0)],
                    noise_sigma=0.0,
                )
            ],
            videos_per_class=5,
            seed=3,
        )
        for it in synth_generate(spec).items:
            r = pearson(it.matrix.data[0], it.matrix.data[2])
            assert r == pytest.approx(-1.0, abs=1e-12)

    def test_template_signs_hold_under_noise(self):
        spec = demo_spec(videos_per_class=30, noise_sigma=0.5, seed=11)
        ds = synth_generate(spec)
        blueprints = {b.name: b for b in spec.classes}
        checked = matched = 0
        for it in ds.items:
            bp = blueprints[it.label]
            for g in bp.correlation:
                a, b = g.channels
                expected = g.signs[0] * g.signs[1]
                r = pearson(it.matrix.data[a], it.matrix.data[b])
                checked += 1
                matched += (np.sign(r) == expected)
        assert matched / checked > 0.99

    def test_mean_pooling_blind(self):
        ds = synth_generate(demo_spec(videos_per_class=10))
        by_class = {}
        for it in ds.items:
            by_class.setdefault(it.label, []).append(baseline_pool(it.matrix))
        means = {c: np.mean(v, axis=0) for c, v in by_class.items()}
        classes = sorted(means)
        for a in classes:
            for b in classes:
                gap = np.max(np.abs(means[a] - means[b]))
                assert gap < 0.05

    def test_spec_json_round_trip(self):
        spec = demo_spec(videos_per_class=2)
        again = SynthSpec.from_dict(spec.to_dict())
        assert again.to_dict() == spec.to_dict()

    def test_channel_width_must_match(self):
        with pytest.raises(ValidationError):
            SynthSpec(
                classes=[
                    ClassBlueprint(name="a", channels=4, frames=(5, 6)),
                    ClassBlueprint(name="b", channels=8, frames=(5, 6)),
                ],
                videos_per_class=1,
            ).validate()

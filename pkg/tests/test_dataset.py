import numpy as np
import pytest

from moltraverse.dataset import (
    CompoundRecord,
    FormatError,
    load_dataset,
    load_decoder_weights,
    load_fragment_table,
    load_index,
    save_decoder_weights,
    save_fragment_table,
    save_index,
)
from moltraverse.kdtree import KdTree
from moltraverse.latent import GrammarLogitDecoder
from moltraverse.molecule import FragmentTable, build_fragment_table, to_molgraph
from moltraverse.traversal import LatentIndex, build_index


class TestLoadDataset:
    def write(self, tmp_path, body):
        path = tmp_path / "data.csv"
        path.write_text("id,smiles,label,activity\n" + body, encoding="utf-8")
        return path

    def test_well_formed(self, tmp_path, grammar):
        path = self.write(tmp_path, "a,CCO,X,4.5\nb,CCN,,\nc,c1ccccc1,Y,8.0\n")
        result = load_dataset(path, grammar)
        assert len(result.records) == 3
        assert result.records[0] == CompoundRecord("a", "CCO", "X", 4.5)
        assert result.records[1].label is None
        assert result.records[1].activity is None

    def test_duplicate_smiles_deduplicated(self, tmp_path, grammar):
        path = self.write(tmp_path, "a,CCO,X,1\nb,CCO,Y,2\n")
        result = load_dataset(path, grammar)
        assert len(result.records) == 1
        assert len(result.deduplicated) == 1
        assert result.deduplicated[0].row == 2

    def test_bad_row_rejected_others_kept(self, tmp_path, grammar):
        path = self.write(tmp_path, "a,xyz!!,X,1\nb,CCN,,\n")
        result = load_dataset(path, grammar)
        assert len(result.records) == 1
        assert result.rejected[0].row == 1

    def test_duplicate_id_rejected(self, tmp_path, grammar):
        path = self.write(tmp_path, "a,CCO,,\na,CCN,,\n")
        result = load_dataset(path, grammar)
        assert len(result.records) == 1
        assert "duplicate id" in result.rejected[0].reason

    def test_wrong_field_count_rejected(self, tmp_path, grammar):
        path = self.write(tmp_path, "a,CC,O,X,1\nb,CCN,,\n")
        result = load_dataset(path, grammar)
        assert len(result.records) == 1
        assert "4 fields" in result.rejected[0].reason

    def test_bad_activity_rejected(self, tmp_path, grammar):
        path = self.write(tmp_path, "a,CCO,X,high\n")
        result = load_dataset(path, grammar)
        assert not result.records
        assert "activity" in result.rejected[0].reason

    def test_semantically_invalid_rejected(self, tmp_path, grammar):
        path = self.write(tmp_path, "a,C1CC,X,\n")
        result = load_dataset(path, grammar)
        assert not result.records
        assert "ring digit" in result.rejected[0].reason

    def test_missing_header(self, tmp_path, grammar):
        path = tmp_path / "bad.csv"
        path.write_text("id,smiles\na,CCO\n", encoding="utf-8")
        with pytest.raises(FormatError, match="header"):
            load_dataset(path, grammar)

    def test_order_stable(self, tmp_path, grammar):
        path = self.write(tmp_path, "z,CCO,,\ny,CCN,,\nx,CCCN,,\n")
        result = load_dataset(path, grammar)
        assert [r.id for r in result.records] == ["z", "y", "x"]


class TestIndexRoundTrip:
    def test_bit_exact_round_trip(self, tmp_path, corpus, encoder, grammar):
        index = build_index(corpus[:60], encoder)
        path = tmp_path / "idx.bin"
        save_index(index, path)
        loaded = load_index(path, grammar)
        assert np.array_equal(loaded.points, index.points)
        assert loaded.points.dtype == index.points.dtype
        for a, b in zip(loaded.records, index.records):
            assert (a.id, a.smiles, a.label, a.activity) == (b.id, b.smiles, b.label, b.activity)
            assert a.profile == b.profile

    def test_corrupted_magic(self, tmp_path, grammar):
        path = tmp_path / "idx.bin"
        path.write_bytes(b"WRONG000" + b"\x00" * 32)
        with pytest.raises(FormatError, match="magic"):
            load_index(path, grammar)

    def test_truncated_file(self, tmp_path, corpus, encoder, grammar):
        index = build_index(corpus[:10], encoder)
        path = tmp_path / "idx.bin"
        save_index(index, path)
        blob = path.read_bytes()
        path.write_bytes(blob[: len(blob) // 2])
        with pytest.raises(FormatError):
            load_index(path, grammar)

    def test_empty_index_round_trip(self, tmp_path, grammar):
        empty = LatentIndex(
            np.zeros((0, 5)), [], KdTree(np.zeros((0, 5))), FragmentTable({}, 0), grammar
        )
        path = tmp_path / "empty.bin"
        save_index(empty, path)
        loaded = load_index(path, grammar)
        assert loaded.size == 0
        assert loaded.dim == 5

    def test_save_load_save_stable(self, tmp_path, corpus, encoder, grammar):
        index = build_index(corpus[:20], encoder)
        p1, p2 = tmp_path / "a.bin", tmp_path / "b.bin"
        save_index(index, p1)
        save_index(load_index(p1, grammar), p2)
        assert p1.read_bytes() == p2.read_bytes()


class TestFragmentTableRoundTrip:
    def test_round_trip_bit_exact(self, tmp_path, grammar, corpus):
        mols = [to_molgraph(r.smiles, grammar) for r in corpus[:100]]
        table = build_fragment_table(mols)
        path = tmp_path / "frags.bin"
        save_fragment_table(table, path)
        loaded = load_fragment_table(path)
        assert loaded.counts == table.counts
        assert loaded.total == table.total
        save_fragment_table(loaded, tmp_path / "frags2.bin")
        assert path.read_bytes() == (tmp_path / "frags2.bin").read_bytes()

    def test_bad_magic(self, tmp_path):
        path = tmp_path / "frags.bin"
        path.write_bytes(b"NOTFRAGS" + b"\x00" * 8)
        with pytest.raises(FormatError, match="magic"):
            load_fragment_table(path)

    def test_truncated(self, tmp_path, grammar):
        table = build_fragment_table([to_molgraph("CCO", grammar)])
        path = tmp_path / "frags.bin"
        save_fragment_table(table, path)
        path.write_bytes(path.read_bytes()[:-4])
        with pytest.raises(FormatError):
            load_fragment_table(path)


class TestDecoderWeightsRoundTrip:
    def test_round_trip_identical_decodes(self, tmp_path, grammar):
        decoder = GrammarLogitDecoder(grammar, latent_dim=10, t_max=20, hidden=16, seed=5)
        path = tmp_path / "w.bin"
        save_decoder_weights(decoder, path)
        loaded = load_decoder_weights(path, grammar)
        z = np.random.default_rng(0).standard_normal(10)
        assert np.array_equal(decoder.decode_logits(z), loaded.decode_logits(z))
        assert decoder.decode(z).text == loaded.decode(z).text

    def test_grammar_mismatch(self, tmp_path, grammar, toy_grammar):
        decoder = GrammarLogitDecoder(grammar, latent_dim=6, t_max=10, hidden=8)
        path = tmp_path / "w.bin"
        save_decoder_weights(decoder, path)
        with pytest.raises(FormatError, match="productions"):
            load_decoder_weights(path, toy_grammar)

    def test_bad_magic(self, tmp_path, grammar):
        path = tmp_path / "w.bin"
        path.write_bytes(b"BADMAGIC" + b"\x00" * 16)
        with pytest.raises(FormatError, match="magic"):
            load_decoder_weights(path, grammar)

    def test_truncated(self, tmp_path, grammar):
        decoder = GrammarLogitDecoder(grammar, latent_dim=6, t_max=10, hidden=8)
        path = tmp_path / "w.bin"
        save_decoder_weights(decoder, path)
        path.write_bytes(path.read_bytes()[:100])
        with pytest.raises(FormatError):
            load_decoder_weights(path, grammar)

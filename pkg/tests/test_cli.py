"""End-to-end tests of the command-line surface and its exit-code contract."""

import numpy as np
import pytest

from seqvec.cli import main
from seqvec.model_io import load_model, read_vectors
from seqvec.sequences import SequenceRecord, write_fasta
from seqvec.synthetic import markov_family_corpus


@pytest.fixture(scope="module")
def tiny_dataset(tmp_path_factory):
    """Two distinguishable families, small enough for fast CLI runs."""
    root = tmp_path_factory.mktemp("cli")
    records = markov_family_corpus(
        n_families=2, per_family=8, length=40, seed=5, concentration=0.1
    )
    fasta = root / "seqs.fasta"
    with open(fasta, "w") as fh:
        write_fasta(records, fh)
    labels = root / "labels.tsv"
    with open(labels, "w") as fh:
        fh.write("# id -> family\n")
        for rec in records:
            fh.write(f"{rec.id}\t{rec.family}\n")
    return root, fasta, labels


def _tokenize(root, fasta, extra=()):
    corpus = root / "corpus.txt"
    rc = main(
        ["tokenize", "--input", str(fasta), "--k", "3", "--mode", "nonoverlap",
         "--output", str(corpus), *extra]
    )
    assert rc == 0
    return corpus


def _train(root, corpus, out="model.bin", extra=()):
    model = root / out
    rc = main(
        ["train", "--corpus", str(corpus), "--dim", "16", "--epochs", "8",
         "--seed", "7", "--output", str(model), *extra]
    )
    assert rc == 0
    return model


class TestTokenize:
    def test_writes_phase_lines(self, tmp_path):
        fasta = tmp_path / "q.fasta"
        fasta.write_text(">q1\nQWERTYQWERTY\n")
        out = tmp_path / "corpus.txt"
        rc = main(["tokenize", "--input", str(fasta), "--k", "3",
                   "--mode", "nonoverlap", "--output", str(out)])
        assert rc == 0
        data_lines = [l for l in out.read_text().splitlines() if not l.startswith("#")]
        assert data_lines == [
            "0 0 QWE RTY QWE RTY",
            "0 1 WER TYQ WER",
            "0 2 ERT YQW ERT",
        ]

    def test_k_zero_is_usage_error(self, tmp_path):
        fasta = tmp_path / "q.fasta"
        fasta.write_text(">q1\nQWERTYQWERTY\n")
        rc = main(["tokenize", "--input", str(fasta), "--k", "0",
                   "--output", str(tmp_path / "c.txt")])
        assert rc == 2

    def test_empty_fasta_is_data_error(self, tmp_path, capsys):
        fasta = tmp_path / "empty.fasta"
        fasta.write_text("")
        rc = main(["tokenize", "--input", str(fasta), "--k", "3",
                   "--output", str(tmp_path / "c.txt")])
        assert rc == 1
        assert "empty" in capsys.readouterr().err

    def test_missing_file_is_data_error(self, tmp_path):
        rc = main(["tokenize", "--input", str(tmp_path / "nope.fasta"),
                   "--k", "3", "--output", str(tmp_path / "c.txt")])
        assert rc == 1

    def test_unknown_flag_exits_two(self):
        with pytest.raises(SystemExit) as exc:
            main(["tokenize", "--bogus"])
        assert exc.value.code == 2


class TestTrain:
    def test_two_runs_are_byte_identical(self, tiny_dataset, capsys):
        root, fasta, labels = tiny_dataset
        corpus = _tokenize(root, fasta)
        m1 = _train(root, corpus, "model1.bin")
        first_err = capsys.readouterr().err
        m2 = _train(root, corpus, "model2.bin")
        assert m1.read_bytes() == m2.read_bytes()
        assert "initial loss" in first_err

    def test_final_loss_below_initial(self, tiny_dataset, capsys):
        root, fasta, labels = tiny_dataset
        corpus = _tokenize(root, fasta)
        _train(root, corpus, "model3.bin")
        err = capsys.readouterr().err
        parts = err.strip().rsplit("initial loss ", 1)[1]
        initial, final = parts.replace(", final loss", "").split()
        assert float(final) < float(initial)

    def test_extreme_alpha_is_usage_error(self, tiny_dataset):
        root, fasta, labels = tiny_dataset
        corpus = _tokenize(root, fasta)
        rc = main(["train", "--corpus", str(corpus), "--alpha", "5.0",
                   "--output", str(root / "bad.bin")])
        assert rc == 2

    def test_hs_objective_trains(self, tiny_dataset):
        root, fasta, labels = tiny_dataset
        corpus = _tokenize(root, fasta)
        model = _train(root, corpus, "model_hs.bin", extra=("--objective", "hs"))
        assert load_model(model.read_bytes()).config.objective == "hs"

    def test_seqvec_seed_env_fallback(self, tiny_dataset, monkeypatch):
        root, fasta, labels = tiny_dataset
        corpus = _tokenize(root, fasta)
        monkeypatch.setenv("SEQVEC_SEED", "7")
        from_env = root / "model_env.bin"
        rc = main(["train", "--corpus", str(corpus), "--dim", "16",
                   "--epochs", "8", "--output", str(from_env)])
        assert rc == 0
        explicit = _train(root, corpus, "model_explicit.bin")  # --seed 7
        assert from_env.read_bytes() == explicit.read_bytes()


class TestVectorsAndInfer:
    def test_vectors_match_document_matrix(self, tiny_dataset, tmp_path):
        root, fasta, labels = tiny_dataset
        corpus = _tokenize(root, fasta)
        model_path = _train(root, corpus)
        out = tmp_path / "vecs.txt"
        assert main(["vectors", "--model", str(model_path), "--output", str(out)]) == 0
        ids, matrix = read_vectors(out.read_text())
        model = load_model(model_path.read_bytes())
        assert ids == model.doc_ids
        assert np.array_equal(matrix, model.D)

    def test_infer_is_deterministic_and_shaped(self, tiny_dataset, tmp_path):
        root, fasta, labels = tiny_dataset
        corpus = _tokenize(root, fasta)
        model_path = _train(root, corpus)
        out1, out2 = tmp_path / "i1.txt", tmp_path / "i2.txt"
        for out in (out1, out2):
            rc = main(["infer", "--model", str(model_path), "--input", str(fasta),
                       "--epochs", "4", "--seed", "3", "--output", str(out)])
            assert rc == 0
        assert out1.read_text() == out2.read_text()
        ids, matrix = read_vectors(out1.read_text())
        assert len(ids) == 16
        assert matrix.shape == (16, 16)

    def test_truncated_model_is_data_error(self, tiny_dataset, tmp_path, capsys):
        root, fasta, labels = tiny_dataset
        corpus = _tokenize(root, fasta)
        model_path = _train(root, corpus)
        broken = tmp_path / "broken.bin"
        broken.write_bytes(model_path.read_bytes()[:50])
        rc = main(["vectors", "--model", str(broken), "--output",
                   str(tmp_path / "v.txt")])
        assert rc == 1
        assert "byte" in capsys.readouterr().err


PER_FAMILY = 12


@pytest.fixture(scope="module")
def eval_files(tmp_path_factory):
    # hand-made separable vectors keep the eval tests fast and unambiguous
    root = tmp_path_factory.mktemp("eval")
    rng = np.random.default_rng(0)
    lines = [f"{2 * PER_FAMILY} 4"]
    label_lines = []
    for fam in range(2):
        center = np.zeros(4)
        center[fam] = 25.0
        for i in range(PER_FAMILY):
            vec = center + 0.05 * rng.normal(size=4)
            rid = f"FAM{fam}_{i:03d}"
            lines.append(rid + " " + " ".join(repr(float(v)) for v in vec))
            label_lines.append(f"{rid}\tFAM{fam}\n")
    vectors = root / "vecs.txt"
    vectors.write_text("\n".join(lines) + "\n")
    labels = root / "labels.tsv"
    labels.write_text("".join(label_lines))
    return vectors, labels


class TestEvaluationCommands:
    def test_knn_eval_report(self, eval_files, capsys):
        vectors, labels = eval_files
        rc = main(["knn-eval", "--vectors", str(vectors), "--labels",
                   str(labels), "--folds", "4", "--k", "1,3", "--seed", "0"])
        assert rc == 0
        out = capsys.readouterr().out.splitlines()
        assert out[0] == "k\tAccuracy(%)\tStd(%)"
        assert out[1].startswith("1\t100.00")
        assert out[2].startswith("3\t100.00")

    def test_svm_eval_multiclass_report(self, eval_files, capsys):
        vectors, labels = eval_files
        rc = main(["svm-eval", "--vectors", str(vectors), "--labels",
                   str(labels), "--mode", "multiclass", "--top-n", "2",
                   "--folds", "4", "--seed", "0"])
        assert rc == 0
        out = capsys.readouterr().out.splitlines()
        assert out[0].split("\t")[0] == "Precision(%)"
        assert float(out[1].split("\t")[0]) >= 95.0

    def test_svm_eval_binary_report(self, eval_files, capsys):
        vectors, labels = eval_files
        rc = main(["svm-eval", "--vectors", str(vectors), "--labels",
                   str(labels), "--mode", "binary", "--folds", "10", "--seed", "0"])
        assert rc == 0
        out = capsys.readouterr().out.splitlines()
        assert out[0].split("\t")[:2] == ["Family", "Specificity(%)"]
        assert len(out) == 3  # one row per family
        for row in out[1:]:
            assert float(row.split("\t")[5]) >= 95.0  # Accuracy(%)


class TestAlignKnn:
    def test_end_to_end_classification(self, tmp_path, capsys):
        rng = np.random.default_rng(0)
        fam1 = ["MKVLAWGHEEDNA", "MKVLAWGHEEDNC", "MKVLAWGHEEDNW"]
        fam2 = ["PPPWWFFYYQQHH", "PPPWWFFYYQQHA", "PPPWWFFYYQQHC"]
        db_records = [
            SequenceRecord(f"db{i}", "", seq, family=f"F{1 + (i >= 3)}")
            for i, seq in enumerate(fam1 + fam2)
        ]
        db = tmp_path / "db.fasta"
        with open(db, "w") as fh:
            write_fasta(db_records, fh)
        labels = tmp_path / "labels.tsv"
        labels.write_text("".join(f"{r.id}\t{r.family}\n" for r in db_records))
        query = tmp_path / "query.fasta"
        with open(query, "w") as fh:
            write_fasta([SequenceRecord("q1", "", "MKVLAWGHEEDNY"),
                         SequenceRecord("q2", "", "PPPWWFFYYQQHY")], fh)
        rc = main(["align-knn", "--db", str(db), "--labels", str(labels),
                   "--query", str(query), "--k", "3"])
        assert rc == 0
        out = capsys.readouterr().out.splitlines()
        assert out[0] == "query\tpredicted_family"
        assert out[1] == "q1\tF1"
        assert out[2] == "q2\tF2"

    def test_custom_matrix_file(self, tmp_path, capsys):
        matrix = tmp_path / "m.txt"
        matrix.write_text("   A  C\nA  2 -1\nC -1  2\n")
        db = tmp_path / "db.fasta"
        db.write_text(">d1\nAAAA\n>d2\nCCCC\n")
        labels = tmp_path / "labels.tsv"
        labels.write_text("d1\tFA\nd2\tFC\n")
        query = tmp_path / "q.fasta"
        query.write_text(">q\nAAAA\n")
        rc = main(["align-knn", "--db", str(db), "--labels", str(labels),
                   "--query", str(query), "--k", "1", "--matrix", str(matrix),
                   "--gap-open", "-2", "--gap-extend", "-1"])
        assert rc == 0
        assert capsys.readouterr().out.splitlines()[1] == "q\tFA"

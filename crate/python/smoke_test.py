"""Builds the extension with cargo and exercises it from Python.

    python3 python/smoke_test.py
"""
import os
import shutil
import subprocess
import sys
import tempfile

ROOT = os.path.abspath(os.path.join(os.path.dirname(__file__), ".."))
FIXTURES = os.path.join(ROOT, "crates", "core", "tests", "fixtures")


def build(dest):
    subprocess.run(
        ["cargo", "build", "--release", "-p", "stylm-py", "--features", "extension-module"],
        cwd=ROOT,
        check=True,
    )
    lib = os.path.join(ROOT, "target", "release", "libstylm_py.so")
    shutil.copy(lib, os.path.join(dest, "stylm.so"))
    sys.path.insert(0, dest)


def main():
    with tempfile.TemporaryDirectory() as tmp:
        build(tmp)
        import stylm

        assert stylm.preprocess("Hello, World!") == ["hello", "world"]
        assert stylm.preprocess("don't\nstop") == ["don", "t", "<eol>", "stop"]
        assert stylm.transcribe("cat") == ["k", "æ", "t"]

        hyp = [["the", "the", "cat"]]
        ref = [[["the", "cat", "on", "the", "mat"]]]
        assert abs(stylm.bleu(hyp, ref, max_n=2) - 100 * 2.718281828459045 ** (1 - 5 / 3) * 0.5 ** 0.5) < 1e-9
        assert stylm.bleu([["a", "b", "c", "d"]], [[["a", "b", "c", "d"]]]) == 100.0

        types = [[f"w{i}" for i in range(61)]]
        assert stylm.ngram_cross_entropy(types, types, order=1) < 6.0

        corpus = stylm.Corpus.load(os.path.join(FIXTURES, "synthetic.jsonl"))
        assert len(corpus) == 600 and corpus.authors() == ["ashford", "brenner", "corwin"]
        vocab = corpus.vocabulary()
        assert len(vocab) == 716 and vocab.token(vocab.id("<eol>")) == "<eol>"
        train, val = corpus.split(0.1, seed=0)
        assert len(train) + len(val) == 600
        windows = corpus.word_windows("ashford", 500, 4, seed=1)
        assert [g for g, _ in windows] == [0, 1, 0, 1] and all(len(t) == 500 for _, t in windows)
        assert len(vocab.random_text(50, "weighted", seed=3)) == 50

        single = stylm.Corpus.load(os.path.join(FIXTURES, "single.jsonl"))
        dims = {"d_word": 6, "d_char_bi": 4, "d_phon_bi": 4, "d_doc_proj": 6, "d_state": 32,
                "d_author_emb": 3, "d_doc_emb": 3, "d_char_emb": 3, "d_phon_emb": 3}
        model, losses = stylm.Model.train(single, epochs=300, lr=0.01, dims=dims)
        assert len(losses) == 300 and losses[-1] < losses[0]
        text = "the quiet river bends\nbeneath a silver moon\nand carries all our names\ntoward the sleeping sea"
        assert model.generate("solo", temperature=0.0) == text
        assert model.nll(text, "solo") < 0.05

        path = os.path.join(tmp, "m.stylm")
        model.save(path)
        again = stylm.Model.load(path)
        assert again.variant == "full" and again.authors() == ["solo"]
        assert again.generate("solo", seed_line="the quiet river bends", temperature=0.0, lines=1) == "beneath a silver moon\n"

        try:
            stylm.Model.load(os.path.join(tmp, "missing.stylm"))
        except OSError:
            pass
        else:
            raise AssertionError("missing checkpoint should raise OSError")
        try:
            stylm.Model.train(single, variant="huge")
        except ValueError:
            pass
        else:
            raise AssertionError("unknown variant should raise ValueError")
    print("python smoke test passed")


if __name__ == "__main__":
    main()

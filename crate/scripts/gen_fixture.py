"""Writes the synthetic test corpora under crates/core/tests/fixtures/.

synthetic.jsonl: three authors, 200 documents of 8 lines each. Every author
draws from a 300-word vocabulary of which 60 words are shared by all three.
Lines follow an author-specific first-order Markov chain with a few skewed
successors per word and an author-specific line-length range.

single.jsonl: one short document, used by overfitting tests.
"""
import json
import os
import random

OUT = os.path.join(os.path.dirname(__file__), "..", "crates", "core", "tests", "fixtures")
SEED = 20240917
AUTHORS = ["ashford", "brenner", "corwin"]
LINE_LENGTHS = {"ashford": (4, 6), "brenner": (6, 8), "corwin": (8, 10)}
VOCAB = 300
SHARED = 60
DOCS = 200
LINES = 8
SUCCESSORS = 4
SUCCESSOR_WEIGHTS = [0.55, 0.25, 0.12, 0.08]

ONSETS = ["b", "d", "f", "g", "h", "k", "l", "m", "n", "p", "r", "s", "t", "v", "w", "z",
          "br", "st", "tr", "sh", "ch", "th", "gr", "pl", "cl", "fl"]
VOWELS = ["a", "e", "i", "o", "u", "ai", "ee", "oo", "ou", "ea"]
CODAS = ["", "", "n", "r", "l", "s", "t", "nd", "st", "m", "ck", "ng"]


def make_words(rng, n, taken):
    words = []
    while len(words) < n:
        w = "".join(rng.choice(ONSETS) + rng.choice(VOWELS) for _ in range(rng.choice([1, 1, 2, 2, 3])))
        w += rng.choice(CODAS)
        if w not in taken:
            taken.add(w)
            words.append(w)
    return words


def zipf_weights(n):
    return [1.0 / (i + 1) for i in range(n)]


def main():
    rng = random.Random(SEED)
    taken = set()
    shared = make_words(rng, SHARED, taken)
    records = []
    for author in AUTHORS:
        own = make_words(rng, VOCAB - SHARED, taken)
        vocab = shared + own
        rng.shuffle(vocab)
        weights = zipf_weights(len(vocab))
        chain = {w: rng.choices(vocab, weights=weights, k=SUCCESSORS) for w in vocab}
        lo, hi = LINE_LENGTHS[author]
        for d in range(DOCS):
            lines = []
            for _ in range(LINES):
                w = rng.choices(vocab, weights=weights)[0]
                line = [w]
                for _ in range(rng.randint(lo, hi) - 1):
                    w = rng.choices(chain[w], weights=SUCCESSOR_WEIGHTS)[0]
                    line.append(w)
                lines.append(" ".join(line))
            records.append({"id": f"{author}-{d:03d}", "author": author, "lang": "en", "text": "\n".join(lines)})
    os.makedirs(OUT, exist_ok=True)
    with open(os.path.join(OUT, "synthetic.jsonl"), "w", encoding="utf-8") as f:
        for r in records:
            f.write(json.dumps(r, ensure_ascii=False) + "\n")
    single = {
        "id": "only",
        "author": "solo",
        "lang": "en",
        "text": "the quiet river bends\nbeneath a silver moon\nand carries all our names\ntoward the sleeping sea",
    }
    with open(os.path.join(OUT, "single.jsonl"), "w", encoding="utf-8") as f:
        f.write(json.dumps(single) + "\n")


if __name__ == "__main__":
    main()

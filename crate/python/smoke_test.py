"""Smoke test for the softrec Python bindings.

Build and install first:

    pip install --no-build-isolation ./crates/python
    python python/smoke_test.py
"""

import math
import tempfile

import softrec


def main():
    records, friends = softrec.generate_synthetic({"users_per_cluster": 30, "items_per_cluster": 50}, seed=3)
    corpus = softrec.Corpus.from_records(records, friends, seed=3)
    print(corpus)
    assert corpus.num_users > 0 and corpus.num_test_entries > 0

    with tempfile.TemporaryDirectory() as d:
        corpus.write(d)
        again = softrec.Corpus.read(d)
        assert again.checksum() == corpus.checksum()

    clusters = softrec.cluster(corpus, "cmeans", clusters=2, seed=3)
    for row in clusters.memberships:
        assert abs(sum(row) - 1.0) < 1e-9
    hard = softrec.cluster(corpus, "kmeans", clusters=2, seed=3)
    assert all(sorted(set(row)) <= [0.0, 1.0] for row in hard.memberships)

    config = {"train.max_iter": 10, "cluster.clusters": 2}
    model = softrec.train(corpus, "frsbosn", preset="synthetic", config=config, seed=3)
    print(model)
    assert len(model.loss_trace) == model.epochs_run
    assert all(b <= a * (1 + 1e-9) for a, b in zip(model.loss_trace, model.loss_trace[1:]))
    s, v = model.user_factors(0), model.item_factors(1)
    assert math.isclose(model.predict(0, 1), sum(a * b for a, b in zip(s, v)), rel_tol=1e-12)
    top = model.recommend(corpus, 0, 5)
    assert len(top) == 5 and len(set(top)) == 5

    twice = softrec.train(corpus, "frsbosn", preset="synthetic", config=config, seed=3)
    assert twice.user_factors(0) == s

    scores = softrec.evaluate(corpus, model=model, ks=[1, 5])
    print("frsbosn", scores)
    assert set(scores) == {"P@1", "P@5", "R@1", "R@5"}
    pop = softrec.evaluate(corpus, method="pop", ks=[1, 5])
    print("pop", pop)
    assert 0.0 <= pop["P@1"] <= 1.0

    try:
        softrec.train(corpus, "frsbosn", config={"train.betta": 1.0})
    except softrec.SoftrecError as e:
        assert "betta" in str(e)
    else:
        raise AssertionError("unknown key accepted")

    print("ok")


if __name__ == "__main__":
    main()

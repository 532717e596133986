"""Seeded synthetic corpora for tests, benchmarks and demos."""

from __future__ import annotations

import json
import os
from datetime import date, timedelta

import numpy as np

from .forest import FeatureVector, LabeledExample, derive_label
from .graph import EdgeKind, GeoPoint, GeosocialGraph, SpStats

VOCAB = (
    "sushi", "ramen", "pizza", "burgers", "tacos", "bakery", "coffee", "tea", "bars",
    "wine bars", "steakhouse", "seafood", "vegan", "vegetarian", "thai", "indian",
    "korean", "chinese", "french", "italian", "mexican", "greek", "bbq", "diner",
    "breakfast", "brunch", "desserts", "ice cream", "juice", "sandwiches", "salad",
    "noodles", "dim sum", "hot pot", "buffet", "food trucks", "delis", "pubs",
    "cocktail bars", "nightlife", "gyms", "spas", "nail salons", "hair salons",
    "bookstores", "florists", "pet stores", "auto repair", "dentists", "hotels",
)
CENTER = GeoPoint(36.17, -115.14)


def _location(rng: np.random.Generator, spread_deg: float) -> GeoPoint:
    lat = float(np.clip(CENTER.lat + rng.normal(0.0, spread_deg), -90, 90))
    lon = float(np.clip(CENTER.lon + rng.normal(0.0, spread_deg), -180, 180))
    return GeoPoint(lat, lon)


def random_graph(
    seed: int,
    n_users: int,
    n_sps: int,
    n_edges: int,
    vocab_size: int = len(VOCAB),
    keywords_per_sp: tuple[int, int] = (1, 4),
    spread_deg: float = 0.1,
) -> GeosocialGraph:
    """Random geosocial graph with roughly ``n_edges`` distinct edges.

    Node ids interleave users and SPs in a seeded order.  About half of the
    edges are friendships and half reviews; SP stats are drawn independently
    of the edges with at least as many reviews as review edges.
    """
    rng = np.random.default_rng(seed)
    vocab = VOCAB[:vocab_size]
    g = GeosocialGraph()
    kinds = rng.permutation(np.r_[np.zeros(n_users, bool), np.ones(n_sps, bool)])
    users, sps = [], []
    lo_kw, hi_kw = keywords_per_sp
    for i, is_sp in enumerate(kinds.tolist()):
        if is_sp:
            n_kw = int(rng.integers(lo_kw, hi_kw + 1))
            kw = [vocab[j] for j in rng.choice(len(vocab), size=min(n_kw, len(vocab)), replace=False)]
            sps.append(g.add_service_provider(f"b{i}", f"Business {i}", kw, _location(rng, spread_deg)))
        else:
            users.append(g.add_user(f"u{i}"))
    users_a = np.asarray(users)
    sps_a = np.asarray(sps)
    review_edges: dict[int, int] = {}
    if len(users_a) and n_edges:
        n_friend = n_edges // 2 if len(users_a) > 1 else 0
        n_review = n_edges - n_friend if len(sps_a) else 0
        if n_friend:
            a = users_a[rng.integers(0, len(users_a), n_friend)]
            b = users_a[rng.integers(0, len(users_a), n_friend)]
            w = rng.random(n_friend)
            for x, y, wt in zip(a.tolist(), b.tolist(), w.tolist()):
                if x != y:
                    g.connect(x, y, wt, EdgeKind.FRIENDSHIP)
        if n_review:
            a = users_a[rng.integers(0, len(users_a), n_review)]
            b = sps_a[rng.integers(0, len(sps_a), n_review)]
            stars = rng.integers(1, 6, n_review)
            for x, y, s in zip(a.tolist(), b.tolist(), stars.tolist()):
                g.connect(x, y, s / 5, EdgeKind.REVIEW, stars=s)
    for e in g.edges():
        if e.kind is EdgeKind.REVIEW:
            sp = e.a if g.is_user(e.b) else e.b
            review_edges[sp] = review_edges.get(sp, 0) + 1
    for sp in sps:
        base = review_edges.get(sp, 0)
        if base == 0 and rng.random() < 0.5:
            continue
        count = base + int(rng.integers(1, 50))
        g.set_sp_stats(sp, count, float(np.round(rng.uniform(1.0, 5.0), 2)))
    return g


def labeled_examples(seed: int, n: int) -> list[LabeledExample]:
    """Examples whose label is ``derive_label`` of a drawn average rating.

    The average rating is also the ``score_avg`` feature, so the label is a
    step function of one feature; the other three features are noise.
    """
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(n):
        count = int(rng.integers(1, 500))
        avg = float(np.round(rng.uniform(1.0, 5.0), 2))
        label = derive_label(SpStats(count, avg))
        f = FeatureVector(float(rng.random()), float(rng.random()), count, avg)
        out.append(LabeledExample(f, label))
    return out


def rated_sp_graph(seed: int, n_sps: int, n_users: int = 50) -> GeosocialGraph:
    """Graph of ``n_sps`` reviewed SPs with drawn keyword sets and ratings."""
    rng = np.random.default_rng(seed)
    g = GeosocialGraph()
    users = [g.add_user(f"u{i}") for i in range(n_users)]
    for i in range(n_sps):
        n_kw = int(rng.integers(1, 5))
        kw = [VOCAB[j] for j in rng.choice(len(VOCAB), size=n_kw, replace=False)]
        sp = g.add_service_provider(f"b{i}", f"Business {i}", kw, _location(rng, 0.1))
        stars = int(rng.integers(1, 6))
        g.connect(users[int(rng.integers(0, n_users))], sp, stars / 5, EdgeKind.REVIEW, stars=stars)
        g.set_sp_stats(sp, int(rng.integers(1, 300)), float(np.round(rng.uniform(1.0, 5.0), 2)))
    return g


def write_yelp_corpus(out_dir: str | os.PathLike, seed: int, n_businesses: int,
                      n_users: int, n_reviews: int, friends_per_user: int = 5) -> dict[str, str]:
    """Write business.json, user.json and review.json in the Yelp layout."""
    rng = np.random.default_rng(seed)
    os.makedirs(out_dir, exist_ok=True)
    paths = {name: os.path.join(out_dir, f"{name}.json") for name in ("business", "user", "review")}
    with open(paths["business"], "w", encoding="utf-8") as fh:
        for i in range(n_businesses):
            n_kw = int(rng.integers(1, 5))
            cats = ", ".join(VOCAB[j].title() for j in rng.choice(len(VOCAB), size=n_kw, replace=False))
            loc = _location(rng, 0.1)
            rec = {"business_id": f"b{i}", "name": f"Business {i}", "latitude": loc.lat,
                   "longitude": loc.lon, "categories": cats, "stars": 3.0, "review_count": 0}
            fh.write(json.dumps(rec) + "\n")
    with open(paths["user"], "w", encoding="utf-8") as fh:
        for i in range(n_users):
            k = int(rng.integers(0, friends_per_user + 1))
            friends = sorted({f"u{j}" for j in rng.integers(0, n_users, k).tolist()} - {f"u{i}"})
            fh.write(json.dumps({"user_id": f"u{i}", "friends": friends}) + "\n")
    start = date(2015, 1, 1)
    with open(paths["review"], "w", encoding="utf-8") as fh:
        u = rng.integers(0, n_users, n_reviews)
        b = rng.integers(0, n_businesses, n_reviews)
        s = rng.integers(1, 6, n_reviews)
        d = rng.integers(0, 3000, n_reviews)
        for i in range(n_reviews):
            rec = {"review_id": f"r{i}", "user_id": f"u{u[i]}", "business_id": f"b{b[i]}",
                   "stars": int(s[i]), "date": (start + timedelta(days=int(d[i]))).isoformat()}
            fh.write(json.dumps(rec) + "\n")
    return paths

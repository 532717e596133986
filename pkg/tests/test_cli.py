import json

import pytest

from geosocial.cli import main
from geosocial.config import AppConfig, ConfigError, load_config, parse_config_text
from geosocial.forest import RandomForestModel
from geosocial.graph import GeosocialGraph
from geosocial.ingest import ingest_files
from geosocial.synthetic import rated_sp_graph


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def run_json(capsys, *argv):
    code, out, err = run(capsys, "--format", "json", *argv)
    return code, (json.loads(out) if out else None), err


@pytest.fixture
def four_node_files(tmp_path, four_node):
    snap, model = tmp_path / "g.json", tmp_path / "m.json"
    four_node.save_snapshot(snap)
    RandomForestModel.constant(3).save(model)
    return snap, model


def test_ingest_writes_snapshot_and_report(capsys, tmp_path, tiny_paths):
    code, report, _ = run_json(capsys, "ingest", *tiny_paths, "--out", tmp_path / "g.json")
    assert code == 0
    assert report == {"users_added": 4, "sps_added": 3, "friendship_edges": 3, "review_edges": 4,
                      "reviews_total": 5, "reviews_collapsed": 1, "lines_skipped": 2}
    g = GeosocialGraph.load_snapshot(tmp_path / "g.json")
    assert g == ingest_files(*tiny_paths)[0]
    code, out, _ = run(capsys, "ingest", *tiny_paths, "--out", tmp_path / "g2.json")
    assert code == 0 and "reviews_total" in out


def test_ingest_missing_file(capsys, tmp_path, tiny_paths):
    code, _, err = run(capsys, "ingest", tmp_path / "nope.json", *tiny_paths[1:], "--out", tmp_path / "g.json")
    assert code == 1 and "nope.json" in err


def test_ingest_strict_reports_line(capsys, tmp_path, tiny_paths):
    bad = tmp_path / "review.json"
    bad.write_text('{"user_id":"u1","business_id":"b1","stars":4,"date":"2020-01-01"}\n{oops\n')
    code, _, err = run(capsys, "ingest", *tiny_paths[:2], bad, "--out", tmp_path / "g.json", "--strict")
    assert code == 2 and ":2:" in err
    code, report, _ = run_json(capsys, "ingest", *tiny_paths[:2], bad, "--out", tmp_path / "g.json")
    assert code == 0 and report["lines_skipped"] == 2


def test_train_is_reproducible(capsys, tmp_path):
    rated_sp_graph(1, 60).save_snapshot(tmp_path / "g.json")
    args = ["train", "--snapshot", tmp_path / "g.json", "--n-trees", "15", "--seed", "42"]
    code, first, _ = run_json(capsys, *args, "--model-out", tmp_path / "m1.json")
    assert code == 0
    code, second, _ = run_json(capsys, *args, "--model-out", tmp_path / "m2.json")
    assert first == second
    assert (tmp_path / "m1.json").read_bytes() == (tmp_path / "m2.json").read_bytes()
    assert first["n_test"] == 12 * 4 and first["n_train"] == 48 * 4
    assert len(RandomForestModel.load(tmp_path / "m1.json").trees) == 15
    code, out, _ = run(capsys, *args, "--model-out", tmp_path / "m3.json")
    assert code == 0 and "confusion" in out


def test_evaluate_reproduces_train_report(capsys, tmp_path):
    rated_sp_graph(3, 80).save_snapshot(tmp_path / "g.json")
    _, trained, _ = run_json(capsys, "train", "--snapshot", tmp_path / "g.json", "--n-trees", "10",
                             "--model-out", tmp_path / "m.json")
    code, evaluated, _ = run_json(capsys, "evaluate", "--snapshot", tmp_path / "g.json",
                                  "--model", tmp_path / "m.json")
    assert code == 0 and evaluated == trained
    code, _, _ = run(capsys, "evaluate", "--snapshot", tmp_path / "g.json", "--model", tmp_path / "x.json")
    assert code == 1
    GeosocialGraph().save_snapshot(tmp_path / "empty.json")
    code, _, err = run(capsys, "evaluate", "--snapshot", tmp_path / "empty.json", "--model", tmp_path / "m.json")
    assert code == 3 and "evaluate" in err


def test_train_needs_two_reviewed_sps(capsys, tmp_path):
    rated_sp_graph(1, 1).save_snapshot(tmp_path / "g.json")
    code, _, err = run(capsys, "train", "--snapshot", tmp_path / "g.json", "--model-out", tmp_path / "m.json")
    assert code == 3 and "labeled" in err


def test_train_missing_snapshot(capsys, tmp_path):
    code, _, _ = run(capsys, "train", "--snapshot", tmp_path / "x.json", "--model-out", tmp_path / "m.json")
    assert code == 1


def test_train_synthetic_2000_sps(capsys, tmp_path):
    rated_sp_graph(2, 2000).save_snapshot(tmp_path / "g.json")
    code, report, _ = run_json(capsys, "train", "--snapshot", tmp_path / "g.json",
                               "--model-out", tmp_path / "m.json")
    assert code == 0
    assert report["accuracy"] >= 0.9


QUERY = ["--user", "u", "--keywords", "sushi", "--lat", "36.1", "--lon", "-115.1", "--radius-m", "100"]


def test_query_four_node(capsys, four_node_files):
    snap, model = four_node_files
    code, rows, _ = run_json(capsys, "query", "--snapshot", snap, "--model", model, *QUERY, "--k", "2")
    assert code == 0
    assert [r["business_id"] for r in rows] == ["s1", "s2"]
    assert [r["path_cost"] for r in rows] == pytest.approx([0.3, 0.5], abs=1e-12)
    assert rows[0]["path"] == ["u", "f", "s1"]
    assert all(r["rank"] == 3 for r in rows)
    code, out, _ = run(capsys, "query", "--snapshot", snap, "--model", model, *QUERY, "--k", "2",
                       "--show-raw")
    assert code == 0 and "raw order" in out and "u > f > s1" in out


def test_query_show_raw_json(capsys, four_node_files):
    snap, model = four_node_files
    code, doc, _ = run_json(capsys, "query", "--snapshot", snap, "--model", model, *QUERY, "--k", "2",
                            "--show-raw")
    assert set(doc) == {"optimized", "raw"}
    assert [r["sp"] for r in doc["raw"]] == [2, 3]


def test_query_k_zero_and_unknown_user(capsys, four_node_files):
    snap, model = four_node_files
    code, rows, _ = run_json(capsys, "query", "--snapshot", snap, "--model", model, *QUERY, "--k", "0")
    assert (code, rows) == (0, [])
    bad = ["--user", "nobody"] + QUERY[2:]
    code, _, err = run(capsys, "query", "--snapshot", snap, "--model", model, *bad, "--k", "2")
    assert code == 4 and "nobody" in err


def test_query_missing_arguments(capsys, four_node_files):
    snap, model = four_node_files
    code, _, err = run(capsys, "query", "--snapshot", snap, "--model", model, "--user", "u")
    assert code == 2 and "--keywords" in err


def test_query_batch_preserves_input_order(capsys, tmp_path, four_node_files):
    snap, model = four_node_files
    lines = [
        {"user": "u", "keywords": ["sushi"], "lat": 36.1, "lon": -115.1, "radius_m": 100, "k": k}
        for k in (2, 1, 0, 2)
    ]
    lines.append({"user": "ghost", "keywords": "sushi", "lat": 36.1, "lon": -115.1, "radius_m": 100, "k": 1})
    batch = tmp_path / "q.jsonl"
    batch.write_text("\n".join(json.dumps(x) for x in lines) + "\n")
    code, out, _ = run_json(capsys, "query", "--snapshot", snap, "--model", model, "--batch", batch,
                            "--workers", "3")
    assert code == 4
    assert [len(r) for r in out[:4]] == [2, 1, 0, 2]
    assert "error" in out[4]
    code, single, _ = run_json(capsys, "query", "--snapshot", snap, "--model", model, *QUERY, "--k", "2")
    assert out[0] == single


def test_stats_empty_graph(capsys, tmp_path):
    GeosocialGraph().save_snapshot(tmp_path / "g.json")
    code, stats, _ = run_json(capsys, "stats", "--snapshot", tmp_path / "g.json")
    assert code == 0
    assert stats == {"nodes": 0, "users": 0, "sps": 0, "edges": 0, "friendship_edges": 0,
                     "review_edges": 0, "reviews_total": 0,
                     "count_stats": {"min": 0, "max": 0, "average": 0.0, "n": 0}}


def test_stats_match_ingest_report(capsys, tmp_path, tiny_paths):
    _, report, _ = run_json(capsys, "ingest", *tiny_paths, "--out", tmp_path / "g.json")
    code, out, _ = run(capsys, "--format", "json", "stats", "--snapshot", tmp_path / "g.json")
    stats = json.loads(out)
    assert json.dumps(stats, sort_keys=True, indent=2) + "\n" == out
    assert stats["users"] == report["users_added"]
    assert stats["sps"] == report["sps_added"]
    assert stats["friendship_edges"] == report["friendship_edges"]
    assert stats["review_edges"] == report["review_edges"]
    assert stats["reviews_total"] == report["reviews_total"]
    assert stats["count_stats"] == {"min": 0, "max": 3, "average": 5 / 3, "n": 3}
    code, out, _ = run(capsys, "stats", "--snapshot", tmp_path / "g.json")
    assert "count_average" in out


def test_stats_corrupt_snapshot(capsys, tmp_path):
    (tmp_path / "g.json").write_text('{"version": "99"}')
    code, _, _ = run(capsys, "stats", "--snapshot", tmp_path / "g.json")
    assert code == 3


def test_synth_then_ingest(capsys, tmp_path):
    code, paths, _ = run_json(capsys, "--seed", "9", "synth", "--out-dir", tmp_path,
                              "--businesses", "20", "--users", "30", "--reviews", "200")
    assert code == 0
    code, report, _ = run_json(capsys, "ingest", paths["business"], paths["user"], paths["review"],
                               "--out", tmp_path / "g.json")
    assert report["reviews_total"] == 200


# configuration -------------------------------------------------------------


def test_config_file_parsing():
    values = parse_config_text("# comment\nbeta = 3\nalpha-scope = global  # trailing\nstrict_ingest = yes\n")
    assert values == {"beta": 3.0, "alpha_scope": "global", "strict_ingest": True}
    with pytest.raises(ConfigError):
        parse_config_text("colour = red\n")
    with pytest.raises(ConfigError):
        parse_config_text("beta\n")
    with pytest.raises(ConfigError):
        parse_config_text("n_trees = many\n")
    with pytest.raises(ConfigError):
        AppConfig(split_ratio=1.5)


@pytest.mark.parametrize(
    "key, file_value, flag_value, default",
    [("beta", 3.0, 4.0, 5.0), ("gamma", 1.0, 3.0, 2.0), ("seed", 7, 8, 42), ("n_trees", 10, 20, 100),
     ("split_ratio", 0.7, 0.6, 0.8), ("alpha_scope", "global", "candidates", "candidates"),
     ("strict_ingest", True, False, False)],
)
def test_config_precedence(tmp_path, key, file_value, flag_value, default):
    path = tmp_path / "app.conf"
    path.write_text(f"{key} = {str(file_value).lower()}\n")
    assert getattr(load_config(), key) == default
    assert getattr(load_config(path), key) == file_value
    assert getattr(load_config(path, {key: flag_value}), key) == flag_value


def test_cli_config_precedence(capsys, tmp_path, four_node):
    g = four_node
    g.set_sp_stats(2, 10, 4.0)
    g.set_sp_stats(3, 30, 4.0)
    snap, model = tmp_path / "g.json", tmp_path / "m.json"
    g.save_snapshot(snap)
    RandomForestModel.constant(3).save(model)
    conf = tmp_path / "app.conf"
    conf.write_text("beta = 2\n")
    base = ["query", "--snapshot", snap, "--model", model, *QUERY, "--k", "2"]
    alphas = lambda rows: sorted(r["alpha"] for r in rows)  # noqa: E731
    _, rows, _ = run_json(capsys, *base)
    assert alphas(rows) == pytest.approx([0.8, 1.2])
    _, rows, _ = run_json(capsys, "--config", conf, *base)
    assert alphas(rows) == pytest.approx([0.5, 1.5])
    _, rows, _ = run_json(capsys, "--config", conf, *base, "--beta", "4")
    assert alphas(rows) == pytest.approx([0.75, 1.25])


def test_cli_rejects_unknown_config_key(capsys, tmp_path):
    conf = tmp_path / "app.conf"
    conf.write_text("mystery = 1\n")
    GeosocialGraph().save_snapshot(tmp_path / "g.json")
    code, _, err = run(capsys, "--config", conf, "stats", "--snapshot", tmp_path / "g.json")
    assert code == 2 and "mystery" in err

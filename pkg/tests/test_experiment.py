import csv
import io

import pytest

from crowdmine import ConfigInvalid, OracleConfig, construct_itemset_taxonomy, realize_database
from crowdmine.experiment import (CSV_COLUMNS, ExperimentConfig, halving_bound, miner_bounds,
                                  records_to_csv, run_experiment)
from crowdmine.generators import gen_cycling
from crowdmine.io import save_database, save_taxonomy
from crowdmine.miners import MINERS

ALL = list(MINERS)


def test_chain7_all_miners_agree():
    cfg = ExperimentConfig(taxonomies=["chain:7"], predicates=[{"seeds": list(range(5))}], miners=ALL)
    records = run_experiment(cfg)
    assert len(records) == 5 * len(ALL)
    assert all(r.status == "ok" for r in records), [r for r in records if r.status != "ok"]
    for r in records:
        assert r.nodes == 8 and r.width == 1 and r.solutions == 9


def test_flat3_exhaustive():
    cfg = ExperimentConfig(taxonomies=["flat:3"], predicates=[{"seed": 1}], miners=["exhaustive"])
    (rec,) = run_experiment(cfg)
    assert rec.crowd_queries == 8 and rec.status == "ok"


def test_cycling_alg1_bound(tmp_path):
    save_taxonomy(tmp_path / "c.json", gen_cycling())
    cfg = ExperimentConfig(taxonomies=[{"file": "c.json"}], predicates=[{"mfis": [[3], [4]]}],
                           miners=["alg1"], base_dir=tmp_path)
    (rec,) = run_experiment(cfg)
    assert rec.bounds["alg1"] == 4 * (2 + 1) + (2 + 1)
    # the leading-order form |I| * (|M_F| + |M_I|) holds here as well
    assert rec.crowd_queries <= 4 * (2 + 1) and rec.status == "ok"
    assert (rec.mfis, rec.miis) == (2, 1)


def test_database_source(tmp_path):
    tax = gen_cycling()
    save_taxonomy(tmp_path / "c.json", tax)
    db = realize_database(construct_itemset_taxonomy(tax), [(3,), (4,)], OracleConfig.parse("1/3"))
    save_database(tmp_path / "db.json", db, "1/3", taxonomy_ref="c.json")
    cfg = ExperimentConfig(taxonomies=["c.json"], predicates=[{"database": "db.json"}],
                           miners=["halving", "chain"], base_dir=tmp_path)
    recs = run_experiment(cfg)
    assert [r.status for r in recs] == ["ok", "ok"]
    assert all((r.mfis, r.miis) == (2, 1) for r in recs)


def test_sweep_zero_violations():
    tax = [f"random:{n}:{p}:{s}" for n in range(1, 7) for p in (0.2, 0.5) for s in range(3)]
    cfg = ExperimentConfig(taxonomies=tax, predicates=[{"seeds": [0, 1]}], miners=ALL, workers=4)
    recs = run_experiment(cfg)
    assert not [r for r in recs if r.failed]
    # records come back in config order even with workers
    assert [r.taxonomy for r in recs[:len(ALL)]] == [tax[0]] * len(ALL)
    assert [r.miner for r in recs[:len(ALL)]] == ALL


def test_halving_skipped_when_too_large():
    cfg = ExperimentConfig(taxonomies=["flat:6"], predicates=[{"seed": 0}], miners=["halving", "chain"])
    halving, chain = run_experiment(cfg)
    assert halving.status == "skipped" and halving.solutions is None
    assert chain.status == "ok"


def test_budget_partial():
    cfg = ExperimentConfig(taxonomies=["flat:4"], predicates=[{"seed": 3}], miners=["greedy"], budget=2)
    (rec,) = run_experiment(cfg)
    assert rec.crowd_queries <= 2 and rec.status == "ok"


def test_k_config():
    cfg = ExperimentConfig(taxonomies=["cycling"], predicates=[{"mfis": [[3], [2]]}],
                           miners=["exhaustive", "greedy"], k=1)
    assert all(r.status == "ok" and r.nodes == 5 for r in run_experiment(cfg))
    with pytest.raises(ConfigInvalid):
        ExperimentConfig(taxonomies=["cycling"], predicates=[{"seed": 0}], miners=["alg1"], k=1)


@pytest.mark.parametrize("bad", [
    dict(miners=[]),
    dict(miners=["nope"]),
    dict(threshold="3/2"),
    dict(node_cap=0),
    dict(budget=-3),
    dict(format="xml"),
    dict(taxonomies=[]),
    dict(predicates=[]),
])
def test_invalid(bad):
    base = dict(taxonomies=["chain:2"], predicates=[{"seed": 0}], miners=["exhaustive"])
    base.update(bad)
    with pytest.raises(ConfigInvalid):
        ExperimentConfig(**base)


def test_unknown_keys():
    with pytest.raises(ConfigInvalid):
        ExperimentConfig.from_dict({"taxonomies": ["chain:2"], "predicates": [{"seed": 0}],
                                    "miners": ["exhaustive"], "colour": "red"})


def test_bad_entries():
    with pytest.raises(ConfigInvalid):
        run_experiment(ExperimentConfig(taxonomies=["tree:9"], predicates=[{"seed": 0}], miners=["exhaustive"]))
    with pytest.raises(ConfigInvalid):
        run_experiment(ExperimentConfig(taxonomies=["chain:2"], predicates=[{"what": 0}], miners=["exhaustive"]))


def test_csv_projection():
    cfg = ExperimentConfig(taxonomies=["chain:3"], predicates=[{"seed": 0}], miners=["chain", "alg1:minimal"])
    text = records_to_csv(run_experiment(cfg))
    rows = list(csv.DictReader(io.StringIO(text)))
    assert list(rows[0]) == CSV_COLUMNS
    assert [r["miner"] for r in rows] == ["chain", "alg1:minimal"]
    assert rows[1]["bound"].startswith("alg1=")


def test_bound_formulas():
    asserted, reported = miner_bounds("alg1:minimal", 4, 2, 1, nodes=8)
    assert asserted == {"alg1": 15, "alg1_minimal": 1 + 5 * 2}
    asserted, reported = miner_bounds("alg1:dual", 4, 2, 1, nodes=8)
    assert asserted == {"alg1": 15} and reported == {"alg1_dual": 3 + 5 * 1 + 4}
    assert miner_bounds("chain", 7, 1, 1, nodes=8, width=1, longest_chain=8)[0] == {"chain": 4}
    assert halving_bound(1) == 0 and halving_bound(9) == 12


def test_predicate_not_fitting_taxonomy():
    # {3} and {4} are comparable on a chain, so these MFIs are not an antichain there
    cfg = ExperimentConfig(taxonomies=["cycling", "chain:7"], predicates=[{"mfis": [[3], [4]]}],
                           miners=["exhaustive"])
    with pytest.raises(ConfigInvalid, match="chain:7"):
        run_experiment(cfg)

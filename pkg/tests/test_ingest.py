
import numpy as np
import pytest

from gargaml.ingest import (IBM_COLUMNS, AccountIndex, aggregate_labels, find_ibm_file,
                            load_pattern_file, load_transactions, normalise_pattern,
                            write_node_labels)

HEADER = ("Timestamp,From Bank,Account,To Bank,Account,Amount Received,Receiving Currency,"
          "Amount Paid,Payment Currency,Payment Format,Is Laundering\n")


def row(src, dst, flag, amount=10):
    return (f"2022/09/01 00:00,{src[0]},{src[1]},{dst[0]},{dst[1]},{amount},US Dollar,"
            f"{amount},US Dollar,ACH,{flag}\n")


A, B, C, D = ("1", "A1"), ("1", "B1"), ("2", "C1"), ("3", "D1")


@pytest.fixture
def ibm(tmp_path):
    lines = [HEADER, row(A, B, 1), row(B, C, 1), row(A, C, 0), row(C, D, 0), row(D, D, 1),
             "garbage line\n", row(A, B, 0, 20)]
    p = tmp_path / "HI-Test_Trans.csv"
    p.write_text("".join(lines))
    pat = tmp_path / "HI-Test_Patterns.txt"
    pat.write_text("BEGIN LAUNDERING ATTEMPT - FAN-OUT\n" + row(A, B, 1)
                   + "END LAUNDERING ATTEMPT - FAN-OUT\n\n"
                   + "BEGIN LAUNDERING ATTEMPT - CYCLE:  Max 3 hops\n" + row(B, C, 1)
                   + "END LAUNDERING ATTEMPT - CYCLE\n")
    return p, pat


def test_load_ibm_rows(ibm):
    res = load_transactions(ibm[0], IBM_COLUMNS)
    assert len(res.records) == 6
    assert res.skipped and res.skipped[0][0] == 7
    assert res.index["1:A1"] == 0
    assert res.node_count == 4
    g = res.graph()
    assert g.edges == {(0, 1), (1, 2), (0, 2), (2, 3)}  # self-transfer dropped, parallel merged


def test_propensity_counts_both_directions(ibm):
    res = load_transactions(ibm[0], IBM_COLUMNS)
    labels = aggregate_labels(res.records, (0.1, 0.5, 0.9), res.index)
    # A: sent 3 (1 flagged); B: 3 (2 flagged); C: 3 (1 flagged); D: 2 (1 flagged, self once)
    np.testing.assert_allclose(labels.propensity, [1 / 3, 2 / 3, 1 / 3, 1 / 2])
    assert labels.binary[0.5].tolist() == [False, True, False, False]
    assert labels.positive_rate(0.1) == 1.0
    rates = [labels.positive_rate(c) for c in labels.cutoffs]
    assert rates == sorted(rates, reverse=True)


def test_patterns_attached(ibm):
    lookup = load_pattern_file(ibm[1])
    assert set(lookup.values()) == {"fan-out", "cycle"}
    res = load_transactions(ibm[0], IBM_COLUMNS, patterns=lookup)
    pats = [r.pattern for r in res.records if r.is_laundering]
    assert pats == ["fan-out", "cycle", "not-classified"]
    labels = aggregate_labels(res.records, (0.2,), res.index)
    assert labels.per_pattern_binary[("fan-out", 0.2)].tolist() == [True, True, False, False]


def test_custom_columns(tmp_path):
    p = tmp_path / "t.tsv"
    p.write_text("x\ty\tlab\tpat\nu\tv\t1\tFan_In\nv\tw\t0\t\n")
    res = load_transactions(p, {"src_account": 0, "dst_account": 1, "is_laundering": 2,
                                "pattern": 3}, delimiter="\t")
    assert [r.pattern for r in res.records] == ["fan-in", None]


def test_missing_column_map_key(tmp_path):
    with pytest.raises(KeyError):
        load_transactions(tmp_path / "x.csv", {"src_account": 0, "dst_account": 1})


def test_bad_cutoff():
    with pytest.raises(ValueError):
        aggregate_labels([], (0.0,))


def test_normalise_pattern():
    assert normalise_pattern(" Scatter-Gather ") == "scatter-gather"
    assert normalise_pattern("NOT CLASSIFIED") == "not-classified"
    with pytest.raises(ValueError):
        normalise_pattern("teleport")


def test_index_roundtrip(tmp_path):
    idx = AccountIndex(["x", "y", "z"])
    idx.save(tmp_path / "a.csv")
    back = AccountIndex.load(tmp_path / "a.csv")
    assert [back.name(i) for i in range(3)] == ["x", "y", "z"]


def test_write_node_labels(tmp_path, ibm):
    res = load_transactions(ibm[0], IBM_COLUMNS)
    labels = aggregate_labels(res.records, (0.1, 0.5), res.index)
    write_node_labels(tmp_path / "l.csv", labels)
    lines = (tmp_path / "l.csv").read_text().splitlines()
    assert lines[0] == "node_id,propensity,label_0.1,label_0.5"
    assert lines[2].endswith(",1,1")


def test_find_ibm_file(tmp_path):
    (tmp_path / "HI-Small_Trans.csv").write_text("")
    assert find_ibm_file("HI-Small_Trans.csv", [tmp_path / "nope", tmp_path]) == \
        tmp_path / "HI-Small_Trans.csv"
    assert find_ibm_file("missing.csv", [tmp_path]) is None

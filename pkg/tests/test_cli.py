import json
import subprocess
import sys

import pytest

from helpers import diamond, triangle
from qosroute.cli import ParseError, format_graph, main, parse_flows, parse_graph
from qosroute.netgraph import Link, NetworkGraph
from qosroute.topogen import GridSpec, grid


@pytest.fixture
def files(tmp_path):
    def write(graph, flows):
        gp, fp = tmp_path / "g.txt", tmp_path / "f.txt"
        gp.write_text(graph if isinstance(graph, str) else format_graph(graph))
        fp.write_text(flows)
        return str(gp), str(fp)

    return write


def run(capsys, *argv):
    try:
        code = main(list(argv))
    except SystemExit as exc:  # argparse usage errors
        code = exc.code
    out, err = capsys.readouterr()
    return code, out, err


# -- formats -----------------------------------------------------------------


def test_graph_round_trip():
    for g in (triangle(), diamond(), grid(GridSpec(3, capacity=7, cost=2))):
        assert parse_graph(format_graph(g)) == g


def test_graph_comments_and_blank_lines():
    g = parse_graph("# header\nnodes 2\n\n1 2 10 3  # arc\n")
    assert g == NetworkGraph(2, (Link(1, 2, 10, 3),))


@pytest.mark.parametrize(
    "text",
    [
        "",
        "1 2 10 3\n",
        "nodes 2\n1 2 10\n",
        "nodes 2\n1 2 x 3\n",
        "nodes 2\n1 5 10 3\n",
        "nodes 2\n1 2 -4 3\n",
        "nodes 2\n1 2 10 3\n1 2 11 3\n",
    ],
)
def test_graph_parse_errors(text):
    with pytest.raises(ParseError):
        parse_graph(text)


def test_flow_parsing():
    f = parse_flows("1 3 10\n2 4 20 50\n")
    assert f.flows == ((1, 3, 10), (2, 4, 20)) and f.limits == (0, 50)
    for bad in ("", "1 3\n", "1 1 10\n", "1 3 0\n", "1 3 a\n"):
        with pytest.raises(ParseError):
            parse_flows(bad)


# -- gen -----------------------------------------------------------------------


@pytest.mark.parametrize("topology,size,links", [("fat-tree", 10, 1500), ("grid", 6, 120)])
def test_gen_line_counts(capsys, topology, size, links):
    code, out, err = run(capsys, "gen", topology, str(size))
    assert code == 0
    lines = out.splitlines()
    assert len(lines) == links + 1
    assert parse_graph(out).n_links == links
    assert f"links {links}" in err


def test_gen_to_file(capsys, tmp_path):
    path = tmp_path / "ft.txt"
    code, out, _ = run(capsys, "gen", "fat-tree", "4", "-o", str(path))
    assert code == 0 and out.strip() == "nodes 36 links 96 undirected 48"
    assert parse_graph(path.read_text()).n_nodes == 36


def test_gen_rejects_odd_k(capsys):
    code, _, err = run(capsys, "gen", "fat-tree", "3")
    assert code == 1 and "error" in err


# -- route ---------------------------------------------------------------------


def test_route_grid_text(capsys, files):
    g, f = files(grid(GridSpec(6)), "1 36 10\n")
    code, out, err = run(capsys, "route", "lcp", g, f)
    assert code == 0
    lines = out.splitlines()
    assert lines[:3] == ["app lcp", "status optimal", "objective 10/1 10"]
    assert lines[3].startswith("flow 1 1->36 demand 10: nodes 1 ")
    assert lines[-1].startswith("stats nodes_explored=")
    assert "wall_time_ms=" in err


def test_route_mrc_decimal(capsys, files):
    g, f = files(diamond(), "1 4 10\n1 4 10\n")
    code, out, _ = run(capsys, "route", "mrc", g, f)
    assert code == 0 and "objective 990/1 990" in out
    assert out.count("\nflow ") == 2


def test_route_json_lines(capsys, files):
    g, f = files(diamond(), "1 4 10\n1 4 10\n")
    code, out, _ = run(capsys, "route", "mrc", g, f, "--format", "json-lines")
    assert code == 0
    rows = [json.loads(line) for line in out.splitlines()]
    assert [r["flow"] for r in rows] == [1, 2]
    assert {tuple(r["nodes"]) for r in rows} == {(1, 2, 4), (1, 3, 4)}
    assert all(r["objective"] == "990/1" and r["status"] == "optimal" for r in rows)


def test_route_no_route_exit(capsys, files):
    g, f = files("nodes 3\n1 2 100 1\n2 3 5 1\n", "1 3 10 50\n")
    code, out, _ = run(capsys, "route", "lccc", g, f)
    assert code == 2 and "status no-route" in out and "objective" not in out


def test_route_no_route_json(capsys, files):
    g, f = files("nodes 2\n", "1 2 10\n")
    code, out, _ = run(capsys, "route", "lcp", g, f, "--format", "json-lines")
    row = json.loads(out)
    assert code == 2 and row["nodes"] is None and row["objective"] is None


def test_route_timeout_exit_codes(capsys, files):
    from qosroute.topogen import FatTreeSpec, fat_tree

    ft = fat_tree(FatTreeSpec(6)).graph
    flows = "46 68 231\n46 66 304\n47 65 287\n47 94 348\n48 91 352\n48 92 218\n"
    g, f = files(ft, flows)
    code, out, _ = run(capsys, "route", "mrc", g, f, "--time-limit-ms", "1")
    assert code in (0, 3)
    assert ("status timeout" in out) and ((code == 3) == ("objective" not in out))
    code, out, _ = run(capsys, "route", "mrc", g, f, "--time-limit-ms", "200")
    assert code == 0 and "status timeout" in out and "objective" in out


def test_route_input_errors(capsys, files, tmp_path):
    g, f = files(triangle(), "1 9 10\n")
    assert run(capsys, "route", "lcp", g, f)[0] == 1
    assert run(capsys, "route", "lcp", str(tmp_path / "missing"), f)[0] == 1
    g, f = files("nodes 3\n1 2\n", "1 3 1\n")
    assert run(capsys, "route", "lcp", g, f)[0] == 1
    assert run(capsys, "route", "fastest", g, f)[0] == 1
    g, f = files(triangle(), "1 3 1\n")
    assert run(capsys, "route", "lccc", g, f, "--time-limit-ms", "0")[0] == 1


# -- verify --------------------------------------------------------------------


def test_verify_match(capsys, files):
    g, f = files(triangle(), "1 3 1\n")
    code, out, _ = run(capsys, "verify", "lcp", g, f)
    assert code == 0 and out.strip() == "MATCH solver=1/1 oracle=1/1"


def test_verify_match_mrc_two_flows(capsys, files):
    g, f = files(diamond(), "1 4 10\n2 4 20\n")
    code, out, _ = run(capsys, "verify", "mrc", g, f)
    assert code == 0 and out.startswith("MATCH")


def test_verify_unsat_match(capsys, files):
    g, f = files("nodes 2\n2 1 5 1\n", "1 2 1\n")
    code, out, _ = run(capsys, "verify", "lcp", g, f)
    assert code == 0 and out.strip() == "MATCH solver=none oracle=none"


def test_verify_too_large(capsys, files):
    g, f = files(grid(GridSpec(6)), "1 36 10\n")
    code, _, err = run(capsys, "verify", "lcp", g, f)
    assert code == 1 and "too large" in err


# -- bench ---------------------------------------------------------------------


def test_bench_csv_to_stdout(capsys):
    code, out, _ = run(capsys, "bench", "lcp", "grid", "--sizes", "2", "3", "--repetitions", "1")
    assert code == 0
    lines = out.splitlines()
    assert len(lines) == 3 and lines[0].startswith("app,")


def test_bench_summary_with_out(capsys, tmp_path):
    path = tmp_path / "b.csv"
    code, out, _ = run(capsys, "bench", "lcp", "grid", "--sizes", "2", "--repetitions", "2", "-o", str(path))
    assert code == 0 and path.read_text().count("\n") == 3
    assert out.strip()


def test_bench_empty_sizes(capsys):
    assert run(capsys, "bench", "lcp", "grid", "--sizes")[0] == 1


# -- determinism ---------------------------------------------------------------


def test_route_stdout_is_byte_identical(files):
    g, f = files(grid(GridSpec(5)), "1 25 10\n5 21 10\n")
    cmd = [sys.executable, "-m", "qosroute.cli", "route", "mrc", g, f]
    a = subprocess.run(cmd, capture_output=True, check=True)
    b = subprocess.run(cmd, capture_output=True, check=True)
    assert a.stdout == b.stdout and a.stdout.startswith(b"app mrc\nstatus optimal\n")

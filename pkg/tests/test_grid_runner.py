from functools import partial

from managers.verify_manager import evaluate_case
from models.verify_report import FAIL, PASS
from workers.grid_runner import GridRunner, run_grid


def square(case):
    if case["x"] < 0:
        raise ValueError("negative input")
    return PASS, {"value": case["x"] ** 2}


def test_results_keep_case_order(qapp):
    cases = [{"x": x} for x in range(5)]
    results = run_grid(square, cases)
    assert [r.index for r in results] == list(range(5))
    assert [r.payload["value"] for r in results] == [0, 1, 4, 9, 16]
    assert all(r.status == PASS for r in results)


def test_exceptions_become_failures(qapp):
    results = run_grid(square, [{"x": 2}, {"x": -1}])
    assert results[1].status == FAIL
    assert "ValueError" in results[1].payload["error"]
    assert results[1].to_json()["config"] == {"x": -1}


def test_empty_grid(qapp):
    assert run_grid(square, []) == []


def test_process_pool_matches_serial(qapp):
    cases = [
        {"p": 11, "b": 1, "d": 2, "k": 1, "u": u, "literal_trivial": False, "M": 10}
        for u in range(4)
    ]
    task = partial(evaluate_case, "dk-vs-delta")
    serial = run_grid(task, cases, 1)
    pooled = run_grid(task, cases, 2)
    assert [r.to_json() for r in pooled] == [r.to_json() for r in serial]


def test_stop_before_start(qapp):
    runner = GridRunner(square, [{"x": 1}, {"x": 2}])
    collected = []
    runner.batch_complete.connect(collected.extend)
    runner.stop()
    runner.run()
    assert collected == []
    assert runner.results == [None, None]

import math

import pytest

import gplan


def gripper_task(balls=2):
    return gplan.load_task(gplan.builtin_domain("gripper"), gplan.generate_problem("gripper", balls, 0, "g"))


def test_domains_and_generation():
    assert gplan.domains() == ["blocksworld", "gripper", "logistics", "visitall"]
    a = gplan.generate_problem("blocksworld", 5, 3)
    assert a == gplan.generate_problem("blocksworld", 5, 3)
    task = gplan.load_task(gplan.builtin_domain("blocksworld"), a)
    assert len(task.objects) == 5


def test_successors_follow_add_and_delete_lists():
    task = gripper_task()
    succ = dict(task.successors(task.initial))
    assert "(move robot1 rooma roomb)" in succ
    after = set(succ["(move robot1 rooma roomb)"])
    assert "(at-robby robot1 roomb)" in after
    assert "(at-robby robot1 rooma)" not in after
    assert not task.is_goal(task.initial)


def test_solve_and_validate():
    task = gripper_task()
    r = gplan.solve(task)
    assert r["status"] == "solved"
    assert gplan.validate(task, r["plan"])["valid"]
    bad = gplan.validate(task, r["plan"][:-1])
    assert not bad["valid"]
    assert bad["reason"] == "goal-unsatisfied"
    assert bad["step"] == len(r["plan"]) - 1
    assert gplan.trajectory(task, r["plan"]).startswith("TRAJ1")


def test_wl_vocabulary_and_oov():
    tasks = [gripper_task(1), gripper_task(2)]
    plans = [gplan.solve(t)["plan"] for t in tasks]
    vocab = gplan.collect_vocabulary(tasks, plans, k=2)
    v = vocab.embed(tasks[1], tasks[1].initial)
    assert v.shape == (vocab.size + 1,)
    assert v[-1] == 0
    big = gripper_task(6)
    w = vocab.embed(big, big.initial)
    assert w.shape == v.shape
    again = gplan.Vocabulary.load(vocab.save())
    assert again.size == vocab.size


def test_coverage_formatting():
    c = gplan.coverage([[True, True], [False, False], [True, False]])
    assert c["formatted"] == "0.50 ± 0.41"
    assert math.isclose(c["std"], math.sqrt(1 / 6))
    assert gplan.coverage([[], [], []])["formatted"] == "n/a"


def test_config_and_errors():
    assert gplan.parse_config("train.k = 3 # c\n") == {"train.k": "3"}
    with pytest.raises(gplan.GplanError):
        gplan.parse_config("model = tree\n")
    with pytest.raises(RuntimeError):
        gplan.generate_problem("sokoban", 3, 0)


def test_parameter_count_formula():
    assert gplan.recurrent_parameter_count(587) == 321 * 587 + 707904


def test_oracle_pipeline(tmp_path):
    r = gplan.run_pipeline("gripper", tmp_path, model="oracle", seeds=[0],
                           config="gen.verify = false\n", jobs=1, splits=["interpolation"])
    assert r["label"] == "wl-oracle-delta"
    assert r["splits"]["interpolation"]["formatted"] == "1.00 ± 0.00"

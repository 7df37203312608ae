import pytest

from danebench import config
from danebench.errors import ConfigError
from danebench.sim import Access, Algorithm

BASE = """
# small problem
problem.d = 20
problem.n_total = 1000
problem.machines = 4
problem.seed = 2
eval.holdout_size = 500
run.a.algorithm = DaneSvrg   # trailing comment
run.a.T = 2n
run.b.algorithm = DaneSgd
run.b.schedule.c = 0.25
run.b.access_mode = FixedSubset(0.5)
"""


def test_parse_and_build():
    exp = config.build(config.parse_text(BASE))
    assert exp.problem.synthetic.d == 20 and exp.problem.synthetic.seed == 2
    assert exp.problem.holdout_size == 500 and exp.machines == 4
    assert [r.name for r in exp.runs] == ["a", "b"]
    a, b = exp.runs
    assert a.config.algorithm is Algorithm.DANE_SVRG and a.config.steps(250) == 500
    assert b.config.schedule.c == 0.25 and b.config.schedule.a0 == 0.05
    assert b.config.access_mode.kind is Access.FIXED_SUBSET
    assert a.config.seed == 2


def test_keys_are_case_insensitive():
    exp = config.build(config.parse_text("PROBLEM.D = 3\nproblem.n_total=8\nRun.X.Algorithm = Sgd\n"))
    assert exp.problem.synthetic.d == 3 and exp.runs[0].name == "x"


@pytest.mark.parametrize("text,key", [
    ("problem.dim = 3\nrun.a.algorithm = Sgd", "problem.dim"),
    ("run.a.algorithm = Sgd\nrun.a.steps = 3", "run.a.steps"),
    ("optim.x = 1\nrun.a.algorithm = Sgd", "optim.x"),
    ("problem.d = three\nrun.a.algorithm = Sgd", "problem.d"),
    ("problem.machines = 7\nrun.a.algorithm = Sgd", "problem.machines"),
    ("run.a.T = 2n", "run.a.algorithm"),
    ("run.a.algorithm = DaneSgd\nrun.a.T = zz", "run.a.t"),
    ("run.a.algorithm = DaneSgd\nrun.a.eta = 0", "run.a.eta"),
    ("run.a.algorithm = DaneSgd\nrun.a.schedule.a0 = -1", "run.a.schedule.a0"),
    ("run.a.algorithm = DaneSgd\nrun.a.schedule.kind = Cosine", "run.a.schedule.kind"),
    ("run.a.algorithm = DaneSgd\nrun.a.access_mode = FixedSubset(2)", "run.a.access_mode"),
    ("run.a.algorithm = Sgd\nrun.a.equalize_budget = maybe", "run.a.equalize_budget"),
    ("problem.d = 0\nrun.a.algorithm = Sgd", "problem.d"),
])
def test_errors_name_the_key(text, key):
    with pytest.raises(ConfigError) as info:
        config.build(config.parse_text(text))
    assert info.value.key == key


def test_empty_run_list():
    with pytest.raises(ConfigError, match="no run blocks"):
        config.build(config.parse_text("problem.d = 3\n"))


def test_malformed_line_and_duplicates():
    with pytest.raises(ConfigError):
        config.parse_text("problem.d 3\n")
    with pytest.raises(ConfigError):
        config.parse_text("problem.d = 3\nproblem.d = 4\n")


def test_env_overrides(tmp_path):
    path = tmp_path / "c.cfg"
    path.write_text(BASE)
    env = {"DANEBENCH_PROBLEM__SEED": "9", "DANEBENCH_RUN__A__T": "1n", "DANEBENCH_BACKEND": "python"}
    exp = config.load(path, environ=env)
    assert exp.problem.synthetic.seed == 9 and exp.runs[0].config.steps(250) == 250


def test_seed_override_wins(tmp_path):
    path = tmp_path / "c.cfg"
    path.write_text(BASE + "run.a.seed = 5\n")
    exp = config.load(path, seed_override=11, environ={})
    assert exp.problem.synthetic.seed == 11 and all(r.config.seed == 11 for r in exp.runs)


def test_equalize_budget_halves_svrg_steps():
    exp = config.build(config.parse_text(BASE + "run.a.equalize_budget = true\n"))
    assert exp.runs[0].config.steps(250) == 250 and exp.runs[0].equalize_budget


def test_missing_file():
    with pytest.raises(ConfigError):
        config.load("/nonexistent/file.cfg")


def test_resolved_block_lists_every_default():
    exp = config.build(config.parse_text(BASE))
    r = exp.runs[1].resolved(250)
    assert r["schedule"] == {"kind": "DaneExpDecay", "a0": 0.05, "decay": 1e-3, "c": 0.25}
    assert r["access_mode"] == "FixedSubset(0.5)" and r["T_steps"] == 250

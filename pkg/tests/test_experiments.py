"""Tests for scenario configs, the runner and the command line."""

from pathlib import Path

import pytest

from zombie_cache_sim.cache.models import IndexingMode, ReplacementPolicy
from zombie_cache_sim.exceptions import ConfigError
from zombie_cache_sim.experiments import cli
from zombie_cache_sim.experiments.flushflush import channel_open, run_flushflush_probe
from zombie_cache_sim.experiments.registry import ExperimentRegistry
from zombie_cache_sim.experiments.runner import ScenarioRunner, execute_scenario, exit_status
from zombie_cache_sim.experiments.scenario import (
    ExperimentKind,
    Scenario,
    build_hierarchy_config,
    build_sim,
    parse_config,
)
from zombie_cache_sim.experiments.state import ScenarioStatus
from zombie_cache_sim.experiments.tasks import run_benign
from zombie_cache_sim.hierarchy.models import MIB, MitigationMode
from zombie_cache_sim.model.workloads import benign_suite

BATCH = """
# small batch covering every output kind
[aes_base]
experiment = aes
mode = baseline
aes.encryptions = 4
aes.p0_step = 128

[aes_zbm]
experiment = aes
mode = zbm
aes.encryptions = 4
aes.p0_step = 128

[rsa_watch]
experiment = rsa
mode = zbm
rsa.bits = 64
zbd = true
run_log = true

[sweep]
experiment = model-sweep
mode = zbm
model.step = 0.5
model.accesses = 200

[ff]
experiment = flushflush
"""


def _read(path: Path) -> str:
    return path.read_bytes().decode("utf-8")


# Config parsing


@pytest.mark.unit
def test_parse_empty_config(settings):
    """Comments and blank lines alone give no scenarios."""
    assert parse_config("", settings=settings) == []
    assert parse_config("# nothing\n\n   \n", settings=settings) == []


@pytest.mark.unit
def test_parse_batch(settings):
    """Sections become scenarios in file order."""
    scenarios = parse_config(BATCH, settings=settings)

    assert [s.name for s in scenarios] == ["aes_base", "aes_zbm", "rsa_watch", "sweep", "ff"]
    rsa = scenarios[2]
    assert rsa.experiment == ExperimentKind.RSA
    assert rsa.mode == MitigationMode.ZBM
    assert rsa.zbd and rsa.run_log
    assert rsa.option("rsa.bits") == 64
    assert scenarios[4].mode == MitigationMode.BASELINE
    assert scenarios[0].line == 3


@pytest.mark.unit
def test_paper_scale_defaults(settings):
    """Full scale selects the 16 MiB keyed-random SRRIP L3."""
    (scenario,) = parse_config("[a]\nexperiment = rsa\n", paper_scale=True, settings=settings)
    l3 = build_hierarchy_config(scenario, settings).l3

    assert l3.num_sets * l3.ways * 64 == 16 * MIB
    assert l3.ways == 16
    assert l3.replacement_policy == ReplacementPolicy.SRRIP
    assert l3.hit_latency == 24
    assert l3.indexing == IndexingMode.KEYED_RANDOM


@pytest.mark.unit
def test_desk_scale_and_overrides(settings):
    """Overrides replace the desk-scale defaults."""
    text = "[a]\nexperiment = aes\nl3.size = 262144\nl3.policy = lru\ncores = 4\nmem_latency = 200\n"
    (scenario,) = parse_config(text, settings=settings)
    config = build_hierarchy_config(scenario, settings)

    assert config.l3.num_sets * config.l3.ways * 64 == 256 * 1024
    assert config.l3.replacement_policy == ReplacementPolicy.LRU
    assert config.num_cores == 4
    assert config.miss_latency == 240

    default = build_hierarchy_config(parse_config("[b]\nexperiment = aes\n", settings=settings)[0], settings)
    assert default.l3.num_sets * default.l3.ways * 64 == settings.DESK_L3_SIZE_BYTES


@pytest.mark.unit
def test_seed_defaults(settings):
    """Scenario seed beats the default seed, which beats settings."""
    text = "[a]\nexperiment = covert\n\n[b]\nexperiment = covert\nseed = 0x10\n"

    a, b = parse_config(text, settings=settings)
    assert (a.seed, b.seed) == (2019, 16)

    a, b = parse_config(text, default_seed=5, settings=settings)
    assert (a.seed, b.seed) == (5, 16)


@pytest.mark.unit
def test_comments_need_leading_whitespace(settings):
    """A # inside a value is kept; a # after whitespace starts a comment."""
    text = "[a] # first\nexperiment = aes   # attack\noutput_dir = out#1\n#mode = zbm\n  # indented\n"

    (scenario,) = parse_config(text, settings=settings)
    assert scenario.experiment == ExperimentKind.AES
    assert scenario.output_dir == "out#1"
    assert scenario.mode == MitigationMode.BASELINE


@pytest.mark.unit
def test_spy_schedule_keys(settings):
    """spy.wait_interval and spy.rounds are accepted as overrides."""
    (scenario,) = parse_config("[a]\nexperiment = covert\nspy.wait_interval = 2\nspy.rounds = 8\n", settings=settings)
    assert scenario.option("spy.wait_interval") == 2
    assert scenario.option("spy.rounds") == 8


@pytest.mark.unit
@pytest.mark.parametrize(
    "text,line",
    [
        ("[a]\nexperiment = aes\nmode = xyz\n", 3),
        ("[a]\nexperiment = aes\n[a]\nexperiment = rsa\n", 3),
        ("[a]\nexperiment = aes\nmode zbm\n", 3),
        ("[a]\nexperiment = aes\ncolour = red\n", 3),
        ("mode = zbm\n[a]\nexperiment = aes\n", 1),
        ("[a]\nexperiment = aes\nmode =\n", 3),
        ("[a]\nexperiment = aes\nmode = zbm\nmode = zbmx\n", 4),
        ("\n[a]\nexperiment = rsa\nspy.core = 0\n", 4),
        ("[a]\nexperiment = rsa\nvictim.core = 1\nmode = zbm\n", 3),
        ("[a]\nexperiment = aes\n\naes.k0 = 300\n", 4),
        ("[a]\nexperiment = model-sweep\nmodel.step = 0.3\n", 3),
        ("[a]\nexperiment = rsa\nspy.wait_interval = 0\n", 3),
        ("[a]\nmode = zbm\n", 1),
        ("[a]\nexperiment = quantum\n", 2),
        ("[a]\nexperiment = aes\nseed = -1\n", 3),
        ("[a]\nexperiment = aes\naes.encryptions = many\n", 3),
        ("[a b]\nexperiment = aes\n", 1),
        ("[a\nexperiment = aes\n", 1),
    ],
)
def test_config_errors_name_the_line(settings, text, line):
    """Every rejected config reports the offending line."""
    with pytest.raises(ConfigError) as excinfo:
        parse_config(text, settings=settings)
    assert excinfo.value.line == line
    assert str(excinfo.value).startswith(f"line {line}: ")


@pytest.mark.unit
def test_detector_only_when_enabled(settings):
    """zbd attaches a detection table sized to the machine."""
    plain, watched = parse_config(
        "[a]\nexperiment = rsa\n[b]\nexperiment = rsa\nzbd = yes\ncores = 4\nadt.threshold = 3\n", settings=settings
    )
    assert build_sim(plain, settings).detector is None
    detector = build_sim(watched, settings).detector
    assert detector.num_cores == 4
    assert detector.alarm_threshold == 3
    assert detector.decay_period == settings.DESK_ADT_DECAY_CYCLES


@pytest.mark.unit
def test_registry_lists_every_kind():
    registry = ExperimentRegistry()
    assert set(registry.list_experiments()) == {kind.value for kind in ExperimentKind}


# Flush+Flush probe


@pytest.mark.unit
def test_flushflush_probe_table(make_sim):
    """Latency per flush setting and line state."""
    rows = run_flushflush_probe(make_sim(MitigationMode.ZBM))
    table = {(setting, state): latency for setting, state, latency in rows}

    assert table == {
        ("variable", "resident"): 30,
        ("variable", "absent"): 10,
        ("variable", "invalid_zombie"): 10,
        ("variable", "valid_zombie"): 30,
        ("constant", "resident"): 30,
        ("constant", "absent"): 30,
        ("constant", "invalid_zombie"): 30,
        ("constant", "valid_zombie"): 30,
        ("zombie_gated", "resident"): 30,
        ("zombie_gated", "absent"): 10,
        ("zombie_gated", "invalid_zombie"): 30,
        ("zombie_gated", "valid_zombie"): 30,
    }
    assert channel_open(rows, "variable")
    assert not channel_open(rows, "constant")


# Execution


@pytest.mark.unit
def test_execute_scenario_captures_failure(settings):
    """Exceptions become a FAILED result with the error text."""
    scenario = Scenario(name="short", experiment=ExperimentKind.RSA, overrides={"rsa.bits": 4})
    result = execute_scenario(scenario, settings)

    assert result.status == ScenarioStatus.FAILED
    assert result.error_message.startswith("InvalidInputError: ")
    assert result.headline == result.error_message
    assert result.to_dict()["status"] == "failed"


@pytest.mark.integration
def test_benign_metrics_keep_every_workload(settings):
    """Cycle gauges of each workload survive the ones run after it."""
    (scenario,) = parse_config("[b]\nexperiment = benign\nmode = zbm\n", settings=settings)
    output = run_benign(scenario, settings)

    names = [row[0] for row in output.rows]
    assert names == list(benign_suite(8))
    for name in names:
        assert f'core_cycles{{mode="zbm",workload="{name}",core="0"}}' in output.metrics_text


@pytest.mark.integration
def test_runner_writes_outputs(settings, tmp_path):
    """Each scenario writes its table, extras and metrics; the batch writes a summary."""
    results = ScenarioRunner(out_dir=str(tmp_path), settings=settings).run(parse_config(BATCH, settings=settings))

    assert [r.status for r in results] == [ScenarioStatus.COMPLETED] * 5
    assert exit_status(results) == 0

    assert _read(tmp_path / "aes_base.csv").startswith("p0,line,count,normalized\n")
    assert _read(tmp_path / "aes_base.svg").startswith("<?xml")
    assert _read(tmp_path / "rsa_watch.csv").startswith("cycle,probe\n")
    assert _read(tmp_path / "rsa_watch_alarms.csv").startswith("cycle,spy_core,victim_core\n")
    assert _read(tmp_path / "rsa_watch_runlog.csv").startswith("cycle,core,op,addr,outcome,latency\n")
    assert not (tmp_path / "aes_base_alarms.csv").exists()
    assert not (tmp_path / "ff.svg").exists()

    sweep = _read(tmp_path / "sweep.csv").splitlines()
    assert sweep[0] == "F,R,l3lat_norm,slowdown"
    assert len(sweep) == 1 + 9
    assert "sim/model=1.0000" in results[3].headline

    assert "flushes_total" in _read(tmp_path / "rsa_watch.prom")

    summary = _read(tmp_path / "summary.csv").splitlines()
    assert summary[0] == "scenario,status,headline"
    assert [line.split(",")[0] for line in summary[1:]] == ["aes_base", "aes_zbm", "rsa_watch", "sweep", "ff"]
    assert summary[5] == "ff,completed,variable=open constant=closed zombie_gated=open"


@pytest.mark.integration
def test_aes_heatmaps_share_batch_peak(settings, tmp_path):
    """AES heat maps of one batch are normalized to a common maximum."""
    scenarios = parse_config(BATCH, settings=settings)[:2]
    results = ScenarioRunner(out_dir=str(tmp_path), settings=settings).run(scenarios)

    base, zbm = (r.output.report for r in results)
    assert max(max(row) for row in base.heatmap) == 1.0
    assert max(max(row) for row in zbm.heatmap) == 0.25
    normalized = [float(line.split(",")[3]) for line in _read(tmp_path / "aes_zbm.csv").splitlines()[1:]]
    assert max(normalized) == 0.25


@pytest.mark.integration
def test_rerun_is_byte_identical(settings, tmp_path):
    """Same config and seed reproduce every file exactly."""
    scenarios = parse_config(BATCH, settings=settings)
    ScenarioRunner(out_dir=str(tmp_path / "one"), settings=settings).run(scenarios)
    ScenarioRunner(out_dir=str(tmp_path / "two"), settings=settings).run(scenarios)

    first = sorted(p.name for p in (tmp_path / "one").iterdir())
    assert first == sorted(p.name for p in (tmp_path / "two").iterdir())
    for name in first:
        assert (tmp_path / "one" / name).read_bytes() == (tmp_path / "two" / name).read_bytes(), name


@pytest.mark.integration
def test_failed_scenario_does_not_stop_batch(settings, tmp_path):
    """One failing scenario leaves its siblings intact and sets exit status 1."""
    text = "[ok]\nexperiment = flushflush\n\n[bad]\nexperiment = rsa\nrsa.bits = 4\n\n[also_ok]\nexperiment = flushflush\n"
    results = ScenarioRunner(out_dir=str(tmp_path), settings=settings).run(parse_config(text, settings=settings))

    assert [r.status for r in results] == [ScenarioStatus.COMPLETED, ScenarioStatus.FAILED, ScenarioStatus.COMPLETED]
    assert exit_status(results) == 1
    assert not (tmp_path / "bad.csv").exists()
    assert (tmp_path / "also_ok.csv").exists()
    summary = _read(tmp_path / "summary.csv")
    assert "bad,failed," in summary
    assert "InvalidInputError" in summary


@pytest.mark.integration
def test_write_failure_marks_scenario_failed(settings, tmp_path, mocker):
    """An I/O error while writing fails the scenario."""
    mocker.patch("zombie_cache_sim.experiments.runner.write_text", side_effect=OSError("disk full"))
    results = ScenarioRunner(out_dir=str(tmp_path), settings=settings).run(
        parse_config("[ff]\nexperiment = flushflush\n", settings=settings)
    )

    assert results[0].status == ScenarioStatus.FAILED
    assert results[0].error_message == "OSError: disk full"
    assert exit_status(results) == 1


@pytest.mark.integration
def test_scenario_output_dir(settings, tmp_path):
    """output_dir redirects one scenario's files."""
    text = f"[ff]\nexperiment = flushflush\noutput_dir = {tmp_path / 'elsewhere'}\n"
    ScenarioRunner(out_dir=str(tmp_path / "main"), settings=settings).run(parse_config(text, settings=settings))

    assert (tmp_path / "elsewhere" / "ff.csv").exists()
    assert (tmp_path / "main" / "summary.csv").exists()


@pytest.mark.integration
@pytest.mark.slow
def test_parallel_matches_sequential(settings, tmp_path):
    """Worker processes produce the same files as a sequential run."""
    scenarios = parse_config(BATCH, settings=settings)
    ScenarioRunner(out_dir=str(tmp_path / "seq"), parallelism=1, settings=settings).run(scenarios)
    ScenarioRunner(out_dir=str(tmp_path / "par"), parallelism=3, settings=settings).run(scenarios)

    for path in (tmp_path / "seq").iterdir():
        assert path.read_bytes() == (tmp_path / "par" / path.name).read_bytes(), path.name


# Command line


@pytest.mark.integration
def test_cli_run(tmp_path, capsys):
    """run prints the summary and exits 0."""
    config = tmp_path / "batch.cfg"
    config.write_text("[ff]\nexperiment = flushflush\n\n[cc]\nexperiment = covert\ncovert.bits = 32\n")

    code = cli.main(["run", str(config), "--out", str(tmp_path / "out"), "--seed", "7"])

    out = capsys.readouterr().out
    assert code == 0
    assert out.startswith("scenario,status,headline\n")
    assert "cc,completed,accuracy=1.0000" in out
    assert (tmp_path / "out" / "cc.csv").exists()


@pytest.mark.unit
def test_cli_bad_config(tmp_path, capsys):
    """A config error exits 1 and names the line."""
    config = tmp_path / "bad.cfg"
    config.write_text("[a]\nexperiment = aes\nmode = xyz\n")

    assert cli.main(["run", str(config), "--out", str(tmp_path)]) == 1
    assert "line 3" in capsys.readouterr().err


@pytest.mark.unit
def test_cli_missing_config(tmp_path, capsys):
    assert cli.main(["run", str(tmp_path / "absent.cfg")]) == 1
    assert "Cannot read config" in capsys.readouterr().err


@pytest.mark.unit
def test_cli_rejects_bad_parallelism(tmp_path):
    config = tmp_path / "batch.cfg"
    config.write_text("")
    assert cli.main(["run", str(config), "--parallel", "0"]) == 1


@pytest.mark.unit
def test_cli_rejects_out_of_range_seed(tmp_path):
    """argparse exits on a seed that does not fit in 64 bits."""
    with pytest.raises(SystemExit):
        cli.main(["run", str(tmp_path / "x.cfg"), "--seed", str(2**64)])

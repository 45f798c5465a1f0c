import pytest

from hemotrain import lr_for_epoch, schedule_table
from hemotrain.cli import main


def test_default_decay_boundaries():
    assert lr_for_epoch(1) == 1e-3
    assert lr_for_epoch(7) == 1e-3
    assert lr_for_epoch(8) == 1e-4
    assert lr_for_epoch(14) == 1e-4
    assert lr_for_epoch(15) == 1e-5
    assert lr_for_epoch(21) == 1e-5
    assert lr_for_epoch(22) == 1e-6
    assert lr_for_epoch(25) == 1e-6


def test_full_25_epoch_table():
    table = schedule_table(25)
    values = {lr for _, lr in table}
    assert values == {1e-3, 1e-4, 1e-5, 1e-6}
    changes = [epoch for (epoch, lr), (_, prev) in zip(table[1:], table) if lr != prev]
    assert changes == [8, 15, 22]


def test_custom_step_and_gamma():
    assert lr_for_epoch(1, base_lr=0.01, step=3, gamma=0.5) == 0.01
    assert lr_for_epoch(4, base_lr=0.01, step=3, gamma=0.5) == 0.005
    assert lr_for_epoch(7, base_lr=0.01, step=3, gamma=0.5) == 0.0025


def test_epoch_zero_rejected():
    with pytest.raises(ValueError):
        lr_for_epoch(0)


def test_cli_dry_run_logs_exact_values(capsys):
    code = main(["train", "--arch", "SqueezeNet 1.1", "--epochs", "25",
                 "--lr-dry-run"])
    assert code == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert lines[0] == "epoch,lr"
    logged = {int(e): float(v) for e, v in (ln.split(",") for ln in lines[1:])}
    assert len(logged) == 25
    for epoch, expected in ((1, 1e-3), (8, 1e-4), (15, 1e-5), (22, 1e-6)):
        assert logged[epoch] == expected



import pytest


from satotate.cli import RunConfig, load_config, main, resolve_table


def run(args, capsys):
    code = main(args)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_expand_eta_golden(capsys):
    code, out, _ = run(["expand", "--eta", "1:4,5:4", "--n", "9", "--label", "5.4.a.a"], capsys)
    assert code == 0
    lines = out.strip().splitlines()
    assert lines[0] == "label=5.4.a.a k=4 N=5"
    assert lines[1:] == ["1 1", "2 -4", "3 2", "4 8", "5 -5", "6 -8", "7 6", "8 0", "9 -23"]


def test_expand_delta_prefix(capsys):
    code, out, _ = run(["expand", "--eta", "1:24", "--n", "3"], capsys)
    assert code == 0
    assert out.strip().splitlines()[1:] == ["1 1", "2 -24", "3 252"]


def test_expand_usage_error(capsys):
    code, _, err = run(["expand", "--n", "9"], capsys)
    assert code == 2
    assert "expand requires" in err


def test_measure_sign_product_flags_misprint(capsys, tmp_path):
    code, out, _ = run(
        ["--out", str(tmp_path), "measure", "--sign-product", "2,2", "--target", "1e-7"],
        capsys,
    )
    assert code == 0
    assert "0.523761" in out
    assert "0.534" in out  # the misprint flag must be present


def test_measure_rect_cross_check(capsys, tmp_path):
    code, out, _ = run(
        ["--out", str(tmp_path), "measure", "--rect=-1,1,-1,1", "--target", "1e-7"],
        capsys,
    )
    assert code == 0
    assert "0.370878297" in out


def test_measure_grid_bracket(capsys, tmp_path):
    code, out, _ = run(
        ["--out", str(tmp_path), "measure", "--halfplane-u", "--grid-bracket", "--m", "16,32"],
        capsys,
    )
    assert code == 0
    assert "m=  16" in out and "m=  32" in out


def test_measure_requires_region(capsys, tmp_path):
    code, _, err = run(["--out", str(tmp_path), "measure"], capsys)
    assert code == 2


def test_measure_budget_exit_code(capsys, tmp_path):
    code, _, err = run(
        ["--out", str(tmp_path), "measure", "--disk", "--target", "1e-8"], capsys
    )
    assert code == 4
    assert "budget" in err.lower()


def test_figures_outputs(tmp_path, capsys):
    code, out, _ = run(
        ["--out", str(tmp_path), "figures", "--f", "1.12.a.a", "--fp", "5.4.a.a", "--x-max", "2000"],
        capsys,
    )
    assert code == 0
    for name in ("figure1.csv", "figure1.svg", "figure2.csv", "figure2.svg"):
        assert (tmp_path / name).exists(), name
    csv1 = (tmp_path / "figure1.csv").read_text().splitlines()
    header = csv1[0].split(",")
    assert header[:2] == ["x", "pi_x"]
    assert "emp_1_1" in header and "emp_2_2" in header and "emp_1_2" in header
    svg = (tmp_path / "figure1.svg").read_text()
    assert svg.count("<polyline") == 3
    assert "stroke-dasharray" in svg  # dashed prediction lines


def test_figures_deterministic_reruns(tmp_path, capsys):
    args = ["--out", str(tmp_path), "figures", "--f", "1.12.a.a", "--fp", "5.4.a.a", "--x-max", "1500"]
    assert main(args) == 0
    capsys.readouterr()
    first = {n: (tmp_path / n).read_bytes() for n in ("figure1.csv", "figure2.csv", "figure1.svg")}
    assert main(args) == 0
    capsys.readouterr()
    for name, blob in first.items():
        assert (tmp_path / name).read_bytes() == blob, name


def test_figures_empty_checkpoints_usage_error(tmp_path, capsys):
    code, _, err = run(
        ["--out", str(tmp_path), "figures", "--f", "1.12.a.a", "--fp", "5.4.a.a", "--x-max", "1"],
        capsys,
    )
    assert code == 2


def test_fetch_requires_label(tmp_path, capsys):
    code, _, err = run(["--cache-dir", str(tmp_path), "fetch", "--n", "10"], capsys)
    assert code == 2


def test_density_command(tmp_path, capsys):
    code, out, _ = run(
        [
            "--out", str(tmp_path), "density",
            "--f", "1.12.a.a", "--fp", "5.4.a.a", "--mn", "1,1;2,2", "--x-max", "2000",
        ],
        capsys,
    )
    assert code == 0
    assert (tmp_path / "density_1_1.csv").exists()
    assert (tmp_path / "density_2_2.csv").exists()
    header = (tmp_path / "density_1_1.csv").read_text().splitlines()[0]
    assert header == "x,pi_x,count_pos,count_neg,count_zero,emp_density,pred_density,envelope_ratio"


def test_dominance_command(tmp_path, capsys):
    code, out, _ = run(
        [
            "--out", str(tmp_path), "dominance",
            "--f", "1.12.a.a", "--fp", "5.4.a.a", "--mn", "1,1", "--x-max", "2000",
        ],
        capsys,
    )
    assert code == 0
    assert (tmp_path / "dominance_1_1.csv").exists()


def test_first_sign_command(tmp_path, capsys):
    code, out, _ = run(
        [
            "--out", str(tmp_path), "first-sign",
            "--f", "5.4.a.a", "--fp", "6.6.a.a", "--mn", "1,1", "--x-max", "500", "--d", "0.6",
        ],
        capsys,
    )
    assert code == 0
    assert "AllPrimes: first sign change at p = 2" in out
    assert "ExcludeLevelPrimes: first sign change at p = 11" in out
    assert "theoretical bound" in out


def test_bracket_command(tmp_path, capsys):
    code, out, _ = run(
        ["--out", str(tmp_path), "bracket", "--sign-product", "2,2", "--m", "16,32"],
        capsys,
    )
    assert code == 0
    assert list(tmp_path.glob("bracket_*.csv"))


def test_fetch_seed_and_cache(tmp_path, capsys, coeff_server):
    server, base = coeff_server
    cache = tmp_path / "cache"
    code, out, _ = run(
        ["--cache-dir", str(cache), "--out", str(tmp_path), "fetch", "--n", "25", "--seed-bundled"],
        capsys,
    )
    assert code == 0
    assert (cache / "5.4.a.a.txt").exists()
    # resolve_table must hit the warm cache, never the network
    table = resolve_table("6.6.a.a", 25, cache_dir=cache, base_url="http://127.0.0.1:9")
    assert table.bound == 25
    assert len(server.hits) == 0


def test_fetch_unknown_label_exit_code(tmp_path, capsys, coeff_server):
    server, base = coeff_server
    cfg_file = tmp_path / "cfg.txt"
    cfg_file.write_text(f"base_url = {base}\nout = {tmp_path}\n")
    code, _, err = run(
        ["--config", str(cfg_file), "--cache-dir", str(tmp_path / "c"),
         "fetch", "--label", "9.9.z.z", "--n", "10"],
        capsys,
    )
    assert code == 3


def test_config_file_parsing(tmp_path):
    cfg_file = tmp_path / "run.cfg"
    cfg_file.write_text(
        "# comment\nf = 1.12.a.a\nfp = 5.4.a.a\nx_max = 5000\nmn = 1,1;2,3\npng = off\n"
    )
    cfg = load_config(cfg_file)
    assert cfg.f == "1.12.a.a"
    assert cfg.x_max == 5000
    assert cfg.mn == ((1, 1), (2, 3))
    assert cfg.png is False


def test_config_rejects_unknown_key(tmp_path):
    cfg_file = tmp_path / "run.cfg"
    cfg_file.write_text("bogus = 1\n")
    from satotate.errors import ConfigError

    with pytest.raises(ConfigError):
        load_config(cfg_file)


def test_runconfig_validation(tmp_path):
    from satotate.errors import ConfigError

    cfg = RunConfig(x_max=10**9, out=str(tmp_path))
    with pytest.raises(ConfigError):
        cfg.validate()

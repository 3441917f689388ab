#!/usr/bin/env python3
"""End-to-end checks of the command-line binary (path passed as argv[1])."""

import os
import shutil
import subprocess
import sys
import tempfile

CLI = sys.argv[1]
FAST = [
    "-O", "iterations=2", "-O", "oracle_episodes=150", "-O", "episodes_per_entry=50",
    "-O", "dqn.hidden=16,16", "-O", "dqn.batch_size=16", "-O", "dqn.buffer_capacity=2000",
]


def run(*args, expect=0):
    proc = subprocess.run([CLI, *args], capture_output=True, text=True)
    if proc.returncode != expect:
        raise AssertionError(
            f"{' '.join(args)} -> exit {proc.returncode} (wanted {expect})\n"
            f"stdout: {proc.stdout}\nstderr: {proc.stderr}")
    return proc


def metrics_rows(path):
    with open(path) as fh:
        lines = [line for line in fh.read().splitlines() if line]
    assert lines[0].startswith("iteration,cumulative_episodes,exploitability"), lines[0]
    return lines[1:]


def main():
    work = tempfile.mkdtemp(prefix="cpsro_cli_")
    try:
        # Override mechanics: exactly as many metric rows as iterations.
        out = os.path.join(work, "leduc2")
        run("run", "--preset", "leduc-default", "--out", out, *FAST)
        assert len(metrics_rows(os.path.join(out, "metrics.csv"))) == 2

        # Determinism: same preset and seed, byte-identical metrics.
        out_a, out_b = os.path.join(work, "det_a"), os.path.join(work, "det_b")
        for out_dir in (out_a, out_b):
            run("run", "--preset", "kuhn-accept", "--out", out_dir, *FAST, "-O", "seed=5")
        with open(os.path.join(out_a, "metrics.csv"), "rb") as fh:
            bytes_a = fh.read()
        with open(os.path.join(out_b, "metrics.csv"), "rb") as fh:
            bytes_b = fh.read()
        assert bytes_a == bytes_b

        # maze-fixture smoke with the conflux variant.
        maze_out = os.path.join(work, "maze")
        run("run", "--preset", "maze-fixture", "--variant", "conflux",
            "--out", maze_out, "-O", "iterations=2", "-O", "oracle_episodes=120",
            "-O", "approx_exploit_episodes=120", "-O", "episodes_per_entry=30",
            "-O", "conflux.routing_episodes=120", "-O", "conflux.distill_episodes=120",
            "-O", "conflux.start_iteration=2", "-O", "conflux.pool_size=2",
            "-O", "conflux.selection_states=64", "-O", "h2h_episodes=50")
        assert os.path.exists(os.path.join(maze_out, "metrics.csv"))

        # Usage errors: unknown override key is named; exit code 1.
        proc = run("run", "--preset", "kuhn-accept", "--out", os.path.join(work, "bad"),
                   "-O", "dqn.bogus=1", expect=1)
        assert "dqn.bogus" in proc.stderr

        # eval exact on the kuhn checkpoint prints a non-negative value and
        # appends a report row.
        proc = run("eval", "--ckpt", out_a, "--mode", "exact")
        value = float(proc.stdout.split("exploitability", 1)[1].split()[0])
        assert value >= -1e-9
        assert os.path.exists(os.path.join(out_a, "report.csv"))

        # eval approx works on the imperfect-recall-style path too (kuhn is
        # fine; budget kept tiny).
        run("eval", "--ckpt", out_a, "--mode", "approx", "--episodes", "100")

        # eval h2h emits the per-iteration utility table.
        run("eval", "--ckpt", out_a, "--mode", "h2h", "--episodes", "50")
        rows = [line for line in open(os.path.join(out_a, "h2h.csv")).read().splitlines() if line]
        assert rows[0] == "iteration,player,kind,utility,stderr,utility_report_scale"
        assert len(rows) >= 3  # 2 iterations x 2 players

        # plot: three series from three csvs, deterministic, then failure paths.
        svg = os.path.join(work, "curves.svg")
        run("plot", os.path.join(out_a, "metrics.csv"), os.path.join(out_b, "metrics.csv"),
            os.path.join(out, "metrics.csv"), "--out", svg)
        body = open(svg).read()
        assert body.count("<polyline") == 3
        empty = os.path.join(work, "empty.csv")
        with open(empty, "w") as fh:
            fh.write("iteration,cumulative_episodes,exploitability,br_utility_p0,"
                     "br_utility_p1,wallclock_s\n")
        missing_svg = os.path.join(work, "missing.svg")
        run("plot", empty, "--out", missing_svg, expect=1)
        assert not os.path.exists(missing_svg)

        # eval on a directory without a checkpoint: usage error.
        run("eval", "--ckpt", work, "--mode", "exact", expect=1)
        print("cli e2e: all checks passed")
    finally:
        shutil.rmtree(work, ignore_errors=True)


if __name__ == "__main__":
    main()

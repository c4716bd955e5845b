"""
End-to-end comparisons on the shipped experiment configs. All of them run
full horizons over ten seeds and are marked slow.
"""

from pathlib import Path

import numpy as np
import pytest

from cli import load_config, sweep_noise
from cli import runner
from solvers import frank_wolfe

CONFIG_DIR = Path(__file__).resolve().parent.parent / "files" / "configs"
SEEDS = range(10)


def _run(config, algorithm, seed, *overrides):
    run_config = config.with_overrides([f"solver.algorithm={algorithm}", f"solver.seed={seed}", *overrides])
    result, _ = runner.solve(run_config)
    return result


@pytest.mark.slow
class TestMatrixCompletionComparison:

    def test_sbfw_beats_sfw_and_sfw_stalls(self):
        config = load_config(CONFIG_DIR / "matcomp_synth.cfg")
        wins = 0
        stall = []
        for seed in SEEDS:
            sbfw = _run(config, "sbfw", seed, "output.record_every=500")
            sfw = _run(config, "sfw", seed, "output.record_every=500")
            wins += sbfw.final.normalized_error < sfw.final.normalized_error
            by_iter = {r.iteration: r.normalized_error for r in sfw.records}
            stall.append((by_iter[1500] - by_iter[2000]) / by_iter[1500])
        assert wins >= 8
        # relative SFW improvement over the last 500 iterations
        assert np.mean(stall) < 0.05

    def test_sbfw_is_less_sensitive_to_noise(self):
        config = load_config(CONFIG_DIR / "matcomp_synth.cfg")
        rows = sweep_noise(config, grid=(0.3, 0.5, 0.7, 0.9))
        for row in rows:
            assert abs(row.err_sbfw - row.err0_sbfw) <= abs(row.err_sfw - row.err0_sfw)


@pytest.mark.slow
class TestPolicyEvaluationComparison:

    def test_scfw_beats_sbfw_and_stays_feasible(self, monkeypatch):
        config = load_config(CONFIG_DIR / "policy_eval.cfg", ["problem.data_seed=0"])
        radius = config.problem["alpha"]
        # solve the reference once, outside the recorded steps
        runner.build_problem(config)
        norms = []
        step = frank_wolfe.convex_step

        def recording_step(x, s, eta):
            x_next = step(x, s, eta)
            norms.append(float(np.abs(x_next).sum()))
            return x_next

        monkeypatch.setattr(frank_wolfe, "convex_step", recording_step)
        wins = 0
        for seed in SEEDS:
            scfw = _run(config, "scfw", seed)
            sbfw = _run(config, "sbfw", seed)
            wins += scfw.final.normalized_error < sbfw.final.normalized_error
        assert wins >= 8
        assert len(norms) == 2 * len(SEEDS) * config.solver["horizon"]
        assert max(norms) <= radius + 1e-9

"""Round-robin of the NID agent against every baseline bot over several seeds."""

from __future__ import annotations

import argparse
import statistics
from dataclasses import dataclass
from pathlib import Path

from nidkit.roshambo import BOTS, MODEL_BLOCKS, NidAgent, make_bot, run_match


@dataclass
class TournamentConfig:
    rounds: int = 3000
    seeds: int = 10
    burn_in: int = 200
    floor: float = 0.01
    max_k: int = 3
    log_dir: Path | None = None


def run(cfg: TournamentConfig) -> list[str]:
    col = 5 + MODEL_BLOCKS.index("Automaton")
    lines = [f"{'opponent':<16} {'mean':>8} {'after burn-in':>14} {'min':>8} {'automaton>0.9 by':>17}"]
    for name in sorted(BOTS):
        means, tails, hits = [], [], []
        for seed in range(cfg.seeds):
            res = run_match(NidAgent(floor=cfg.floor, max_k=cfg.max_k), make_bot(name), cfg.rounds, seed)
            means.append(res.mean_score)
            tails.append(res.mean_after(cfg.burn_in))
            hits.append(next((r[0] for r in res.log if float(r[col]) > 0.9), None))
            if cfg.log_dir:
                cfg.log_dir.mkdir(parents=True, exist_ok=True)
                (cfg.log_dir / f"{name}-{seed}.csv").write_text(res.to_csv())
        seen = [h for h in hits if h is not None]
        when = f"{max(seen)} ({len(seen)}/{cfg.seeds})" if seen else "never"
        lines.append(f"{name:<16} {statistics.mean(means):+8.3f} {statistics.mean(tails):+14.3f} "
                     f"{min(tails):+8.3f} {when:>17}")
    return lines


def main() -> None:
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--rounds", type=int, default=3000)
    p.add_argument("--seeds", type=int, default=10)
    p.add_argument("--burn-in", type=int, default=200)
    p.add_argument("--floor", type=float, default=0.01)
    p.add_argument("--max-k", type=int, default=3)
    p.add_argument("--log-dir", type=Path)
    a = p.parse_args()
    cfg = TournamentConfig(a.rounds, a.seeds, a.burn_in, a.floor, a.max_k, a.log_dir)
    print("\n".join(run(cfg)))


if __name__ == "__main__":
    main()

#!/usr/bin/env python3
"""Train one synthetic-blobs model under inner-product manipulation, three ways.

Plain averaging with no Byzantine clients sets the baseline. The same
averaging server then faces f attackers sending -tau times the honest mean
(at tau=5 and f=2 of 12 clients the average cancels to zero, so training
stalls at chance level), and finally trimmed mean behind nearest-neighbor
mixing faces the identical attack and shrugs it off.
"""

from __future__ import annotations

import argparse
import json

from robustfl import expand_grid, parse_config, run_single


def config_text(args: argparse.Namespace, aggregator: str, f: int, pre_aggregators: tuple[str, ...]) -> str:
    raw = {
        "benchmark_config": {
            "training_algorithm": {"name": "DSGD", "parameters": {}},
            "nb_steps": args.steps,
            "nb_training_seeds": 1,
            "nb_honest_clients": args.clients,
            "f": [f],
            "data_distribution": [{"name": "iid", "distribution_parameter": [0.0]}],
        },
        "model": {
            "name": "linear",
            "dataset_name": "blobs",
            "loss": "NLLLoss",
            "learning_rate": 0.05,
        },
        "aggregator": [{"name": aggregator, "parameters": {}}],
        "pre_aggregators": [{"name": name, "parameters": {}} for name in pre_aggregators],
        "honest_clients": {"momentum": 0.9, "weight_decay": 0.0, "batch_size": 25},
        "attack": [{"name": "InnerProductManipulation", "parameters": {"tau": args.tau}}],
        "evaluation_and_results": {
            "evaluation_delta": args.delta,
            "store_per_client_metrics": False,
            "results_directory": "./unused",
        },
    }
    return json.dumps(raw)


def accuracies(args: argparse.Namespace, aggregator: str, f: int, pre_aggregators=()) -> tuple[float, float]:
    cfg = parse_config(config_text(args, aggregator, f, pre_aggregators))
    (key,) = expand_grid(cfg)
    series = run_single(cfg, key).test_accuracy
    return max(series), series[-1]


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--steps", type=int, default=500)
    parser.add_argument("--clients", type=int, default=10, help="number of honest clients")
    parser.add_argument("--f", type=int, default=2, help="number of Byzantine clients")
    parser.add_argument("--tau", type=float, default=5.0, help="attack strength, a multiple of the honest mean")
    parser.add_argument("--delta", type=int, default=25, help="steps between evaluations")
    args = parser.parse_args()

    attack = f"IPM tau={args.tau:g}"
    rows = [
        ("none", "Average", 0, ()),
        (attack, "Average", args.f, ()),
        (attack, "TrMean + NNM", args.f, ("NNM",)),
    ]
    print(f"{'attack':<14}{'server':<16}{'f':>3}  {'best':>6}  {'final':>6}")
    for label, server, f, pre in rows:
        best, final = accuracies(args, server.split(" ")[0], f, pre)
        print(f"{label:<14}{server:<16}{f:>3}  {best:6.3f}  {final:6.3f}")


if __name__ == "__main__":
    main()

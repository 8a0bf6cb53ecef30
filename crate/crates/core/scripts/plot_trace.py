"""Plot per-round reward and cumulative UB regret from a run's trace.csv.

usage: python plot_trace.py out/desk/trace.csv [figure.png]
"""
import csv
import sys
from collections import defaultdict

import matplotlib.pyplot as plt


def main():
    path = sys.argv[1]
    dest = sys.argv[2] if len(sys.argv) > 2 else None
    reward = defaultdict(list)
    regret = defaultdict(list)
    with open(path, newline="") as f:
        for row in csv.DictReader(f):
            reward[row["algorithm"]].append(float(row["reward"]))
            regret[row["algorithm"]].append(float(row["ub_regret_cum"]))

    fig, (a, b) = plt.subplots(1, 2, figsize=(11, 4))
    for name, ys in reward.items():
        k = max(1, len(ys) // 50)
        smooth = [sum(ys[i:i + k]) / len(ys[i:i + k]) for i in range(0, len(ys), k)]
        a.plot([i * k for i in range(len(smooth))], smooth, label=name)
        b.plot(regret[name], label=name)
    a.set(xlabel="round", ylabel="utility gain", title="reward (block mean)")
    b.set(xlabel="round", ylabel="cumulative regret vs UB", title="UB regret")
    a.legend()
    fig.tight_layout()
    if dest:
        fig.savefig(dest, dpi=120)
    else:
        plt.show()


if __name__ == "__main__":
    main()

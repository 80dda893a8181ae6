"""Figure rendering for score reports: bar charts saved next to the TSVs."""

from __future__ import annotations


def _pyplot():
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    return plt


def plot_query_diff(diff, path) -> None:
    """Grouped recall/precision/F1 bars, one group per query."""
    plt = _pyplot()
    queries = list(diff.per_query)
    rows = [diff.per_query[q].prf() for q in queries]
    fig, ax = plt.subplots(figsize=(max(4.0, 1.4 * len(queries) + 1.5), 3.2))
    width = 0.27
    xs = range(len(queries))
    for k, (name, color) in enumerate(
        (("recall", "#4c72b0"), ("precision", "#dd8452"), ("F1", "#55a868"))
    ):
        ax.bar([x + (k - 1) * width for x in xs], [r[k] for r in rows],
               width=width, label=name, color=color)
    ax.set_xticks(list(xs))
    ax.set_xticklabels(queries, rotation=20, ha="right")
    ax.set_ylim(0, 105)
    ax.set_ylabel("%")
    ax.set_title("query-hit scores, gold vs predicted")
    ax.legend(loc="lower right", fontsize=8)
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)


def plot_ftag_scores(score, path) -> None:
    """Horizontal F1 bars per function tag."""
    plt = _pyplot()
    tags = score.tags()
    f1s = [score.prf(t)[2] for t in tags]
    fig, ax = plt.subplots(figsize=(5.0, max(2.0, 0.35 * len(tags) + 1.0)))
    ax.barh(range(len(tags)), f1s, color="#4c72b0")
    ax.set_yticks(range(len(tags)))
    ax.set_yticklabels(tags)
    ax.invert_yaxis()
    ax.set_xlim(0, 105)
    ax.set_xlabel("F1 (%)")
    ax.set_title("function-tag scores on matched brackets")
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)


def plot_bracket_score(score, path) -> None:
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(3.4, 3.0))
    values = (score.recall, score.precision, score.f1)
    ax.bar(range(3), values, color=("#4c72b0", "#dd8452", "#55a868"))
    ax.set_xticks(range(3))
    ax.set_xticklabels(("recall", "precision", "F1"))
    ax.set_ylim(0, 105)
    ax.set_ylabel("%")
    ax.set_title("labeled brackets")
    for x, v in enumerate(values):
        ax.text(x, v + 1, f"{v:.2f}", ha="center", fontsize=8)
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)

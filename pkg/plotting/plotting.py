import sys

import pandas as pd
import plotly.graph_objects as go

# Bar chart of benchmark accuracy per model, from the benchmark.csv written by
# training/benchmark.py

path = sys.argv[1] if len(sys.argv) > 1 else "./output/benchmark/benchmark.csv"
results = pd.read_csv(path)

grouped = results.groupby("model", sort=False)
columns = {
    "Within tau": "accuracy_pct",
    "Within synthetic tau": "synthetic_accuracy_pct",
    "Untrained, within synthetic tau": "untrained_synthetic_accuracy_pct",
}

fig = go.Figure(
    data=[
        go.Bar(
            x=list(grouped.groups),
            y=grouped[column].median(),
            error_y={
                "type": "data",
                "array": grouped[column].std().fillna(0.0),
                "visible": True,
            },
            name=name,
        )
        for name, column in columns.items()
    ]
)

fig.update_layout(
    barmode="group",
    xaxis_title_text="Model",
    yaxis_title_text="Median Accuracy (%) Across Seeds",
)

fig.show(renderer="browser")

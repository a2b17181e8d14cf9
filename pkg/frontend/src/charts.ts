// Per-dimension bar chart. The API already orders rows by descending
// count; the chart preserves that order and never re-aggregates.

import { DimensionTable } from "./api.js";

export type BarClickHandler = (value: string, count: number) => void;

const BAR_AREA_HEIGHT = 160;

export function renderDimensionChart(
    payload: DimensionTable,
    onBarClick: BarClickHandler,
): HTMLElement {
    const container = document.createElement("div");
    container.className = "chart";
    container.dataset.dimension = payload.dimension;
    if (payload.rows.length === 0) {
        const empty = document.createElement("p");
        empty.className = "placeholder";
        empty.textContent = "no data";
        container.appendChild(empty);
        return container;
    }
    const max = Math.max(...payload.rows.map((row) => row.count));
    for (const row of payload.rows) {
        const bar = document.createElement("div");
        bar.className = "bar";
        bar.dataset.value = row.value;
        bar.dataset.count = String(row.count);

        const count = document.createElement("span");
        count.className = "bar-count";
        count.textContent = String(row.count);

        const column = document.createElement("div");
        column.className = "bar-column";
        const height = max > 0 ? Math.max(2, Math.round((row.count / max) * BAR_AREA_HEIGHT)) : 2;
        column.style.height = `${height}px`;
        column.addEventListener("click", () => onBarClick(row.value, row.count));

        const label = document.createElement("span");
        label.className = "bar-label";
        label.textContent = row.value;
        label.title = row.value;

        bar.append(count, column, label);
        container.appendChild(bar);
    }
    return container;
}

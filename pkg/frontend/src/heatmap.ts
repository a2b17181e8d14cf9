// Release x component heatmap: shading is presentation-only, normalized to
// the matrix maximum; the numbers shown are exactly the payload's cells.

import { HeatmapPayload } from "./api.js";

export type CellClickHandler = (release: string, component: string, count: number) => void;

export function cellShade(count: number, max: number): number {
    return max <= 0 ? 0 : count / max;
}

export function renderHeatmap(payload: HeatmapPayload, onCellClick: CellClickHandler): HTMLElement {
    const container = document.createElement("div");
    container.className = "heatmap";
    if (payload.components.length === 0) {
        const empty = document.createElement("p");
        empty.className = "placeholder";
        empty.textContent = "no data";
        container.appendChild(empty);
        return container;
    }
    const max = Math.max(0, ...payload.cells.flat());
    const table = document.createElement("table");

    const head = table.createTHead().insertRow();
    head.insertCell().textContent = "release";
    for (const component of payload.components) {
        const th = document.createElement("th");
        th.textContent = component;
        head.appendChild(th);
    }

    const body = table.createTBody();
    payload.releases.forEach((release, rowIndex) => {
        const row = body.insertRow();
        const label = document.createElement("th");
        label.textContent = release;
        row.appendChild(label);
        payload.components.forEach((component, colIndex) => {
            const count = payload.cells[rowIndex][colIndex];
            const cell = row.insertCell();
            cell.className = "heatmap-cell";
            cell.textContent = String(count);
            cell.dataset.release = release;
            cell.dataset.component = component;
            cell.dataset.count = String(count);
            const shade = cellShade(count, max);
            cell.dataset.shade = shade.toFixed(4);
            cell.style.backgroundColor = `rgba(153, 27, 27, ${shade.toFixed(4)})`;
            if (shade > 0.55) cell.classList.add("inverse");
            cell.addEventListener("click", () => onCellClick(release, component, count));
        });
    });
    container.appendChild(table);
    return container;
}

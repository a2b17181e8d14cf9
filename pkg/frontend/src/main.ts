// Application wiring: snapshot selection, tab views, drill-down panel.

import { ApiClient } from "./api.js";
import { renderBugList } from "./buglist.js";
import { renderDimensionChart } from "./charts.js";
import { renderFstReport } from "./fst.js";
import { renderHeatmap } from "./heatmap.js";
import { createJobForm } from "./jobform.js";
import { RequestGate, initialViewState } from "./state.js";
import { createTreeView } from "./tree.js";

const DIMENSIONS = [
    "COMPONENT",
    "SOURCE_FILE",
    "ANSWER_CODE",
    "COUNTRY",
    "CUSTOMER",
    "DETECTION_PHASE",
    "DOCUMENT",
    "RELEASE",
    "SEVERITY",
    "STATUS",
];

const client = new ApiClient();
const state = initialViewState();
const gate = new RequestGate();

const viewEl = document.getElementById("view")!;
const drillEl = document.getElementById("drilldown")!;
const snapshotEl = document.getElementById("snapshot-info")!;
const navEl = document.getElementById("nav")!;
const dimSelect = document.getElementById("dimension-select") as HTMLSelectElement;

let activeTab = "heatmap";

for (const dim of DIMENSIONS) {
    const option = document.createElement("option");
    option.value = dim;
    option.textContent = dim;
    dimSelect.appendChild(option);
}
dimSelect.value = state.activeDimension;
dimSelect.addEventListener("change", () => {
    state.activeDimension = dimSelect.value;
    if (activeTab === "dimensions") void renderView();
});

navEl.querySelectorAll("button[data-tab]").forEach((button) => {
    button.addEventListener("click", () => {
        activeTab = (button as HTMLElement).dataset.tab!;
        navEl.querySelectorAll("button").forEach((b) => b.classList.remove("active"));
        button.classList.add("active");
        dimSelect.style.display = activeTab === "dimensions" ? "" : "none";
        void renderView();
    });
});

const tree = createTreeView({
    onNeedDeeper: (depth) => {
        state.treeDepth = Math.max(state.treeDepth, depth);
        void renderView();
    },
});

async function showDrillDown(query: {
    dim: string;
    value: string;
    dim2?: string;
    value2?: string;
}): Promise<void> {
    if (!state.snapshotId) return;
    state.drillDown = query;
    const token = gate.next();
    const payload = await client.bugs(state.snapshotId, query);
    if (!gate.isCurrent(token)) return; // superseded selection
    drillEl.replaceChildren(renderBugList(payload));
}

async function renderView(): Promise<void> {
    if (!state.snapshotId) return;
    const token = gate.next();
    drillEl.replaceChildren();
    if (activeTab === "heatmap") {
        const payload = await client.heatmap(state.snapshotId);
        if (!gate.isCurrent(token)) return;
        viewEl.replaceChildren(
            renderHeatmap(payload, (release, component) => {
                void showDrillDown({ dim: "RELEASE", value: release, dim2: "COMPONENT", value2: component });
            }),
        );
    } else if (activeTab === "dimensions") {
        const payload = await client.dimension(state.snapshotId, state.activeDimension);
        if (!gate.isCurrent(token)) return;
        viewEl.replaceChildren(
            renderDimensionChart(payload, (value) => {
                void showDrillDown({ dim: payload.dimension, value });
            }),
        );
    } else if (activeTab === "tree") {
        const payload = await client.tree(state.snapshotId, state.treeDepth);
        if (!gate.isCurrent(token)) return;
        tree.update(payload.tree);
        viewEl.replaceChildren(tree.element);
    } else if (activeTab === "fst") {
        const payload = await client.fst(state.snapshotId);
        if (!gate.isCurrent(token)) return;
        viewEl.replaceChildren(renderFstReport(payload));
    }
}

async function switchSnapshot(snapshotId: string): Promise<void> {
    state.snapshotId = snapshotId;
    state.drillDown = null;
    snapshotEl.textContent = `snapshot ${snapshotId}`;
    const link = document.createElement("a");
    link.href = client.exportUrl(snapshotId);
    link.textContent = "download CSV";
    snapshotEl.append(" — ", link);
    await renderView();
}

document.getElementById("job-form-slot")!.appendChild(
    createJobForm(client, (snapshotId) => void switchSnapshot(snapshotId)),
);

void (async () => {
    try {
        const latest = await client.latest();
        await switchSnapshot(latest.snapshot_id);
    } catch {
        snapshotEl.textContent = "no snapshots yet — run an analysis below";
    }
})();

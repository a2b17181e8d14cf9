// Drill-down bug list. The list length always equals the clicked count;
// raw-report links render only when the tracker knows the bug.

import { BugListPayload } from "./api.js";

export function renderBugList(payload: BugListPayload): HTMLElement {
    const container = document.createElement("div");
    container.className = "bug-list";
    container.dataset.total = String(payload.total);

    const heading = document.createElement("h3");
    const scope =
        payload.dimension2 && payload.value2
            ? `${payload.dimension}=${payload.value} × ${payload.dimension2}=${payload.value2}`
            : `${payload.dimension}=${payload.value}`;
    heading.textContent = `${payload.total} bugs — ${scope}`;
    container.appendChild(heading);

    const list = document.createElement("ul");
    for (const bug of payload.bugs) {
        const item = document.createElement("li");
        item.dataset.bugId = bug.bug_id;

        const id = document.createElement("span");
        id.className = "bug-id";
        if (bug.tracker_url) {
            const link = document.createElement("a");
            link.href = bug.tracker_url;
            link.target = "_blank";
            link.rel = "noopener";
            link.textContent = bug.bug_id;
            id.appendChild(link);
        } else {
            id.textContent = bug.bug_id;
        }

        const meta = document.createElement("span");
        meta.className = "bug-meta";
        meta.textContent = ` ${bug.severity ?? "-"} / ${bug.status ?? "-"} — ${bug.title}`;

        item.append(id, meta);
        list.appendChild(item);
    }
    container.appendChild(list);
    return container;
}

// Answer-code validation report: group shares, the anomaly flag, the
// per-answerer breakdown and the internal-detection share.

import { FstPayload } from "./api.js";

function pct(share: number): string {
    return `${(share * 100).toFixed(1)}%`;
}

export function renderFstReport(payload: FstPayload): HTMLElement {
    const container = document.createElement("div");
    container.className = "fst";

    const flag = document.createElement("p");
    flag.className = payload.flagged ? "fst-flag flagged" : "fst-flag";
    flag.dataset.flagged = String(payload.flagged);
    flag.textContent = payload.flagged
        ? `ALREADY_CORRECTED share exceeds ${pct(payload.flag_threshold)} — answer codes need review`
        : "answer-code distribution within the configured threshold";
    container.appendChild(flag);

    const shares = document.createElement("table");
    shares.className = "fst-shares";
    const head = shares.createTHead().insertRow();
    ["answer group", "share of answered"].forEach((text) => {
        const th = document.createElement("th");
        th.textContent = text;
        head.appendChild(th);
    });
    const body = shares.createTBody();
    if (payload.group_shares === "UNDEFINED") {
        const row = body.insertRow();
        row.insertCell().textContent = "(no answered bugs)";
        row.insertCell().textContent = "undefined";
    } else {
        for (const [group, share] of Object.entries(payload.group_shares)) {
            const row = body.insertRow();
            row.insertCell().textContent = group;
            const cell = row.insertCell();
            cell.dataset.share = String(share);
            cell.textContent = pct(share);
        }
    }
    container.appendChild(shares);

    const internal = document.createElement("p");
    internal.className = "fst-internal";
    internal.textContent =
        payload.internal_share === "UNDEFINED"
            ? "internal detection share: undefined (empty corpus)"
            : `detected internally: ${pct(payload.internal_share)}`;
    container.appendChild(internal);

    if (payload.per_answerer.length > 0) {
        const caption = document.createElement("h4");
        caption.textContent = "highest ALREADY_CORRECTED shares per answerer";
        container.appendChild(caption);
        const table = document.createElement("table");
        table.className = "fst-answerers";
        for (const entry of payload.per_answerer) {
            const row = table.insertRow();
            row.insertCell().textContent = entry.identity;
            row.insertCell().textContent = pct(entry.already_corrected_share);
            row.insertCell().textContent = `${entry.answered} answered`;
        }
        container.appendChild(table);
    }
    return container;
}

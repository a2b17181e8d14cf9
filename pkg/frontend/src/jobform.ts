// On-demand analysis form: submit products + window, poll the job record,
// and hand the new snapshot over once the job lands in DONE.

import { ApiClient, JobRecord } from "./api.js";

export interface JobFormOptions {
    pollIntervalMs?: number;
    /** Injectable for tests; the default waits pollIntervalMs. */
    sleep?: (ms: number) => Promise<void>;
    maxPolls?: number;
}

export async function pollUntilTerminal(
    client: ApiClient,
    jobId: string,
    onUpdate: (record: JobRecord) => void,
    options: JobFormOptions = {},
): Promise<JobRecord> {
    const interval = options.pollIntervalMs ?? 500;
    const sleep = options.sleep ?? ((ms) => new Promise((resolve) => setTimeout(resolve, ms)));
    const maxPolls = options.maxPolls ?? 600;
    for (let i = 0; i < maxPolls; i++) {
        const record = await client.job(jobId);
        onUpdate(record);
        if (record.state === "DONE" || record.state === "FAILED") {
            return record;
        }
        await sleep(interval);
    }
    throw new Error(`job ${jobId} did not finish within ${maxPolls} polls`);
}

export function createJobForm(
    client: ApiClient,
    onSnapshotReady: (snapshotId: string) => void,
    options: JobFormOptions = {},
): HTMLFormElement {
    const form = document.createElement("form");
    form.className = "job-form";
    form.innerHTML = `
        <label>products <input name="products" placeholder="P1,P2" required></label>
        <label>from <input name="from" placeholder="2025-01-01T00:00:00Z" required></label>
        <label>to <input name="to" placeholder="2026-01-01T00:00:00Z" required></label>
        <button type="submit">run analysis</button>
        <span class="job-status" data-state="idle"></span>
    `;
    const status = form.querySelector<HTMLSpanElement>(".job-status")!;

    form.addEventListener("submit", (event) => {
        event.preventDefault();
        const data = new FormData(form);
        const products = String(data.get("products") ?? "")
            .split(",")
            .map((p) => p.trim())
            .filter(Boolean);
        const from = String(data.get("from") ?? "");
        const to = String(data.get("to") ?? "");
        status.dataset.state = "submitting";
        status.textContent = "submitting…";
        void (async () => {
            try {
                const submitted = await client.submitJob(products, from, to);
                const record = await pollUntilTerminal(
                    client,
                    submitted.job_id,
                    (update) => {
                        status.dataset.state = update.state;
                        status.textContent = update.state;
                    },
                    options,
                );
                if (record.state === "DONE" && record.snapshot_id) {
                    onSnapshotReady(record.snapshot_id);
                } else if (record.state === "FAILED") {
                    status.textContent = `FAILED: ${record.error ?? "unknown error"}`;
                }
            } catch (error) {
                status.dataset.state = "error";
                status.textContent = error instanceof Error ? error.message : String(error);
            }
        })();
    });
    return form;
}

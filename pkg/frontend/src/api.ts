// Typed client for the analytics REST API (all endpoints under /api/v1).

export interface DimensionRow {
    value: string;
    count: number;
}

export interface DimensionTable {
    snapshot_id: string;
    dimension: string;
    rows: DimensionRow[];
}

export interface HeatmapPayload {
    snapshot_id: string;
    releases: string[];
    components: string[];
    cells: number[][];
}

export interface TreeNode {
    name: string;
    attributions: number;
    distinct_bugs: number;
    truncated: boolean;
    children: TreeNode[];
}

export interface TreePayload {
    snapshot_id: string;
    tree: TreeNode;
}

export interface BugSummary {
    bug_id: string;
    title: string;
    severity: string | null;
    status: string | null;
    tracker_url: string | null;
    created_at: string;
}

export interface BugListPayload {
    snapshot_id: string;
    dimension: string;
    value: string;
    dimension2: string | null;
    value2: string | null;
    total: number;
    bugs: BugSummary[];
}

export interface AnswererShare {
    identity: string;
    already_corrected_share: number;
    answered: number;
}

export interface FstPayload {
    snapshot_id: string;
    group_shares: Record<string, number> | "UNDEFINED";
    flagged: boolean;
    flag_threshold: number;
    per_answerer: AnswererShare[];
    internal_share: number | "UNDEFINED";
    answered_count: number;
}

export type JobState = "QUEUED" | "RUNNING" | "DONE" | "FAILED";

export interface JobRecord {
    job_id: string;
    state: JobState;
    snapshot_id?: string;
    error?: string;
    timestamps: Record<string, string>;
}

export interface SnapshotMeta {
    snapshot_id: string;
    created_at: string;
    query: { product_ids: string[]; from: string; to: string };
    anomaly_count: number;
}

export interface DrillDownQuery {
    dim: string;
    value: string;
    dim2?: string;
    value2?: string;
    limit?: number;
    offset?: number;
}

export class ApiError extends Error {
    constructor(
        public status: number,
        public code: string,
        detail: string,
    ) {
        super(detail);
    }
}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiClient {
    constructor(
        private base: string = "/api/v1",
        private fetchFn: FetchLike = (input, init) => fetch(input, init),
    ) {}

    private async request<T>(path: string, init?: RequestInit): Promise<T> {
        const response = await this.fetchFn(this.base + path, init);
        if (!response.ok) {
            let code = "error";
            let detail = `HTTP ${response.status}`;
            try {
                const body = await response.json();
                code = body.error ?? code;
                detail = body.detail ?? detail;
            } catch {
                // non-JSON error body; keep the generic detail
            }
            throw new ApiError(response.status, code, detail);
        }
        return response.json() as Promise<T>;
    }

    listSnapshots(): Promise<{ snapshots: SnapshotMeta[] }> {
        return this.request("/snapshots");
    }

    latest(): Promise<SnapshotMeta> {
        return this.request("/snapshots/latest");
    }

    dimension(snapshotId: string, kind: string): Promise<DimensionTable> {
        return this.request(`/snapshots/${snapshotId}/dimensions/${kind}`);
    }

    heatmap(snapshotId: string): Promise<HeatmapPayload> {
        return this.request(`/snapshots/${snapshotId}/heatmap`);
    }

    tree(snapshotId: string, depth?: number): Promise<TreePayload> {
        const suffix = depth === undefined ? "" : `?depth=${depth}`;
        return this.request(`/snapshots/${snapshotId}/tree${suffix}`);
    }

    fst(snapshotId: string): Promise<FstPayload> {
        return this.request(`/snapshots/${snapshotId}/fst`);
    }

    bugs(snapshotId: string, query: DrillDownQuery): Promise<BugListPayload> {
        const params = new URLSearchParams({ dim: query.dim, value: query.value });
        if (query.dim2 !== undefined && query.value2 !== undefined) {
            params.set("dim2", query.dim2);
            params.set("value2", query.value2);
        }
        if (query.limit !== undefined) params.set("limit", String(query.limit));
        if (query.offset !== undefined) params.set("offset", String(query.offset));
        return this.request(`/snapshots/${snapshotId}/bugs?${params.toString()}`);
    }

    exportUrl(snapshotId: string): string {
        return `${this.base}/snapshots/${snapshotId}/export.csv`;
    }

    submitJob(productIds: string[], from: string, to: string): Promise<JobRecord> {
        return this.request("/jobs", {
            method: "POST",
            headers: { "content-type": "application/json" },
            body: JSON.stringify({ product_ids: productIds, from, to }),
        });
    }

    job(jobId: string): Promise<JobRecord> {
        return this.request(`/jobs/${jobId}`);
    }
}

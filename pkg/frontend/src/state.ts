// Client-side view state. Counts always come from API payloads; this file
// only tracks what the user is looking at.

export interface DrillDownSelection {
    dim: string;
    value: string;
    dim2?: string;
    value2?: string;
}

export interface ViewState {
    snapshotId: string | null;
    activeDimension: string;
    drillDown: DrillDownSelection | null;
    expandedTreePaths: Set<string>;
    treeDepth: number;
}

export function initialViewState(): ViewState {
    return {
        snapshotId: null,
        activeDimension: "COMPONENT",
        drillDown: null,
        expandedTreePaths: new Set(),
        treeDepth: 2,
    };
}

/**
 * Request-generation tokens: responses for superseded requests (the user
 * switched snapshot or selection meanwhile) are discarded, never rendered.
 */
export class RequestGate {
    private generation = 0;

    next(): number {
        this.generation += 1;
        return this.generation;
    }

    isCurrent(token: number): boolean {
        return token === this.generation;
    }
}

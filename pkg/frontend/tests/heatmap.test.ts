import { describe, expect, it } from "vitest";

import { BugListPayload, HeatmapPayload } from "../src/api.js";
import { cellShade, renderHeatmap } from "../src/heatmap.js";
import { renderBugList } from "../src/buglist.js";
import { fixture } from "./helpers.js";

const payload = fixture<HeatmapPayload>("heatmap.json");

describe("heatmap rendering", () => {
    it("renders every cell with exactly the payload's count", () => {
        const element = renderHeatmap(payload, () => {});
        const cells = element.querySelectorAll<HTMLElement>(".heatmap-cell");
        expect(cells.length).toBe(payload.releases.length * payload.components.length);
        cells.forEach((cell) => {
            const row = payload.releases.indexOf(cell.dataset.release!);
            const col = payload.components.indexOf(cell.dataset.component!);
            expect(Number(cell.dataset.count)).toBe(payload.cells[row][col]);
            expect(cell.textContent).toBe(String(payload.cells[row][col]));
        });
    });

    it("keeps release rows in payload (oldest to newest) order", () => {
        const element = renderHeatmap(payload, () => {});
        const rowLabels = Array.from(
            element.querySelectorAll("tbody th"),
            (th) => th.textContent,
        );
        expect(rowLabels).toEqual(payload.releases);
    });

    it("shades the maximum cell darkest", () => {
        const element = renderHeatmap(payload, () => {});
        const max = Math.max(...payload.cells.flat());
        const shades = Array.from(
            element.querySelectorAll<HTMLElement>(".heatmap-cell"),
            (cell) => Number(cell.dataset.shade),
        );
        expect(Math.max(...shades)).toBeCloseTo(1.0, 6);
        const darkest = element.querySelector<HTMLElement>(`[data-shade="${(1).toFixed(4)}"]`);
        expect(Number(darkest!.dataset.count)).toBe(max);
    });

    it("gives an all-zero matrix one uniform lightest shade", () => {
        const zero: HeatmapPayload = {
            snapshot_id: "s",
            releases: ["R1", "R2"],
            components: ["A", "B"],
            cells: [
                [0, 0],
                [0, 0],
            ],
        };
        const element = renderHeatmap(zero, () => {});
        const shades = new Set(
            Array.from(
                element.querySelectorAll<HTMLElement>(".heatmap-cell"),
                (cell) => cell.dataset.shade,
            ),
        );
        expect(shades).toEqual(new Set(["0.0000"]));
        expect(cellShade(0, 0)).toBe(0);
    });

    it("renders a placeholder when there is nothing to show", () => {
        const empty: HeatmapPayload = { snapshot_id: "s", releases: [], components: [], cells: [] };
        const element = renderHeatmap(empty, () => {});
        expect(element.querySelector(".placeholder")?.textContent).toBe("no data");
    });

    it("cell click drills down to a list of exactly the cell count", () => {
        let clicked: { release: string; component: string; count: number } | null = null;
        const element = renderHeatmap(payload, (release, component, count) => {
            clicked = { release, component, count };
        });
        const first = element.querySelector<HTMLElement>(".heatmap-cell")!;
        first.click();
        expect(clicked).toEqual({
            release: payload.releases[0],
            component: payload.components[0],
            count: payload.cells[0][0],
        });

        const bugs = fixture<BugListPayload>("bugs_cell.json");
        expect(bugs.total).toBe(payload.cells[0][0]);
        const list = renderBugList(bugs);
        expect(list.querySelectorAll("li").length).toBe(payload.cells[0][0]);
    });
});

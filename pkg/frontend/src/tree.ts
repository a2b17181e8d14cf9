// Collapsible source tree with accumulated counts on every branch.
// Deeper slices load lazily: expanding a truncated branch asks the host
// for a refetch at a larger depth while the expansion set stays put.

import { TreeNode } from "./api.js";

export interface TreeCallbacks {
    /** Expanding a branch whose children were truncated by the depth cap. */
    onNeedDeeper: (depth: number) => void;
}

export interface TreeController {
    element: HTMLElement;
    update(root: TreeNode): void;
    expanded: Set<string>;
}

function nodeKey(path: string[]): string {
    return path.join("/");
}

export function createTreeView(callbacks: TreeCallbacks): TreeController {
    const element = document.createElement("div");
    element.className = "tree";
    const expanded = new Set<string>();
    let current: TreeNode | null = null;

    function renderNode(node: TreeNode, path: string[], depth: number): HTMLElement {
        const item = document.createElement("div");
        item.className = "tree-node";
        const key = nodeKey(path);

        const row = document.createElement("div");
        row.className = "tree-row";
        row.dataset.path = key;
        row.dataset.attributions = String(node.attributions);
        row.dataset.distinctBugs = String(node.distinct_bugs);

        const toggle = document.createElement("span");
        toggle.className = "tree-toggle";
        const expandable = node.children.length > 0 || node.truncated;
        toggle.textContent = expandable ? (expanded.has(key) ? "▾" : "▸") : "•";

        const label = document.createElement("span");
        label.className = "tree-label";
        label.textContent = node.name;

        const counts = document.createElement("span");
        counts.className = "tree-counts";
        counts.textContent = `${node.attributions} attributions, ${node.distinct_bugs} bugs`;

        row.append(toggle, label, counts);
        if (expandable) {
            row.addEventListener("click", () => {
                if (expanded.has(key)) {
                    expanded.delete(key);
                } else {
                    expanded.add(key);
                    if (node.truncated) {
                        callbacks.onNeedDeeper(depth + 1);
                    }
                }
                if (current) update(current);
            });
        }
        item.appendChild(row);

        if (expanded.has(key) && node.children.length > 0) {
            const children = document.createElement("div");
            children.className = "tree-children";
            for (const child of node.children) {
                children.appendChild(renderNode(child, [...path, child.name], depth + 1));
            }
            item.appendChild(children);
        }
        return item;
    }

    function update(root: TreeNode): void {
        current = root;
        expanded.add(nodeKey([root.name]));
        element.replaceChildren(renderNode(root, [root.name], 0));
    }

    return { element, update, expanded };
}

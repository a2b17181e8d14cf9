import { readFileSync } from "node:fs";
import { join } from "node:path";

export function fixture<T>(name: string): T {
    // vitest runs from the frontend package root; jsdom rewrites
    // import.meta.url, so resolve from the working directory instead
    const path = join(process.cwd(), "tests", "fixtures", name);
    return JSON.parse(readFileSync(path, "utf-8")) as T;
}

export function jsonResponse(body: unknown, status = 200): Response {
    return new Response(JSON.stringify(body), {
        status,
        headers: { "content-type": "application/json" },
    });
}

/** fetch stub dispatching on URL substring, recording every request. */
export function fetchStub(routes: Array<[string, () => Response]>) {
    const calls: Array<{ url: string; init?: RequestInit }> = [];
    const fn = async (url: string, init?: RequestInit): Promise<Response> => {
        calls.push({ url, init });
        for (const [needle, respond] of routes) {
            if (url.includes(needle)) return respond();
        }
        return jsonResponse({ error: "not_found", detail: `no route for ${url}` }, 404);
    };
    return { fn, calls };
}

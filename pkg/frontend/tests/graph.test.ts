import { describe, expect, it } from "vitest";

import { circleLayout, highlightedNodes, renderGraphSvg } from "../src/graph.js";
import { nliLayout } from "./helpers.js";

describe("renderGraphSvg", () => {
  it("renders an empty state for a missing layout", () => {
    const svg = renderGraphSvg(null);
    expect(svg).toContain("empty-state");
    expect(svg).toContain("No graph yet");
  });

  it("renders an empty state for a layout with no nodes", () => {
    const svg = renderGraphSvg({ version: 1, name: "x", nodes: [], links: [] });
    expect(svg).toContain("empty-state");
  });

  it("renders one node per concept with kind styling", () => {
    const svg = renderGraphSvg(nliLayout());
    for (const id of ["sentence", "pair", "entailment", "contradiction", "neutral"]) {
      expect(svg).toContain(`data-node-id="${id}"`);
    }
    expect(svg).toContain("node-decision");
    expect(svg).toContain("node-input");
  });

  it("renders role-labeled has_a links for premise and hypothesis", () => {
    const svg = renderGraphSvg(nliLayout());
    expect(svg).toContain(">premise</text>");
    expect(svg).toContain(">hypothesis</text>");
    expect(svg.match(/class="edge-has-a"/g)).toHaveLength(2);
  });

  it("distinguishes edge kinds visually", () => {
    const svg = renderGraphSvg(nliLayout());
    expect(svg).toContain("stroke-dasharray"); // is_a dashed
    expect(svg.match(/class="edge-is-a"/g)).toHaveLength(3);
  });

  it("marks highlighted nodes", () => {
    const svg = renderGraphSvg(nliLayout(), new Set(["pair"]));
    expect(svg).toContain("node-highlight");
    expect(svg).toContain('stroke="#c0392b"');
  });

  it("shows resolved anchors as tooltips", () => {
    const svg = renderGraphSvg(nliLayout());
    expect(svg).toContain("<title>anchor: pair</title>");
  });

  it("escapes markup in labels", () => {
    const svg = renderGraphSvg({
      version: 1,
      name: "g",
      nodes: [{ id: "a", label: "a<b>", kind: "input", anchorId: null, labels: [] }],
      links: [],
    });
    expect(svg).toContain("a&lt;b&gt;");
    expect(svg).not.toContain("a<b>");
  });
});

describe("circleLayout", () => {
  it("assigns a distinct deterministic position to every node", () => {
    const positions = circleLayout(nliLayout().nodes);
    expect(positions).toHaveLength(5);
    const keys = new Set(positions.map((p) => `${p.x},${p.y}`));
    expect(keys.size).toBe(5);
    expect(circleLayout(nliLayout().nodes)).toEqual(positions);
  });
});

describe("highlightedNodes", () => {
  it("matches node labels mentioned in diagnostic messages", () => {
    const hits = highlightedNodes(nliLayout(), [
      "decision concept 'neutral' has no is_a anchor",
    ]);
    expect(hits.has("neutral")).toBe(true);
    expect(hits.has("sentence")).toBe(false);
  });

  it("is empty without a layout", () => {
    expect(highlightedNodes(null, ["anything"]).size).toBe(0);
  });
});

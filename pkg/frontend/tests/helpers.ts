import type { LayoutGraph, SessionView } from "../src/types.js";

export function makeView(overrides: Partial<SessionView> = {}): SessionView {
  return {
    id: "s1",
    stage: "basic_info",
    version: 0,
    basicInfo: { task_name: "nli", domain: "NLP", dataset: "SNLI" },
    taskDescription: null,
    conceptList: [],
    candidates: [],
    folTexts: [],
    constraints: [],
    layout: null,
    iterationCount: 0,
    ...overrides,
  };
}

/** Layout of the finished natural-language-inference graph. */
export function nliLayout(): LayoutGraph {
  return {
    version: 1,
    name: "nli",
    nodes: [
      { id: "sentence", label: "sentence", kind: "input", anchorId: null, labels: [] },
      { id: "pair", label: "pair", kind: "input", anchorId: null, labels: [] },
      { id: "entailment", label: "entailment", kind: "decision", anchorId: "pair", labels: [] },
      { id: "contradiction", label: "contradiction", kind: "decision", anchorId: "pair", labels: [] },
      { id: "neutral", label: "neutral", kind: "decision", anchorId: "pair", labels: [] },
    ],
    links: [
      { kind: "is_a", source: "entailment", target: "pair", roles: [] },
      { kind: "is_a", source: "contradiction", target: "pair", roles: [] },
      { kind: "is_a", source: "neutral", target: "pair", roles: [] },
      {
        kind: "has_a",
        source: "pair",
        target: null,
        roles: [
          { role: "premise", target: "sentence" },
          { role: "hypothesis", target: "sentence" },
        ],
      },
    ],
  };
}

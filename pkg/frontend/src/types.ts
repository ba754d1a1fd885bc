/** JSON shapes exchanged with the session API. */

export type StageName =
  | "basic_info"
  | "task_description"
  | "concept_list"
  | "graph_draft"
  | "graph_refine"
  | "graph_approval"
  | "constraint_input"
  | "fol_draft"
  | "constraint_compile"
  | "done";

export const STAGE_ORDER: readonly StageName[] = [
  "basic_info",
  "task_description",
  "concept_list",
  "graph_draft",
  "graph_refine",
  "graph_approval",
  "constraint_input",
  "fol_draft",
  "constraint_compile",
  "done",
];

export interface DiagnosticRecord {
  code: string;
  severity: "error" | "warning";
  line: number;
  col: number;
  message: string;
  hint: string;
}

export interface CandidateView {
  index: number;
  text: string;
  selected: boolean;
  lints: string[];
  errors: number;
  warnings: number;
  diagnostics: DiagnosticRecord[];
  feedback?: string;
}

export interface ConceptEntry {
  name: string;
  kind: "input" | "decision";
  labels: string[];
}

export interface LayoutNode {
  id: string;
  label: string;
  kind: "input" | "decision";
  anchorId: string | null;
  labels: string[];
}

export interface LayoutRole {
  role: string;
  target: string;
}

export interface LayoutLink {
  kind: "is_a" | "contains" | "has_a";
  source: string;
  target: string | null;
  roles: LayoutRole[];
}

export interface LayoutGraph {
  version: number;
  name: string;
  nodes: LayoutNode[];
  links: LayoutLink[];
}

export interface BasicInfo {
  task_name: string;
  domain: string;
  dataset: string;
}

export interface SessionView {
  id: string;
  stage: StageName;
  version: number;
  basicInfo: BasicInfo;
  taskDescription: string | null;
  conceptList: ConceptEntry[];
  candidates: CandidateView[];
  folTexts: string[];
  constraints: string[];
  layout: LayoutGraph | null;
  iterationCount: number;
}

export interface ApiErrorBody {
  code: string;
  message: string;
}

export interface Envelope<T> {
  ok: boolean;
  data?: T;
  error?: ApiErrorBody;
  sessionVersion: number;
}

export interface PhaseEvent {
  stage: string;
  phase: string;
  detail: string;
}

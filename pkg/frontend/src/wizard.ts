/** Stage wizard: the client-side state machine that mirrors a server session.
 *
 * The wizard never mutates session state locally.  Every user intent becomes
 * one API call carrying the last seen version; the server's response replaces
 * the local view.  A 409 conflict flips the wizard into a banner state that
 * offers reload-and-retry instead of guessing. */

import { ApiClient, ApiError } from "./api.js";
import type { BasicInfo, SessionView, StageName } from "./types.js";
import { STAGE_ORDER } from "./types.js";

export function stageIndex(stage: StageName): number {
  return STAGE_ORDER.indexOf(stage);
}

/** The stage a "generate" action should target, or null when the current
 * screen has nothing left to sample.  A stage regenerates itself while its
 * candidate pool is empty; the intake form kicks off the first stage. */
export function nextGenerationStage(view: SessionView): StageName | null {
  if (view.stage === "basic_info") return "task_description";
  if (
    (view.stage === "task_description" ||
      view.stage === "concept_list" ||
      view.stage === "graph_draft") &&
    view.candidates.length === 0
  ) {
    return view.stage;
  }
  return null;
}

/** True when the current stage holds an approvable artifact. */
export function canApprove(view: SessionView): boolean {
  switch (view.stage) {
    case "task_description":
    case "concept_list":
    case "fol_draft":
      return view.candidates.some((c) => c.selected);
    case "graph_draft":
    case "graph_refine":
      return view.candidates.some((c) => c.selected && c.errors === 0);
    case "graph_approval":
    case "constraint_input":
    case "constraint_compile":
      return true;
    default:
      return false;
  }
}

export interface Banner {
  kind: "conflict" | "error";
  message: string;
}

export interface WizardState {
  view: SessionView | null;
  banner: Banner | null;
  busy: boolean;
}

type Listener = (state: WizardState) => void;

export class Wizard {
  private view: SessionView | null = null;
  private banner: Banner | null = null;
  private busy = false;
  private listeners: Listener[] = [];

  constructor(private readonly api: ApiClient) {}

  get state(): WizardState {
    return { view: this.view, banner: this.banner, busy: this.busy };
  }

  subscribe(listener: Listener): void {
    this.listeners.push(listener);
  }

  private notify(): void {
    const state = this.state;
    for (const listener of this.listeners) listener(state);
  }

  async start(info: BasicInfo): Promise<SessionView> {
    const { id } = await this.api.createSession(info);
    this.view = await this.api.getSession(id);
    this.banner = null;
    this.notify();
    return this.view;
  }

  /** Reload the authoritative view; clears any conflict banner. */
  async reload(): Promise<SessionView> {
    if (!this.view) throw new Error("no active session");
    this.view = await this.api.getSession(this.view.id);
    this.banner = null;
    this.notify();
    return this.view;
  }

  private async run(action: string, payload: Record<string, unknown> = {}): Promise<SessionView> {
    if (!this.view) throw new Error("no active session");
    this.busy = true;
    this.notify();
    try {
      this.view = await this.api.action(this.view.id, action, payload, this.view.version);
      this.banner = null;
      return this.view;
    } catch (err) {
      if (err instanceof ApiError && err.isVersionConflict) {
        this.banner = {
          kind: "conflict",
          message: "Session changed elsewhere. Reload to see the latest state, then retry.",
        };
      } else if (err instanceof ApiError) {
        this.banner = { kind: "error", message: `${err.code}: ${err.message}` };
      }
      throw err;
    } finally {
      this.busy = false;
      this.notify();
    }
  }

  generate(stage: StageName): Promise<SessionView> {
    return this.run("generate", { stage });
  }

  approve(): Promise<SessionView> {
    return this.run("approve", {});
  }

  refine(): Promise<SessionView> {
    return this.run("refine", {});
  }

  select(index: number): Promise<SessionView> {
    return this.run("select", { index });
  }

  edit(kind: string, payload: Record<string, unknown>): Promise<SessionView> {
    return this.run("edit", { kind, payload });
  }

  removeConcept(name: string): Promise<SessionView> {
    return this.edit("remove_concept", { name });
  }

  removeEdge(kind: string, source: string): Promise<SessionView> {
    return this.edit("remove_edge", { kind, source });
  }

  submitConstraint(text: string): Promise<SessionView> {
    return this.run("constraint", { text });
  }

  exportArchive(): Promise<ArrayBuffer> {
    if (!this.view) throw new Error("no active session");
    return this.api.exportArchive(this.view.id);
  }
}

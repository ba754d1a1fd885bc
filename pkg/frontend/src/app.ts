/** DOM application: one screen per wizard stage, driven entirely by server
 * responses.  Every control maps to exactly one API action; nothing is
 * mutated locally before the server confirms it. */

import { ApiClient } from "./api.js";
import { highlightedNodes, renderGraphSvg } from "./graph.js";
import type { CandidateView, SessionView } from "./types.js";
import { canApprove, nextGenerationStage, Wizard } from "./wizard.js";

function el<K extends keyof HTMLElementTagNameMap>(
  doc: Document,
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = doc.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

export class App {
  readonly wizard: Wizard;
  private pending: Promise<unknown> = Promise.resolve();

  constructor(
    private readonly root: HTMLElement,
    api: ApiClient,
  ) {
    this.wizard = new Wizard(api);
    this.wizard.subscribe(() => this.render());
    this.render();
  }

  /** Resolves once all queued actions have finished. */
  whenIdle(): Promise<unknown> {
    return this.pending;
  }

  private queue(work: () => Promise<unknown>): void {
    this.pending = this.pending.then(work).catch(() => undefined);
  }

  private get doc(): Document {
    return this.root.ownerDocument;
  }

  render(): void {
    const { view, banner, busy } = this.wizard.state;
    this.root.textContent = "";

    if (banner) {
      const bar = el(this.doc, "div", `banner banner-${banner.kind}`, banner.message);
      if (banner.kind === "conflict") {
        const retry = el(this.doc, "button", "banner-reload", "Reload and retry");
        retry.addEventListener("click", () => this.queue(() => this.wizard.reload()));
        bar.appendChild(retry);
      }
      this.root.appendChild(bar);
    }

    if (!view) {
      this.renderStartForm();
      return;
    }

    const header = el(this.doc, "header", "stage-header");
    header.appendChild(el(this.doc, "h1", "stage-name", `Stage: ${view.stage}`));
    header.appendChild(
      el(this.doc, "span", "session-meta", `session ${view.id} · v${view.version}`),
    );
    if (busy) header.appendChild(el(this.doc, "span", "busy", "working…"));
    this.root.appendChild(header);

    const main = el(this.doc, "main", `screen screen-${view.stage}`);
    this.root.appendChild(main);

    switch (view.stage) {
      case "basic_info":
      case "task_description":
      case "concept_list":
        this.renderTextStage(main, view);
        break;
      case "graph_draft":
      case "graph_refine":
        this.renderGraphDraft(main, view);
        break;
      case "graph_approval":
        this.renderGraphApproval(main, view);
        break;
      case "constraint_input":
        this.renderConstraintInput(main, view);
        break;
      case "fol_draft":
      case "constraint_compile":
        this.renderConstraintReview(main, view);
        break;
      case "done":
        this.renderDone(main, view);
        break;
    }
  }

  private renderStartForm(): void {
    const form = el(this.doc, "form", "start-form");
    const fields: Array<["task_name" | "domain" | "dataset", string]> = [
      ["task_name", "Task name"],
      ["domain", "Domain"],
      ["dataset", "Dataset"],
    ];
    const inputs = new Map<string, HTMLInputElement>();
    for (const [name, label] of fields) {
      const wrap = el(this.doc, "label", "field", label + " ");
      const input = el(this.doc, "input");
      input.name = name;
      wrap.appendChild(input);
      form.appendChild(wrap);
      inputs.set(name, input);
    }
    const start = el(this.doc, "button", "start", "Start session");
    start.type = "button";
    start.addEventListener("click", () =>
      this.queue(() =>
        this.wizard.start({
          task_name: inputs.get("task_name")!.value,
          domain: inputs.get("domain")!.value,
          dataset: inputs.get("dataset")!.value,
        }),
      ),
    );
    form.appendChild(start);
    this.root.appendChild(form);
  }

  private candidateCard(candidate: CandidateView): HTMLElement {
    const card = el(
      this.doc,
      "article",
      "candidate" + (candidate.selected ? " candidate-selected" : ""),
    );
    card.dataset.index = String(candidate.index);
    const head = el(this.doc, "div", "candidate-head");
    head.appendChild(el(this.doc, "strong", "", `Sample ${candidate.index}`));
    head.appendChild(
      el(
        this.doc,
        "span",
        "error-count" + (candidate.errors ? " has-errors" : ""),
        `${candidate.errors} error(s), ${candidate.warnings} warning(s)`,
      ),
    );
    card.appendChild(head);
    card.appendChild(el(this.doc, "pre", "candidate-text", candidate.text));
    if (candidate.feedback) {
      card.appendChild(el(this.doc, "pre", "candidate-feedback", candidate.feedback));
    }
    for (const lint of candidate.lints) {
      card.appendChild(el(this.doc, "p", "lint", lint));
    }
    if (!candidate.selected) {
      const pick = el(this.doc, "button", "select-candidate", "Select");
      pick.addEventListener("click", () => this.queue(() => this.wizard.select(candidate.index)));
      card.appendChild(pick);
    }
    return card;
  }

  private candidateRow(view: SessionView): HTMLElement {
    const row = el(this.doc, "section", "candidates");
    for (const candidate of view.candidates) row.appendChild(this.candidateCard(candidate));
    return row;
  }

  private actionBar(view: SessionView, extra: HTMLElement[] = []): HTMLElement {
    const bar = el(this.doc, "nav", "actions");
    const generateTarget = nextGenerationStage(view);
    if (generateTarget) {
      const gen = el(this.doc, "button", "generate", `Generate ${generateTarget.replace("_", " ")}`);
      gen.addEventListener("click", () => this.queue(() => this.wizard.generate(generateTarget)));
      bar.appendChild(gen);
    }
    for (const node of extra) bar.appendChild(node);
    if (canApprove(view)) {
      const approve = el(this.doc, "button", "approve", "Approve");
      approve.addEventListener("click", () => this.queue(() => this.wizard.approve()));
      bar.appendChild(approve);
    }
    return bar;
  }

  private renderTextStage(main: HTMLElement, view: SessionView): void {
    if (view.taskDescription) {
      main.appendChild(el(this.doc, "p", "task-description", view.taskDescription));
    }
    main.appendChild(this.candidateRow(view));
    if (view.stage === "concept_list" && view.conceptList.length) {
      const list = el(this.doc, "ul", "concept-list");
      for (const entry of view.conceptList) {
        const item = el(this.doc, "li", "concept");
        item.dataset.name = entry.name;
        const label = entry.labels.length ? ` {${entry.labels.join(", ")}}` : "";
        item.appendChild(el(this.doc, "span", "", `${entry.name} (${entry.kind})${label} `));
        const remove = el(this.doc, "button", "remove-concept", "Remove");
        remove.addEventListener("click", () =>
          this.queue(() => this.wizard.removeConcept(entry.name)),
        );
        item.appendChild(remove);
        list.appendChild(item);
      }
      main.appendChild(list);
    }
    main.appendChild(this.actionBar(view));
  }

  private graphFigure(view: SessionView): HTMLElement {
    const messages = view.candidates
      .filter((c) => c.selected)
      .flatMap((c) => c.diagnostics.map((d) => d.message));
    const figure = el(this.doc, "figure", "graph");
    figure.innerHTML = renderGraphSvg(view.layout, highlightedNodes(view.layout, messages));
    return figure;
  }

  private renderGraphDraft(main: HTMLElement, view: SessionView): void {
    main.appendChild(this.candidateRow(view));
    main.appendChild(this.graphFigure(view));
    main.appendChild(
      el(this.doc, "p", "iteration", `refinement iteration ${view.iterationCount}`),
    );
    const refine = el(this.doc, "button", "refine", "Refine with feedback");
    refine.addEventListener("click", () => this.queue(() => this.wizard.refine()));
    main.appendChild(this.actionBar(view, [refine]));
  }

  private renderGraphApproval(main: HTMLElement, view: SessionView): void {
    main.appendChild(this.graphFigure(view));
    const links = el(this.doc, "ul", "link-list");
    for (const link of view.layout?.links ?? []) {
      const item = el(this.doc, "li", "link");
      item.dataset.kind = link.kind;
      item.dataset.source = link.source;
      const target = link.kind === "has_a"
        ? link.roles.map((r) => `${r.role}: ${r.target}`).join(", ")
        : link.target ?? "";
      item.appendChild(el(this.doc, "span", "", `${link.source} ${link.kind} ${target} `));
      const remove = el(this.doc, "button", "remove-edge", "Delete");
      remove.addEventListener("click", () =>
        this.queue(() => this.wizard.removeEdge(link.kind, link.source)),
      );
      item.appendChild(remove);
      links.appendChild(item);
    }
    main.appendChild(links);
    main.appendChild(this.actionBar(view));
  }

  private renderConstraintInput(main: HTMLElement, view: SessionView): void {
    main.appendChild(this.graphFigure(view));
    if (view.constraints.length) main.appendChild(this.constraintPairs(view));
    const area = el(this.doc, "textarea", "constraint-text");
    area.placeholder = "Describe a rule the decisions must satisfy…";
    main.appendChild(area);
    const submit = el(this.doc, "button", "submit-constraint", "Formalize");
    submit.addEventListener("click", () =>
      this.queue(() => this.wizard.submitConstraint(area.value)),
    );
    main.appendChild(submit);
    main.appendChild(this.actionBar(view));
  }

  private constraintPairs(view: SessionView): HTMLElement {
    const table = el(this.doc, "dl", "constraint-pairs");
    const count = Math.max(view.folTexts.length, view.constraints.length);
    for (let i = 0; i < count; i++) {
      table.appendChild(el(this.doc, "dt", "fol-text", view.folTexts[i] ?? ""));
      table.appendChild(el(this.doc, "dd", "compiled-constraint", view.constraints[i] ?? ""));
    }
    return table;
  }

  private renderConstraintReview(main: HTMLElement, view: SessionView): void {
    main.appendChild(this.candidateRow(view));
    main.appendChild(this.constraintPairs(view));
    main.appendChild(this.actionBar(view));
  }

  private renderDone(main: HTMLElement, view: SessionView): void {
    main.appendChild(el(this.doc, "p", "done-note", "Session complete."));
    main.appendChild(this.graphFigure(view));
    const list = el(this.doc, "ul", "final-constraints");
    for (const constraint of view.constraints) {
      list.appendChild(el(this.doc, "li", "constraint", constraint));
    }
    main.appendChild(list);
    const download = el(this.doc, "button", "export", "Download archive");
    download.addEventListener("click", () => this.queue(() => this.wizard.exportArchive()));
    main.appendChild(download);
  }
}

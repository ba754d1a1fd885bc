"""Built-in prompt templates, one per generation stage.

Each template takes the user's task info, retrieved in-context demonstrations
and prior-stage artifacts, and asks for exactly one artifact in the format the
next stage expects.  Refinement templates additionally take the validator's
rendered feedback.
"""

from __future__ import annotations

from .llm import PromptTemplate

_SYSTEM = (
    "You are an assistant that turns natural-language task descriptions into "
    "declarative knowledge declarations: a concept graph plus first-order-logic "
    "constraints. Answer with only the requested artifact, no commentary."
)

TEMPLATES: dict[str, PromptTemplate] = {
    template.id: template
    for template in [
        PromptTemplate(
            id="task_description",
            slots=("task_name", "domain", "dataset", "demos"),
            system=_SYSTEM,
            body=(
                "Examples:\n{{demos}}\n\n"
                "Task name: {{task_name}}\nDomain: {{domain}}\nDataset: {{dataset}}\n\n"
                "Write a clear one-paragraph description of this task, naming its "
                "inputs, outputs, and decision types."
            ),
        ),
        PromptTemplate(
            id="concept_list",
            slots=("task_name", "description", "demos"),
            system=_SYSTEM,
            body=(
                "Examples:\n{{demos}}\n\n"
                "Task: {{task_name}}\nDescription: {{description}}\n\n"
                "List the task's concepts, one per line, as "
                "'name | input' or 'name | decision | label1, label2, ...'. "
                "Enumerate every decision label explicitly; never abbreviate with 'etc.'."
            ),
        ),
        PromptTemplate(
            id="graph_draft",
            slots=("task_name", "description", "concepts", "demos"),
            system=_SYSTEM,
            body=(
                "Examples:\n{{demos}}\n\n"
                "Task: {{task_name}}\nDescription: {{description}}\n"
                "Concepts:\n{{concepts}}\n\n"
                "Write the concept graph as a single `graph <name> { ... }` program "
                "using concept / decision concept / is_a / contains / has_a statements."
            ),
        ),
        PromptTemplate(
            id="graph_refine",
            slots=("candidate", "feedback"),
            system=_SYSTEM,
            body=(
                "This graph program has problems:\n\n{{candidate}}\n\n"
                "Parser feedback:\n{{feedback}}\n\n"
                "Rewrite the full corrected program. Apply every fix; change nothing else."
            ),
        ),
        PromptTemplate(
            id="fol_draft",
            slots=("constraint_text", "graph_source", "predicates", "demos"),
            system=_SYSTEM,
            body=(
                "Examples:\n{{demos}}\n\n"
                "Concept graph:\n{{graph_source}}\n"
                "Available predicates: {{predicates}}\n\n"
                "Constraint (natural language): {{constraint_text}}\n\n"
                "Translate the constraint into one first-order-logic formula using only "
                "the available predicates, e.g. "
                "'forall x: pair(x) -> exactly_one(a(x), b(x))'."
            ),
        ),
        PromptTemplate(
            id="fol_refine",
            slots=("candidate", "feedback"),
            system=_SYSTEM,
            body=(
                "This first-order-logic formula has problems:\n\n{{candidate}}\n\n"
                "Compiler feedback:\n{{feedback}}\n\n"
                "Rewrite the corrected formula. Apply every fix; change nothing else."
            ),
        ),
    ]
}

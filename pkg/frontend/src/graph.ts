/** SVG rendering of the layout JSON the server exposes.
 *
 * Nodes sit on a circle (deterministic layout, no physics), edge kinds are
 * visually distinct (is_a dashed, contains solid, has_a bold with one
 * role-labeled line per role), and nodes named by a diagnostic can be
 * highlighted. */

import type { LayoutGraph, LayoutNode } from "./types.js";

const WIDTH = 640;
const HEIGHT = 480;
const NODE_W = 120;
const NODE_H = 40;

const KIND_FILL: Record<string, string> = {
  decision: "#fde2b8",
  input: "#d3e7f5",
};

const EDGE_STYLE: Record<string, string> = {
  is_a: 'stroke="#555" stroke-dasharray="6,4"',
  contains: 'stroke="#555"',
  has_a: 'stroke="#1a4d7c" stroke-width="2"',
};

export interface NodePosition {
  id: string;
  x: number;
  y: number;
}

/** Evenly spaced positions around an ellipse, in node order. */
export function circleLayout(nodes: readonly LayoutNode[]): NodePosition[] {
  const cx = WIDTH / 2;
  const cy = HEIGHT / 2;
  const rx = WIDTH / 2 - NODE_W;
  const ry = HEIGHT / 2 - NODE_H * 1.5;
  return nodes.map((node, i) => {
    const angle = (2 * Math.PI * i) / Math.max(nodes.length, 1) - Math.PI / 2;
    return {
      id: node.id,
      x: Math.round(cx + rx * Math.cos(angle)),
      y: Math.round(cy + ry * Math.sin(angle)),
    };
  });
}

function escapeXml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

function edgeLine(
  from: NodePosition,
  to: NodePosition,
  style: string,
  label: string,
): string {
  const midX = Math.round((from.x + to.x) / 2);
  const midY = Math.round((from.y + to.y) / 2);
  const line = `<line x1="${from.x}" y1="${from.y}" x2="${to.x}" y2="${to.y}" ${style} />`;
  const text = label
    ? `<text x="${midX}" y="${midY - 4}" class="edge-label" font-size="11" text-anchor="middle">${escapeXml(label)}</text>`
    : "";
  return line + text;
}

/** Render a layout to an SVG string; `highlight` marks nodes (by id) that a
 * diagnostic refers to.  A null/empty layout yields an empty-state message. */
export function renderGraphSvg(
  layout: LayoutGraph | null,
  highlight: ReadonlySet<string> = new Set(),
): string {
  if (!layout || layout.nodes.length === 0) {
    return (
      `<svg xmlns="http://www.w3.org/2000/svg" width="${WIDTH}" height="${HEIGHT}" role="img">` +
      `<text x="${WIDTH / 2}" y="${HEIGHT / 2}" text-anchor="middle" class="empty-state">` +
      `No graph yet — approve a draft to see it here.</text></svg>`
    );
  }
  const positions = new Map(circleLayout(layout.nodes).map((p) => [p.id, p]));
  const parts: string[] = [];

  for (const link of layout.links) {
    const from = positions.get(link.source);
    if (!from) continue;
    if (link.kind === "has_a") {
      for (const role of link.roles) {
        const to = positions.get(role.target);
        if (!to) continue;
        parts.push(edgeLine(from, to, `class="edge-has-a" ${EDGE_STYLE.has_a}`, role.role));
      }
    } else if (link.target) {
      const to = positions.get(link.target);
      if (!to) continue;
      parts.push(
        edgeLine(from, to, `class="edge-${link.kind.replace("_", "-")}" ${EDGE_STYLE[link.kind]}`, link.kind),
      );
    }
  }

  for (const node of layout.nodes) {
    const pos = positions.get(node.id)!;
    const fill = KIND_FILL[node.kind] ?? "#eeeeee";
    const stroke = highlight.has(node.id) ? 'stroke="#c0392b" stroke-width="3"' : 'stroke="#333"';
    const classes = ["node", `node-${node.kind}`];
    if (highlight.has(node.id)) classes.push("node-highlight");
    const label = node.labels.length ? `${node.label} {${node.labels.join(", ")}}` : node.label;
    const anchor = node.anchorId ? `<title>anchor: ${escapeXml(node.anchorId)}</title>` : "";
    parts.push(
      `<g class="${classes.join(" ")}" data-node-id="${escapeXml(node.id)}">` +
        `<rect x="${pos.x - NODE_W / 2}" y="${pos.y - NODE_H / 2}" width="${NODE_W}" height="${NODE_H}" rx="6" fill="${fill}" ${stroke} />` +
        `<text x="${pos.x}" y="${pos.y + 4}" text-anchor="middle" font-size="12">${escapeXml(label)}</text>` +
        anchor +
        `</g>`,
    );
  }

  return (
    `<svg xmlns="http://www.w3.org/2000/svg" width="${WIDTH}" height="${HEIGHT}" ` +
    `viewBox="0 0 ${WIDTH} ${HEIGHT}" role="img" aria-label="${escapeXml(layout.name)}">` +
    parts.join("") +
    `</svg>`
  );
}

/** Node ids mentioned in diagnostic messages, for highlight wiring. */
export function highlightedNodes(
  layout: LayoutGraph | null,
  messages: readonly string[],
): Set<string> {
  const hits = new Set<string>();
  if (!layout) return hits;
  for (const node of layout.nodes) {
    const needle = node.label.toLowerCase();
    if (messages.some((m) => m.toLowerCase().includes(needle))) hits.add(node.id);
  }
  return hits;
}

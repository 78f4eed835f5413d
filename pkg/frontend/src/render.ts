// SVG rendering of the network graph. One <g data-node> per service
// (nested services grouped under their parent), one <line data-edge>
// per link, dynamic edges labelled with their weight.

import { allNodes, NetworkViewModel, ServiceNode } from "./meta.js";

const SVG_NS = "http://www.w3.org/2000/svg";
const WIDTH = 720;
const HEIGHT = 480;
const NODE_RADIUS = 22;

const EDGE_COLORS: Record<string, string> = {
  permanent: "#444",
  association: "#888",
  dynamic: "#c0392b",
};

function svgEl(tag: string, attrs: Record<string, string>): SVGElement {
  const el = document.createElementNS(SVG_NS, tag);
  for (const [key, value] of Object.entries(attrs)) el.setAttribute(key, value);
  return el;
}

function layout(nodes: ServiceNode[]): Map<string, { x: number; y: number }> {
  // circle layout: stable, overlap-free, and good enough for desk-size nets
  const positions = new Map<string, { x: number; y: number }>();
  const count = Math.max(nodes.length, 1);
  nodes.forEach((node, index) => {
    const angle = (2 * Math.PI * index) / count - Math.PI / 2;
    positions.set(node.path, {
      x: WIDTH / 2 + (WIDTH / 2 - 60) * Math.cos(angle),
      y: HEIGHT / 2 + (HEIGHT / 2 - 50) * Math.sin(angle),
    });
  });
  return positions;
}

export function renderNetwork(container: HTMLElement, model: NetworkViewModel): void {
  const nodes = allNodes(model);
  const positions = layout(nodes);
  const svg = svgEl("svg", {
    viewBox: `0 0 ${WIDTH} ${HEIGHT}`,
    width: String(WIDTH),
    height: String(HEIGHT),
  });

  for (const link of model.links) {
    const from = positions.get(link.from);
    const to = positions.get(link.to);
    const edge = svgEl("g", { "data-edge": "", "data-kind": link.kind });
    if (from && to) {
      edge.appendChild(
        svgEl("line", {
          x1: String(from.x),
          y1: String(from.y),
          x2: String(to.x),
          y2: String(to.y),
          stroke: EDGE_COLORS[link.kind] ?? "#888",
          "stroke-dasharray": link.kind === "association" ? "4 3" : "",
        }),
      );
      if (link.kind === "dynamic") {
        const label = svgEl("text", {
          x: String((from.x + to.x) / 2),
          y: String((from.y + to.y) / 2 - 4),
          "data-weight": "",
          "font-size": "11",
          fill: EDGE_COLORS.dynamic,
        });
        label.textContent = link.weight.toFixed(2);
        edge.appendChild(label);
      }
    } else {
      // an endpoint outside this node (external id): still counted
      const note = svgEl("text", {
        x: "8",
        y: String(16 + 14 * svg.querySelectorAll("[data-external]").length),
        "data-external": "",
        "font-size": "10",
        fill: "#999",
      });
      note.textContent = `${link.kind}: ${link.from} -> ${link.to}`;
      edge.appendChild(note);
    }
    svg.appendChild(edge);
  }

  for (const node of nodes) {
    const pos = positions.get(node.path)!;
    const group = svgEl("g", {
      "data-node": "",
      "data-path": node.path,
      "data-kind": node.kind,
    });
    group.appendChild(
      svgEl("circle", {
        cx: String(pos.x),
        cy: String(pos.y),
        r: String(NODE_RADIUS - 3 * Math.min(node.depth, 3)),
        fill: node.depth ? "#dde7f5" : "#bcd2ee",
        stroke: "#345",
      }),
    );
    const label = svgEl("text", {
      x: String(pos.x),
      y: String(pos.y + NODE_RADIUS + 12),
      "text-anchor": "middle",
      "font-size": "12",
    });
    label.textContent = `${node.id} (${node.kind})`;
    group.appendChild(label);
    svg.appendChild(group);
  }

  container.replaceChildren(svg);
}

/** Show the banner without touching the current graph. */
export function showError(banner: HTMLElement, message: string): void {
  banner.textContent = message;
  banner.hidden = message === "";
}

// Parsing of the daemon's /meta document into a plain view model.
// The console renders exclusively from this model; it never sees
// service internals.

export interface ServiceNode {
  path: string;
  id: string;
  kind: string;
  depth: number;
  metadata: Record<string, string>;
  children: ServiceNode[];
}

export interface LinkEdge {
  kind: string;
  from: string;
  to: string;
  weight: number;
}

export interface NetworkViewModel {
  services: ServiceNode[];
  links: LinkEdge[];
  peers: string[];
}

export class MetaParseError extends Error {}

function parseService(el: Element, parentPath: string, depth: number): ServiceNode {
  const id = el.getAttribute("id");
  if (!id) throw new MetaParseError("service element without id");
  const path = parentPath ? `${parentPath}/${id}` : id;
  const metadata: Record<string, string> = {};
  for (const meta of el.children) {
    if (meta.tagName === "meta") {
      metadata[meta.getAttribute("key") ?? ""] = meta.textContent ?? "";
    }
  }
  const children: ServiceNode[] = [];
  for (const child of el.children) {
    if (child.tagName === "service") {
      children.push(parseService(child, path, depth + 1));
    }
  }
  return {
    path,
    id,
    kind: el.getAttribute("kind") ?? "service",
    depth,
    metadata,
    children,
  };
}

export function parseNetworkView(xml: string): NetworkViewModel {
  const doc = new DOMParser().parseFromString(xml, "application/xml");
  if (doc.querySelector("parsererror") || doc.documentElement.tagName !== "network") {
    throw new MetaParseError("not a network view document");
  }
  const services: ServiceNode[] = [];
  const servicesEl = doc.documentElement.querySelector(":scope > services");
  if (servicesEl) {
    for (const el of servicesEl.children) {
      if (el.tagName === "service") services.push(parseService(el, "", 0));
    }
  }
  const links: LinkEdge[] = [];
  for (const el of doc.querySelectorAll("network > links > link")) {
    const weight = Number(el.getAttribute("weight") ?? "1");
    if (!Number.isFinite(weight)) throw new MetaParseError("bad link weight");
    links.push({
      kind: el.getAttribute("kind") ?? "permanent",
      from: el.getAttribute("from") ?? "",
      to: el.getAttribute("to") ?? "",
      weight,
    });
  }
  const peers: string[] = [];
  for (const el of doc.querySelectorAll("network > peers > peer")) {
    const url = el.getAttribute("url");
    if (url) peers.push(url);
  }
  return { services, links, peers };
}

/** Every service, nested ones included, in document order. */
export function allNodes(model: NetworkViewModel): ServiceNode[] {
  const out: ServiceNode[] = [];
  const walk = (node: ServiceNode) => {
    out.push(node);
    node.children.forEach(walk);
  };
  model.services.forEach(walk);
  return out;
}
